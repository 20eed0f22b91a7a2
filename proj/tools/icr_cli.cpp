// Command-line driver: single queries, the three task drivers, the oracle,
// and random instance generation.

#include "icr/bab.hpp"
#include "icr/error.hpp"
#include "icr/oracle.hpp"
#include "icr/random_instances.hpp"
#include "icr/tasks.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

using nlohmann::json;
using namespace icr;

namespace {

// Bad input or configuration; exit status 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string network, config, pool_in, pool_out, stats_out;
  std::optional<double> timeout;
  bool trusted = false;
  std::uint64_t seed = 1;
  int relus = 8;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text << '\n')) throw UsageError("cannot write " + path);
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw UsageError(what + ": " + e.what());
  }
}

Vector vector_of(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) throw UsageError(std::string("config needs array '") + key + "'");
  const auto v = j.at(key).get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

template <class T>
T value_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

// Earlier queries whose conflicts may be reused, with their descriptors.
struct History {
  ConflictPool pool;
  std::vector<Ancestor> ancestors;

  QueryId next_id() const {
    QueryId next = pool.max_id() ? *pool.max_id() + 1 : 0;
    for (const Ancestor& a : ancestors) next = std::max(next, a.id + 1);
    return next;
  }
};

std::vector<Ancestor> parse_ancestors(const json& list, const std::shared_ptr<const Network>& net) {
  std::vector<Ancestor> out;
  for (const json& a : list) out.push_back({a.at("id").get<QueryId>(), load_query(a.at("query").dump(), net)});
  return out;
}

History load_history(const Options& o, const json& config, const std::shared_ptr<const Network>& net) {
  History h;
  if (!o.pool_in.empty()) {
    const std::string text = read_file(o.pool_in);
    h.pool = load_pool(text);
    if (text.find_first_not_of(" \t\r\n") != std::string::npos) {
      const json doc = parse_json(text, o.pool_in);
      if (doc.contains("issued")) h.ancestors = parse_ancestors(doc.at("issued"), net);
    }
  }
  if (config.contains("ancestors")) {
    auto extra = parse_ancestors(config.at("ancestors"), net);
    h.ancestors.insert(h.ancestors.end(), extra.begin(), extra.end());
  }
  return h;
}

// Pool document plus the descriptors of every query that owns clauses.
void save_history(const Options& o, const ICAState& ica, std::vector<Ancestor> ancestors,
                  const std::vector<IssuedQuery>& issued) {
  if (o.pool_out.empty()) return;
  for (const IssuedQuery& q : issued) ancestors.push_back({q.id, q.query});
  json doc = json::parse(save_pool(ica.pool()));
  json list = json::array();
  for (const Ancestor& a : ancestors) list.push_back({{"id", a.id}, {"query", json::parse(dump_query(a.query))}});
  doc["issued"] = std::move(list);
  write_file(o.pool_out, doc.dump());
}

void emit(const Options& o, const std::string& stats) {
  if (o.stats_out.empty())
    std::cout << stats << '\n';
  else
    write_file(o.stats_out, stats);
}

std::shared_ptr<const Network> network_of(const Options& o) {
  if (o.network.empty()) throw UsageError("--network is required");
  return std::make_shared<const Network>(load_network(read_file(o.network)));
}

json config_of(const Options& o) {
  if (o.config.empty()) throw UsageError("--config is required");
  return parse_json(read_file(o.config), o.config);
}

TaskOptions task_options(const Options& o, const json& config, const History& h) {
  TaskOptions t;
  t.incremental = value_or(config, "incremental", true);
  t.trusted_refinement = o.trusted;
  t.first_id = h.next_id();
  t.ancestors = h.ancestors;
  return t;
}

int run_verify(const Options& o) {
  const auto net = network_of(o);
  const json config = config_of(o);
  History h = load_history(o, config, net);
  VerificationQuery q = load_query(config.dump(), net);
  const QueryId id = config.contains("id") ? q.id : h.next_id();
  q.id = id;

  std::set<QueryId> inherit;
  for (const Ancestor& a : h.ancestors)
    if (o.trusted || check_refinement(q, a.query) == Refinement::Refines) inherit.insert(a.id);

  ICAState ica;
  ica.set_pool(std::move(h.pool));
  SolveConfig cfg;
  cfg.timeout_s = o.timeout.value_or(value_or(config, "timeout_s", 60.0));
  cfg.trusted_refinement = o.trusted;
  const SolveResult r = solve(q, id, inherit, ica, cfg);

  json stats = json::parse(stats_json(r));
  stats["id"] = id;
  stats["inherit"] = std::vector<QueryId>(inherit.begin(), inherit.end());
  emit(o, stats.dump());
  save_history(o, ica, h.ancestors, {{id, q, inherit, r.verdict}});
  return 0;
}

int run_radius(const Options& o) {
  const auto net = network_of(o);
  const json config = config_of(o);
  History h = load_history(o, config, net);
  RadiusTask t;
  t.network = net;
  t.x0 = vector_of(config, "x0");
  if (t.x0.size() != net->input_dim()) throw UsageError("x0 has the wrong dimension");
  t.target_class = value_or<Eigen::Index>(config, "target_class", argmax(evaluate(*net, t.x0)));
  t.eps_min = value_or(config, "eps_min", t.eps_min);
  t.eps_max = value_or(config, "eps_max", t.eps_max);
  t.delta = value_or(config, "delta", t.delta);
  t.budget_s = value_or(config, "budget_s", t.budget_s);
  t.query_timeout_s = o.timeout.value_or(value_or(config, "query_timeout_s", t.query_timeout_s));
  t.check_bracket = value_or(config, "check_bracket", true);

  ICAState ica;
  ica.set_pool(std::move(h.pool));
  const RadiusResult r = robustness_radius(t, ica, task_options(o, config, h));
  emit(o, radius_json(r));
  save_history(o, ica, h.ancestors, r.summary.issued);
  return 0;
}

int run_split(const Options& o) {
  const auto net = network_of(o);
  const json config = config_of(o);
  History h = load_history(o, config, net);
  if (!config.contains("query")) throw UsageError("split config needs 'query'");
  SplitTask t{load_query(config.at("query").dump(), net)};
  t.initial_timeout_s = value_or(config, "initial_timeout_s", t.initial_timeout_s);
  t.growth = value_or(config, "growth", t.growth);
  t.global_timeout_s = o.timeout.value_or(value_or(config, "global_timeout_s", t.global_timeout_s));

  ICAState ica;
  ica.set_pool(std::move(h.pool));
  const SplitResult r = input_split_verify(t, ica, task_options(o, config, h));
  emit(o, split_json(r));
  save_history(o, ica, h.ancestors, r.summary.issued);
  return 0;
}

int run_explain(const Options& o) {
  const auto net = network_of(o);
  const json config = config_of(o);
  History h = load_history(o, config, net);
  MsfsTask t;
  t.network = net;
  t.x0 = vector_of(config, "x0");
  t.domain = Box(vector_of(config, "domain_lower"), vector_of(config, "domain_upper"));
  t.query_timeout_s = o.timeout.value_or(value_or(config, "query_timeout_s", t.query_timeout_s));
  t.budget_s = value_or(config, "budget_s", t.budget_s);
  const std::string ordering = value_or<std::string>(config, "ordering", "sensitivity");
  if (ordering == "index")
    t.ordering = FeatureOrdering::Index;
  else if (ordering != "sensitivity")
    throw UsageError("ordering must be sensitivity or index");

  ICAState ica;
  ica.set_pool(std::move(h.pool));
  const MsfsResult r = msfs_extract(t, ica, task_options(o, config, h));
  emit(o, msfs_json(r));
  save_history(o, ica, h.ancestors, r.summary.issued);
  return 0;
}

int run_oracle(const Options& o) {
  const auto net = network_of(o);
  const VerificationQuery q = load_query(config_of(o).dump(), net);
  const OracleReport r = brute_force_verify(q);
  json out = {{"verdict", r.sat ? "sat" : "unsat"}, {"patterns", r.patterns}};
  if (r.sat) out["witness"] = std::vector<double>(r.witness.data(), r.witness.data() + r.witness.size());
  emit(o, out.dump());
  return 0;
}

int run_generate(const Options& o) {
  if (o.network.empty() || o.config.empty()) throw UsageError("generate writes --network and --config");
  std::mt19937_64 rng(o.seed);
  const auto net = random_small_network(rng, o.relus);
  const VerificationQuery q = random_box_query(rng, net);
  write_file(o.network, dump_network(*net));
  write_file(o.config, dump_query(q));
  return 0;
}

int exit_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Numerical:
    case ErrorKind::EmptyStack:
    case ErrorKind::Widening:
    case ErrorKind::CannotSplit:
      return 2;
    default:
      return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Incremental conflict reuse for ReLU network verification"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--network", o.network, "network JSON");
    sub->add_option("--config", o.config, "query or task config JSON");
    sub->add_option("--pool-in", o.pool_in, "conflict pool to start from");
    sub->add_option("--pool-out", o.pool_out, "where to write the updated pool");
    sub->add_option("--stats-out", o.stats_out, "stats JSON path (default stdout)");
    sub->add_option("--timeout", o.timeout, "seconds; per query, or overall for split")->check(CLI::PositiveNumber);
    sub->add_flag("--trusted-refinement", o.trusted, "inherit without refinement checks");
  };

  std::map<std::string, int (*)(const Options&)> commands = {
      {"verify", run_verify}, {"radius", run_radius},  {"split", run_split},
      {"explain", run_explain}, {"oracle", run_oracle}, {"generate", run_generate}};
  const std::map<std::string, std::string> help = {
      {"verify", "solve one query"},
      {"radius", "bracket the local robustness radius"},
      {"split", "input-split verification"},
      {"explain", "minimal sufficient feature set"},
      {"oracle", "brute-force phase enumeration"},
      {"generate", "write a random network and query"}};
  for (const auto& [name, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    add_common(sub);
    if (name == "generate") {
      sub->add_option("--seed", o.seed, "random seed");
      sub->add_option("--relus", o.relus, "maximum relu count")->check(CLI::Range(1, 20));
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    for (const auto& [name, fn] : commands)
      if (app.got_subcommand(name)) return fn(o);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_status(e.kind());
  } catch (const json::exception& e) {
    std::cerr << "error: malformed config: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

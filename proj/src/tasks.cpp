#include "icr/tasks.hpp"

#include "icr/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

namespace icr {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

// Issues queries with fresh ids, filters inheritance candidates through
// check_refinement, and accumulates the run summary.
class QueryIssuer {
 public:
  QueryIssuer(ICAState& ica, const TaskOptions& options, TaskSummary& summary, double budget_s)
      : ica_(ica), options_(options), summary_(summary), next_id_(options.first_id), start_(Clock::now()),
        budget_s_(budget_s) {}

  double elapsed() const { return seconds_since(start_); }
  double remaining() const { return budget_s_ - elapsed(); }
  bool exhausted() const { return remaining() <= 0.0; }

  SolveResult run(const VerificationQuery& q, const std::vector<QueryId>& chain, double timeout_s) {
    const QueryId id = next_id_++;
    std::set<QueryId> inherit;
    if (options_.incremental) {
      for (QueryId cand : chain) {
        const Refinement r = check_refinement(q, issued_.at(cand));
        log(r);
        if (r == Refinement::Refines || options_.trusted_refinement) inherit.insert(cand);
      }
      for (const Ancestor& a : options_.ancestors) {
        const Refinement r = check_refinement(q, a.query);
        log(r);
        if (r == Refinement::Refines) inherit.insert(a.id);
      }
    }
    SolveConfig cfg;
    cfg.timeout_s = std::max(timeout_s, 0.0);
    cfg.trusted_refinement = options_.trusted_refinement;
    SolveResult res = solve(q, id, inherit, ica_, cfg);
    summary_.stats += res.stats;
    VerificationQuery stored = q;
    stored.id = id;
    summary_.issued.push_back({id, stored, inherit, res.verdict});
    issued_.emplace(id, std::move(stored));
    last_id_ = id;
    return res;
  }

  QueryId last_id() const { return last_id_; }

 private:
  void log(Refinement r) {
    switch (r) {
      case Refinement::Refines: ++summary_.refinement.refines; break;
      case Refinement::NotRefines: ++summary_.refinement.not_refines; break;
      case Refinement::Unknown: ++summary_.refinement.unknown; break;
    }
  }

  ICAState& ica_;
  const TaskOptions& options_;
  TaskSummary& summary_;
  QueryId next_id_;
  QueryId last_id_ = 0;
  std::map<QueryId, VerificationQuery> issued_;
  Clock::time_point start_;
  double budget_s_;
};

// Ids of the per-class queries issued by one call of a class-family verify.
using ClassIds = std::map<Eigen::Index, QueryId>;

struct FamilyOutcome {
  Verdict verdict = Verdict::Unsat;
  Vector witness;
  ClassIds ids;
};

// Misclassification over `box`: one conjunctive query per competing class.
// SAT as soon as one class query is SAT. With `stop_on_timeout`, a timeout
// ends the scan as well.
FamilyOutcome verify_family(QueryIssuer& issuer, const std::shared_ptr<const Network>& net, const Box& box,
                            Eigen::Index target, const std::vector<const ClassIds*>& chain, double timeout_s,
                            bool stop_on_timeout) {
  FamilyOutcome out;
  bool timed_out = false;
  for (Eigen::Index j = 0; j < net->output_dim(); ++j) {
    if (j == target) continue;
    VerificationQuery q{net, box, {misclassification_constraint(net->output_dim(), target, j)}, 0};
    std::vector<QueryId> candidates;
    for (const ClassIds* call : chain) {
      const auto it = call->find(j);
      if (it != call->end()) candidates.push_back(it->second);
    }
    const SolveResult res = issuer.run(q, candidates, std::min(timeout_s, issuer.remaining()));
    out.ids[j] = issuer.last_id();
    if (res.verdict == Verdict::Sat) {
      out.verdict = Verdict::Sat;
      out.witness = res.witness;
      return out;
    }
    if (res.verdict == Verdict::Timeout) {
      timed_out = true;
      if (stop_on_timeout) break;
    }
  }
  out.verdict = timed_out ? Verdict::Timeout : Verdict::Unsat;
  return out;
}

void check_target(const Network& net, const Vector& x0, Eigen::Index target) {
  if (x0.size() != net.input_dim()) throw Error(ErrorKind::DimensionMismatch, "x0 vs network input");
  const Vector y = evaluate(net, x0);
  if (!has_unique_argmax(y)) throw Error(ErrorKind::InvalidArgument, "prediction at x0 is not unique");
  if (target >= 0 && argmax(y) != target)
    throw Error(ErrorKind::InvalidArgument, "target class " + std::to_string(target) + " is not the prediction at x0");
}

}  // namespace

LinearConstraint misclassification_constraint(Eigen::Index outputs, Eigen::Index target, Eigen::Index competitor) {
  Vector coeffs = Vector::Zero(outputs);
  coeffs(competitor) = 1.0;
  coeffs(target) = -1.0;
  return {std::move(coeffs), Relation::GE, 0.0};
}

// ---------------------------------------------------------------- radius

RadiusResult robustness_radius(const RadiusTask& task, ICAState& ica, const TaskOptions& options) {
  const Network& net = *task.network;
  check_target(net, task.x0, task.target_class);
  if (!(task.eps_min < task.eps_max) || task.eps_min < 0.0)
    throw Error(ErrorKind::InvalidArgument, "need 0 <= eps_min < eps_max");
  if (!(task.delta > 0.0)) throw Error(ErrorKind::InvalidArgument, "delta must be positive");

  RadiusResult result;
  QueryIssuer issuer(ica, options, result.summary, task.budget_s);

  struct Call {
    double eps;
    ClassIds ids;
  };
  std::vector<Call> calls;
  auto verify = [&](double eps) {
    const Box box(task.x0.array() - eps, task.x0.array() + eps);
    std::vector<const ClassIds*> chain;
    for (const Call& c : calls)
      if (c.eps > eps) chain.push_back(&c.ids);
    FamilyOutcome out =
        verify_family(issuer, task.network, box, task.target_class, chain, task.query_timeout_s, false);
    calls.push_back({eps, out.ids});
    ++result.verify_calls;
    return out;
  };

  if (task.check_bracket) {
    if (verify(task.eps_max).verdict != Verdict::Sat)
      throw Error(ErrorKind::InvalidBracket, "no misclassification found at eps_max");
    if (verify(task.eps_min).verdict != Verdict::Unsat)
      throw Error(ErrorKind::InvalidBracket, "robustness not certified at eps_min");
  }

  double lower = task.eps_min;
  double upper = task.eps_max;
  double step = 0.5;
  bool down = true;
  while (upper - lower > task.delta && !issuer.exhausted()) {
    const double width = upper - lower;
    const double eps = down ? upper - step * width : lower + step * width;
    const FamilyOutcome out = verify(eps);
    switch (out.verdict) {
      case Verdict::Unsat:
        lower = eps;
        step = 0.5;
        down = true;
        break;
      case Verdict::Sat: {
        // The counterexample can be closer to x0 than eps.
        const double dist = (out.witness - task.x0).cwiseAbs().maxCoeff();
        upper = std::max(lower, std::min(upper, dist));
        step = 0.5;
        down = true;
        break;
      }
      case Verdict::Timeout:
        if (down) {
          step /= 2.0;
          down = false;
        } else {
          down = true;
        }
        break;
    }
  }
  result.eps_lower = lower;
  result.eps_upper = upper;
  result.completed = upper - lower <= task.delta;
  return result;
}

// ---------------------------------------------------------- input split

double split_timeout(double initial, double growth, int depth) { return initial * std::pow(growth, depth); }

namespace {

class InputSplitter {
 public:
  InputSplitter(const SplitTask& task, ICAState& ica, const TaskOptions& options, SplitResult& result)
      : task_(task), result_(result), issuer_(ica, options, result.summary, task.global_timeout_s),
        stack_(task.base) {}

  Verdict search(double timeout_s, const std::vector<QueryId>& inherit) {
    if (issuer_.exhausted()) return Verdict::Timeout;
    const VerificationQuery& q = stack_.active();
    const SolveResult res = issuer_.run(q, inherit, std::min(timeout_s, issuer_.remaining()));
    const QueryId id = issuer_.last_id();
    ++result_.verify_calls;
    if (res.verdict == Verdict::Sat) {
      result_.result.witness = res.witness;
      return Verdict::Sat;
    }
    if (res.verdict == Verdict::Unsat) return Verdict::Unsat;
    if (issuer_.exhausted()) return Verdict::Timeout;

    const Box parent = q.input;
    Eigen::Index dim = 0;
    (parent.upper - parent.lower).maxCoeff(&dim);
    const double lo = parent.lower(dim);
    const double hi = parent.upper(dim);
    if (!(hi > lo)) throw Error(ErrorKind::CannotSplit, "zero-width box still times out");
    const double mid = 0.5 * (lo + hi);

    std::vector<QueryId> child_inherit = inherit;
    child_inherit.push_back(id);
    const double child_timeout = timeout_s * task_.growth;

    SplitEvent event{parent, parent, parent, dim};
    event.left.upper(dim) = mid;
    event.right.lower(dim) = mid;
    result_.splits.push_back(event);

    stack_.push_frame({{dim, lo, mid}});
    const Verdict left = search(child_timeout, child_inherit);
    stack_.pop_frame();
    if (left == Verdict::Sat) return Verdict::Sat;

    stack_.push_frame({{dim, mid, hi}});
    const Verdict right = search(child_timeout, child_inherit);
    stack_.pop_frame();
    if (right == Verdict::Sat) return Verdict::Sat;
    return left == Verdict::Unsat && right == Verdict::Unsat ? Verdict::Unsat : Verdict::Timeout;
  }

 private:
  const SplitTask& task_;
  SplitResult& result_;
  QueryIssuer issuer_;
  ConstraintStack stack_;
};

}  // namespace

SplitResult input_split_verify(const SplitTask& task, ICAState& ica, const TaskOptions& options) {
  task.base.validate();
  if (!(task.initial_timeout_s > 0.0)) throw Error(ErrorKind::InvalidArgument, "initial timeout must be positive");
  if (!(task.growth >= 1.0)) throw Error(ErrorKind::InvalidArgument, "timeout factor must be >= 1");
  SplitResult result;
  InputSplitter splitter(task, ica, options, result);
  result.result.verdict = splitter.search(task.initial_timeout_s, {});
  result.result.stats = result.summary.stats;
  if (result.result.verdict != Verdict::Sat) result.result.witness = Vector();
  return result;
}

// ----------------------------------------------------------------- msfs

Box freed_box(const Vector& x0, const Box& domain, const std::vector<Eigen::Index>& freed) {
  Box box(x0, x0);
  for (Eigen::Index i : freed) {
    box.lower(i) = domain.lower(i);
    box.upper(i) = domain.upper(i);
  }
  return box;
}

std::vector<Eigen::Index> feature_order(const Network& net, const Vector& x0, const Box& domain,
                                        FeatureOrdering ordering) {
  const Eigen::Index n = x0.size();
  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
  if (ordering == FeatureOrdering::Index) return order;

  const Eigen::Index target = argmax(evaluate(net, x0));
  std::vector<double> score(static_cast<size_t>(n), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    PhaseAssignment none(net);
    const BoundsState b = interval_forward(net, freed_box(x0, domain, {i}), none);
    const Vector width = b.output_upper() - b.output_lower();
    double s = 0.0;
    for (Eigen::Index j = 0; j < width.size(); ++j)
      if (j != target) s = std::max(s, width(target) + width(j));
    score[static_cast<size_t>(i)] = s;
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return score[static_cast<size_t>(a)] < score[static_cast<size_t>(b)]; });
  return order;
}

namespace {

class MsfsRunner {
 public:
  MsfsRunner(const MsfsTask& task, ICAState& ica, const TaskOptions& options, MsfsResult& result)
      : task_(task), result_(result), issuer_(ica, options, result.summary, task.budget_s),
        target_(argmax(evaluate(*task.network, task.x0))) {}

  void run(const std::vector<Eigen::Index>& universe) {
    result_.trace.emplace_back(0.0, 0);
    search(universe, {});
  }

 private:
  // Index into calls_ of one class-family verify.
  using CallId = size_t;

  std::pair<Verdict, CallId> verify(const std::vector<Eigen::Index>& extra, const std::vector<CallId>& inherit) {
    std::vector<Eigen::Index> freed = result_.freed;
    freed.insert(freed.end(), extra.begin(), extra.end());
    std::vector<const ClassIds*> chain;
    for (CallId c : inherit) chain.push_back(&calls_[c]);
    const FamilyOutcome out = verify_family(issuer_, task_.network, freed_box(task_.x0, task_.domain, freed),
                                            target_, chain, task_.query_timeout_s, true);
    calls_.push_back(out.ids);
    ++result_.verify_calls;
    return {out.verdict, calls_.size() - 1};
  }

  void free_features(const std::vector<Eigen::Index>& s) {
    result_.freed.insert(result_.freed.end(), s.begin(), s.end());
  }

  void fix_features(const std::vector<Eigen::Index>& s) {
    if (s.empty()) return;
    result_.fixed.insert(result_.fixed.end(), s.begin(), s.end());
    result_.trace.emplace_back(issuer_.elapsed(), result_.fixed.size());
  }

  void fix_unresolved(const std::vector<Eigen::Index>& s) {
    interrupted_ = true;
    fix_features(s);
  }

  void singleton(Eigen::Index feature, std::vector<Eigen::Index> freed_before, bool fixed) {
    result_.singletons.push_back({feature, std::move(freed_before), fixed});
  }

  // Verdicts other than UNSAT (SAT or TIMEOUT) mean the set cannot be freed.
  void search(const std::vector<Eigen::Index>& cand, const std::vector<CallId>& inherit) {
    if (cand.empty()) return;
    if (issuer_.exhausted()) return fix_unresolved(cand);

    if (cand.size() == 1) {
      const std::vector<Eigen::Index> before = result_.freed;
      const auto [verdict, call] = verify(cand, inherit);
      if (verdict == Verdict::Unsat) {
        free_features(cand);
      } else {
        fix_features(cand);
      }
      singleton(cand.front(), before, verdict != Verdict::Unsat);
      return;
    }

    const auto half = static_cast<std::ptrdiff_t>((cand.size() + 1) / 2);
    const std::vector<Eigen::Index> left(cand.begin(), cand.begin() + half);
    const std::vector<Eigen::Index> right(cand.begin() + half, cand.end());

    const std::vector<Eigen::Index> before_left = result_.freed;
    const auto [left_verdict, left_call] = verify(left, inherit);
    if (left_verdict == Verdict::Unsat) {
      free_features(left);
      if (issuer_.exhausted()) return fix_unresolved(right);
      const auto [right_verdict, right_call] = verify(right, inherit);
      if (right_verdict == Verdict::Unsat) {
        free_features(right);
      } else {
        std::vector<CallId> next = inherit;
        next.push_back(right_call);
        search(right, next);
      }
      return;
    }

    if (left.size() == 1) {
      fix_features(left);
      singleton(left.front(), before_left, true);
    } else {
      std::vector<CallId> next = inherit;
      next.push_back(left_call);
      search(left, next);
    }
    search(right, inherit);
  }

  const MsfsTask& task_;
  MsfsResult& result_;
  QueryIssuer issuer_;
  Eigen::Index target_;
  std::vector<ClassIds> calls_;
  bool interrupted_ = false;

 public:
  bool interrupted() const { return interrupted_; }
};

}  // namespace

MsfsResult msfs_extract(const MsfsTask& task, ICAState& ica, const TaskOptions& options) {
  const Network& net = *task.network;
  check_target(net, task.x0, -1);
  if (task.domain.dim() != net.input_dim()) throw Error(ErrorKind::DimensionMismatch, "domain vs network input");
  if (!task.domain.contains(task.x0)) throw Error(ErrorKind::InvalidArgument, "x0 lies outside the domain");

  MsfsResult result;
  MsfsRunner runner(task, ica, options, result);
  runner.run(feature_order(net, task.x0, task.domain, task.ordering));
  result.completed = !runner.interrupted();
  std::sort(result.fixed.begin(), result.fixed.end());
  std::sort(result.freed.begin(), result.freed.end());
  return result;
}

// ------------------------------------------------------------------ json

namespace {

using nlohmann::json;

json summary_json(const TaskSummary& s) {
  json issued = json::array();
  for (const IssuedQuery& q : s.issued)
    issued.push_back({{"id", q.id},
                      {"inherit", std::vector<QueryId>(q.inherit.begin(), q.inherit.end())},
                      {"verdict", to_string(q.verdict)},
                      {"query", json::parse(dump_query(q.query))}});
  return {{"queries", s.issued.size()},
          {"nodes", s.stats.nodes},
          {"numeric_prunes", s.stats.numeric_prunes},
          {"ica_prunes", s.stats.ica_prunes},
          {"ica_propagations", s.stats.ica_propagations},
          {"conflicts_recorded", s.stats.conflicts_recorded},
          {"inherited_clauses", s.stats.inherited_clauses},
          {"time_s", s.stats.time_s},
          {"refinement", {{"refines", s.refinement.refines},
                          {"not_refines", s.refinement.not_refines},
                          {"unknown", s.refinement.unknown}}},
          {"issued", std::move(issued)}};
}

}  // namespace

std::string radius_json(const RadiusResult& r) {
  json j = summary_json(r.summary);
  j["eps_lower"] = r.eps_lower;
  j["eps_upper"] = r.eps_upper;
  j["verify_calls"] = r.verify_calls;
  j["completed"] = r.completed;
  return j.dump();
}

std::string split_json(const SplitResult& r) {
  json j = json::parse(stats_json(r.result));
  json s = summary_json(r.summary);
  j["queries"] = s["queries"];
  j["refinement"] = s["refinement"];
  j["issued"] = s["issued"];
  j["verify_calls"] = r.verify_calls;
  j["splits"] = r.splits.size();
  return j.dump();
}

std::string msfs_json(const MsfsResult& r) {
  json j = summary_json(r.summary);
  j["fixed"] = r.fixed;
  j["freed"] = r.freed;
  j["explanation_size"] = r.fixed.size();
  j["verify_calls"] = r.verify_calls;
  j["completed"] = r.completed;
  json trace = json::array();
  for (const auto& [t, n] : r.trace) trace.push_back({t, n});
  j["trace"] = std::move(trace);
  return j.dump();
}

}  // namespace icr

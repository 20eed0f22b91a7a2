#include "icr/bab.hpp"

#include "icr/error.hpp"

#include <json.hpp>

#include <limits>

namespace icr {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Sat: return "sat";
    case Verdict::Unsat: return "unsat";
    case Verdict::Timeout: return "timeout";
  }
  return "timeout";
}

SolveStats& SolveStats::operator+=(const SolveStats& other) {
  nodes += other.nodes;
  numeric_prunes += other.numeric_prunes;
  ica_prunes += other.ica_prunes;
  ica_propagations += other.ica_propagations;
  conflicts_recorded += other.conflicts_recorded;
  inherited_clauses += other.inherited_clauses;
  time_s += other.time_s;
  return *this;
}

NeuronId choose_split(const BoundsState& bounds, const PhaseAssignment& assignment) {
  const Network& net = assignment.network();
  std::optional<NeuronId> best;
  double best_width = -std::numeric_limits<double>::infinity();
  for (int flat = 0; flat < net.relu_count(); ++flat) {
    if (assignment.phase(flat) != Phase::Undecided) continue;
    const NeuronId& id = net.relu_neuron(flat);
    const Interval pre = bounds.pre(id);
    if (!(pre.lower < 0.0 && pre.upper > 0.0)) continue;
    if (pre.width() > best_width) {
      best_width = pre.width();
      best = id;
    }
  }
  if (!best) throw Error(ErrorKind::InvalidArgument, "no undecided neuron straddles zero");
  return *best;
}

Clause extract_conflict(const PhaseAssignment& assignment) { return Clause(assignment.decisions()); }

SolveResult solve(const VerificationQuery& q, QueryId id, const std::set<QueryId>& inherit, ICAState& ica,
                  const SolveConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  q.validate();
  const auto start = Clock::now();
  const auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  SolveResult result;
  SolveStats& stats = result.stats;
  ica.begin_query(inherit);
  stats.inherited_clauses = static_cast<long>(ica.inherited_clauses());

  auto finish = [&](Verdict v) {
    result.verdict = v;
    stats.ica_prunes = ica.prunes();
    stats.ica_propagations = ica.propagations();
    stats.time_s = elapsed();
    return result;
  };

  std::vector<PhaseAssignment> stack{PhaseAssignment(*q.network)};
  while (!stack.empty()) {
    if (stats.nodes > 0) {
      if (elapsed() >= cfg.timeout_s) return finish(Verdict::Timeout);
      if (cfg.node_cap && stats.nodes >= *cfg.node_cap) return finish(Verdict::Timeout);
    }
    PhaseAssignment node = std::move(stack.back());
    stack.pop_back();
    ++stats.nodes;

    // Numeric propagation, then SAT reasoning over the active conflicts.
    // Phases implied by the conflicts feed another numeric round on the
    // same node before it is split.
    std::optional<PropagationOutcome> prop;
    bool pruned = false;
    for (;;) {
      prop = propagate(q, node, cfg.witness_points);
      if (prop->status == PropagationStatus::Sat) {
        result.witness = prop->witness;
        return finish(Verdict::Sat);
      }
      if (prop->status == PropagationStatus::Unsat) {
        ++stats.numeric_prunes;
        const Clause conflict = extract_conflict(node);
        const RecordOutcome rec = ica.record_conflict(id, conflict);
        if (rec.added) ++stats.conflicts_recorded;
        if (conflict.empty()) return finish(Verdict::Unsat);
        pruned = true;
        break;
      }
      node = prop->assignment;
      const long before = ica.propagations();
      if (ica.propagate(prop->bounds, node) == IcaStatus::Unsat) {
        pruned = true;
        break;
      }
      if (ica.propagations() == before) break;
    }
    if (pruned) continue;

    const NeuronId split = choose_split(prop->bounds, node);
    PhaseAssignment active = node;
    active.decide({split, true});
    node.decide({split, false});
    stack.push_back(std::move(active));
    stack.push_back(std::move(node));
  }
  return finish(Verdict::Unsat);
}

std::string stats_json(const SolveResult& result) {
  using nlohmann::json;
  const SolveStats& s = result.stats;
  json j = {{"verdict", to_string(result.verdict)},
            {"nodes", s.nodes},
            {"numeric_prunes", s.numeric_prunes},
            {"ica_prunes", s.ica_prunes},
            {"ica_propagations", s.ica_propagations},
            {"conflicts_recorded", s.conflicts_recorded},
            {"inherited_clauses", s.inherited_clauses},
            {"time_s", s.time_s}};
  if (result.verdict == Verdict::Sat) {
    json w = json::array();
    for (Eigen::Index i = 0; i < result.witness.size(); ++i) w.push_back(result.witness(i));
    j["witness"] = std::move(w);
  }
  return j.dump();
}

}  // namespace icr

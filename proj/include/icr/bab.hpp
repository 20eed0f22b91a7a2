#pragma once

#include "icr/ica.hpp"
#include "icr/propagation.hpp"
#include "icr/query.hpp"

#include <chrono>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace icr {

enum class SplitHeuristic { WidestStraddling };

struct SolveConfig {
  double timeout_s = 60.0;
  SplitHeuristic split = SplitHeuristic::WidestStraddling;
  std::vector<Vector> witness_points;
  bool trusted_refinement = false;
  std::optional<long> node_cap;
};

enum class Verdict { Sat, Unsat, Timeout };
const char* to_string(Verdict v);

struct SolveStats {
  long nodes = 0;
  long numeric_prunes = 0;
  long ica_prunes = 0;
  long ica_propagations = 0;
  long conflicts_recorded = 0;
  long inherited_clauses = 0;
  double time_s = 0.0;

  SolveStats& operator+=(const SolveStats& other);
};

struct SolveResult {
  Verdict verdict = Verdict::Timeout;
  Vector witness;  // set when Sat
  SolveStats stats;
};

/// Depth-first branch and bound with conflict recording into `ica` under
/// `id` and reuse of the conflicts recorded for the ids in `inherit`.
SolveResult solve(const VerificationQuery& q, QueryId id, const std::set<QueryId>& inherit, ICAState& ica,
                  const SolveConfig& cfg);

/// Undecided neuron with the widest pre-activation interval straddling zero;
/// ties go to the lowest (layer, neuron).
NeuronId choose_split(const BoundsState& bounds, const PhaseAssignment& assignment);

/// The decision literals of the trail. Implied phases are left out.
Clause extract_conflict(const PhaseAssignment& assignment);

std::string stats_json(const SolveResult& result);

}  // namespace icr

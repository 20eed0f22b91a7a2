#pragma once

#include "icr/query.hpp"

#include <optional>
#include <vector>

namespace icr {

/// Feasibility of { x in box : every constraint holds }.
struct LPProblem {
  Box bounds;
  std::vector<LinearConstraint> constraints;  // coeffs over the LP variables
};

struct LPResult {
  bool feasible = false;
  Vector witness;  // set when feasible
  long pivots = 0;
};

inline constexpr double kLpFeasibilityTol = 1e-7;
inline constexpr double kLpArtificialTol = 1e-9;
inline constexpr long kLpIterationCap = 100000;

/// Phase-1 dense simplex with Bland's rule. Throws Error(Numerical) when the
/// iteration cap is hit or a feasible basis fails its witness re-check.
LPResult lp_feasible(const LPProblem& problem);

}  // namespace icr

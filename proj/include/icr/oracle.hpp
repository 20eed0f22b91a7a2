#pragma once

#include "icr/query.hpp"
#include "icr/satcore.hpp"

#include <vector>

namespace icr {

inline constexpr int kOracleReluCap = 20;
inline constexpr int kOracleFeatureCap = 12;

struct OracleReport {
  bool sat = false;
  Vector witness;        // set when sat
  long patterns = 0;     // phase patterns (full or partial) handed to the LP
};

/// Exhaustive phase enumeration with one LP per pattern. Patterns are built
/// layer by layer and a prefix whose LP is already infeasible is not
/// extended. `forced` restricts the named neurons to one phase.
OracleReport brute_force_verify(const VerificationQuery& q, const std::vector<PhaseLiteral>& forced = {});

enum class Sufficiency { Sufficient, Insufficient };

/// Whether fixing the features in `fixed` to x0 keeps the prediction for
/// every input of the domain, checked per competing class by the oracle.
Sufficiency exhaustive_sufficiency(const std::shared_ptr<const Network>& net, const Vector& x0, const Box& domain,
                                   const std::vector<Eigen::Index>& fixed);

}  // namespace icr

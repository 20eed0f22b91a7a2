#pragma once

#include "icr/query.hpp"

#include <memory>
#include <random>
#include <vector>

namespace icr {

/// Fully connected network with `widths` = {inputs, hidden..., outputs};
/// hidden layers are relu, the last is linear. Entries uniform in [-1, 1].
std::shared_ptr<const Network> random_network(std::mt19937_64& rng, const std::vector<int>& widths);

/// 2-3 layers, 2-4 inputs, at most `max_relus` relus in total.
std::shared_ptr<const Network> random_small_network(std::mt19937_64& rng, int max_relus = 12);

/// Box around a random centre in [-1, 1]^n with one or two random output
/// constraints placed near the output at the centre so both verdicts occur.
VerificationQuery random_box_query(std::mt19937_64& rng, std::shared_ptr<const Network> net);

/// Same centre, every half-width scaled by `factor` (< 1 gives a refinement).
VerificationQuery shrink_query(const VerificationQuery& q, const Vector& factors);

}  // namespace icr

#pragma once

#include "icr/lp.hpp"
#include "icr/query.hpp"
#include "icr/satcore.hpp"

#include <cstdint>
#include <vector>

namespace icr {

inline constexpr double kEmptyIntervalTol = 1e-9;
inline constexpr double kConstraintTol = 1e-7;

enum class Phase : std::int8_t { Undecided, Active, Inactive };

/// Per-ReLU tri-state phase map, the decision trail, and the phases fixed
/// by propagation rather than by decision.
class PhaseAssignment {
 public:
  explicit PhaseAssignment(const Network& net);

  Phase phase(int flat) const { return phases_[static_cast<size_t>(flat)]; }
  Phase phase(const NeuronId& n) const { return phase(net_->relu_index(n)); }

  const std::vector<PhaseLiteral>& decisions() const { return decisions_; }
  const std::vector<PhaseLiteral>& implied() const { return implied_; }
  /// decisions followed by implied literals.
  std::vector<PhaseLiteral> fixed() const;

  /// Fixes an undecided neuron as a decision. Throws if it is already fixed.
  void decide(const PhaseLiteral& lit);
  /// Fixes a neuron as implied. Returns false when it contradicts an existing
  /// phase; a literal that is already fixed the same way is a no-op.
  bool imply(const PhaseLiteral& lit);

  bool complete() const { return undecided_ == 0; }
  int undecided() const { return undecided_; }
  const Network& network() const { return *net_; }

 private:
  const Network* net_;
  std::vector<Phase> phases_;
  std::vector<PhaseLiteral> decisions_;
  std::vector<PhaseLiteral> implied_;
  int undecided_ = 0;
};

struct Interval {
  double lower = 0.0;
  double upper = 0.0;

  double width() const { return upper - lower; }
  bool operator==(const Interval&) const = default;
};

/// Interval over-approximation of every neuron under a phase assignment.
struct BoundsState {
  Box input;
  std::vector<Vector> pre_lower, pre_upper;    // per layer
  std::vector<Vector> post_lower, post_upper;  // per layer
  bool empty = false;

  Interval pre(const NeuronId& n) const;
  Interval post(const NeuronId& n) const;
  const Vector& output_lower() const { return post_lower.back(); }
  const Vector& output_upper() const { return post_upper.back(); }
};

/// Forward interval pass. Undecided neurons whose pre-activation interval
/// lies on one side of zero are added to `assignment` as implied. Sets
/// `empty` when a fixed phase contradicts its interval.
BoundsState interval_forward(const Network& net, const Box& input, PhaseAssignment& assignment);

enum class PropagationStatus { Sat, Unsat, Unknown };
const char* to_string(PropagationStatus s);

struct PropagationOutcome {
  PropagationStatus status = PropagationStatus::Unknown;
  Vector witness;  // set when Sat
  BoundsState bounds;
  PhaseAssignment assignment;
  bool used_lp = false;
};

/// Numeric propagation at one search node: interval pass, output
/// certificates, witness candidates (box centre plus `witness_points`
/// clamped to the box), and the leaf LP once every phase is fixed.
PropagationOutcome propagate(const VerificationQuery& q, PhaseAssignment assignment,
                             const std::vector<Vector>& witness_points = {});

struct ApplyOutcome {
  bool contradiction = false;
  int applied = 0;
};

/// Fixes each literal as implied and tightens that neuron's intervals the
/// same way propagate treats a fixed phase.
ApplyOutcome apply_implied_literals(BoundsState& bounds, PhaseAssignment& assignment,
                                    const std::vector<PhaseLiteral>& literals);

/// Linear feasibility problem over the inputs for a complete assignment:
/// fixed phases become sign constraints on affine pre-activations.
LPProblem leaf_lp(const VerificationQuery& q, const PhaseAssignment& assignment);

}  // namespace icr

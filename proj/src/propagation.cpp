#include "icr/propagation.hpp"

#include "icr/error.hpp"

#include <algorithm>
#include <optional>

namespace icr {

PhaseAssignment::PhaseAssignment(const Network& net)
    : net_(&net), phases_(static_cast<size_t>(net.relu_count()), Phase::Undecided), undecided_(net.relu_count()) {}

std::vector<PhaseLiteral> PhaseAssignment::fixed() const {
  std::vector<PhaseLiteral> all = decisions_;
  all.insert(all.end(), implied_.begin(), implied_.end());
  return all;
}

void PhaseAssignment::decide(const PhaseLiteral& lit) {
  Phase& p = phases_[static_cast<size_t>(net_->relu_index(lit.neuron))];
  if (p != Phase::Undecided) throw Error(ErrorKind::InvalidArgument, "decision on an already fixed neuron");
  p = lit.active ? Phase::Active : Phase::Inactive;
  decisions_.push_back(lit);
  --undecided_;
}

bool PhaseAssignment::imply(const PhaseLiteral& lit) {
  Phase& p = phases_[static_cast<size_t>(net_->relu_index(lit.neuron))];
  const Phase wanted = lit.active ? Phase::Active : Phase::Inactive;
  if (p == wanted) return true;
  if (p != Phase::Undecided) return false;
  p = wanted;
  implied_.push_back(lit);
  --undecided_;
  return true;
}

Interval BoundsState::pre(const NeuronId& n) const {
  const auto l = static_cast<size_t>(n.layer);
  return {pre_lower[l](n.neuron), pre_upper[l](n.neuron)};
}

Interval BoundsState::post(const NeuronId& n) const {
  const auto l = static_cast<size_t>(n.layer);
  return {post_lower[l](n.neuron), post_upper[l](n.neuron)};
}

const char* to_string(PropagationStatus s) {
  switch (s) {
    case PropagationStatus::Sat: return "sat";
    case PropagationStatus::Unsat: return "unsat";
    case PropagationStatus::Unknown: return "unknown";
  }
  return "unknown";
}

namespace {

// Intersects [lo, hi] with a half-line; nullopt when empty beyond tolerance.
// A numerically inverted interval inside the tolerance is widened back.
std::optional<Interval> restrict_phase(Interval pre, Phase phase) {
  if (phase == Phase::Active)
    pre.lower = std::max(pre.lower, 0.0);
  else if (phase == Phase::Inactive)
    pre.upper = std::min(pre.upper, 0.0);
  if (pre.lower > pre.upper) {
    if (pre.lower - pre.upper > kEmptyIntervalTol) return std::nullopt;
    std::swap(pre.lower, pre.upper);
  }
  return pre;
}

Interval relu_post(const Interval& pre, Phase phase) {
  if (phase == Phase::Inactive) return {0.0, 0.0};
  return {std::max(pre.lower, 0.0), std::max(pre.upper, 0.0)};
}

}  // namespace

BoundsState interval_forward(const Network& net, const Box& input, PhaseAssignment& assignment) {
  BoundsState b;
  b.input = input;
  Vector lo = input.lower;
  Vector hi = input.upper;
  const auto& layers = net.layers();
  for (size_t li = 0; li < layers.size(); ++li) {
    const Layer& layer = layers[li];
    const Matrix pos = layer.weights.cwiseMax(0.0);
    const Matrix neg = layer.weights.cwiseMin(0.0);
    Vector pre_lo = pos * lo + neg * hi + layer.bias;
    Vector pre_hi = pos * hi + neg * lo + layer.bias;
    Vector post_lo = pre_lo;
    Vector post_hi = pre_hi;

    if (layer.activation == Activation::Relu && !b.empty) {
      const int offset = net.relu_offset(static_cast<int>(li));
      for (Eigen::Index j = 0; j < layer.out_dim(); ++j) {
        const NeuronId id{static_cast<int>(li), static_cast<int>(j)};
        Phase phase = assignment.phase(offset + static_cast<int>(j));
        if (phase == Phase::Undecided) {
          if (pre_lo(j) >= 0.0) {
            assignment.imply({id, true});
            phase = Phase::Active;
          } else if (pre_hi(j) <= 0.0) {
            assignment.imply({id, false});
            phase = Phase::Inactive;
          }
        }
        const auto restricted = restrict_phase({pre_lo(j), pre_hi(j)}, phase);
        if (!restricted) {
          b.empty = true;
          break;
        }
        pre_lo(j) = restricted->lower;
        pre_hi(j) = restricted->upper;
        const Interval post = relu_post(*restricted, phase);
        post_lo(j) = post.lower;
        post_hi(j) = post.upper;
      }
    }
    b.pre_lower.push_back(std::move(pre_lo));
    b.pre_upper.push_back(std::move(pre_hi));
    b.post_lower.push_back(post_lo);
    b.post_upper.push_back(post_hi);
    lo = std::move(post_lo);
    hi = std::move(post_hi);
  }
  return b;
}

LPProblem leaf_lp(const VerificationQuery& q, const PhaseAssignment& assignment) {
  const Network& net = *q.network;
  if (!assignment.complete()) throw Error(ErrorKind::InvalidArgument, "leaf LP needs every phase fixed");
  LPProblem lp;
  lp.bounds = q.input;
  const Eigen::Index d = net.input_dim();
  // value = A x + c for the current layer's post-activation.
  Matrix a = Matrix::Identity(d, d);
  Vector c = Vector::Zero(d);
  const auto& layers = net.layers();
  for (size_t li = 0; li < layers.size(); ++li) {
    const Layer& layer = layers[li];
    Matrix pre_a = layer.weights * a;
    Vector pre_c = layer.weights * c + layer.bias;
    if (layer.activation == Activation::Relu) {
      const int offset = net.relu_offset(static_cast<int>(li));
      for (Eigen::Index j = 0; j < layer.out_dim(); ++j) {
        const Phase phase = assignment.phase(offset + static_cast<int>(j));
        // pre = row · x + c  =>  row · x (>= | <=) -c
        lp.constraints.push_back({pre_a.row(j).transpose(), phase == Phase::Active ? Relation::GE : Relation::LE,
                                  -pre_c(j)});
        if (phase == Phase::Inactive) {
          pre_a.row(j).setZero();
          pre_c(j) = 0.0;
        }
      }
    }
    a = std::move(pre_a);
    c = std::move(pre_c);
  }
  for (const LinearConstraint& oc : q.output) {
    // coeffs · (A x + c) rel rhs
    lp.constraints.push_back({a.transpose() * oc.coeffs, oc.relation, oc.rhs - oc.coeffs.dot(c)});
  }
  return lp;
}

namespace {

bool certified_unsat(const LinearConstraint& c, const Vector& lo, const Vector& hi) {
  const Vector pos = c.coeffs.cwiseMax(0.0);
  const Vector neg = c.coeffs.cwiseMin(0.0);
  if (c.relation == Relation::LE) return pos.dot(lo) + neg.dot(hi) > c.rhs + kConstraintTol;
  return pos.dot(hi) + neg.dot(lo) < c.rhs - kConstraintTol;
}

bool satisfies_outputs(const VerificationQuery& q, const Vector& x) {
  const Vector y = evaluate(*q.network, x);
  return std::all_of(q.output.begin(), q.output.end(), [&](const LinearConstraint& c) { return c.holds(y); });
}

}  // namespace

PropagationOutcome propagate(const VerificationQuery& q, PhaseAssignment assignment,
                             const std::vector<Vector>& witness_points) {
  const Network& net = *q.network;
  if (q.input.dim() != net.input_dim()) throw Error(ErrorKind::DimensionMismatch, "query box vs network input");

  BoundsState bounds = interval_forward(net, q.input, assignment);
  PropagationOutcome out{PropagationStatus::Unknown, {}, std::move(bounds), std::move(assignment), false};
  if (out.bounds.empty) {
    out.status = PropagationStatus::Unsat;
    return out;
  }
  for (const LinearConstraint& c : q.output) {
    if (certified_unsat(c, out.bounds.output_lower(), out.bounds.output_upper())) {
      out.status = PropagationStatus::Unsat;
      return out;
    }
  }

  std::vector<Vector> candidates{q.input.center()};
  for (const Vector& p : witness_points) {
    if (p.size() != q.input.dim()) throw Error(ErrorKind::DimensionMismatch, "witness candidate");
    candidates.push_back(p.cwiseMax(q.input.lower).cwiseMin(q.input.upper));
  }
  for (const Vector& x : candidates) {
    if (satisfies_outputs(q, x)) {
      out.status = PropagationStatus::Sat;
      out.witness = x;
      return out;
    }
  }

  if (out.assignment.complete()) {
    out.used_lp = true;
    LPResult lp = lp_feasible(leaf_lp(q, out.assignment));
    if (!lp.feasible) {
      out.status = PropagationStatus::Unsat;
      return out;
    }
    if (!q.is_witness(lp.witness, kConstraintTol))
      throw Error(ErrorKind::Numerical, "leaf LP witness does not re-validate through the network");
    out.status = PropagationStatus::Sat;
    out.witness = std::move(lp.witness);
  }
  return out;
}

ApplyOutcome apply_implied_literals(BoundsState& bounds, PhaseAssignment& assignment,
                                    const std::vector<PhaseLiteral>& literals) {
  ApplyOutcome out;
  for (const PhaseLiteral& lit : literals) {
    const Phase before = assignment.phase(lit.neuron);
    if (!assignment.imply(lit)) {
      out.contradiction = true;
      return out;
    }
    if (before != Phase::Undecided) continue;
    ++out.applied;
    const auto l = static_cast<size_t>(lit.neuron.layer);
    const Eigen::Index j = lit.neuron.neuron;
    const Phase phase = lit.active ? Phase::Active : Phase::Inactive;
    const auto restricted = restrict_phase({bounds.pre_lower[l](j), bounds.pre_upper[l](j)}, phase);
    if (!restricted) {
      out.contradiction = true;
      bounds.empty = true;
      return out;
    }
    bounds.pre_lower[l](j) = restricted->lower;
    bounds.pre_upper[l](j) = restricted->upper;
    const Interval post = relu_post(*restricted, phase);
    bounds.post_lower[l](j) = post.lower;
    bounds.post_upper[l](j) = post.upper;
  }
  return out;
}

}  // namespace icr

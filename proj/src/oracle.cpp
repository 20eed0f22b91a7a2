#include "icr/oracle.hpp"

#include "icr/error.hpp"
#include "icr/lp.hpp"

#include <algorithm>

namespace icr {

namespace {

// Straight-line forward pass kept separate from model.cpp so that witness
// validation does not rely on a single implementation.
Vector recompute(const Network& net, const Vector& x) {
  std::vector<double> value(x.data(), x.data() + x.size());
  for (const Layer& layer : net.layers()) {
    std::vector<double> next(static_cast<size_t>(layer.out_dim()));
    for (Eigen::Index r = 0; r < layer.out_dim(); ++r) {
      double acc = layer.bias(r);
      for (Eigen::Index c = 0; c < layer.in_dim(); ++c) acc += layer.weights(r, c) * value[static_cast<size_t>(c)];
      next[static_cast<size_t>(r)] = layer.activation == Activation::Relu && acc < 0.0 ? 0.0 : acc;
    }
    value = std::move(next);
  }
  return Eigen::Map<Vector>(value.data(), static_cast<Eigen::Index>(value.size()));
}

bool validated(const VerificationQuery& q, const Vector& x) {
  constexpr double kTol = 1e-7;
  if (!q.input.contains(x, kTol)) return false;
  const Vector y1 = evaluate(*q.network, x);
  const Vector y2 = recompute(*q.network, x);
  if ((y1 - y2).cwiseAbs().maxCoeff() > 1e-9) throw Error(ErrorKind::Numerical, "forward passes disagree");
  return std::all_of(q.output.begin(), q.output.end(), [&](const LinearConstraint& c) { return c.holds(y2, kTol); });
}

class Enumerator {
 public:
  Enumerator(const VerificationQuery& q, const std::vector<PhaseLiteral>& forced) : q_(q), net_(*q.network) {
    forced_.assign(static_cast<size_t>(net_.relu_count()), -1);
    for (const PhaseLiteral& l : forced) {
      auto& slot = forced_[static_cast<size_t>(net_.relu_index(l.neuron))];
      const int want = l.active ? 1 : 0;
      if (slot >= 0 && slot != want) contradictory_ = true;
      slot = want;
    }
  }

  OracleReport run() {
    if (contradictory_) return report_;
    const Eigen::Index d = net_.input_dim();
    LPProblem lp{q_.input, {}};
    descend(0, Matrix::Identity(d, d), Vector::Zero(d), lp);
    return report_;
  }

 private:
  // Affine form (a x + c) of the post-activations entering layer `li`.
  bool descend(size_t li, const Matrix& a, const Vector& c, LPProblem& lp) {
    const auto& layers = net_.layers();
    if (li == layers.size()) return finish(a, c, lp);
    const Layer& layer = layers[li];
    const Matrix pre_a = layer.weights * a;
    const Vector pre_c = layer.weights * c + layer.bias;
    if (layer.activation == Activation::Linear) return descend(li + 1, pre_a, pre_c, lp);

    const auto width = static_cast<int>(layer.out_dim());
    const int offset = net_.relu_offset(static_cast<int>(li));
    const size_t base = lp.constraints.size();
    for (long pattern = 0; pattern < (1L << width); ++pattern) {
      bool allowed = true;
      for (int j = 0; j < width && allowed; ++j) {
        const int f = forced_[static_cast<size_t>(offset + j)];
        if (f >= 0 && f != static_cast<int>((pattern >> j) & 1)) allowed = false;
      }
      if (!allowed) continue;

      Matrix post_a = pre_a;
      Vector post_c = pre_c;
      lp.constraints.resize(base);
      for (int j = 0; j < width; ++j) {
        const bool active = (pattern >> j) & 1;
        lp.constraints.push_back(
            {pre_a.row(j).transpose(), active ? Relation::GE : Relation::LE, -pre_c(j)});
        if (!active) {
          post_a.row(j).setZero();
          post_c(j) = 0.0;
        }
      }
      ++report_.patterns;
      if (!lp_feasible(lp).feasible) continue;
      if (descend(li + 1, post_a, post_c, lp)) {
        lp.constraints.resize(base);
        return true;
      }
    }
    lp.constraints.resize(base);
    return false;
  }

  bool finish(const Matrix& a, const Vector& c, LPProblem& lp) {
    const size_t base = lp.constraints.size();
    for (const LinearConstraint& oc : q_.output)
      lp.constraints.push_back({a.transpose() * oc.coeffs, oc.relation, oc.rhs - oc.coeffs.dot(c)});
    ++report_.patterns;
    LPResult res = lp_feasible(lp);
    lp.constraints.resize(base);
    if (!res.feasible) return false;
    if (!validated(q_, res.witness)) throw Error(ErrorKind::Numerical, "oracle LP witness fails validation");
    report_.sat = true;
    report_.witness = std::move(res.witness);
    return true;
  }

  const VerificationQuery& q_;
  const Network& net_;
  std::vector<int> forced_;
  bool contradictory_ = false;
  OracleReport report_;
};

}  // namespace

OracleReport brute_force_verify(const VerificationQuery& q, const std::vector<PhaseLiteral>& forced) {
  q.validate();
  if (q.network->relu_count() > kOracleReluCap)
    throw Error(ErrorKind::CapExceeded, std::to_string(q.network->relu_count()) + " relus exceed the oracle cap");
  return Enumerator(q, forced).run();
}

Sufficiency exhaustive_sufficiency(const std::shared_ptr<const Network>& net, const Vector& x0, const Box& domain,
                                   const std::vector<Eigen::Index>& fixed) {
  if (x0.size() > kOracleFeatureCap) throw Error(ErrorKind::CapExceeded, "too many features for the oracle");
  const Eigen::Index target = argmax(recompute(*net, x0));
  Box box = domain;
  for (Eigen::Index i : fixed) {
    box.lower(i) = x0(i);
    box.upper(i) = x0(i);
  }
  for (Eigen::Index j = 0; j < net->output_dim(); ++j) {
    if (j == target) continue;
    Vector coeffs = Vector::Zero(net->output_dim());
    coeffs(j) = 1.0;
    coeffs(target) = -1.0;
    const VerificationQuery q{net, box, {{coeffs, Relation::GE, 0.0}}, 0};
    if (brute_force_verify(q).sat) return Sufficiency::Insufficient;
  }
  return Sufficiency::Sufficient;
}

}  // namespace icr

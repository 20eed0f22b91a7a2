#include "helpers.hpp"

#include "icr/oracle.hpp"
#include "icr/propagation.hpp"
#include "icr/random_instances.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace icr;
using namespace icr::test;

namespace {

// Phases an input actually induces (pre >= 0 is active).
std::vector<Vector> pre_activations(const Network& n, const Vector& x) {
  std::vector<Vector> pres;
  Vector v = x;
  for (const Layer& l : n.layers()) {
    Vector pre = l.weights * v + l.bias;
    pres.push_back(pre);
    v = l.activation == Activation::Relu ? Vector(pre.cwiseMax(0.0)) : pre;
  }
  return pres;
}

bool consistent(const Network& n, const std::vector<Vector>& pres, const PhaseAssignment& pa, double tol = 0.0) {
  for (int f = 0; f < n.relu_count(); ++f) {
    const NeuronId& id = n.relu_neuron(f);
    const double z = pres[static_cast<size_t>(id.layer)](id.neuron);
    if (pa.phase(f) == Phase::Active && z < -tol) return false;
    if (pa.phase(f) == Phase::Inactive && z > tol) return false;
  }
  return true;
}

Vector sample(std::mt19937_64& rng, const Box& box) {
  std::uniform_real_distribution<double> t(0.0, 1.0);
  Vector x(box.dim());
  for (Eigen::Index i = 0; i < box.dim(); ++i) x(i) = box.lower(i) + t(rng) * (box.upper(i) - box.lower(i));
  return x;
}

PhaseAssignment random_decisions(std::mt19937_64& rng, const Network& n, int count) {
  PhaseAssignment pa(n);
  std::bernoulli_distribution coin(0.5);
  std::vector<int> order(static_cast<size_t>(n.relu_count()));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (int k = 0; k < std::min(count, n.relu_count()); ++k)
    pa.decide({n.relu_neuron(order[static_cast<size_t>(k)]), coin(rng)});
  return pa;
}

}  // namespace

TEST_CASE("propagate examples on y = ReLU(x)") {
  const auto n = relu_identity();
  SUBCASE("interval certificate") {
    const VerificationQuery q{n, Box(vec({1}), vec({2})), {le({1}, 0.0)}, 0};
    CHECK(propagate(q, PhaseAssignment(*n)).status == PropagationStatus::Unsat);
  }
  SUBCASE("centre witness") {
    const VerificationQuery q{n, Box(vec({-1}), vec({1})), {ge({1}, -1.0)}, 0};
    const PropagationOutcome out = propagate(q, PhaseAssignment(*n));
    CHECK(out.status == PropagationStatus::Sat);
    CHECK(out.witness(0) == 0.0);
  }
  SUBCASE("active phase tightens the pre-activation") {
    const VerificationQuery q{n, Box(vec({-1}), vec({1})), {ge({1}, 0.5)}, 0};
    PhaseAssignment pa(*n);
    pa.decide({{0, 0}, true});
    const PropagationOutcome out = propagate(q, pa);
    CHECK(out.bounds.pre({0, 0}) == Interval{0.0, 1.0});
    CHECK(out.bounds.post({0, 0}) == Interval{0.0, 1.0});
    CHECK(out.status == PropagationStatus::Sat);
    CHECK(out.used_lp);
    CHECK(out.witness(0) >= 0.5 - 1e-7);
  }
  SUBCASE("implied phase") {
    const VerificationQuery q{n, Box(vec({0.5}), vec({2})), {ge({1}, 3.0)}, 0};
    const PropagationOutcome out = propagate(q, PhaseAssignment(*n));
    CHECK(out.status == PropagationStatus::Unsat);
    const VerificationQuery r{n, Box(vec({0.5}), vec({2})), {ge({1}, 1.5)}, 0};
    const PropagationOutcome o2 = propagate(r, PhaseAssignment(*n));
    REQUIRE(o2.assignment.implied().size() == 1);
    CHECK(o2.assignment.implied().front() == PhaseLiteral{{0, 0}, true});
  }
}

TEST_CASE("fully fixed phases with an empty region are UNSAT through the LP") {
  // Two relus r0 = ReLU(x0 + x1), r1 = ReLU(x0 - x1), output y = r0 + r1.
  const auto n = net({layer({{1, 1}, {1, -1}}, {0, 0}, Activation::Relu), layer({{1, 1}}, {0}, Activation::Linear)});
  // Both active means y = 2 x0; with x0 <= 0.25 the constraint y >= 0.6 fails
  // while the interval bound alone cannot rule it out.
  const VerificationQuery q{n, Box(vec({-1, -1}), vec({0.25, 1})), {ge({1}, 0.6)}, 0};
  PhaseAssignment pa(*n);
  pa.decide({{0, 0}, true});
  pa.decide({{0, 1}, true});
  const PropagationOutcome out = propagate(q, pa);
  CHECK(out.used_lp);
  CHECK(out.status == PropagationStatus::Unsat);
  CHECK_FALSE(brute_force_verify(q, pa.decisions()).sat);
}

TEST_CASE("apply_implied_literals") {
  const auto n = relu_identity();
  PhaseAssignment pa(*n);
  const BoundsState base = interval_forward(*n, Box(vec({-1}), vec({1})), pa);

  SUBCASE("active") {
    BoundsState b = base;
    PhaseAssignment p = pa;
    const ApplyOutcome out = apply_implied_literals(b, p, {{{0, 0}, true}});
    CHECK_FALSE(out.contradiction);
    CHECK(out.applied == 1);
    CHECK(b.pre({0, 0}) == Interval{0, 1});
    CHECK(b.post({0, 0}) == Interval{0, 1});
    CHECK(p.implied().size() == 1);
  }
  SUBCASE("inactive") {
    BoundsState b = base;
    PhaseAssignment p = pa;
    apply_implied_literals(b, p, {{{0, 0}, false}});
    CHECK(b.pre({0, 0}) == Interval{-1, 0});
    CHECK(b.post({0, 0}) == Interval{0, 0});
  }
  SUBCASE("contradiction") {
    PhaseAssignment p(*n);
    BoundsState b = interval_forward(*n, Box(vec({-2}), vec({-1})), p);
    PhaseAssignment fresh(*n);
    b = base;
    b.pre_lower[0](0) = -2;
    b.pre_upper[0](0) = -1;
    CHECK(apply_implied_literals(b, fresh, {{{0, 0}, true}}).contradiction);
    // Against an already fixed opposite phase as well.
    CHECK(apply_implied_literals(b, p, {{{0, 0}, true}}).contradiction);
  }
}

TEST_CASE("propagation soundness on random instances") {
  std::mt19937_64 rng(17);
  int unsat_checked = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const auto n = random_small_network(rng, 8);
    const VerificationQuery q = random_box_query(rng, n);
    const PhaseAssignment decisions = random_decisions(rng, *n, trial % 4);
    const PropagationOutcome out = propagate(q, decisions);

    // Intervals contain every sampled point consistent with the decisions;
    // implied phases hold at those points.
    int seen = 0;
    for (int s = 0; s < 200 && seen < 7; ++s) {
      const Vector x = sample(rng, q.input);
      const auto pres = pre_activations(*n, x);
      if (!consistent(*n, pres, decisions)) continue;
      ++seen;
      if (out.bounds.empty) continue;
      Vector v = x;
      for (size_t l = 0; l < n->layers().size(); ++l) {
        const Vector& pre = pres[l];
        const Vector post = n->layers()[l].activation == Activation::Relu ? Vector(pre.cwiseMax(0.0)) : pre;
        for (Eigen::Index j = 0; j < pre.size(); ++j) {
          CHECK(pre(j) >= out.bounds.pre_lower[l](j) - 1e-9);
          CHECK(pre(j) <= out.bounds.pre_upper[l](j) + 1e-9);
          CHECK(post(j) >= out.bounds.post_lower[l](j) - 1e-9);
          CHECK(post(j) <= out.bounds.post_upper[l](j) + 1e-9);
        }
      }
      CHECK(consistent(*n, pres, out.assignment, 1e-7));
    }

    if (out.status == PropagationStatus::Unsat) {
      ++unsat_checked;
      CHECK_FALSE(brute_force_verify(q, decisions.decisions()).sat);
    }
    if (out.status == PropagationStatus::Sat) CHECK(q.is_witness(out.witness));
    if (out.assignment.complete()) CHECK(out.status != PropagationStatus::Unknown);
  }
  CHECK(unsat_checked > 10);
}

TEST_CASE("complete assignments never leave propagation undecided") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 60; ++trial) {
    const auto n = random_small_network(rng, 6);
    const VerificationQuery q = random_box_query(rng, n);
    const PhaseAssignment pa = random_decisions(rng, *n, n->relu_count());
    const PropagationOutcome out = propagate(q, pa);
    CHECK(out.status != PropagationStatus::Unknown);
    CHECK((out.status == PropagationStatus::Sat) == brute_force_verify(q, pa.decisions()).sat);
  }
}

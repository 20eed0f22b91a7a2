#include "helpers.hpp"

#include "icr/error.hpp"
#include "icr/random_instances.hpp"

#include <doctest.h>

#include <random>

using namespace icr;
using namespace icr::test;

namespace {

VerificationQuery cube_query(std::shared_ptr<const Network> n, double half) {
  const Eigen::Index d = n->input_dim();
  return {n, Box(Vector::Constant(d, -half), Vector::Constant(d, half)), {le({1}, 0.0)}, 0};
}

}  // namespace

TEST_CASE("check_refinement examples") {
  const auto n = net({layer({{1, 1}}, {0}, Activation::Linear)});
  const VerificationQuery q1 = cube_query(n, 0.5);

  CHECK(check_refinement(q1, q1) == Refinement::Refines);
  CHECK(check_refinement(cube_query(n, 0.1), q1) == Refinement::Refines);

  const auto m = net({layer({{1}}, {0}, Activation::Linear)});
  VerificationQuery a{m, Box(vec({0}), vec({1})), {le({1}, 0.0)}, 0};
  VerificationQuery b{m, Box(vec({2}), vec({3})), {le({1}, 0.0)}, 0};
  CHECK(check_refinement(b, a) == Refinement::NotRefines);

  SUBCASE("outputs not a syntactic superset") {
    VerificationQuery c = cube_query(n, 0.1);
    c.output = {le({1}, 0.5)};
    CHECK(check_refinement(c, q1) == Refinement::Unknown);
    c.output.push_back(le({1}, 0.0));
    CHECK(check_refinement(c, q1) == Refinement::Refines);
  }
  SUBCASE("different networks") {
    const auto other = net({layer({{1, 1}}, {0}, Activation::Linear)});
    CHECK_THROWS_AS(check_refinement(cube_query(other, 0.1), q1), Error);
  }
}

TEST_CASE("refinement is transitive and never admits an escaping point") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> f(0.3, 1.2);
  std::uniform_real_distribution<double> t(0.0, 1.0);
  const auto n = random_network(rng, {3, 4, 2});
  for (int trial = 0; trial < 300; ++trial) {
    const VerificationQuery q1 = random_box_query(rng, n);
    const VerificationQuery q2 = shrink_query(q1, Vector::NullaryExpr(3, [&] { return f(rng); }));
    VerificationQuery q3 = shrink_query(q2, Vector::NullaryExpr(3, [&] { return f(rng); }));
    // Occasionally shift q3 so containment can fail.
    if (trial % 3 == 0) {
      const double shift = 0.3 * t(rng);
      q3.input.lower.array() += shift;
      q3.input.upper.array() += shift;
    }
    if (check_refinement(q3, q2) == Refinement::Refines && check_refinement(q2, q1) == Refinement::Refines)
      CHECK(check_refinement(q3, q1) == Refinement::Refines);

    if (check_refinement(q3, q1) == Refinement::Refines) {
      for (int s = 0; s < 20; ++s) {
        Vector x(3);
        for (int i = 0; i < 3; ++i) x(i) = q3.input.lower(i) + t(rng) * (q3.input.upper(i) - q3.input.lower(i));
        CHECK(q1.input.contains(x, 1e-9));
      }
    }
  }
}

TEST_CASE("constraint stack push and pop") {
  const auto n = net({layer({{1, 1}}, {0}, Activation::Linear)});
  const VerificationQuery base{n, Box(vec({0, 0}), vec({1, 1})), {le({1}, 3.0)}, 4};
  ConstraintStack stack(base);

  SUBCASE("empty frame") {
    stack.push_frame({});
    CHECK(stack.active().input == base.input);
    CHECK(stack.active().output == base.output);
  }
  SUBCASE("tightening is visible and pop restores") {
    stack.push_frame({{0, 0.2, 0.6}});
    CHECK(stack.active().input.lower(0) == 0.2);
    CHECK(stack.active().input.upper(0) == 0.6);
    stack.pop_frame();
    CHECK(stack.active().input == base.input);
    CHECK(stack.active().output == base.output);
    CHECK(stack.active().network == base.network);
  }
  SUBCASE("two pushes one pop") {
    stack.push_frame({{0, 0.2, 0.6}});
    stack.push_frame({{1, 0.5, 0.5}}, {ge({1}, 0.0)});
    CHECK(stack.active().output.size() == 2);
    stack.pop_frame();
    CHECK(stack.active().input.lower(0) == 0.2);
    CHECK(stack.active().input.upper(1) == 1.0);
    CHECK(stack.active().output.size() == 1);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(stack.pop_frame(), Error);
    try {
      stack.push_frame({{0, -0.5, 0.5}});
      FAIL("expected a widening error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Widening);
    }
    CHECK(stack.depth() == 0);
  }
}

TEST_CASE("k pushes followed by k pops restore the base query") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> t(0.0, 1.0);
  const auto n = random_network(rng, {3, 3, 2});
  for (int trial = 0; trial < 50; ++trial) {
    const VerificationQuery base = random_box_query(rng, n);
    ConstraintStack stack(base);
    const int k = 1 + trial % 5;
    for (int i = 0; i < k; ++i) {
      const Box& cur = stack.active().input;
      const Eigen::Index d = i % 3;
      const double lo = cur.lower(d) + 0.25 * t(rng) * (cur.upper(d) - cur.lower(d));
      const double hi = cur.upper(d) - 0.25 * t(rng) * (cur.upper(d) - cur.lower(d));
      stack.push_frame({{d, lo, hi}}, {random_box_query(rng, n).output.front()});
    }
    for (int i = 0; i < k; ++i) stack.pop_frame();
    CHECK(stack.active().input == base.input);
    CHECK(stack.active().output == base.output);
  }
}

TEST_CASE("query json") {
  const auto n = net({layer({{1, 1}}, {0}, Activation::Linear)});
  const VerificationQuery q{n, Box(vec({0, -1}), vec({1, 1})), {le({2}, 3.0), ge({-1}, 0.5)}, 0};
  const VerificationQuery back = load_query(dump_query(q), n);
  CHECK(back.input == q.input);
  CHECK(back.output == q.output);
  CHECK_THROWS_AS(load_query(R"({"input_lower":[0],"input_upper":[1]})", n), Error);
  CHECK_THROWS_AS(load_query(R"({"input_lower":[0,0],"input_upper":[1,1],"output_constraints":[{"coeffs":[1],"relation":"<","rhs":0}]})", n), Error);
}

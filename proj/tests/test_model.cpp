#include "helpers.hpp"

#include "icr/error.hpp"
#include "icr/random_instances.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace icr;
using namespace icr::test;

namespace {

// Straight-line forward pass written without Eigen expressions.
std::vector<double> forward_by_hand(const Network& n, std::vector<double> x) {
  for (const Layer& l : n.layers()) {
    std::vector<double> out;
    for (Eigen::Index r = 0; r < l.out_dim(); ++r) {
      double s = l.bias(r);
      for (Eigen::Index c = 0; c < l.in_dim(); ++c) s += l.weights(r, c) * x[static_cast<size_t>(c)];
      if (l.activation == Activation::Relu) s = s > 0 ? s : 0;
      out.push_back(s);
    }
    x = out;
  }
  return x;
}

}  // namespace

TEST_CASE("load_network parses the identity network") {
  const Network n = load_network(R"({"layers":[{"weights":[[1]],"bias":[0],"activation":"linear"}]})");
  CHECK(n.layers().size() == 1);
  CHECK(n.relu_count() == 0);
}

TEST_CASE("load_network counts relus of a 2-3-1 network") {
  const Network n = load_network(R"({"layers":[
    {"weights":[[1,0],[0,1],[1,1]],"bias":[0,0,0],"activation":"relu"},
    {"weights":[[1,1,1]],"bias":[0],"activation":"linear"}]})");
  CHECK(n.relu_count() == 3);
  CHECK(n.input_dim() == 2);
  CHECK(n.output_dim() == 1);
}

TEST_CASE("load_network rejects bad documents") {
  SUBCASE("dimension mismatch") {
    try {
      load_network(R"({"layers":[
        {"weights":[[1,0],[0,1],[1,1]],"bias":[0,0,0],"activation":"relu"},
        {"weights":[[1,1,1,1]],"bias":[0],"activation":"linear"}]})");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::DimensionMismatch);
    }
  }
  SUBCASE("malformed json") {
    CHECK_THROWS_AS(load_network("{\"layers\": ["), Error);
  }
  SUBCASE("unknown activation") {
    CHECK_THROWS_AS(load_network(R"({"layers":[{"weights":[[1]],"bias":[0],"activation":"tanh"}]})"), Error);
  }
  SUBCASE("bias length") {
    CHECK_THROWS_AS(load_network(R"({"layers":[{"weights":[[1]],"bias":[0,1],"activation":"linear"}]})"), Error);
  }
  SUBCASE("non-finite entry") {
    Layer l = layer({{1}}, {0}, Activation::Linear);
    l.weights(0, 0) = std::numeric_limits<double>::quiet_NaN();
    try {
      Network bad({l});
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NonFinite);
    }
  }
}

TEST_CASE("evaluate") {
  const auto identity = net({layer({{1}}, {0}, Activation::Linear)});
  CHECK(evaluate(*identity, vec({3}))(0) == 3.0);
  CHECK(evaluate(*relu_identity(), vec({-2}))(0) == 0.0);
  CHECK_THROWS_AS(evaluate(*identity, vec({1, 2})), Error);
}

TEST_CASE("evaluate matches a hand-written forward pass on random 2-2-2 networks") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = random_network(rng, {2, 2, 2});
    const Vector x = vec({u(rng), u(rng)});
    const Vector y = evaluate(*n, x);
    const auto expected = forward_by_hand(*n, {x(0), x(1)});
    for (int i = 0; i < 2; ++i) CHECK(std::abs(y(i) - expected[static_cast<size_t>(i)]) <= 1e-12);
  }
}

TEST_CASE("relu_neurons enumerates lexicographically") {
  CHECK(relu_neurons(*net({layer({{1}}, {0}, Activation::Linear)})).empty());

  const auto one = net({layer({{1}, {2}, {3}}, {0, 0, 0}, Activation::Relu), layer({{1, 1, 1}}, {0}, Activation::Linear)});
  CHECK(relu_neurons(*one) == std::vector<NeuronId>{{0, 0}, {0, 1}, {0, 2}});

  const auto two = net({layer({{1}, {2}}, {0, 0}, Activation::Relu), layer({{1, 1}}, {0}, Activation::Relu),
                        layer({{1}}, {0}, Activation::Linear)});
  CHECK(relu_neurons(*two) == std::vector<NeuronId>{{0, 0}, {0, 1}, {1, 0}});
  CHECK(two->relu_index({1, 0}) == 2);
}

TEST_CASE("model properties on random networks") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = random_small_network(rng);
    const Vector x = Vector::NullaryExpr(n->input_dim(), [&] { return u(rng); });

    // Determinism.
    const Vector y = evaluate(*n, x);
    CHECK((evaluate(*n, x).array() == y.array()).all());

    // Linear layers plus manual clamping reproduce the relu network.
    Vector v = x;
    for (const Layer& l : n->layers()) {
      v = l.weights * v + l.bias;
      if (l.activation == Activation::Relu) v = v.cwiseMax(0.0);
    }
    CHECK((v - y).cwiseAbs().maxCoeff() == 0.0);

    int widths = 0;
    for (const Layer& l : n->layers())
      if (l.activation == Activation::Relu) widths += static_cast<int>(l.out_dim());
    CHECK(static_cast<int>(relu_neurons(*n).size()) == widths);

    // Serialisation keeps the function.
    const Network back = load_network(dump_network(*n));
    CHECK((evaluate(back, x) - y).cwiseAbs().maxCoeff() == 0.0);
  }
}

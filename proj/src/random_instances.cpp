#include "icr/random_instances.hpp"

namespace icr {

std::shared_ptr<const Network> random_network(std::mt19937_64& rng, const std::vector<int>& widths) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Layer> layers;
  for (size_t i = 1; i < widths.size(); ++i) {
    Layer layer;
    layer.weights = Matrix::NullaryExpr(widths[i], widths[i - 1], [&] { return u(rng); });
    layer.bias = Vector::NullaryExpr(widths[i], [&] { return u(rng); });
    layer.activation = i + 1 < widths.size() ? Activation::Relu : Activation::Linear;
    layers.push_back(std::move(layer));
  }
  return std::make_shared<const Network>(std::move(layers));
}

std::shared_ptr<const Network> random_small_network(std::mt19937_64& rng, int max_relus) {
  std::uniform_int_distribution<int> inputs(2, 4);
  std::uniform_int_distribution<int> depth(2, 3);
  std::uniform_int_distribution<int> outputs(1, 3);
  const int layers = depth(rng);
  std::vector<int> widths{inputs(rng)};
  int budget = max_relus;
  for (int h = 0; h < layers - 1; ++h) {
    const int remaining_layers = layers - 1 - h;
    const int cap = std::max(1, budget - (remaining_layers - 1));
    std::uniform_int_distribution<int> w(1, std::min(cap, layers == 2 ? 12 : 8));
    const int width = w(rng);
    widths.push_back(width);
    budget -= width;
  }
  widths.push_back(outputs(rng));
  return random_network(rng, widths);
}

VerificationQuery random_box_query(std::mt19937_64& rng, std::shared_ptr<const Network> net) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> half(0.1, 1.0);
  std::uniform_real_distribution<double> margin(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  const Eigen::Index n = net->input_dim();
  const Vector center = Vector::NullaryExpr(n, [&] { return u(rng); });
  const Vector radius = Vector::NullaryExpr(n, [&] { return half(rng); });
  VerificationQuery q{net, Box(center - radius, center + radius), {}, 0};

  const Vector y = evaluate(*net, center);
  const int count = coin(rng) ? 1 : 2;
  for (int k = 0; k < count; ++k) {
    LinearConstraint c;
    c.coeffs = Vector::NullaryExpr(net->output_dim(), [&] { return u(rng); });
    c.relation = coin(rng) ? Relation::LE : Relation::GE;
    // The centre violates the constraint by a random margin.
    const double at_center = c.coeffs.dot(y);
    c.rhs = c.relation == Relation::LE ? at_center - margin(rng) : at_center + margin(rng);
    q.output.push_back(std::move(c));
  }
  return q;
}

VerificationQuery shrink_query(const VerificationQuery& q, const Vector& factors) {
  const Vector center = q.input.center();
  const Vector radius = 0.5 * (q.input.upper - q.input.lower);
  VerificationQuery out = q;
  const Vector r = radius.cwiseProduct(factors);
  out.input = Box((center - r).cwiseMax(q.input.lower), (center + r).cwiseMin(q.input.upper));
  return out;
}

}  // namespace icr

#pragma once

#include "icr/model.hpp"
#include "icr/query.hpp"

#include <initializer_list>
#include <memory>
#include <vector>

namespace icr::test {

inline Layer layer(std::initializer_list<std::initializer_list<double>> w, std::initializer_list<double> b,
                   Activation act) {
  Layer l;
  l.weights.resize(static_cast<Eigen::Index>(w.size()), static_cast<Eigen::Index>(w.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : w) {
    Eigen::Index c = 0;
    for (double v : row) l.weights(r, c++) = v;
    ++r;
  }
  l.bias.resize(static_cast<Eigen::Index>(b.size()));
  Eigen::Index i = 0;
  for (double v : b) l.bias(i++) = v;
  l.activation = act;
  return l;
}

inline std::shared_ptr<const Network> net(std::vector<Layer> layers) {
  return std::make_shared<const Network>(std::move(layers));
}

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline LinearConstraint le(std::initializer_list<double> c, double rhs) { return {vec(c), Relation::LE, rhs}; }
inline LinearConstraint ge(std::initializer_list<double> c, double rhs) { return {vec(c), Relation::GE, rhs}; }

/// y = ReLU(x), a single relu neuron followed by the identity.
inline std::shared_ptr<const Network> relu_identity() {
  return net({layer({{1}}, {0}, Activation::Relu), layer({{1}}, {0}, Activation::Linear)});
}

/// Two classes: y0 = 1 - x, y1 = x. Class 0 at x0 = 0; crossing at x = 0.5.
inline std::shared_ptr<const Network> crossing_net() {
  return net({layer({{-1}, {1}}, {1, 0}, Activation::Linear)});
}

/// y0 == 1, y1 == 0 over any input of dimension n.
inline std::shared_ptr<const Network> constant_net(int n) {
  Layer l;
  l.weights = Matrix::Zero(2, n);
  l.bias = vec({1, 0});
  l.activation = Activation::Linear;
  return net({l});
}

}  // namespace icr::test

#include "icr/model.hpp"

#include "icr/error.hpp"

#include <json.hpp>

#include <cmath>

namespace icr {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::DimensionMismatch: return "dimension mismatch";
    case ErrorKind::NonFinite: return "non-finite entry";
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::DifferentNetwork: return "different network";
    case ErrorKind::Widening: return "widening tightening";
    case ErrorKind::EmptyStack: return "empty constraint stack";
    case ErrorKind::Numerical: return "numerical instability";
    case ErrorKind::CapExceeded: return "cap exceeded";
    case ErrorKind::InvalidBracket: return "invalid bracket";
    case ErrorKind::CannotSplit: return "cannot split";
  }
  return "error";
}

Network::Network(std::vector<Layer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw Error(ErrorKind::InvalidArgument, "network has no layers");
  for (size_t i = 0; i < layers_.size(); ++i) {
    const Layer& layer = layers_[i];
    if (layer.bias.size() != layer.out_dim())
      throw Error(ErrorKind::DimensionMismatch,
                  "layer " + std::to_string(i) + ": bias length " + std::to_string(layer.bias.size()) +
                      " vs " + std::to_string(layer.out_dim()) + " rows");
    if (layer.out_dim() == 0 || layer.in_dim() == 0)
      throw Error(ErrorKind::DimensionMismatch, "layer " + std::to_string(i) + " is empty");
    if (i > 0 && layer.in_dim() != layers_[i - 1].out_dim())
      throw Error(ErrorKind::DimensionMismatch,
                  "layer " + std::to_string(i) + " expects " + std::to_string(layer.in_dim()) +
                      " inputs but previous layer has " + std::to_string(layers_[i - 1].out_dim()) +
                      " outputs");
    if (!layer.weights.allFinite() || !layer.bias.allFinite())
      throw Error(ErrorKind::NonFinite, "layer " + std::to_string(i));
  }
  offsets_.reserve(layers_.size());
  for (size_t i = 0; i < layers_.size(); ++i) {
    offsets_.push_back(static_cast<int>(relu_ids_.size()));
    if (layers_[i].activation != Activation::Relu) continue;
    for (int j = 0; j < layers_[i].out_dim(); ++j) relu_ids_.push_back({static_cast<int>(i), j});
  }
}

bool Network::is_relu(const NeuronId& id) const {
  if (id.layer < 0 || id.layer >= static_cast<int>(layers_.size())) return false;
  const Layer& layer = layers_[static_cast<size_t>(id.layer)];
  return layer.activation == Activation::Relu && id.neuron >= 0 && id.neuron < layer.out_dim();
}

int Network::relu_index(const NeuronId& id) const {
  if (!is_relu(id))
    throw Error(ErrorKind::InvalidArgument, "(" + std::to_string(id.layer) + "," +
                                                std::to_string(id.neuron) + ") is not a relu neuron");
  return offsets_[static_cast<size_t>(id.layer)] + id.neuron;
}

namespace {

using nlohmann::json;

double finite_number(const json& j, const char* what) {
  if (!j.is_number()) throw Error(ErrorKind::Parse, std::string(what) + " must be a number");
  double v = j.get<double>();
  if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, what);
  return v;
}

Layer parse_layer(const json& j, size_t index) {
  const std::string where = "layer " + std::to_string(index);
  if (!j.is_object()) throw Error(ErrorKind::Parse, where + " is not an object");
  if (!j.contains("weights") || !j.contains("bias") || !j.contains("activation"))
    throw Error(ErrorKind::Parse, where + " needs weights, bias and activation");
  const json& w = j.at("weights");
  const json& b = j.at("bias");
  if (!w.is_array() || w.empty() || !b.is_array()) throw Error(ErrorKind::Parse, where + " malformed");

  Layer layer;
  const auto rows = static_cast<Eigen::Index>(w.size());
  if (!w[0].is_array()) throw Error(ErrorKind::Parse, where + " weights must be a matrix");
  const auto cols = static_cast<Eigen::Index>(w[0].size());
  layer.weights.resize(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = w[static_cast<size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw Error(ErrorKind::DimensionMismatch, where + " has ragged weight rows");
    for (Eigen::Index c = 0; c < cols; ++c) layer.weights(r, c) = finite_number(row[static_cast<size_t>(c)], "weight");
  }
  layer.bias.resize(static_cast<Eigen::Index>(b.size()));
  for (size_t i = 0; i < b.size(); ++i) layer.bias(static_cast<Eigen::Index>(i)) = finite_number(b[i], "bias");

  const json& act = j.at("activation");
  if (act == "relu")
    layer.activation = Activation::Relu;
  else if (act == "linear")
    layer.activation = Activation::Linear;
  else
    throw Error(ErrorKind::Parse, where + " has unknown activation " + act.dump());
  return layer;
}

}  // namespace

Network load_network(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
  if (!doc.is_object() || !doc.contains("layers") || !doc.at("layers").is_array())
    throw Error(ErrorKind::Parse, "expected {\"layers\": [...]}");
  std::vector<Layer> layers;
  for (size_t i = 0; i < doc["layers"].size(); ++i) layers.push_back(parse_layer(doc["layers"][i], i));
  return Network(std::move(layers));
}

std::string dump_network(const Network& net) {
  json layers = json::array();
  for (const Layer& layer : net.layers()) {
    json w = json::array();
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) row.push_back(layer.weights(r, c));
      w.push_back(std::move(row));
    }
    json b = json::array();
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) b.push_back(layer.bias(i));
    layers.push_back({{"weights", std::move(w)},
                      {"bias", std::move(b)},
                      {"activation", layer.activation == Activation::Relu ? "relu" : "linear"}});
  }
  return json{{"layers", std::move(layers)}}.dump();
}

Vector evaluate(const Network& net, const Vector& x) {
  if (x.size() != net.input_dim())
    throw Error(ErrorKind::DimensionMismatch, "input has " + std::to_string(x.size()) + " entries, network expects " +
                                                  std::to_string(net.input_dim()));
  Vector value = x;
  for (const Layer& layer : net.layers()) {
    Vector pre = layer.weights * value + layer.bias;
    value = layer.activation == Activation::Relu ? Vector(pre.cwiseMax(0.0)) : pre;
  }
  return value;
}

std::vector<NeuronId> relu_neurons(const Network& net) { return net.relu_ids(); }

Eigen::Index argmax(const Vector& y) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < y.size(); ++i)
    if (y(i) > y(best)) best = i;
  return best;
}

bool has_unique_argmax(const Vector& y) {
  const Eigen::Index best = argmax(y);
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (i != best && y(i) == y(best)) return false;
  return true;
}

}  // namespace icr

#pragma once

#include <Eigen/Dense>

#include <compare>
#include <string>
#include <string_view>
#include <vector>

namespace icr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Activation { Relu, Linear };

struct Layer {
  Matrix weights;  // rows = output neurons, cols = input neurons
  Vector bias;
  Activation activation = Activation::Linear;

  Eigen::Index in_dim() const { return weights.cols(); }
  Eigen::Index out_dim() const { return weights.rows(); }
};

/// A ReLU neuron, addressed by 0-based layer index into Network::layers()
/// and 0-based neuron index within that layer.
struct NeuronId {
  int layer = 0;
  int neuron = 0;

  auto operator<=>(const NeuronId&) const = default;
};

/// Layered affine + ReLU function. Immutable once constructed.
class Network {
 public:
  explicit Network(std::vector<Layer> layers);

  const std::vector<Layer>& layers() const { return layers_; }
  Eigen::Index input_dim() const { return layers_.front().in_dim(); }
  Eigen::Index output_dim() const { return layers_.back().out_dim(); }

  /// Number of ReLU neurons over all layers.
  int relu_count() const { return static_cast<int>(relu_ids_.size()); }

  /// Flat index of a ReLU neuron in the lexicographic (layer, neuron) order.
  int relu_index(const NeuronId& id) const;
  const NeuronId& relu_neuron(int flat) const { return relu_ids_[static_cast<size_t>(flat)]; }
  bool is_relu(const NeuronId& id) const;

  /// First flat ReLU index of a layer (only meaningful for relu layers).
  int relu_offset(int layer) const { return offsets_[static_cast<size_t>(layer)]; }

  const std::vector<NeuronId>& relu_ids() const { return relu_ids_; }

 private:
  std::vector<Layer> layers_;
  std::vector<NeuronId> relu_ids_;
  std::vector<int> offsets_;
};

Network load_network(std::string_view text);
std::string dump_network(const Network& net);

Vector evaluate(const Network& net, const Vector& x);

/// Lexicographic enumeration of every ReLU neuron.
std::vector<NeuronId> relu_neurons(const Network& net);

/// Index of the largest output; ties resolve to the lowest index.
Eigen::Index argmax(const Vector& y);
bool has_unique_argmax(const Vector& y);

}  // namespace icr

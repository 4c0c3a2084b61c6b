#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace dqlap {

enum class Activation { leaky_relu, linear };

inline constexpr double kLeakyReluSlope = 0.01;

struct LayerSpec {
  std::size_t input_size = 0;
  std::size_t output_size = 0;
  Activation activation = Activation::leaky_relu;
};

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First/second moment estimates per parameter plus the step counter.
struct AdamState {
  std::vector<std::vector<double>> m_weights, v_weights;
  std::vector<std::vector<double>> m_biases, v_biases;
  std::uint64_t step = 0;
};

// Gradient buffers shaped exactly like the network's weights and biases.
struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;

  void set_zero();
};

// Dense feed-forward network. Weight matrices are row-major
// (output_size x input_size); all arithmetic is 64-bit.
struct QNetwork {
  std::vector<LayerSpec> layers;
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
  AdamState adam;

  std::size_t input_dim() const { return layers.front().input_size; }
  std::size_t output_dim() const { return layers.back().output_size; }
  std::size_t parameter_count() const;

  std::vector<double> forward(std::span<const double> input) const;
};

// Per-layer pre-activations and activations kept from a forward pass so a
// backward pass can follow. Reusable across calls; no allocation once sized.
struct ForwardTrace {
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> post;  // post[0] holds the input
};

// Hidden layers use LeakyReLU, the head is linear. Weights are uniform in
// +-sqrt(6 / (fan_in + fan_out)), biases zero; deterministic given the seed.
// An empty hidden list degenerates to a linear model.
QNetwork build_network(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                       std::size_t output_dim, std::uint64_t seed);

// Forward pass recording the trace; returns the output activations.
const std::vector<double>& forward(const QNetwork& net, std::span<const double> input,
                                   ForwardTrace& trace);

Gradients make_gradients(const QNetwork& net);

// Backpropagates d(loss)/d(output) through a recorded trace, accumulating
// scale * gradient into out.
void backward(const QNetwork& net, const ForwardTrace& trace,
              std::span<const double> output_grad, double scale, Gradients& out);

// Exact gradients of the mean squared error over the unmasked outputs.
// An empty mask selects every output; masked-out outputs contribute zero
// gradient (used when only the taken action's Q-value is regressed).
Gradients backward_mse(const QNetwork& net, std::span<const double> input,
                       std::span<const double> target,
                       std::span<const bool> mask = {});

// Standard Adam update with bias correction; increments the step counter.
void adam_step(QNetwork& net, const Gradients& grads, const AdamConfig& config);

bool same_architecture(const QNetwork& a, const QNetwork& b);

// Copies weights and biases only; the clone starts with fresh optimizer state.
QNetwork clone_weights(const QNetwork& source);
void copy_weights_into(const QNetwork& source, QNetwork& target);

// Versioned checkpoint format (see README): magic "DQLAPNET", u32 version,
// u32 layer count, per-layer specs, then row-major little-endian f64 weight
// and bias arrays per layer. Optimizer state is not serialized.
std::vector<std::uint8_t> serialize_network(const QNetwork& net);
QNetwork deserialize_network(std::span<const std::uint8_t> bytes);

void save_network(const QNetwork& net, const std::filesystem::path& path);
QNetwork load_network(const std::filesystem::path& path);

}  // namespace dqlap

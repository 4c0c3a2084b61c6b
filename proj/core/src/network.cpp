#include "dqlap/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>

#include "dqlap/errors.hpp"
#include "dqlap/rng.hpp"

namespace dqlap {

namespace {

inline double activate(double z, Activation a) {
  return a == Activation::leaky_relu && z < 0.0 ? kLeakyReluSlope * z : z;
}

// Derivative convention: LeakyReLU'(0) = 1, matching the z >= 0 branch.
inline double activate_grad(double z, Activation a) {
  return a == Activation::leaky_relu && z < 0.0 ? kLeakyReluSlope : 1.0;
}

void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void append_f64(std::vector<std::uint8_t>& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

struct ByteReader {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;

  void require(std::size_t n) const {
    if (pos + n > bytes.size()) {
      throw DataError("truncated network checkpoint");
    }
  }
  std::uint32_t read_u32() {
    require(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  std::uint8_t read_u8() {
    require(1);
    return bytes[pos++];
  }
  double read_f64() {
    require(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[pos + i]) << (8 * i);
    pos += 8;
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
};

constexpr char kMagic[8] = {'D', 'Q', 'L', 'A', 'P', 'N', 'E', 'T'};
constexpr std::uint32_t kFormatVersion = 1;

}  // namespace

void Gradients::set_zero() {
  for (auto& w : weights) std::fill(w.begin(), w.end(), 0.0);
  for (auto& b : biases) std::fill(b.begin(), b.end(), 0.0);
}

std::size_t QNetwork::parameter_count() const {
  std::size_t count = 0;
  for (const auto& l : layers) {
    count += l.input_size * l.output_size + l.output_size;
  }
  return count;
}

QNetwork build_network(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                       std::size_t output_dim, std::uint64_t seed) {
  if (input_dim == 0 || output_dim == 0 ||
      std::any_of(hidden.begin(), hidden.end(), [](std::size_t s) { return s == 0; })) {
    throw std::invalid_argument("build_network: layer sizes must be >= 1");
  }

  QNetwork net;
  std::size_t prev = input_dim;
  for (const std::size_t size : hidden) {
    net.layers.push_back({prev, size, Activation::leaky_relu});
    prev = size;
  }
  net.layers.push_back({prev, output_dim, Activation::linear});

  std::mt19937_64 rng(seed);
  for (const auto& l : net.layers) {
    const double bound =
        std::sqrt(6.0 / static_cast<double>(l.input_size + l.output_size));
    std::vector<double> w(l.input_size * l.output_size);
    for (auto& v : w) v = (2.0 * uniform_double(rng) - 1.0) * bound;
    net.weights.push_back(std::move(w));
    net.biases.emplace_back(l.output_size, 0.0);
    net.adam.m_weights.emplace_back(l.input_size * l.output_size, 0.0);
    net.adam.v_weights.emplace_back(l.input_size * l.output_size, 0.0);
    net.adam.m_biases.emplace_back(l.output_size, 0.0);
    net.adam.v_biases.emplace_back(l.output_size, 0.0);
  }
  return net;
}

const std::vector<double>& forward(const QNetwork& net, std::span<const double> input,
                                   ForwardTrace& trace) {
  if (input.size() != net.input_dim()) {
    throw std::invalid_argument("forward: expected input of size " +
                                std::to_string(net.input_dim()) + ", got " +
                                std::to_string(input.size()));
  }
  const std::size_t depth = net.layers.size();
  trace.pre.resize(depth);
  trace.post.resize(depth + 1);
  trace.post[0].assign(input.begin(), input.end());

  for (std::size_t l = 0; l < depth; ++l) {
    const LayerSpec& spec = net.layers[l];
    const std::vector<double>& in = trace.post[l];
    std::vector<double>& z = trace.pre[l];
    std::vector<double>& out = trace.post[l + 1];
    z.resize(spec.output_size);
    out.resize(spec.output_size);
    const double* w = net.weights[l].data();
    for (std::size_t r = 0; r < spec.output_size; ++r) {
      double acc = net.biases[l][r];
      const double* row = w + r * spec.input_size;
      for (std::size_t c = 0; c < spec.input_size; ++c) {
        acc += row[c] * in[c];
      }
      z[r] = acc;
      out[r] = activate(acc, spec.activation);
    }
  }
  return trace.post[depth];
}

std::vector<double> QNetwork::forward(std::span<const double> input) const {
  ForwardTrace trace;
  return dqlap::forward(*this, input, trace);
}

Gradients make_gradients(const QNetwork& net) {
  Gradients g;
  for (const auto& l : net.layers) {
    g.weights.emplace_back(l.input_size * l.output_size, 0.0);
    g.biases.emplace_back(l.output_size, 0.0);
  }
  return g;
}

void backward(const QNetwork& net, const ForwardTrace& trace,
              std::span<const double> output_grad, double scale, Gradients& out) {
  if (output_grad.size() != net.output_dim()) {
    throw std::invalid_argument("backward: output_grad size mismatch");
  }
  const std::size_t depth = net.layers.size();
  std::vector<double> delta(output_grad.begin(), output_grad.end());
  std::vector<double> next_delta;

  for (std::size_t l = depth; l-- > 0;) {
    const LayerSpec& spec = net.layers[l];
    const std::vector<double>& in = trace.post[l];
    const std::vector<double>& z = trace.pre[l];
    for (std::size_t r = 0; r < spec.output_size; ++r) {
      delta[r] *= activate_grad(z[r], spec.activation);
    }
    double* wg = out.weights[l].data();
    for (std::size_t r = 0; r < spec.output_size; ++r) {
      const double d = scale * delta[r];
      double* row = wg + r * spec.input_size;
      for (std::size_t c = 0; c < spec.input_size; ++c) {
        row[c] += d * in[c];
      }
      out.biases[l][r] += d;
    }
    if (l > 0) {
      next_delta.assign(spec.input_size, 0.0);
      const double* w = net.weights[l].data();
      for (std::size_t r = 0; r < spec.output_size; ++r) {
        const double d = delta[r];
        const double* row = w + r * spec.input_size;
        for (std::size_t c = 0; c < spec.input_size; ++c) {
          next_delta[c] += row[c] * d;
        }
      }
      delta.swap(next_delta);
    }
  }
}

Gradients backward_mse(const QNetwork& net, std::span<const double> input,
                       std::span<const double> target, std::span<const bool> mask) {
  if (target.size() != net.output_dim()) {
    throw std::invalid_argument("backward_mse: target size mismatch");
  }
  if (!mask.empty() && mask.size() != net.output_dim()) {
    throw std::invalid_argument("backward_mse: mask size mismatch");
  }
  ForwardTrace trace;
  const std::vector<double>& q = forward(net, input, trace);

  std::size_t active = 0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (mask.empty() || mask[j]) ++active;
  }
  if (active == 0) {
    throw std::invalid_argument("backward_mse: mask selects no outputs");
  }

  // L = mean over unmasked outputs of (target - q)^2.
  std::vector<double> output_grad(q.size(), 0.0);
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (mask.empty() || mask[j]) {
      output_grad[j] = 2.0 * (q[j] - target[j]) / static_cast<double>(active);
    }
  }
  Gradients grads = make_gradients(net);
  backward(net, trace, output_grad, 1.0, grads);
  return grads;
}

void adam_step(QNetwork& net, const Gradients& grads, const AdamConfig& config) {
  if (grads.weights.size() != net.weights.size()) {
    throw std::invalid_argument("adam_step: gradient shape mismatch");
  }
  net.adam.step += 1;
  const double t = static_cast<double>(net.adam.step);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);

  auto update = [&](std::vector<double>& params, const std::vector<double>& g,
                    std::vector<double>& m, std::vector<double>& v) {
    if (g.size() != params.size()) {
      throw std::invalid_argument("adam_step: gradient shape mismatch");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      params[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  };

  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    update(net.weights[l], grads.weights[l], net.adam.m_weights[l], net.adam.v_weights[l]);
    update(net.biases[l], grads.biases[l], net.adam.m_biases[l], net.adam.v_biases[l]);
  }
}

bool same_architecture(const QNetwork& a, const QNetwork& b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    if (a.layers[l].input_size != b.layers[l].input_size ||
        a.layers[l].output_size != b.layers[l].output_size ||
        a.layers[l].activation != b.layers[l].activation) {
      return false;
    }
  }
  return true;
}

QNetwork clone_weights(const QNetwork& source) {
  QNetwork out;
  out.layers = source.layers;
  out.weights = source.weights;
  out.biases = source.biases;
  for (const auto& l : out.layers) {
    out.adam.m_weights.emplace_back(l.input_size * l.output_size, 0.0);
    out.adam.v_weights.emplace_back(l.input_size * l.output_size, 0.0);
    out.adam.m_biases.emplace_back(l.output_size, 0.0);
    out.adam.v_biases.emplace_back(l.output_size, 0.0);
  }
  return out;
}

void copy_weights_into(const QNetwork& source, QNetwork& target) {
  if (!same_architecture(source, target)) {
    throw std::invalid_argument("copy_weights_into: architecture mismatch");
  }
  target.weights = source.weights;
  target.biases = source.biases;
}

std::vector<std::uint8_t> serialize_network(const QNetwork& net) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 8);
  append_u32(out, kFormatVersion);
  append_u32(out, static_cast<std::uint32_t>(net.layers.size()));
  for (const auto& l : net.layers) {
    append_u32(out, static_cast<std::uint32_t>(l.input_size));
    append_u32(out, static_cast<std::uint32_t>(l.output_size));
    out.push_back(l.activation == Activation::leaky_relu ? 0 : 1);
  }
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    for (const double v : net.weights[l]) append_f64(out, v);
    for (const double v : net.biases[l]) append_f64(out, v);
  }
  return out;
}

QNetwork deserialize_network(std::span<const std::uint8_t> bytes) {
  ByteReader reader{bytes};
  reader.require(8);
  if (std::memcmp(bytes.data(), kMagic, 8) != 0) {
    throw DataError("not a network checkpoint (bad magic)");
  }
  reader.pos = 8;
  const std::uint32_t version = reader.read_u32();
  if (version != kFormatVersion) {
    throw DataError("unsupported checkpoint format version " + std::to_string(version));
  }
  const std::uint32_t depth = reader.read_u32();
  if (depth == 0) {
    throw DataError("checkpoint has no layers");
  }

  QNetwork net;
  for (std::uint32_t l = 0; l < depth; ++l) {
    LayerSpec spec;
    spec.input_size = reader.read_u32();
    spec.output_size = reader.read_u32();
    const std::uint8_t act = reader.read_u8();
    if (spec.input_size == 0 || spec.output_size == 0 || act > 1) {
      throw DataError("corrupt checkpoint layer spec");
    }
    spec.activation = act == 0 ? Activation::leaky_relu : Activation::linear;
    if (l > 0 && spec.input_size != net.layers.back().output_size) {
      throw DataError("checkpoint layer sizes do not chain");
    }
    net.layers.push_back(spec);
  }
  for (const auto& spec : net.layers) {
    std::vector<double> w(spec.input_size * spec.output_size);
    for (auto& v : w) v = reader.read_f64();
    std::vector<double> b(spec.output_size);
    for (auto& v : b) v = reader.read_f64();
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(b));
    net.adam.m_weights.emplace_back(spec.input_size * spec.output_size, 0.0);
    net.adam.v_weights.emplace_back(spec.input_size * spec.output_size, 0.0);
    net.adam.m_biases.emplace_back(spec.output_size, 0.0);
    net.adam.v_biases.emplace_back(spec.output_size, 0.0);
  }
  if (reader.pos != bytes.size()) {
    throw DataError("trailing bytes after network checkpoint");
  }
  return net;
}

void save_network(const QNetwork& net, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = serialize_network(net);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out.is_open()) {
    throw DataError("cannot write checkpoint: " + path.string());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw DataError("checkpoint write failed: " + path.string());
  }
}

QNetwork load_network(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.is_open()) {
    throw DataError("cannot open checkpoint: " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize_network(bytes);
}

}  // namespace dqlap

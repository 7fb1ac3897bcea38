#include "pcct/nn.hpp"

#include <bit>
#include <cmath>

#include "pcct/error.hpp"

namespace pcct {

std::string to_string(Activation a) { return a == Activation::kRelu ? "relu" : "tanh"; }

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  fail(ErrorKind::kParse, "unknown activation '" + name + "'");
}

std::string to_string(Normalization n) { return n == Normalization::kNone ? "none" : "l2"; }

Normalization parse_normalization(const std::string& name) {
  if (name == "none") return Normalization::kNone;
  if (name == "l2") return Normalization::kL2;
  fail(ErrorKind::kParse, "unknown normalization '" + name + "'");
}

Linear::Linear(std::size_t in, std::size_t out, Rng& rng) {
  require(in > 0 && out > 0, ErrorKind::kContract, "linear layer extents must be positive");
  const double s = std::sqrt(6.0 / static_cast<double>(in + out));
  std::uniform_real_distribution<double> dist(-s, s);
  std::vector<double> w(in * out);
  for (auto& v : w) v = dist(rng);
  weight = Tensor::matrix(in, out, std::move(w), true);
  bias = Tensor::zeros({out}, true);
}

Linear::Linear(Tensor w, Tensor b) : weight(std::move(w)), bias(std::move(b)) {
  require(weight.rank() == 2 && bias.rank() == 1 && bias.dim(0) == weight.dim(1), ErrorKind::kDimension,
          "linear layer: bias " + shape_str(bias.shape()) + " incompatible with weight " +
              shape_str(weight.shape()));
}

Tensor Linear::forward(const Tensor& x) const { return add_row_bias(matmul(x, weight), bias); }

FeatureExtractor::FeatureExtractor(std::vector<std::size_t> layer_sizes, Rng& rng, Activation act, Normalization norm)
    : act_(act), norm_(norm) {
  require(layer_sizes.size() >= 2, ErrorKind::kContract, "extractor needs at least input and output sizes");
  for (std::size_t i = 0; i + 1 < layer_sizes.size(); ++i) {
    layers_.emplace_back(layer_sizes[i], layer_sizes[i + 1], rng);
  }
}

FeatureExtractor::FeatureExtractor(std::vector<Linear> layers, Activation act, Normalization norm)
    : layers_(std::move(layers)), act_(act), norm_(norm) {
  require(!layers_.empty(), ErrorKind::kContract, "extractor needs at least one layer");
  for (std::size_t i = 1; i < layers_.size(); ++i) {
    require(layers_[i - 1].out_dim() == layers_[i].in_dim(), ErrorKind::kDimension,
            "extractor: consecutive layer sizes are incompatible");
  }
}

FeatureExtractor::FeatureExtractor(const FeatureExtractor& other) : act_(other.act_), norm_(other.norm_) {
  layers_.reserve(other.layers_.size());
  for (const auto& l : other.layers_) layers_.push_back(l.clone());
}

FeatureExtractor& FeatureExtractor::operator=(const FeatureExtractor& other) {
  if (this != &other) {
    FeatureExtractor tmp(other);
    *this = std::move(tmp);
  }
  return *this;
}

Tensor FeatureExtractor::forward(const Tensor& batch) const {
  require(!layers_.empty(), ErrorKind::kContract, "forward on an empty extractor");
  if (batch.rank() != 2 || batch.dim(1) != input_dim()) {
    fail(ErrorKind::kDimension, "extractor expects [B, " + std::to_string(input_dim()) + "], got " +
                                    shape_str(batch.shape()));
  }
  Tensor h = batch;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i].forward(h);
    if (i + 1 < layers_.size()) h = act_ == Activation::kRelu ? relu(h) : pcct::tanh(h);
  }
  return norm_ == Normalization::kL2 ? l2_normalize(h) : h;
}

std::vector<double> FeatureExtractor::embed(std::span<const double> features, std::size_t rows) const {
  NoGradGuard guard;
  Tensor x({rows, input_dim()}, std::vector<double>(features.begin(), features.end()));
  auto out = forward(x);
  return {out.values().begin(), out.values().end()};
}

std::vector<Tensor> FeatureExtractor::parameters() const { return parameters_from(0); }

std::vector<Tensor> FeatureExtractor::parameters_from(std::size_t first_layer) const {
  std::vector<Tensor> out;
  for (std::size_t i = first_layer; i < layers_.size(); ++i) {
    out.push_back(layers_[i].weight);
    out.push_back(layers_[i].bias);
  }
  return out;
}

std::vector<std::size_t> FeatureExtractor::layer_sizes() const {
  std::vector<std::size_t> s;
  if (layers_.empty()) return s;
  s.push_back(layers_.front().in_dim());
  for (const auto& l : layers_) s.push_back(l.out_dim());
  return s;
}

std::size_t FeatureExtractor::input_dim() const { return layers_.empty() ? 0 : layers_.front().in_dim(); }
std::size_t FeatureExtractor::embedding_dim() const { return layers_.empty() ? 0 : layers_.back().out_dim(); }

std::uint64_t fingerprint_values(std::span<const double> values, std::uint64_t h) {
  for (double v : values) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::uint64_t FeatureExtractor::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& p : parameters()) h = fingerprint_values(p.values(), h);
  return h;
}

void adam_step(std::span<Tensor> params, AdamState& state) {
  auto& cfg = state.config;
  if (state.first_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.numel(), 0.0);
      state.second_moment.emplace_back(p.numel(), 0.0);
    }
  }
  require(state.first_moment.size() == params.size(), ErrorKind::kContract,
          "adam_step: parameter list changed between steps");
  for (std::size_t i = 0; i < params.size(); ++i) {
    require(params[i].has_grad(), ErrorKind::kContract, "adam_step: parameter " + std::to_string(i) + " has no gradient");
    require(state.first_moment[i].size() == params[i].numel(), ErrorKind::kContract,
            "adam_step: moment shape differs from parameter " + std::to_string(i));
  }
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto g = params[i].grad();
    auto w = params[i].mutable_values();
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
      v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
      const double mhat = m[j] / c1;
      const double vhat = v[j] / c2;
      w[j] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
    }
  }
}

void zero_grads(std::span<Tensor> params) {
  for (auto& p : params) p.zero_grad();
}

}  // namespace pcct

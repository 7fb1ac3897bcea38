#pragma once

// MLP feature extractor, linear classifier head and the Adam optimizer.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pcct/rng.hpp"
#include "pcct/tensor.hpp"

namespace pcct {

enum class Activation { kRelu, kTanh };
// Output mapping of the embedding layer.
enum class Normalization { kNone, kL2 };

std::string to_string(Activation a);
Activation parse_activation(const std::string& name);
std::string to_string(Normalization n);
Normalization parse_normalization(const std::string& name);

// y = x W + b with W of shape [in, out].
struct Linear {
  Tensor weight;
  Tensor bias;

  Linear() = default;
  // Glorot-uniform weights in [-s, s], s = sqrt(6 / (in + out)); zero bias.
  Linear(std::size_t in, std::size_t out, Rng& rng);
  Linear(Tensor w, Tensor b);

  Tensor forward(const Tensor& x) const;
  std::size_t in_dim() const { return weight.dim(0); }
  std::size_t out_dim() const { return weight.dim(1); }
  Linear clone() const { return Linear(weight.clone(), bias.clone()); }
};

// f(.; theta): Linear -> act -> ... -> Linear, then optionally x / ||x||_2.
// No activation on the embedding layer.
class FeatureExtractor {
 public:
  FeatureExtractor() = default;
  FeatureExtractor(std::vector<std::size_t> layer_sizes, Rng& rng, Activation act = Activation::kRelu,
                   Normalization norm = Normalization::kNone);
  FeatureExtractor(std::vector<Linear> layers, Activation act, Normalization norm = Normalization::kNone);

  // Copies are deep: parameters are never shared between two extractors.
  FeatureExtractor(const FeatureExtractor& other);
  FeatureExtractor& operator=(const FeatureExtractor& other);
  FeatureExtractor(FeatureExtractor&&) noexcept = default;
  FeatureExtractor& operator=(FeatureExtractor&&) noexcept = default;

  // [B, in_dim] -> [B, D]
  Tensor forward(const Tensor& batch) const;
  // Row-major [rows, in_dim] features -> embedding values, no graph.
  std::vector<double> embed(std::span<const double> features, std::size_t rows) const;

  std::vector<Tensor> parameters() const;
  // Parameters of layers [first_layer, end).
  std::vector<Tensor> parameters_from(std::size_t first_layer) const;

  const std::vector<Linear>& layers() const { return layers_; }
  std::vector<std::size_t> layer_sizes() const;
  std::size_t input_dim() const;
  std::size_t embedding_dim() const;
  Activation activation() const { return act_; }
  Normalization normalization() const { return norm_; }

  // Order-sensitive hash of all parameter bits.
  std::uint64_t fingerprint() const;

 private:
  std::vector<Linear> layers_;
  Activation act_ = Activation::kRelu;
  Normalization norm_ = Normalization::kNone;
};

std::uint64_t fingerprint_values(std::span<const double> values, std::uint64_t h = 0xcbf29ce484222325ULL);

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::uint64_t step_count = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;

  explicit AdamState(AdamConfig cfg = {}) : config(cfg) {}
};

// One bias-corrected Adam update of every parameter from its gradient.
// Gradients are left untouched.
void adam_step(std::span<Tensor> params, AdamState& state);

void zero_grads(std::span<Tensor> params);

}  // namespace pcct

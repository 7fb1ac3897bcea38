#pragma once

// Metric-learning losses over embeddings and class centers, plus the
// cross-entropy family used by the baselines.
//
// Every distance-based loss accepts either single embeddings (shape [D],
// returning a scalar) or stacks of them (shape [T, D], returning one loss per
// row). Distances are true L_p norms, not squared.

#include <optional>
#include <span>
#include <vector>

#include "pcct/tensor.hpp"

namespace pcct {

struct LossHyper {
  double alpha = 0.5;  // margin
  double beta = 0.25;  // secondary margin of the quadruplet losses
  int p_norm = 2;
};

struct PairLabel {
  bool same_class = false;
};

void validate(const LossHyper& hyper, bool quadruplet = false);

Tensor lp_distance(const Tensor& x, const Tensor& y, int p_norm);

// [d(a,p) + alpha - d(a,n)]_+
Tensor triplet_loss(const Tensor& f_a, const Tensor& f_p, const Tensor& f_n, const LossHyper& hyper);

// [d(a, c_anchor) + alpha - d(a, c_neg)]_+ ; anchor_class must differ from neg_class.
Tensor center_triplet_loss(const Tensor& f_a, const Tensor& c_anchor, const Tensor& c_neg, const LossHyper& hyper);
Tensor center_triplet_loss(const Tensor& f_a, const Tensor& c_anchor, const Tensor& c_neg, const LossHyper& hyper,
                           int anchor_class, int neg_class);

// same_class: d(a,b); otherwise [alpha - d(a,b)]_+
Tensor pairwise_loss(const Tensor& f_a, const Tensor& f_b, PairLabel label, const LossHyper& hyper);
// Row-wise variant for stacks of pairs.
Tensor pairwise_loss(const Tensor& f_a, const Tensor& f_b, std::span<const bool> same_class, const LossHyper& hyper);

Tensor center_pairwise_loss(const Tensor& f_a, const Tensor& c_b, PairLabel label, const LossHyper& hyper);
Tensor center_pairwise_loss(const Tensor& f_a, const Tensor& c_b, std::span<const bool> same_class,
                            const LossHyper& hyper);

// [d(a,p) + alpha - d(a,n1)]_+ + [d(a,p) + beta - d(n1,n2)]_+
Tensor quadruplet_loss(const Tensor& f_a, const Tensor& f_p, const Tensor& f_n1, const Tensor& f_n2,
                       const LossHyper& hyper);
// Checks the class constraints (n1, n2 distinct and both differ from the anchor class).
Tensor quadruplet_loss(const Tensor& f_a, const Tensor& f_p, const Tensor& f_n1, const Tensor& f_n2,
                       const LossHyper& hyper, int anchor_class, int n1_class, int n2_class);

Tensor center_quadruplet_loss(const Tensor& f_a, const Tensor& c_p, const Tensor& c_n1, const Tensor& c_n2,
                              const LossHyper& hyper);
Tensor center_quadruplet_loss(const Tensor& f_a, const Tensor& c_p, const Tensor& c_n1, const Tensor& c_n2,
                              const LossHyper& hyper, int anchor_class, int n1_class, int n2_class);

// -w[label] * log softmax(logits)[label]. logits is [K] (one label) or [n, K].
Tensor cross_entropy(const Tensor& logits, std::span<const std::size_t> labels,
                     std::optional<std::span<const double>> class_weights = std::nullopt);
Tensor cross_entropy(const Tensor& logits, std::size_t label,
                     std::optional<std::span<const double>> class_weights = std::nullopt);

// -w[label] * (1 - p_t)^gamma * log p_t ; equals cross_entropy when gamma == 0.
Tensor focal_loss(const Tensor& logits, std::span<const std::size_t> labels, double gamma,
                  std::optional<std::span<const double>> class_weights = std::nullopt);
Tensor focal_loss(const Tensor& logits, std::size_t label, double gamma,
                  std::optional<std::span<const double>> class_weights = std::nullopt);

// (1/N) sum of unit losses. Accepts a list of scalars or one vector of losses.
Tensor batch_mean(std::span<const Tensor> unit_losses);
Tensor batch_mean(const Tensor& unit_losses);

// w_k = N_total / (K * N_k)
std::vector<double> inverse_frequency_weights(std::span<const std::size_t> class_sizes);

}  // namespace pcct

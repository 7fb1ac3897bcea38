#include "pcct/losses.hpp"

#include <string>

#include "pcct/error.hpp"

namespace pcct {

namespace {

void check_shapes(std::initializer_list<const Tensor*> ts, const char* op) {
  const auto& s = (*ts.begin())->shape();
  for (const auto* t : ts) {
    if (t->shape() != s) {
      fail(ErrorKind::kDimension, std::string(op) + ": embedding shapes differ (" + shape_str(s) + " vs " +
                                      shape_str(t->shape()) + ")");
    }
  }
  if (s.empty() || s.size() > 2) fail(ErrorKind::kDimension, std::string(op) + ": expected [D] or [T, D]");
}

Tensor hinge(const Tensor& x) { return relu(x); }

// Constant tensor with the reduced (per-row) shape of `like`.
Tensor row_constant(const Tensor& like, std::span<const double> per_row) {
  if (like.rank() == 1) return Tensor::scalar(per_row[0]);
  return Tensor::vector(std::vector<double>(per_row.begin(), per_row.end()));
}

void check_quad_classes(int anchor, int n1, int n2) {
  require(n1 != anchor && n2 != anchor && n1 != n2, ErrorKind::kContract,
          "quadruplet: negatives must come from two distinct classes other than the anchor class");
}

Tensor signed_pair_terms(const Tensor& dist, std::span<const bool> same_class, const LossHyper& hyper) {
  const std::size_t n = dist.rank() == 0 ? 1 : dist.dim(0);
  require(same_class.size() == n, ErrorKind::kDimension,
          "pairwise_loss: one label per pair required");
  // same: d ; different: [alpha - d]_+  ==  s*d + (1-s)*relu(alpha - d)
  std::vector<double> s(same_class.size()), ns(same_class.size());
  for (std::size_t i = 0; i < same_class.size(); ++i) {
    s[i] = same_class[i] ? 1.0 : 0.0;
    ns[i] = 1.0 - s[i];
  }
  auto mk = [&](std::span<const double> v) {
    return dist.rank() == 0 ? Tensor::scalar(v[0]) : Tensor::vector(std::vector<double>(v.begin(), v.end()));
  };
  auto pulled = mul(mk(s), dist);
  auto pushed = mul(mk(ns), hinge(add_scalar(scale(dist, -1.0), hyper.alpha)));
  return add(pulled, pushed);
}

Tensor weighted_rows(const Tensor& logits, const Tensor& per_row, std::span<const std::size_t> labels,
                     std::optional<std::span<const double>> class_weights) {
  if (!class_weights) return per_row;
  const std::size_t k = logits.rank() == 1 ? logits.dim(0) : logits.dim(1);
  require(class_weights->size() == k, ErrorKind::kDimension, "class weight count differs from logit count");
  std::vector<double> w(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) w[i] = (*class_weights)[labels[i]];
  return mul(row_constant(logits, w), per_row);
}

}  // namespace

void validate(const LossHyper& hyper, bool quadruplet) {
  require(hyper.alpha >= 0.0, ErrorKind::kContract, "margin alpha must be nonnegative");
  require(hyper.p_norm >= 1, ErrorKind::kContract, "p_norm must be a positive integer");
  if (quadruplet) {
    require(hyper.beta >= 0.0 && hyper.beta < hyper.alpha, ErrorKind::kContract,
            "quadruplet losses need 0 <= beta < alpha");
  }
}

Tensor lp_distance(const Tensor& x, const Tensor& y, int p_norm) {
  check_shapes({&x, &y}, "lp_distance");
  return lp_norm(sub(x, y), p_norm);
}

Tensor triplet_loss(const Tensor& f_a, const Tensor& f_p, const Tensor& f_n, const LossHyper& hyper) {
  check_shapes({&f_a, &f_p, &f_n}, "triplet_loss");
  auto d_ap = lp_distance(f_a, f_p, hyper.p_norm);
  auto d_an = lp_distance(f_a, f_n, hyper.p_norm);
  return hinge(add_scalar(sub(d_ap, d_an), hyper.alpha));
}

Tensor center_triplet_loss(const Tensor& f_a, const Tensor& c_anchor, const Tensor& c_neg, const LossHyper& hyper) {
  check_shapes({&f_a, &c_anchor, &c_neg}, "center_triplet_loss");
  return triplet_loss(f_a, c_anchor, c_neg, hyper);
}

Tensor center_triplet_loss(const Tensor& f_a, const Tensor& c_anchor, const Tensor& c_neg, const LossHyper& hyper,
                           int anchor_class, int neg_class) {
  require(anchor_class != neg_class, ErrorKind::kContract,
          "center_triplet_loss: negative class equals the anchor class");
  return center_triplet_loss(f_a, c_anchor, c_neg, hyper);
}

Tensor pairwise_loss(const Tensor& f_a, const Tensor& f_b, PairLabel label, const LossHyper& hyper) {
  check_shapes({&f_a, &f_b}, "pairwise_loss");
  require(f_a.rank() == 1, ErrorKind::kDimension, "pairwise_loss: single-pair form expects [D] embeddings");
  auto d = lp_distance(f_a, f_b, hyper.p_norm);
  return label.same_class ? d : hinge(add_scalar(scale(d, -1.0), hyper.alpha));
}

Tensor pairwise_loss(const Tensor& f_a, const Tensor& f_b, std::span<const bool> same_class, const LossHyper& hyper) {
  check_shapes({&f_a, &f_b}, "pairwise_loss");
  return signed_pair_terms(lp_distance(f_a, f_b, hyper.p_norm), same_class, hyper);
}

Tensor center_pairwise_loss(const Tensor& f_a, const Tensor& c_b, PairLabel label, const LossHyper& hyper) {
  return pairwise_loss(f_a, c_b, label, hyper);
}

Tensor center_pairwise_loss(const Tensor& f_a, const Tensor& c_b, std::span<const bool> same_class,
                            const LossHyper& hyper) {
  return pairwise_loss(f_a, c_b, same_class, hyper);
}

Tensor quadruplet_loss(const Tensor& f_a, const Tensor& f_p, const Tensor& f_n1, const Tensor& f_n2,
                       const LossHyper& hyper) {
  check_shapes({&f_a, &f_p, &f_n1, &f_n2}, "quadruplet_loss");
  auto d_ap = lp_distance(f_a, f_p, hyper.p_norm);
  auto d_an1 = lp_distance(f_a, f_n1, hyper.p_norm);
  auto d_n1n2 = lp_distance(f_n1, f_n2, hyper.p_norm);
  auto first = hinge(add_scalar(sub(d_ap, d_an1), hyper.alpha));
  auto second = hinge(add_scalar(sub(d_ap, d_n1n2), hyper.beta));
  return add(first, second);
}

Tensor quadruplet_loss(const Tensor& f_a, const Tensor& f_p, const Tensor& f_n1, const Tensor& f_n2,
                       const LossHyper& hyper, int anchor_class, int n1_class, int n2_class) {
  check_quad_classes(anchor_class, n1_class, n2_class);
  return quadruplet_loss(f_a, f_p, f_n1, f_n2, hyper);
}

Tensor center_quadruplet_loss(const Tensor& f_a, const Tensor& c_p, const Tensor& c_n1, const Tensor& c_n2,
                              const LossHyper& hyper) {
  return quadruplet_loss(f_a, c_p, c_n1, c_n2, hyper);
}

Tensor center_quadruplet_loss(const Tensor& f_a, const Tensor& c_p, const Tensor& c_n1, const Tensor& c_n2,
                              const LossHyper& hyper, int anchor_class, int n1_class, int n2_class) {
  check_quad_classes(anchor_class, n1_class, n2_class);
  return quadruplet_loss(f_a, c_p, c_n1, c_n2, hyper);
}

Tensor cross_entropy(const Tensor& logits, std::span<const std::size_t> labels,
                     std::optional<std::span<const double>> class_weights) {
  auto nll = scale(pick(log_softmax(logits), labels), -1.0);
  return weighted_rows(logits, nll, labels, class_weights);
}

Tensor cross_entropy(const Tensor& logits, std::size_t label, std::optional<std::span<const double>> class_weights) {
  require(logits.rank() == 1, ErrorKind::kDimension, "cross_entropy: single-label form expects [K] logits");
  std::size_t l[1] = {label};
  return cross_entropy(logits, std::span<const std::size_t>(l), class_weights);
}

Tensor focal_loss(const Tensor& logits, std::span<const std::size_t> labels, double gamma,
                  std::optional<std::span<const double>> class_weights) {
  require(gamma >= 0.0, ErrorKind::kContract, "focal_loss: gamma must be nonnegative");
  auto log_pt = pick(log_softmax(logits), labels);
  Tensor per_row = scale(log_pt, -1.0);
  if (gamma != 0.0) {
    auto one_minus = add_scalar(scale(exp(log_pt), -1.0), 1.0);
    // p_t can round to slightly above 1; clamp the base at 0 through relu.
    per_row = mul(pow_scalar(relu(one_minus), gamma), per_row);
  }
  return weighted_rows(logits, per_row, labels, class_weights);
}

Tensor focal_loss(const Tensor& logits, std::size_t label, double gamma,
                  std::optional<std::span<const double>> class_weights) {
  require(logits.rank() == 1, ErrorKind::kDimension, "focal_loss: single-label form expects [K] logits");
  std::size_t l[1] = {label};
  return focal_loss(logits, std::span<const std::size_t>(l), gamma, class_weights);
}

Tensor batch_mean(std::span<const Tensor> unit_losses) {
  require(!unit_losses.empty(), ErrorKind::kContract, "batch_mean: empty list of unit losses");
  return mean(stack(unit_losses));
}

Tensor batch_mean(const Tensor& unit_losses) {
  require(unit_losses.numel() > 0, ErrorKind::kContract, "batch_mean: empty list of unit losses");
  return mean(unit_losses);
}

std::vector<double> inverse_frequency_weights(std::span<const std::size_t> class_sizes) {
  require(!class_sizes.empty(), ErrorKind::kContract, "class weights need at least one class");
  double total = 0.0;
  for (auto n : class_sizes) {
    require(n > 0, ErrorKind::kContract, "class weights: empty class");
    total += static_cast<double>(n);
  }
  const double k = static_cast<double>(class_sizes.size());
  std::vector<double> w;
  w.reserve(class_sizes.size());
  for (auto n : class_sizes) w.push_back(total / (k * static_cast<double>(n)));
  return w;
}

}  // namespace pcct

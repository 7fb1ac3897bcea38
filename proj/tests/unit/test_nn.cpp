#include <doctest.h>

#include <cmath>

#include "pcct/error.hpp"
#include "pcct/nn.hpp"

using namespace pcct;

TEST_CASE("linear layer computes x W + b") {
  Linear l(Tensor::matrix(2, 3, {1, 0, 2, 0, 1, -1}), Tensor::vector({0.5, 0.5, 0.5}));
  auto y = l.forward(Tensor::matrix(1, 2, {3, 4}));
  CHECK(y(0, 0) == doctest::Approx(3.5));
  CHECK(y(0, 1) == doctest::Approx(4.5));
  CHECK(y(0, 2) == doctest::Approx(2.5));
}

TEST_CASE("glorot init stays inside its bound") {
  Rng rng(1);
  Linear l(10, 6, rng);
  const double s = std::sqrt(6.0 / 16.0);
  for (double w : l.weight.values()) CHECK(std::abs(w) <= s);
  for (double b : l.bias.values()) CHECK(b == 0.0);
}

TEST_CASE("zero weights give the bias") {
  std::vector<Linear> layers;
  layers.emplace_back(Tensor::zeros({3, 2}, true), Tensor::vector({1.0, -2.0}, true));
  FeatureExtractor ex(std::move(layers), Activation::kRelu);
  auto y = ex.forward(Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6}));
  CHECK(y(1, 0) == 1.0);
  CHECK(y(1, 1) == -2.0);
}

TEST_CASE("l2 normalized extractor emits unit rows") {
  Rng rng(4);
  FeatureExtractor ex({5, 8, 4}, rng, Activation::kRelu, Normalization::kL2);
  std::vector<double> x(3 * 5);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(1.0 + static_cast<double>(i));
  auto e = ex.embed(x, 3);
  for (std::size_t r = 0; r < 3; ++r) {
    double n = 0.0;
    for (std::size_t j = 0; j < 4; ++j) n += e[r * 4 + j] * e[r * 4 + j];
    CHECK(std::sqrt(n) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(parse_normalization(to_string(Normalization::kL2)) == Normalization::kL2);
  CHECK_THROWS_AS(parse_normalization("batch"), Error);
}

TEST_CASE("copies are deep and fingerprints track parameters") {
  Rng rng(2);
  FeatureExtractor a({4, 6, 3}, rng);
  FeatureExtractor b = a;
  CHECK(a.fingerprint() == b.fingerprint());
  b.parameters()[0].mutable_values()[0] += 1.0;
  CHECK(a.fingerprint() != b.fingerprint());
  CHECK(a.layer_sizes() == std::vector<std::size_t>{4, 6, 3});
  CHECK(a.parameters_from(1).size() == 2);
}

TEST_CASE("adam matches a hand-computed first step") {
  // Step 1: m = (1-b1) g, v = (1-b2) g^2, m_hat = g, v_hat = g^2,
  // update = lr * g / (|g| + eps).
  auto p = Tensor::vector({1.0, -2.0}, true);
  p.mutable_grad()[0] = 0.5;
  p.mutable_grad()[1] = -4.0;
  std::vector<Tensor> params{p};
  AdamState st(AdamConfig{0.1, 0.9, 0.99, 1e-8});
  adam_step(params, st);
  CHECK(p.values()[0] == doctest::Approx(1.0 - 0.1 * 0.5 / (0.5 + 1e-8)).epsilon(1e-14));
  CHECK(p.values()[1] == doctest::Approx(-2.0 + 0.1 * 4.0 / (4.0 + 1e-8)).epsilon(1e-14));
  CHECK(st.step_count == 1);

  // Step 2 with the same gradient: bias-corrected moments still equal g and g^2.
  adam_step(params, st);
  CHECK(p.values()[0] == doctest::Approx(1.0 - 2 * 0.1 * 0.5 / (0.5 + 1e-8)).epsilon(1e-12));
}

TEST_CASE("adam leaves parameters with zero gradient in place") {
  auto p = Tensor::vector({3.0}, true);
  p.mutable_grad()[0] = 0.0;
  std::vector<Tensor> params{p};
  AdamState st;
  for (int i = 0; i < 5; ++i) adam_step(params, st);
  CHECK(p.values()[0] == 3.0);
}

TEST_CASE("adam decreases a convex quadratic monotonically") {
  auto p = Tensor::vector({2.0, -1.5}, true);
  std::vector<Tensor> params{p};
  AdamState st(AdamConfig{0.05, 0.9, 0.99, 1e-8});
  double prev = 1e9;
  for (int i = 0; i < 30; ++i) {
    zero_grads(params);
    auto loss = sum(mul(p, p));
    CHECK(loss.item() < prev);
    prev = loss.item();
    loss.backward();
    adam_step(params, st);
  }
  CHECK(prev < 4.0);
}

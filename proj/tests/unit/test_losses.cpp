#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "../support/loss_cases.hpp"
#include "pcct/error.hpp"
#include "pcct/losses.hpp"

using namespace pcct;

namespace {

const LossHyper kH{0.5, 0.25, 2};
constexpr double kTol = 1e-9;

Tensor v2(double a, double b) { return Tensor::vector({a, b}); }

Tensor random_vec(std::mt19937_64& rng, std::size_t d) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> v(d);
  for (auto& x : v) x = nd(rng);
  return Tensor::vector(v);
}

Tensor shifted(const Tensor& x, const Tensor& shift) { return add(x, shift); }

}  // namespace

TEST_CASE("lp_distance") {
  CHECK(lp_distance(v2(1, 2), v2(1, 2), 2).item() == 0.0);
  CHECK(lp_distance(v2(0, 0), v2(3, 4), 2).item() == doctest::Approx(5.0).epsilon(kTol));
  CHECK(lp_distance(v2(1, 1), v2(0, 0), 1).item() == doctest::Approx(2.0).epsilon(kTol));
  CHECK_THROWS_AS(lp_distance(v2(1, 1), Tensor::vector({1.0, 2.0, 3.0}), 2), Error);
}

TEST_CASE("triplet loss values") {
  CHECK(triplet_loss(v2(0, 0), v2(0, 0), v2(1, 0), kH).item() == doctest::Approx(0.0));
  CHECK(triplet_loss(v2(1, 1), v2(1, 1), v2(1, 1), kH).item() == doctest::Approx(0.5).epsilon(kTol));
  CHECK(triplet_loss(v2(0, 0), v2(1, 0), v2(0, 1), kH).item() == doctest::Approx(0.5).epsilon(kTol));
}

TEST_CASE("center triplet loss values") {
  CHECK(center_triplet_loss(v2(0, 0), v2(0, 0), v2(1, 0), kH).item() == 0.0);
  CHECK(center_triplet_loss(v2(0.3, 0.1), v2(0.3, 0.1), v2(0.3, 0.1), kH).item() == doctest::Approx(0.5));
  CHECK(center_triplet_loss(v2(0, 0), v2(2, 0), v2(0, 1), kH).item() == doctest::Approx(1.5).epsilon(kTol));
  CHECK_THROWS_AS(center_triplet_loss(v2(0, 0), v2(2, 0), v2(0, 1), kH, 3, 3), Error);
}

TEST_CASE("pairwise loss values") {
  CHECK(pairwise_loss(v2(1, 1), v2(1, 1), PairLabel{true}, kH).item() == 0.0);
  CHECK(pairwise_loss(v2(0, 0), v2(0.6, 0), PairLabel{false}, kH).item() == 0.0);
  CHECK(pairwise_loss(v2(0, 0), v2(0.2, 0), PairLabel{false}, kH).item() == doctest::Approx(0.3).epsilon(kTol));
}

TEST_CASE("quadruplet loss values") {
  CHECK(quadruplet_loss(v2(1, 2), v2(1, 2), v2(1, 2), v2(1, 2), kH).item() == doctest::Approx(0.75).epsilon(kTol));
  CHECK(quadruplet_loss(v2(0, 0), v2(0, 0), v2(1, 0), v2(1, 1), kH).item() == 0.0);
  CHECK(quadruplet_loss(v2(0, 0), v2(1, 0), v2(0, 1), v2(0, -1), kH).item() == doctest::Approx(0.5).epsilon(kTol));
  CHECK_THROWS_AS(quadruplet_loss(v2(0, 0), v2(1, 0), v2(0, 1), v2(0, -1), kH, 0, 1, 1), Error);
  CHECK_THROWS_AS(quadruplet_loss(v2(0, 0), v2(1, 0), v2(0, 1), v2(0, -1), kH, 0, 0, 2), Error);
}

TEST_CASE("center pairwise loss values") {
  CHECK(center_pairwise_loss(v2(1, 1), v2(1, 1), PairLabel{true}, kH).item() == 0.0);
  CHECK(center_pairwise_loss(v2(0, 0), v2(0.5, 0), PairLabel{false}, kH).item() == 0.0);
  CHECK(center_pairwise_loss(v2(0, 0), v2(0.1, 0), PairLabel{false}, kH).item() == doctest::Approx(0.4).epsilon(kTol));
}

TEST_CASE("center quadruplet loss values") {
  CHECK(center_quadruplet_loss(v2(0, 0), v2(0, 0), v2(1, 0), v2(-1, 0), kH).item() == 0.0);
  CHECK(center_quadruplet_loss(v2(2, 2), v2(2, 2), v2(2, 2), v2(2, 2), kH).item() ==
        doctest::Approx(0.75).epsilon(kTol));
  // d(a,c_p) = 1, d(a,c_n1) = 1.2, d(c_n1,c_n2) = 1.2:
  // [1 + 0.5 - 1.2]_+ + [1 + 0.25 - 1.2]_+ = 0.3 + 0.05
  CHECK(center_quadruplet_loss(v2(0, 0), v2(1, 0), v2(0, 1.2), v2(0, 0), kH).item() ==
        doctest::Approx(0.35).epsilon(kTol));
  CHECK_THROWS_AS(center_quadruplet_loss(v2(0, 0), v2(1, 0), v2(0, 1), v2(0, -1), kH, 2, 1, 1), Error);
}

TEST_CASE("cross entropy family") {
  const std::vector<double> w{2.0, 1.0};
  CHECK(cross_entropy(v2(0, 0), 0).item() == doctest::Approx(std::log(2.0)).epsilon(kTol));
  CHECK(cross_entropy(v2(1, 0), 0, w).item() == doctest::Approx(2.0 * std::log(1.0 + std::exp(-1.0))).epsilon(kTol));
  CHECK(cross_entropy(v2(1, 0), 0, w).item() == doctest::Approx(0.6265).epsilon(1e-4));
  CHECK_THROWS_AS(cross_entropy(v2(0, 0), 2), Error);

  double prev = 1e9;
  for (double gap = 0.0; gap < 30.0; gap += 2.0) {
    const double l = cross_entropy(v2(gap, 0), 0).item();
    CHECK(l < prev);
    prev = l;
  }
  CHECK(prev < 1e-11);

  CHECK(focal_loss(v2(0, 0), 0, 2.0).item() == doctest::Approx(0.25 * std::log(2.0)).epsilon(kTol));
  CHECK(focal_loss(v2(0.3, -1.2), 1, 0.0, w).item() ==
        doctest::Approx(cross_entropy(v2(0.3, -1.2), 1, w).item()).epsilon(1e-15));
  CHECK(focal_loss(v2(60, 0), 0, 2.0).item() < 1e-20);
  CHECK_THROWS_AS(focal_loss(v2(0, 0), 0, -1.0), Error);
}

TEST_CASE("batch mean") {
  std::vector<Tensor> one{Tensor::scalar(0.7)};
  CHECK(batch_mean(one).item() == doctest::Approx(0.7));
  std::vector<Tensor> two{Tensor::scalar(0.0), Tensor::scalar(1.0)};
  CHECK(batch_mean(two).item() == doctest::Approx(0.5));
  CHECK_THROWS_AS(batch_mean(std::vector<Tensor>{}), Error);

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::vector<Tensor> many;
  std::vector<long double> raw;
  for (int i = 0; i < 100; ++i) {
    raw.push_back(u(rng));
    many.push_back(Tensor::scalar(static_cast<double>(raw.back()), true));
  }
  const long double oracle = std::accumulate(raw.begin(), raw.end(), 0.0L) / 100.0L;
  auto m = batch_mean(many);
  CHECK(m.item() == doctest::Approx(static_cast<double>(oracle)).epsilon(1e-14));
  m.backward();
  for (const auto& t : many) CHECK(t.grad()[0] == doctest::Approx(0.01));
}

TEST_CASE("inverse frequency weights") {
  const std::vector<std::size_t> sizes{30, 10};
  auto w = inverse_frequency_weights(sizes);
  CHECK(w[0] == doctest::Approx(40.0 / 60.0));
  CHECK(w[1] == doctest::Approx(2.0));
}

TEST_CASE("losses are nonnegative and the triplet hinge is exact") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 500; ++i) {
    auto a = random_vec(rng, 8), p = random_vec(rng, 8), n = random_vec(rng, 8), n2 = random_vec(rng, 8);
    const double t = triplet_loss(a, p, n, kH).item();
    CHECK(t >= 0.0);
    CHECK(quadruplet_loss(a, p, n, n2, kH).item() >= 0.0);
    CHECK(pairwise_loss(a, p, PairLabel{false}, kH).item() >= 0.0);
    const double dap = lp_distance(a, p, 2).item(), dan = lp_distance(a, n, 2).item();
    CHECK((t == 0.0) == (dan >= dap + 0.5));
  }
}

TEST_CASE("quadruplet with a very negative beta reduces to triplet") {
  std::mt19937_64 rng(22);
  const LossHyper h{0.5, -1e6, 2};
  for (int i = 0; i < 100; ++i) {
    auto a = random_vec(rng, 4), p = random_vec(rng, 4), n = random_vec(rng, 4), n2 = random_vec(rng, 4);
    CHECK(quadruplet_loss(a, p, n, n2, h).item() == triplet_loss(a, p, n, h).item());
  }
}

TEST_CASE("distance losses are translation invariant") {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 100; ++i) {
    auto a = random_vec(rng, 6), p = random_vec(rng, 6), n = random_vec(rng, 6), n2 = random_vec(rng, 6);
    auto s = random_vec(rng, 6);
    auto A = shifted(a, s), P = shifted(p, s), N = shifted(n, s), N2 = shifted(n2, s);
    CHECK(std::abs(triplet_loss(a, p, n, kH).item() - triplet_loss(A, P, N, kH).item()) < 1e-12);
    CHECK(std::abs(center_triplet_loss(a, p, n, kH).item() - center_triplet_loss(A, P, N, kH).item()) < 1e-12);
    CHECK(std::abs(pairwise_loss(a, p, PairLabel{true}, kH).item() -
                   pairwise_loss(A, P, PairLabel{true}, kH).item()) < 1e-12);
    CHECK(std::abs(quadruplet_loss(a, p, n, n2, kH).item() - quadruplet_loss(A, P, N, N2, kH).item()) < 1e-12);
    CHECK(std::abs(center_quadruplet_loss(a, p, n, n2, kH).item() -
                   center_quadruplet_loss(A, P, N, N2, kH).item()) < 1e-12);
  }
}

TEST_CASE("row-wise forms agree with the single forms") {
  std::mt19937_64 rng(24);
  std::normal_distribution<double> nd;
  std::vector<double> a(3 * 4), b(3 * 4);
  for (auto& x : a) x = nd(rng);
  for (auto& x : b) x = 0.1 * nd(rng);
  const bool same[] = {true, false, false};
  auto rows = pairwise_loss(Tensor::matrix(3, 4, a), Tensor::matrix(3, 4, b), same, kH);
  for (std::size_t i = 0; i < 3; ++i) {
    auto ai = Tensor::vector(std::vector<double>(a.begin() + 4 * i, a.begin() + 4 * i + 4));
    auto bi = Tensor::vector(std::vector<double>(b.begin() + 4 * i, b.begin() + 4 * i + 4));
    CHECK(rows(i) == doctest::Approx(pairwise_loss(ai, bi, PairLabel{same[i]}, kH).item()).epsilon(1e-14));
  }
}

TEST_CASE("loss gradients match finite differences") {
  for (const auto& c : testing::loss_cases(8)) {
    CAPTURE(c.name);
    const auto s = testing::check_case(c, 100, 1234);
    CHECK(s.points == 100);
    CHECK(s.worst < 1e-4);
  }
}

TEST_CASE("hyper validation") {
  CHECK_NOTHROW(validate(kH, true));
  CHECK_THROWS_AS(validate(LossHyper{0.5, 0.6, 2}, true), Error);
  CHECK_THROWS_AS(validate(LossHyper{-0.1, 0.0, 2}), Error);
  CHECK_THROWS_AS(validate(LossHyper{0.5, 0.25, 0}), Error);
}

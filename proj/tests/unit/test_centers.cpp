#include <doctest.h>

#include <cmath>

#include "pcct/centers.hpp"
#include "pcct/error.hpp"
#include "pcct/gradcheck.hpp"
#include "pcct/losses.hpp"

using namespace pcct;

namespace {

FeatureExtractor identity(std::size_t d) {
  std::vector<double> w(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) w[i * d + i] = 1.0;
  std::vector<Linear> layers;
  layers.emplace_back(Tensor::matrix(d, d, w, true), Tensor::zeros({d}, true));
  return FeatureExtractor(std::move(layers), Activation::kRelu);
}

CenterTable table_of(std::size_t k, std::size_t d, std::vector<double> rows) {
  CenterTable t;
  t.centers = Tensor::matrix(k, d, std::move(rows));
  return t;
}

}  // namespace

TEST_CASE("computed centers are class means") {
  Dataset data(2, {0, 0, 2, 2, 5, -1}, {0, 0, 1});
  auto t = compute_centers(identity(2), data, 4);
  CHECK(t.mode == CenterMode::kComputed);
  CHECK(t.source_epoch == 4);
  CHECK(t.row(0)[0] == 1.0);
  CHECK(t.row(0)[1] == 1.0);
  CHECK(t.row(1)[0] == 5.0);  // singleton
  CHECK(t.row(1)[1] == -1.0);
}

TEST_CASE("identity extractor on 1-D data gives per-class input means") {
  Dataset data(1, {1, 2, 3, 10, 20}, {0, 0, 0, 1, 1});
  auto t = compute_centers(identity(1), data);
  CHECK(t.row(0)[0] == doctest::Approx(2.0));
  CHECK(t.row(1)[0] == doctest::Approx(15.0));
}

TEST_CASE("a 1000-sample class matches a compensated mean") {
  Rng rng(3);
  std::normal_distribution<double> nd(5.0, 3.0);
  std::vector<double> x(1000 * 3);
  for (auto& v : x) v = nd(rng);
  Dataset data(3, x, std::vector<int>(1000, 0));
  auto t = compute_centers(identity(3), data);
  for (std::size_t j = 0; j < 3; ++j) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < 1000; ++i) s += x[i * 3 + j];
    CHECK(std::abs(t.row(0)[j] - static_cast<double>(s / 1000.0L)) < 1e-9);
  }
}

TEST_CASE("empty class cannot produce a center") {
  Dataset data(1, {1, 2}, {0, 0}, 2);
  CHECK_THROWS_AS(compute_centers(identity(1), data), Error);
}

TEST_CASE("singleton classes reduce the center triplet loss to a zero first distance") {
  Rng rng(5);
  FeatureExtractor ex({3, 5, 4}, rng, Activation::kRelu, Normalization::kNone);
  Dataset data(3, {0.3, -1.0, 2.0, 1.5, 0.2, -0.7, -2.0, 0.9, 0.1}, {0, 1, 2});
  auto t = compute_centers(ex, data);
  auto emb = ex.embed(data.features, 3);
  const LossHyper h{3.0, 0.25, 2};
  for (std::size_t a = 0; a < 3; ++a) {
    auto fa = Tensor::vector(std::vector<double>(emb.begin() + 4 * a, emb.begin() + 4 * a + 4));
    auto ca = Tensor::vector(std::vector<double>(t.row(a).begin(), t.row(a).end()));
    for (std::size_t n = 0; n < 3; ++n) {
      if (n == a) continue;
      auto fn = Tensor::vector(std::vector<double>(emb.begin() + 4 * n, emb.begin() + 4 * n + 4));
      auto cn = Tensor::vector(std::vector<double>(t.row(n).begin(), t.row(n).end()));
      const double expected = std::max(0.0, h.alpha - lp_distance(fa, fn, 2).item());
      CHECK(center_triplet_loss(fa, ca, cn, h).item() == expected);
    }
  }
}

TEST_CASE("trainable centers") {
  auto computed = table_of(2, 2, {1, 2, 3, 4});
  Rng rng(1);
  auto t = init_trainable_centers(2, 2, CenterInit::kFromComputed, rng, &computed);
  CHECK(t.mode == CenterMode::kTrainable);
  CHECK(t.centers.requires_grad());
  for (std::size_t i = 0; i < 4; ++i) CHECK(t.centers.values()[i] == computed.centers.values()[i]);

  Rng a(9), b(9);
  auto ra = init_trainable_centers(3, 4, CenterInit::kRandom, a);
  auto rb = init_trainable_centers(3, 4, CenterInit::kRandom, b);
  for (std::size_t i = 0; i < 12; ++i) CHECK(ra.centers.values()[i] == rb.centers.values()[i]);

  CHECK_THROWS_AS(init_trainable_centers(2, 2, CenterInit::kFromComputed, rng), Error);

  // One Adam step under a known gradient moves the rows.
  std::vector<Tensor> params{t.centers};
  for (auto& g : t.centers.mutable_grad()) g = 1.0;
  AdamState st;
  adam_step(params, st);
  CHECK(t.centers.values()[0] != 1.0);
  CHECK(computed.centers.values()[0] == 1.0);
}

TEST_CASE("center gradient follows the anchor-to-center direction") {
  const LossHyper h{0.5, 0.25, 2};
  const std::vector<double> fa{0.2, -0.4, 1.0}, cn{0.5, 0.0, 1.0};
  const std::vector<double> ca{0.5, 0.5, 0.5};
  auto c = Tensor::vector(ca, true);
  auto loss = center_triplet_loss(Tensor::vector(fa), c, Tensor::vector(cn), h);
  REQUIRE(loss.item() > 0.0);
  loss.backward();
  double norm = 0.0;
  for (std::size_t i = 0; i < 3; ++i) norm += (ca[i] - fa[i]) * (ca[i] - fa[i]);
  norm = std::sqrt(norm);
  for (std::size_t i = 0; i < 3; ++i) CHECK(c.grad()[i] == doctest::Approx((ca[i] - fa[i]) / norm).epsilon(1e-12));

  auto r = finite_diff_check(
      [&](const Tensor& x) { return center_triplet_loss(Tensor::vector(fa), x, Tensor::vector(cn), h); }, ca);
  CHECK_FALSE(r.kink);
  CHECK(r.max_rel_error < 1e-6);
}

TEST_CASE("nearest center prediction") {
  auto t = table_of(5, 2, {0, 0, 1, 0, 5, 5, 2, 2, -1, 0});
  const std::vector<double> at3{2, 2};
  auto p = nearest_center_predict(at3, t, 2);
  CHECK(p.label == 3);
  CHECK(p.distances[3] == 0.0);
  CHECK(p.distances.size() == 5);

  // Equidistant from ids 1 and 4: smallest id wins.
  auto tie = table_of(5, 2, {9, 9, 1, 0, 9, -9, -9, 9, -1, 0});
  const std::vector<double> origin{0, 0};
  CHECK(nearest_center_predict(origin, tie, 2).label == 1);
}

TEST_CASE("prediction matches a brute-force scan and is shift and scale invariant") {
  Rng rng(6);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> c(6 * 5), e(5);
    for (auto& v : c) v = nd(rng);
    for (auto& v : e) v = nd(rng);
    auto t = table_of(6, 5, c);
    std::size_t best = 0;
    double bd = 1e300;
    for (std::size_t k = 0; k < 6; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < 5; ++j) s += (e[j] - c[k * 5 + j]) * (e[j] - c[k * 5 + j]);
      if (s < bd) bd = s, best = k;
    }
    const int label = nearest_center_predict(e, t, 2).label;
    CHECK(label == static_cast<int>(best));

    const double shift = nd(rng), factor = 0.5 + std::abs(nd(rng));
    auto cs = c, es = e;
    for (auto& v : cs) v = (v + shift) * factor;
    for (auto& v : es) v = (v + shift) * factor;
    CHECK(nearest_center_predict(es, table_of(6, 5, cs), 2).label == label);
  }
}

TEST_CASE("center option names round-trip") {
  CHECK(parse_center_mode(to_string(CenterMode::kTrainable)) == CenterMode::kTrainable);
  CHECK(parse_center_init(to_string(CenterInit::kRandom)) == CenterInit::kRandom);
  CHECK_THROWS_AS(parse_center_mode("moving"), Error);
}

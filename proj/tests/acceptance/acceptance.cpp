// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.
//
//   pcct_acceptance --config configs/benchmark.ini --cli build/pcct --work <dir>

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../support/loss_cases.hpp"
#include "../support/oracles.hpp"
#include "pcct/config.hpp"
#include "pcct/experiment.hpp"

using namespace pcct;
namespace fs = std::filesystem;

namespace {

// ---- pinned tolerances and budgets ------------------------------------------

constexpr double kGradTolerance = 1e-4;
constexpr std::size_t kGradPoints = 100;
constexpr std::size_t kGradDim = 8;
constexpr double kGradBudgetSeconds = 10.0;
constexpr double kLossValueTolerance = 1e-9;
constexpr std::size_t kSamplerBatches = 1000;
constexpr std::size_t kCenterGeometries = 1000;
constexpr double kCompactionReduction = 0.10;
constexpr double kTwoStageBudgetSeconds = 300.0;
constexpr std::size_t kTailRepetitions = 10;
constexpr double kTailAlpha = 0.05;
constexpr double kTailBudgetSeconds = 900.0;
constexpr double kEfficientMf1Gap = 3.0;
constexpr double kMarginSpread = 5.0;
constexpr double kMetricsTolerance = 0.01;
constexpr std::size_t kWilcoxonMaxN = 12;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& o) {
  std::printf("%s criterion %d: %s | %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// ---- 1: gradient oracle -----------------------------------------------------

Outcome gradient_oracle() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::string worst_name;
  std::size_t cases = 0;
  for (const auto& c : testing::loss_cases(kGradDim)) {
    const auto s = testing::check_case(c, kGradPoints, 0xC0FFEE + cases++);
    if (s.points != kGradPoints) return {false, c.name + ": too few points"};
    if (s.worst > worst) worst = s.worst, worst_name = c.name;
  }
  const double secs = seconds_since(t0);
  return {worst < kGradTolerance && secs < kGradBudgetSeconds,
          fmt("%zu losses x %zu points, max rel err %.2e (%s) < %.0e, %.2fs < %.0fs", cases, kGradPoints, worst,
              worst_name.c_str(), kGradTolerance, secs, kGradBudgetSeconds)};
}

// ---- 2: loss unit values ----------------------------------------------------

Outcome loss_values() {
  const LossHyper h{0.5, 0.25, 2};
  auto v = [](std::vector<double> x) { return Tensor::vector(std::move(x)); };
  const std::vector<double> w{2.0, 1.0};
  struct Case {
    const char* name;
    double got, want;
  };
  const std::vector<Case> cases{
      {"lp x=y", lp_distance(v({1, 2}), v({1, 2}), 2).item(), 0.0},
      {"lp (0,0)-(3,4)", lp_distance(v({0, 0}), v({3, 4}), 2).item(), 5.0},
      {"lp p=1", lp_distance(v({1, 1}), v({0, 0}), 1).item(), 2.0},
      {"triplet satisfied", triplet_loss(v({0, 0}), v({0, 0}), v({1, 0}), h).item(), 0.0},
      {"triplet all equal", triplet_loss(v({1, 1}), v({1, 1}), v({1, 1}), h).item(), 0.5},
      {"triplet 1+0.5-1", triplet_loss(v({0, 0}), v({1, 0}), v({0, 1}), h).item(), 0.5},
      {"center triplet at center", center_triplet_loss(v({0, 0}), v({0, 0}), v({1, 0}), h).item(), 0.0},
      {"center triplet singleton", center_triplet_loss(v({2, 3}), v({2, 3}), v({2, 3}), h).item(), 0.5},
      {"center triplet 2+0.5-1", center_triplet_loss(v({0, 0}), v({2, 0}), v({0, 1}), h).item(), 1.5},
      {"pairwise same", pairwise_loss(v({1, 1}), v({1, 1}), PairLabel{true}, h).item(), 0.0},
      {"pairwise far", pairwise_loss(v({0, 0}), v({1, 0}), PairLabel{false}, h).item(), 0.0},
      {"pairwise 0.5-0.2", pairwise_loss(v({0, 0}), v({0.2, 0}), PairLabel{false}, h).item(), 0.3},
      {"quadruplet all equal", quadruplet_loss(v({1, 1}), v({1, 1}), v({1, 1}), v({1, 1}), h).item(), 0.75},
      {"quadruplet inactive", quadruplet_loss(v({0, 0}), v({0, 0}), v({1, 0}), v({1, 1}), h).item(), 0.0},
      {"quadruplet 0.5+0", quadruplet_loss(v({0, 0}), v({1, 0}), v({0, 1}), v({0, -1}), h).item(), 0.5},
      {"center pairwise same", center_pairwise_loss(v({1, 1}), v({1, 1}), PairLabel{true}, h).item(), 0.0},
      {"center pairwise at margin", center_pairwise_loss(v({0, 0}), v({0.5, 0}), PairLabel{false}, h).item(), 0.0},
      {"center pairwise 0.5-0.1", center_pairwise_loss(v({0, 0}), v({0.1, 0}), PairLabel{false}, h).item(), 0.4},
      {"center quadruplet inactive",
       center_quadruplet_loss(v({0, 0}), v({0, 0}), v({1, 0}), v({-1, 0}), h).item(), 0.0},
      {"center quadruplet all equal",
       center_quadruplet_loss(v({3, 3}), v({3, 3}), v({3, 3}), v({3, 3}), h).item(), 0.75},
      {"center quadruplet 2-D", center_quadruplet_loss(v({0, 0}), v({1, 0}), v({0, 1.2}), v({0, 0}), h).item(),
       0.35},
      {"ce uniform", cross_entropy(v({0, 0}), 0).item(), std::log(2.0)},
      {"ce weighted", cross_entropy(v({1, 0}), 0, w).item(), 2.0 * std::log(1.0 + std::exp(-1.0))},
      {"focal gamma 0", focal_loss(v({0.3, -0.2}), 1, 0.0, w).item(), cross_entropy(v({0.3, -0.2}), 1, w).item()},
      {"focal p_t=0.5", focal_loss(v({0, 0}), 0, 2.0).item(), 0.25 * std::log(2.0)},
      {"batch mean [0,1]", batch_mean(std::vector<Tensor>{Tensor::scalar(0), Tensor::scalar(1)}).item(), 0.5},
  };
  double worst = 0.0;
  std::string bad;
  for (const auto& c : cases) {
    const double err = std::abs(c.got - c.want);
    if (err > worst) worst = err;
    if (err > kLossValueTolerance) bad += std::string(bad.empty() ? "" : ", ") + c.name;
  }
  return {bad.empty(), fmt("%zu examples, max abs err %.1e <= %.0e%s", cases.size(), worst, kLossValueTolerance,
                           bad.empty() ? "" : (" failing: " + bad).c_str())};
}

// ---- 3: sampler balance -----------------------------------------------------

Outcome sampler_balance() {
  // 58:1 between the largest and smallest class.
  const std::vector<std::size_t> sizes{580, 240, 90, 35, 10};
  std::vector<int> labels;
  for (std::size_t k = 0; k < sizes.size(); ++k) labels.insert(labels.end(), sizes[k], static_cast<int>(k));
  DatasetIndex index(labels);
  Rng rng(58);
  std::normal_distribution<double> nd;
  std::size_t unequal = 0;
  for (std::size_t b = 0; b < kSamplerBatches; ++b) {
    const auto plan = build_balanced_batch(index, 10, rng);
    std::vector<double> emb(plan.labels.size() * 4);
    for (auto& x : emb) x = nd(rng);
    std::vector<std::size_t> anchors(sizes.size(), 0), members(sizes.size(), 0);
    for (int l : plan.labels) ++members[static_cast<std::size_t>(l)];
    for (const auto& t : form_triplets(plan, emb, 4, Mining::kRandomHard, LossHyper{}, rng))
      ++anchors[static_cast<std::size_t>(plan.labels[t.anchor])];
    for (std::size_t k = 0; k < sizes.size(); ++k) {
      if (anchors[k] != anchors[0] || members[k] != members[0]) {
        ++unequal;
        break;
      }
    }
  }
  return {unequal == 0, fmt("%zu batches, imbalance 58:1, batches with unequal per-class anchors: %zu (tolerance 0)",
                            kSamplerBatches, unequal)};
}

// ---- 4: center-triplet completeness -----------------------------------------

Outcome center_completeness() {
  Rng rng(4);
  std::normal_distribution<double> nd;
  std::size_t mismatched = 0, emitted = 0;
  for (std::size_t g = 0; g < kCenterGeometries; ++g) {
    const std::size_t k = 2 + uniform_index(rng, 9), d = 1 + uniform_index(rng, 16), n = 1 + uniform_index(rng, 16);
    const LossHyper h{0.1 + 0.9 * std::uniform_real_distribution<double>(0, 1)(rng), 0.0, 2};
    std::vector<int> labels(n);
    for (auto& l : labels) l = static_cast<int>(uniform_index(rng, k));
    std::vector<double> emb(n * d), centers(k * d);
    for (auto& x : emb) x = 0.5 * nd(rng);
    for (auto& x : centers) x = 0.5 * nd(rng);
    std::set<std::pair<std::size_t, int>> got, want;
    for (const auto& t : form_center_triplets(labels, emb, centers, d, h)) got.insert({t.anchor, t.negative_class});
    auto row = [&](const std::vector<double>& m, std::size_t i) {
      return Tensor::vector(std::vector<double>(m.begin() + static_cast<std::ptrdiff_t>(i * d),
                                                m.begin() + static_cast<std::ptrdiff_t>((i + 1) * d)));
    };
    for (std::size_t a = 0; a < n; ++a) {
      const auto y = static_cast<std::size_t>(labels[a]);
      for (std::size_t c = 0; c < k; ++c) {
        if (c == y) continue;
        if (center_triplet_loss(row(emb, a), row(centers, y), row(centers, c), h).item() > 0.0)
          want.insert({a, static_cast<int>(c)});
      }
    }
    emitted += got.size();
    if (got != want) ++mismatched;
  }
  return {mismatched == 0, fmt("%zu geometries (K<=10, D<=16), %zu units emitted, set mismatches: %zu (tolerance 0)",
                               kCenterGeometries, emitted, mismatched)};
}

// ---- benchmark runs shared by 5, 7, 8 ---------------------------------------

struct FoldScores {
  std::vector<double> mf1, first_stage_mf1, ratio_first, ratio_full, stage2_epoch_seconds;
};

FoldScores run_benchmark(const RunConfig& cfg, const Dataset& data) {
  const auto folds = stratified_kfold(data.index, cfg.eval.folds, cfg.train.seed);
  const auto cv = crossval(cfg.train, data, cfg.eval.folds, cfg.eval.jobs, cfg.eval.small_class_threshold);
  FoldScores s;
  for (const auto& f : cv.folds) {
    s.mf1.push_back(f.eval.overall.mf1);
    s.ratio_full.push_back(f.eval.compactness.ratio());
    if (f.record.stage1) {
      const Dataset test = data.subset(folds[f.fold].test);
      const Dataset train = data.subset(folds[f.fold].train);
      const auto e = evaluate(*f.record.stage1, test, train.index.class_sizes(), cfg.eval.small_class_threshold);
      s.first_stage_mf1.push_back(e.overall.mf1);
      s.ratio_first.push_back(e.compactness.ratio());
    }
    double secs = 0;
    std::size_t n = 0;
    for (const auto& e : f.record.epochs)
      if (e.stage == "stage2") secs += e.seconds, ++n;
    s.stage2_epoch_seconds.push_back(n ? secs / static_cast<double>(n) : 0.0);
  }
  return s;
}

RunConfig with(RunConfig cfg, std::initializer_list<std::pair<const char*, std::string>> kv) {
  for (const auto& [k, v] : kv) set_option(cfg, k, v);
  return cfg;
}

// ---- 10: metrics oracle -----------------------------------------------------

Outcome metrics_oracle() {
  const auto m = macro_metrics(confusion_from_rows({{8, 2}, {1, 4}}));
  const double oracle = testing::oracle_mf1({{8, 2}, {1, 4}});
  const bool mf1_ok = std::abs(m.mf1 - 78.47) <= kMetricsTolerance && std::abs(m.mf1 - oracle) <= kMetricsTolerance;
  Rng rng(10);
  std::normal_distribution<double> nd;
  std::uniform_int_distribution<int> small(-3, 3);
  std::size_t trials = 0, mismatches = 0;
  for (std::size_t n = 5; n <= kWilcoxonMaxN; ++n) {
    for (int t = 0; t < 50; ++t) {
      std::vector<double> a(n), b(n);
      for (std::size_t i = 0; i < n; ++i) {
        a[i] = t % 2 ? small(rng) : nd(rng);
        b[i] = t % 2 ? small(rng) : nd(rng);
      }
      const auto o = testing::oracle_signed_rank(a, b);
      if (o.n < 5) continue;
      const auto w = wilcoxon_signed_rank(a, b);
      ++trials;
      if (!w.exact || w.statistic != o.w_plus || std::abs(w.p_value - o.p_two_sided) > 1e-12) ++mismatches;
    }
  }
  return {mf1_ok && mismatches == 0,
          fmt("MF1 %.4f vs oracle %.4f (78.47 +- %.2f); Wilcoxon exact vs enumeration: %zu/%zu trials agree (n<=%zu)",
              m.mf1, oracle, kMetricsTolerance, trials - mismatches, trials, kWilcoxonMaxN)};
}

// ---- 11: determinism --------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism(const fs::path& cli, const fs::path& config, const fs::path& work) {
  const std::vector<std::string> files{"metrics.json", "metrics.csv", "run_record.json"};
  std::vector<std::string> first;
  for (int run = 0; run < 2; ++run) {
    const fs::path out = work / ("determinism_" + std::to_string(run));
    fs::remove_all(out);
    const std::string cmd = "\"" + cli.string() + "\" train --config \"" + config.string() + "\" --seed 3 --out \"" +
                            out.string() + "\" > /dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, "train command failed: " + cmd};
    for (std::size_t i = 0; i < files.size(); ++i) {
      const auto text = slurp(out / files[i]);
      if (text.empty()) return {false, files[i] + " missing"};
      if (run == 0)
        first.push_back(text);
      else if (text != first[i])
        return {false, files[i] + " differs between identical runs"};
    }
  }
  return {true, "two `pcct train --seed 3` runs: metrics.json, metrics.csv, run_record.json byte-identical"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::string config_path, cli_path, work_dir = (fs::temp_directory_path() / "pcct_acceptance").string();
  std::set<int> only;
  app.add_option("--config", config_path, "benchmark configuration")->required()->check(CLI::ExistingFile);
  app.add_option("--cli", cli_path, "pcct command-line binary")->required()->check(CLI::ExistingFile);
  app.add_option("--work", work_dir, "scratch directory");
  app.add_option("--only", only, "run only these criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  auto want = [&](int id) { return only.empty() || only.count(id) > 0; };
  fs::create_directories(work_dir);

  try {
    const RunConfig bench = load_config(config_path);
    const Dataset data = load_dataset(bench.data);

    if (want(1)) report(1, "gradient oracle", gradient_oracle());
    if (want(2)) report(2, "loss unit values", loss_values());
    if (want(3)) report(3, "sampler balance", sampler_balance());
    if (want(4)) report(4, "center-triplet completeness", center_completeness());

    FoldScores full;
    if (want(5) || want(7)) {
      const auto t0 = Clock::now();
      full = run_benchmark(bench, data);
      const double full_secs = seconds_since(t0);
      if (want(5)) {
        const auto t1 = Clock::now();
        const FoldScores second = run_benchmark(with(bench, {{"stage1.epochs", "0"}}), data);
        const double secs = full_secs + seconds_since(t1);
        const double m_full = mean_of(full.mf1), m_first = mean_of(full.first_stage_mf1), m_second = mean_of(second.mf1);
        const double r1 = mean_of(full.ratio_first), r2 = mean_of(full.ratio_full);
        const double reduction = (r1 - r2) / r1;
        report(5, "two-stage relational check",
               {m_full >= m_first && m_full >= m_second && reduction >= kCompactionReduction &&
                    secs < kTwoStageBudgetSeconds,
                fmt("MF1 full %.2f >= first-only %.2f, second-only %.2f; compactness ratio %.3f -> %.3f "
                    "(-%.1f%% >= %.0f%%); %.0fs < %.0fs",
                    m_full, m_first, m_second, r1, r2, 100 * reduction, 100 * kCompactionReduction, secs,
                    kTwoStageBudgetSeconds)});
      }
    }

    if (want(6)) {
      const auto t0 = Clock::now();
      std::vector<double> pcct_tail, bce_tail;
      for (std::size_t r = 0; r < kTailRepetitions; ++r) {
        const RunConfig cfg =
            with(bench, {{"data.seed", std::to_string(r)}, {"run.seed", std::to_string(10 * r)}});
        const Dataset rep = load_dataset(cfg.data);
        const RunConfig bce = with(cfg, {{"run.method", "baseline:bce"}});
        pcct_tail.push_back(crossval(cfg.train, rep, cfg.eval.folds, cfg.eval.jobs, cfg.eval.small_class_threshold)
                                .aggregate.small_mf1.mean);
        bce_tail.push_back(crossval(bce.train, rep, bce.eval.folds, bce.eval.jobs, bce.eval.small_class_threshold)
                               .aggregate.small_mf1.mean);
      }
      const double secs = seconds_since(t0);
      const auto w = wilcoxon_signed_rank(pcct_tail, bce_tail);
      const double diff = mean_of(pcct_tail) - mean_of(bce_tail);
      report(6, "imbalance relational check",
             {diff > 0 && w.status == TestStatus::kOk && w.p_value < kTailAlpha && secs < kTailBudgetSeconds,
              fmt("tail MF1 PCCT %.2f vs BCE %.2f over %zu seeded 5-fold repetitions; Wilcoxon W+=%.1f p=%.5f < %.2f; "
                  "%.0fs < %.0fs",
                  mean_of(pcct_tail), mean_of(bce_tail), kTailRepetitions, w.statistic, w.p_value, kTailAlpha, secs,
                  kTailBudgetSeconds)});
    }

    if (want(7)) {
      const FoldScores eff = run_benchmark(with(bench, {{"stage2.center_mode", "trainable"}}), data);
      const double t_comp = mean_of(full.stage2_epoch_seconds), t_eff = mean_of(eff.stage2_epoch_seconds);
      const double gap = std::abs(mean_of(eff.mf1) - mean_of(full.mf1));
      report(7, "efficient variant",
             {t_eff < t_comp && gap <= kEfficientMf1Gap,
              fmt("stage-2 epoch %.2fms (trainable) < %.2fms (computed); MF1 %.2f vs %.2f, gap %.2f <= %.1f",
                  1e3 * t_eff, 1e3 * t_comp, mean_of(eff.mf1), mean_of(full.mf1), gap, kEfficientMf1Gap)});
    }

    if (want(8)) {
      const FoldScores pw =
          run_benchmark(with(bench, {{"stage1.loss", "pairwise"}, {"stage2.loss", "center_pairwise"}}), data);
      const FoldScores quad =
          run_benchmark(with(bench, {{"stage1.loss", "quadruplet"}, {"stage2.loss", "center_quadruplet"}}), data);
      const double p0 = mean_of(pw.first_stage_mf1), p1 = mean_of(pw.mf1);
      const double q0 = mean_of(quad.first_stage_mf1), q1 = mean_of(quad.mf1);
      report(8, "loss-family extension",
             {p1 >= p0 && q1 >= q0, fmt("pairwise %.2f -> centered %.2f; quadruplet %.2f -> centered %.2f (5 seeds)",
                                        p0, p1, q0, q1)});
    }

    if (want(9)) {
      const std::vector<double> alphas{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
      const auto rows = sweep(bench, data, SweepAxis::kMargin, alphas, bench.eval.jobs);
      double lo = 1e9, hi = -1e9;
      std::string series;
      for (const auto& r : rows) {
        lo = std::min(lo, r.aggregate.mf1.mean);
        hi = std::max(hi, r.aggregate.mf1.mean);
        series += fmt("%s%.2f", series.empty() ? "" : " ", r.aggregate.mf1.mean);
      }
      report(9, "margin robustness",
             {rows.size() == alphas.size() && hi - lo <= kMarginSpread,
              fmt("alpha 0.1..0.9 MF1 [%s], spread %.2f <= %.1f", series.c_str(), hi - lo, kMarginSpread)});
    }

    if (want(10)) report(10, "metrics oracle", metrics_oracle());
    if (want(11)) report(11, "determinism", determinism(cli_path, config_path, work_dir));
  } catch (const std::exception& e) {
    std::printf("FAIL acceptance aborted: %s\n", e.what());
    return 2;
  }
  return failures == 0 ? 0 : 1;
}

#pragma once

// Classification metrics, fold construction, compactness diagnostics and the
// Wilcoxon signed-rank test.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pcct/sampling.hpp"

namespace pcct {

struct ConfusionMatrix {
  std::size_t num_classes = 0;
  std::vector<std::size_t> counts;  // rows = true class, cols = predicted

  std::size_t at(std::size_t truth, std::size_t pred) const { return counts[truth * num_classes + pred]; }
  std::size_t total() const;
};

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted, std::size_t num_classes);
ConfusionMatrix confusion_from_rows(std::vector<std::vector<std::size_t>> rows);

struct ClassMetrics {
  int class_id = 0;
  double precision = 0.0;  // percent
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
  // P, R or F1 was 0/0 and has been set to 0.
  bool zero_division = false;
};

struct MetricsReport {
  std::vector<ClassMetrics> per_class;
  double mcp = 0.0;
  double mcr = 0.0;
  double mf1 = 0.0;
  // No class qualified (small-class sub-reports only).
  bool empty = false;
};

// Per-class P = TP/(TP+FP), R = TP/(TP+FN), F1 = 2PR/(P+R), in percent; the
// macro values are unweighted means over every class of the matrix.
MetricsReport macro_metrics(const ConfusionMatrix& cm);

// Macro metrics restricted to classes with N_k <= threshold.
MetricsReport small_class_report(const MetricsReport& report, std::span<const std::size_t> class_sizes,
                                 std::size_t threshold = 20);

struct FoldSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Each class is shuffled and dealt round-robin over the folds; the deal
// continues across classes so fold totals differ by at most one.
std::vector<FoldSplit> stratified_kfold(const DatasetIndex& index, std::size_t k, std::uint64_t seed);

struct Compactness {
  double within = 0.0;  // mean distance of a sample to its own class center
  double inter = 0.0;   // mean distance over unordered pairs of centers
  double ratio() const { return inter > 0.0 ? within / inter : 0.0; }
};

Compactness compactness(std::span<const double> embeddings, std::span<const int> labels,
                        std::span<const double> centers, std::size_t dim, int p_norm = 2);

enum class TestStatus { kOk, kUndefined };

struct WilcoxonResult {
  TestStatus status = TestStatus::kOk;
  std::size_t n = 0;       // pairs left after removing zero differences
  double statistic = 0.0;  // W+ : rank sum of positive differences (a - b > 0)
  double p_value = 1.0;    // two-sided
  bool exact = false;
  bool significant = false;  // p < 0.05
};

// Exact two-sided p-value for n <= 25 (full sign-assignment distribution,
// average ranks for ties); tie-corrected normal approximation above.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation (n - 1)
};

Summary summarize(std::span<const double> values);

struct AggregateReport {
  std::vector<MetricsReport> folds;
  std::vector<MetricsReport> small_class_folds;
  Summary mcp, mcr, mf1;
  Summary small_mcp, small_mcr, small_mf1;
  bool small_class_empty = true;
};

AggregateReport aggregate(std::vector<MetricsReport> folds, std::vector<MetricsReport> small_class_folds);

// Structured-text (JSON) and flat CSV renderings; percentages with two decimals.
std::string report_json(const MetricsReport& report, const MetricsReport* small_class = nullptr);
std::string report_csv(const MetricsReport& report, const MetricsReport* small_class = nullptr);
std::string aggregate_json(const AggregateReport& agg);
std::string format_percent(double v);

}  // namespace pcct

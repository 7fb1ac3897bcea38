#pragma once

// Experiment drivers shared by the C API and the command-line tool: holdout
// training with artifacts, checkpoint evaluation, cross-validation and sweeps.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "pcct/checkpoint.hpp"
#include "pcct/config.hpp"
#include "pcct/eval.hpp"
#include "pcct/trainer.hpp"

namespace pcct {

struct Evaluation {
  MetricsReport overall;
  MetricsReport small_class;
  Compactness compactness;  // test embeddings around their own class means
  std::vector<int> predictions;
};

// Small-class membership follows `class_sizes` (training-set sizes).
Evaluation evaluate(const Checkpoint& ckpt, const Dataset& test, std::span<const std::size_t> class_sizes,
                    std::size_t threshold);

// Observer tagged with the job that produced the epoch ("fold 2", "alpha=0.3 fold 0").
using JobObserver = std::function<void(const std::string& tag, const EpochRecord& rec)>;

struct FoldOutcome {
  std::size_t fold = 0;
  std::uint64_t seed = 0;
  Evaluation eval;
  RunRecord record;
};

struct CrossvalResult {
  std::vector<FoldOutcome> folds;
  AggregateReport aggregate;
};

// Fold f trains with seed cfg.seed + f on the other folds and is evaluated on
// fold f. The split itself uses cfg.seed. Up to `jobs` folds run at once.
CrossvalResult crossval(const TrainConfig& cfg, const Dataset& data, std::size_t k, std::size_t jobs,
                        std::size_t threshold, const JobObserver& observer = {});

enum class SweepAxis { kMargin, kDimension };
SweepAxis parse_sweep_axis(const std::string& name);
std::string to_string(SweepAxis a);

struct SweepRow {
  double value = 0.0;
  AggregateReport aggregate;
};

// One cross-validated run per value; rows sorted by value.
std::vector<SweepRow> sweep(const RunConfig& base, const Dataset& data, SweepAxis axis, std::vector<double> values,
                            std::size_t jobs, const JobObserver& observer = {});
std::string sweep_csv(SweepAxis axis, const std::vector<SweepRow>& rows);

std::string crossval_json(const CrossvalResult& result);

// Train on every fold but `holdout_fold` of the eval.folds split (seed
// run.seed) and evaluate on it. Writes into `out`: config.ini, stage1.ckpt
// (pcct only), final.ckpt, run_record.json, metrics.json, metrics.csv,
// test.csv and epoch.log.
struct TrainOutcome {
  RunRecord record;
  Evaluation eval;
};
TrainOutcome train_holdout(const RunConfig& cfg, const Dataset& data, std::size_t holdout_fold,
                           const std::filesystem::path& out, const JobObserver& observer = {});

// Evaluate a saved checkpoint; writes metrics.json and metrics.csv into `out`.
Evaluation evaluate_to(const std::filesystem::path& checkpoint, const Dataset& data, std::size_t threshold,
                       const std::filesystem::path& out);

void write_text(const std::filesystem::path& path, const std::string& text);

// Runs fn(0..n-1) on up to `jobs` threads; the first exception is rethrown.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn);

}  // namespace pcct

#include "pcct/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "pcct/error.hpp"

namespace pcct {

namespace {

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

Compactness test_compactness(std::span<const double> emb, std::size_t dim, const Dataset& test, int p_norm) {
  // Classes absent from the test rows are left out of both statistics.
  std::vector<int> remap(test.num_classes(), -1);
  int present = 0;
  for (std::size_t k = 0; k < test.num_classes(); ++k) {
    if (!test.index.members(k).empty()) remap[k] = present++;
  }
  std::vector<int> labels(test.rows());
  for (std::size_t i = 0; i < test.rows(); ++i) labels[i] = remap[static_cast<std::size_t>(test.labels[i])];
  DatasetIndex compact_index(labels, static_cast<std::size_t>(present));
  auto centers = class_means(emb, dim, compact_index);
  return compactness(emb, labels, centers, dim, p_norm);
}

}  // namespace

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::kIo, "cannot write " + path.string());
  out << text;
  require(static_cast<bool>(out), ErrorKind::kIo, "write failed for " + path.string());
}

void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < jobs; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!first) first = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

Evaluation evaluate(const Checkpoint& ckpt, const Dataset& test, std::span<const std::size_t> class_sizes,
                    std::size_t threshold) {
  require(ckpt.extractor.input_dim() == test.dim, ErrorKind::kDimension,
          "checkpoint expects " + std::to_string(ckpt.extractor.input_dim()) + " features, data has " +
              std::to_string(test.dim));
  const std::size_t k = std::max(class_sizes.size(), test.num_classes());
  Evaluation ev;
  ev.predictions = predict(ckpt, test.features, test.rows());
  ev.overall = macro_metrics(confusion(test.labels, ev.predictions, k));
  std::vector<std::size_t> sizes(class_sizes.begin(), class_sizes.end());
  // Classes the model never saw count as empty training classes.
  sizes.resize(k, 0);
  ev.small_class = small_class_report(ev.overall, sizes, threshold);
  const auto emb = ckpt.extractor.embed(test.features, test.rows());
  ev.compactness = test_compactness(emb, ckpt.extractor.embedding_dim(), test, ckpt.p_norm);
  return ev;
}

CrossvalResult crossval(const TrainConfig& cfg, const Dataset& data, std::size_t k, std::size_t jobs,
                        std::size_t threshold, const JobObserver& observer) {
  const auto splits = stratified_kfold(data.index, k, cfg.seed);
  CrossvalResult result;
  result.folds.resize(k);
  std::mutex observer_mu;
  parallel_for(k, jobs, [&](std::size_t f) {
    TrainConfig fold_cfg = cfg;
    fold_cfg.seed = cfg.seed + f;
    const Dataset train_set = data.subset(splits[f].train);
    const Dataset test_set = data.subset(splits[f].test);
    EpochObserver obs;
    if (observer) {
      const std::string tag = "fold " + std::to_string(f);
      obs = [&, tag](const EpochRecord& rec) {
        std::lock_guard lock(observer_mu);
        observer(tag, rec);
      };
    }
    auto& out = result.folds[f];
    out.fold = f;
    out.seed = fold_cfg.seed;
    out.record = train(fold_cfg, train_set, obs);
    out.eval = evaluate(out.record.final, test_set, train_set.index.class_sizes(), threshold);
  });
  std::vector<MetricsReport> overall, small;
  for (const auto& f : result.folds) {
    overall.push_back(f.eval.overall);
    small.push_back(f.eval.small_class);
  }
  result.aggregate = aggregate(std::move(overall), std::move(small));
  return result;
}

SweepAxis parse_sweep_axis(const std::string& name) {
  if (name == "margin") return SweepAxis::kMargin;
  if (name == "dimension") return SweepAxis::kDimension;
  fail(ErrorKind::kParse, "unknown sweep axis '" + name + "' (expected margin or dimension)");
}

std::string to_string(SweepAxis a) { return a == SweepAxis::kMargin ? "margin" : "dimension"; }

std::vector<SweepRow> sweep(const RunConfig& base, const Dataset& data, SweepAxis axis, std::vector<double> values,
                            std::size_t jobs, const JobObserver& observer) {
  require(!values.empty(), ErrorKind::kContract, "sweep needs at least one value");
  std::sort(values.begin(), values.end());
  std::vector<TrainConfig> configs;
  for (double v : values) {
    RunConfig c = base;
    if (axis == SweepAxis::kMargin) {
      require(v > 0.0, ErrorKind::kContract, "margin values must be positive");
      c.train.hyper.alpha = v;
    } else {
      require(v >= 1.0 && v == std::floor(v), ErrorKind::kContract, "dimension values must be positive integers");
      c.train.model.embedding_dim = static_cast<std::size_t>(v);
    }
    refresh_fingerprint(c);
    configs.push_back(c.train);
  }
  // Every (value, fold) pair is an independent job.
  const std::size_t k = base.eval.folds;
  std::vector<CrossvalResult> per_value(values.size());
  for (auto& r : per_value) r.folds.resize(k);
  std::vector<std::vector<FoldSplit>> splits;
  for (const auto& c : configs) splits.push_back(stratified_kfold(data.index, k, c.seed));
  std::mutex observer_mu;
  parallel_for(values.size() * k, jobs, [&](std::size_t job) {
    const std::size_t vi = job / k, f = job % k;
    TrainConfig fold_cfg = configs[vi];
    fold_cfg.seed += f;
    const Dataset train_set = data.subset(splits[vi][f].train);
    const Dataset test_set = data.subset(splits[vi][f].test);
    EpochObserver obs;
    if (observer) {
      std::ostringstream tag;
      tag << to_string(axis) << '=' << values[vi] << " fold " << f;
      obs = [&, t = tag.str()](const EpochRecord& rec) {
        std::lock_guard lock(observer_mu);
        observer(t, rec);
      };
    }
    auto& out = per_value[vi].folds[f];
    out.fold = f;
    out.seed = fold_cfg.seed;
    out.record = train(fold_cfg, train_set, obs);
    out.eval = evaluate(out.record.final, test_set, train_set.index.class_sizes(), base.eval.small_class_threshold);
    out.record = RunRecord{};  // drop checkpoints early; only metrics are kept
  });
  std::vector<SweepRow> rows;
  for (std::size_t vi = 0; vi < values.size(); ++vi) {
    std::vector<MetricsReport> overall, small;
    for (const auto& f : per_value[vi].folds) {
      overall.push_back(f.eval.overall);
      small.push_back(f.eval.small_class);
    }
    rows.push_back({values[vi], aggregate(std::move(overall), std::move(small))});
  }
  return rows;
}

std::string sweep_csv(SweepAxis axis, const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << to_string(axis) << ",MF1,MCP,MCR,MF1_std\n";
  for (const auto& r : rows) {
    os << r.value << ',' << format_percent(r.aggregate.mf1.mean) << ',' << format_percent(r.aggregate.mcp.mean) << ','
       << format_percent(r.aggregate.mcr.mean) << ',' << format_percent(r.aggregate.mf1.stddev) << '\n';
  }
  return os.str();
}

std::string crossval_json(const CrossvalResult& result) {
  auto j = nlohmann::json::parse(aggregate_json(result.aggregate));
  auto& seeds = j["fold_seeds"] = nlohmann::json::array();
  for (const auto& f : result.folds) seeds.push_back(f.seed);
  return j.dump(2) + "\n";
}

TrainOutcome train_holdout(const RunConfig& cfg, const Dataset& data, std::size_t holdout_fold,
                           const std::filesystem::path& out, const JobObserver& observer) {
  require(holdout_fold < cfg.eval.folds, ErrorKind::kContract,
          "holdout fold " + std::to_string(holdout_fold) + " outside 0.." + std::to_string(cfg.eval.folds - 1));
  std::filesystem::create_directories(out);
  write_text(out / "config.ini", render_config(cfg));
  const auto splits = stratified_kfold(data.index, cfg.eval.folds, cfg.train.seed);
  const Dataset train_set = data.subset(splits[holdout_fold].train);
  const Dataset test_set = data.subset(splits[holdout_fold].test);
  save_csv(test_set, out / "test.csv");

  std::ofstream log(out / "epoch.log");
  require(static_cast<bool>(log), ErrorKind::kIo, "cannot write " + (out / "epoch.log").string());
  EpochObserver obs = [&](const EpochRecord& rec) {
    log << timestamp() << ' ' << rec.stage << " epoch " << rec.epoch << " loss " << rec.mean_loss << " units "
        << rec.units << " seconds " << rec.seconds << '\n';
    log.flush();
    if (observer) observer("train", rec);
  };
  TrainOutcome result;
  result.record = train(cfg.train, train_set, obs);
  if (result.record.stage1) save_checkpoint(*result.record.stage1, out / "stage1.ckpt");
  save_checkpoint(result.record.final, out / "final.ckpt");
  write_text(out / "run_record.json", run_record_json(result.record));
  result.eval = evaluate(result.record.final, test_set, train_set.index.class_sizes(), cfg.eval.small_class_threshold);
  write_text(out / "metrics.json", report_json(result.eval.overall, &result.eval.small_class));
  write_text(out / "metrics.csv", report_csv(result.eval.overall, &result.eval.small_class));
  return result;
}

Evaluation evaluate_to(const std::filesystem::path& checkpoint, const Dataset& data, std::size_t threshold,
                       const std::filesystem::path& out) {
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  auto ev = evaluate(ckpt, data, ckpt.class_sizes, threshold);
  std::filesystem::create_directories(out);
  write_text(out / "metrics.json", report_json(ev.overall, &ev.small_class));
  write_text(out / "metrics.csv", report_csv(ev.overall, &ev.small_class));
  return ev;
}

}  // namespace pcct

// Calibration grid for the desk-scale benchmark.
//
// For every (sigma, stage-1 epochs, stage-2 epochs) cell it cross-validates
// the two-stage model and its ablations on the skin7-like generator and prints
// one row of mean test MF1, tail MF1 and compactness ratios. The numbers in
// docs/pilot.md were produced with this tool.

#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

#include "pcct/config.hpp"
#include "pcct/experiment.hpp"

using namespace pcct;

namespace {

struct Cell {
  double s1 = 0, full = 0, only2 = 0, bce = 0;
  double s1_tail = 0, full_tail = 0, bce_tail = 0;
  double ratio1 = 0, ratio2 = 0;
};

Cell run_cell(const RunConfig& base, const Dataset& data, std::size_t folds) {
  Cell c;
  auto splits = stratified_kfold(data.index, 5, base.train.seed);
  for (std::size_t f = 0; f < folds; ++f) {
    const Dataset tr = data.subset(splits[f].train), te = data.subset(splits[f].test);
    const auto sizes = tr.index.class_sizes();
    TrainConfig cfg = base.train;
    cfg.seed = base.train.seed + f;

    RunRecord rec;
    const Checkpoint s1 = run_stage1(cfg, tr, init_checkpoint(cfg, tr), &rec);
    const Checkpoint s2 = run_stage2(cfg, tr, s1, &rec);
    const Checkpoint o2 = run_stage2(cfg, tr, init_checkpoint(cfg, tr));
    TrainConfig bcfg = cfg;
    bcfg.method = Method::kBaseline;
    const Checkpoint b = run_baseline(bcfg, tr).final;

    const auto e1 = evaluate(s1, te, sizes, base.eval.small_class_threshold);
    const auto e2 = evaluate(s2, te, sizes, base.eval.small_class_threshold);
    const auto eo = evaluate(o2, te, sizes, base.eval.small_class_threshold);
    const auto eb = evaluate(b, te, sizes, base.eval.small_class_threshold);
    c.s1 += e1.overall.mf1;
    c.full += e2.overall.mf1;
    c.only2 += eo.overall.mf1;
    c.bce += eb.overall.mf1;
    c.s1_tail += e1.small_class.mf1;
    c.full_tail += e2.small_class.mf1;
    c.bce_tail += eb.small_class.mf1;
    c.ratio1 += e1.compactness.ratio();
    c.ratio2 += e2.compactness.ratio();
  }
  for (double* v : {&c.s1, &c.full, &c.only2, &c.bce, &c.s1_tail, &c.full_tail, &c.bce_tail, &c.ratio1, &c.ratio2})
    *v /= static_cast<double>(folds);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"benchmark calibration grid"};
  std::string config_path;
  std::vector<double> sigmas{0.8, 1.0};
  std::vector<std::size_t> stage1{50, 100}, stage2{50, 100};
  double mode_radius = 3.0;
  std::size_t folds = 5;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "base configuration (INI)")->check(CLI::ExistingFile);
  app.add_option("--sigma", sigmas, "class standard deviations to try")->delimiter(',');
  app.add_option("--stage1", stage1, "stage-1 epoch counts")->delimiter(',');
  app.add_option("--stage2", stage2, "stage-2 epoch counts")->delimiter(',');
  app.add_option("--mode-radius", mode_radius, "RMS sub-cluster offset of the head classes");
  app.add_option("--folds", folds, "folds of the 5-fold split to run")->check(CLI::Range(1, 5));
  app.add_option("--set", overrides, "config override section.key=value");
  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig base = config_path.empty() ? RunConfig{} : load_config(config_path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw CLI::ValidationError("--set", "expected key=value: " + kv);
      set_option(base, kv.substr(0, eq), kv.substr(eq + 1));
    }
    std::printf("sigma,stage1,stage2,s1_MF1,full_MF1,only_s2_MF1,bce_MF1,s1_tail,full_tail,bce_tail,ratio_s1,ratio_full\n");
    for (double sigma : sigmas) {
      SyntheticSpec spec = preset_spec(base.data.preset, base.data.seed);
      spec.sigmas.assign(spec.num_classes(), sigma);
      spec.mode_radius = mode_radius;
      const Dataset data = gen_gaussian_imbalanced(spec);
      for (std::size_t e1 : stage1) {
        for (std::size_t e2 : stage2) {
          RunConfig cfg = base;
          set_option(cfg, "stage1.epochs", std::to_string(e1));
          set_option(cfg, "stage2.epochs", std::to_string(e2));
          set_option(cfg, "baseline.epochs", std::to_string(e1 + e2));
          const Cell c = run_cell(cfg, data, folds);
          std::printf("%.2f,%zu,%zu,%.2f,%.2f,%.2f,%.2f,%.2f,%.2f,%.2f,%.3f,%.3f\n", sigma, e1, e2, c.s1, c.full,
                      c.only2, c.bce, c.s1_tail, c.full_tail, c.bce_tail, c.ratio1, c.ratio2);
          std::fflush(stdout);
        }
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "pcct_pilot: %s\n", e.what());
    return 1;
  }
  return 0;
}

// pcct: command-line front end over the C API.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pcct_c.h"

namespace {

struct Common {
  std::string config;
  std::string data;
  std::string out = "out";
  std::vector<std::string> overrides;  // key=value
  long long seed = -1;
  std::size_t jobs = 0;
};

int report(pcct_status st) {
  if (st == PCCT_OK) return 0;
  std::cerr << "pcct: " << pcct_status_name(st) << ": " << pcct_last_error() << '\n';
  return static_cast<int>(st);
}

void progress(const char* tag, const char* stage, size_t epoch, double loss, double seconds, void*) {
  std::printf("[%s] %s epoch %zu loss %.6f time %.3fs\n", tag, stage, epoch, loss, seconds);
  std::fflush(stdout);
}

// Owns the handles of one command.
struct Session {
  pcct_config* cfg = nullptr;
  pcct_dataset* data = nullptr;
  ~Session() {
    pcct_config_free(cfg);
    pcct_dataset_free(data);
  }
};

pcct_status open_session(const Common& c, Session& s) {
  pcct_status st = c.config.empty() ? pcct_config_default(&s.cfg) : pcct_config_load(c.config.c_str(), &s.cfg);
  if (st != PCCT_OK) return st;
  for (const auto& kv : c.overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) {
      st = pcct_config_set(s.cfg, kv.c_str(), "");
    } else {
      st = pcct_config_set(s.cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
    }
    if (st != PCCT_OK) return st;
  }
  if (c.seed >= 0) {
    st = pcct_config_set(s.cfg, "run.seed", std::to_string(c.seed).c_str());
    if (st != PCCT_OK) return st;
  }
  if (c.jobs > 0) {
    st = pcct_config_set(s.cfg, "eval.jobs", std::to_string(c.jobs).c_str());
    if (st != PCCT_OK) return st;
  }
  if (!c.data.empty()) {
    st = pcct_config_set(s.cfg, "data.path", c.data.c_str());
    if (st != PCCT_OK) return st;
  }
  return pcct_config_dataset(s.cfg, &s.data);
}

// Reads back one resolved key from the rendered config.
std::string config_value(const pcct_config* cfg, const std::string& section, const std::string& key) {
  char* text = nullptr;
  if (pcct_config_render(cfg, &text) != PCCT_OK) return {};
  std::istringstream is(text);
  pcct_string_free(text);
  std::string line, current;
  while (std::getline(is, line)) {
    if (!line.empty() && line.front() == '[') {
      current = line.substr(1, line.size() - 2);
    } else if (current == section && line.rfind(key + " = ", 0) == 0) {
      return line.substr(key.size() + 3);
    }
  }
  return {};
}

void add_common(CLI::App* cmd, Common& c, bool with_jobs) {
  cmd->add_option("--config", c.config, "run configuration file (INI)")->check(CLI::ExistingFile);
  cmd->add_option("--data", c.data, "CSV dataset; overrides [data] of the config");
  cmd->add_option("--seed", c.seed, "top-level seed; overrides run.seed");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--set", c.overrides, "config override section.key=value (repeatable)");
  if (with_jobs) cmd->add_option("--jobs", c.jobs, "concurrent training jobs");
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::istringstream is(text);
  std::string cell;
  while (std::getline(is, cell, ',')) {
    std::size_t used = 0;
    double v = std::stod(cell, &used);
    if (used != cell.size()) throw CLI::ValidationError("--values", "'" + cell + "' is not a number");
    out.push_back(v);
  }
  if (out.empty()) throw CLI::ValidationError("--values", "at least one value required");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage class-center triplet training for imbalanced classification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", pcct_version());

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic imbalanced dataset");
  std::string preset = "skin7-like", spec_path, gen_out = "data";
  unsigned long long gen_seed = 0;
  auto* preset_opt = gen->add_option("--preset", preset, "skin7-like, chestxray-like or separable-3");
  gen->add_option("--spec", spec_path, "JSON spec file instead of a preset")->check(CLI::ExistingFile)->excludes(preset_opt);
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_out, "output directory (data.csv, data.spec.json)");

  // train
  auto* tr = app.add_subcommand("train", "train on all folds but one and evaluate on the held-out fold");
  Common tr_c;
  std::size_t holdout = 0;
  add_common(tr, tr_c, true);
  tr->add_option("--fold", holdout, "held-out fold index of the eval.folds split");

  // eval
  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on a CSV dataset");
  std::string ckpt_path, ev_data, ev_out = "eval";
  std::size_t threshold = 20;
  ev->add_option("--checkpoint", ckpt_path, "checkpoint file")->required()->check(CLI::ExistingFile);
  ev->add_option("--data", ev_data, "CSV dataset")->required()->check(CLI::ExistingFile);
  ev->add_option("--out", ev_out, "output directory");
  ev->add_option("--threshold", threshold, "small-class size threshold")->check(CLI::PositiveNumber);

  // sweep
  auto* sw = app.add_subcommand("sweep", "cross-validated sweep over the margin or the embedding dimension");
  Common sw_c;
  std::string axis, values_text;
  add_common(sw, sw_c, true);
  sw->add_option("--axis", axis, "margin or dimension")->required()->check(CLI::IsMember({"margin", "dimension"}));
  sw->add_option("--values", values_text, "comma-separated axis values")->required();

  // crossval
  auto* cv = app.add_subcommand("crossval", "stratified k-fold cross-validation");
  Common cv_c;
  std::size_t folds = 0;
  add_common(cv, cv_c, true);
  cv->add_option("--folds", folds, "number of folds (default eval.folds)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (gen->parsed()) {
    pcct_dataset* data = nullptr;
    pcct_status st = spec_path.empty() ? pcct_dataset_generate(preset.c_str(), gen_seed, &data)
                                       : pcct_dataset_generate_from_spec(spec_path.c_str(), &data);
    if (st != PCCT_OK) return report(st);
    std::error_code ec;
    std::filesystem::create_directories(gen_out, ec);
    const auto csv = (std::filesystem::path(gen_out) / "data.csv").string();
    const auto side = (std::filesystem::path(gen_out) / "data.spec.json").string();
    st = pcct_dataset_save(data, csv.c_str(), side.c_str());
    size_t rows = 0, dim = 0, classes = 0;
    pcct_dataset_shape(data, &rows, &dim, &classes);
    pcct_dataset_free(data);
    if (st != PCCT_OK) return report(st);
    std::printf("wrote %s (%zu rows, %zu features, %zu classes)\n", csv.c_str(), rows, dim, classes);
    return 0;
  }

  if (ev->parsed()) {
    pcct_dataset* data = nullptr;
    pcct_status st = pcct_dataset_load_csv(ev_data.c_str(), &data);
    if (st != PCCT_OK) return report(st);
    double mf1 = 0.0;
    st = pcct_evaluate(ckpt_path.c_str(), data, threshold, ev_out.c_str(), &mf1);
    pcct_dataset_free(data);
    if (st != PCCT_OK) return report(st);
    std::printf("MF1 %.2f -> %s\n", mf1, ev_out.c_str());
    return 0;
  }

  if (tr->parsed()) {
    Session s;
    if (auto st = open_session(tr_c, s); st != PCCT_OK) return report(st);
    double mf1 = 0.0;
    if (auto st = pcct_train(s.cfg, s.data, holdout, tr_c.out.c_str(), progress, nullptr, &mf1); st != PCCT_OK) {
      return report(st);
    }
    std::printf("held-out fold %zu MF1 %.2f -> %s\n", holdout, mf1, tr_c.out.c_str());
    return 0;
  }

  if (cv->parsed()) {
    Session s;
    if (auto st = open_session(cv_c, s); st != PCCT_OK) return report(st);
    const std::size_t k = folds ? folds : std::stoul(config_value(s.cfg, "eval", "folds"));
    const std::size_t jobs = std::stoul(config_value(s.cfg, "eval", "jobs"));
    double mean = 0.0;
    if (auto st = pcct_crossval(s.cfg, s.data, k, jobs, cv_c.out.c_str(), progress, nullptr, &mean); st != PCCT_OK) {
      return report(st);
    }
    std::printf("%zu-fold mean MF1 %.2f -> %s\n", k, mean, cv_c.out.c_str());
    return 0;
  }

  if (sw->parsed()) {
    std::vector<double> values;
    try {
      values = parse_values(values_text);
    } catch (const std::exception& e) {
      std::cerr << "pcct: --values: " << e.what() << '\n';
      return 2;
    }
    Session s;
    if (auto st = open_session(sw_c, s); st != PCCT_OK) return report(st);
    const std::size_t jobs = std::stoul(config_value(s.cfg, "eval", "jobs"));
    if (auto st = pcct_sweep(s.cfg, s.data, axis.c_str(), values.data(), values.size(), jobs, sw_c.out.c_str(), progress,
                             nullptr);
        st != PCCT_OK) {
      return report(st);
    }
    std::printf("wrote %s\n", (std::filesystem::path(sw_c.out) / "sweep.csv").string().c_str());
    return 0;
  }
  return 0;
}

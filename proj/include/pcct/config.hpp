#pragma once

// Run configuration files: flat INI sections of key = value lines.
//
//   [run]      method (pcct | baseline:bce|wce|oce|wfce), seed, early_stop_patience
//   [model]    hidden (comma list), embedding_dim, activation, normalization
//   [optim]    learning_rate, beta1, beta2, epsilon
//   [loss]     alpha, beta, p_norm
//   [stage1]   epochs, m_per_class, loss, mining, lambda_ce, batches_per_epoch
//   [stage2]   epochs, batch_size, loss, center_mode, center_init, learning_rate,
//              freeze_layers, final_centers
//   [baseline] epochs, batch_size, focal_gamma
//   [data]     preset, path, seed
//   [eval]     folds, small_class_threshold, jobs
//
// Unknown sections or keys are errors.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pcct/data.hpp"
#include "pcct/trainer.hpp"

namespace pcct {

struct DataConfig {
  std::string preset = "skin7-like";
  std::string path;  // CSV; overrides the preset when set
  std::uint64_t seed = 0;
};

struct EvalConfig {
  std::size_t folds = 5;
  std::size_t small_class_threshold = 20;
  std::size_t jobs = 1;
};

struct RunConfig {
  TrainConfig train;
  DataConfig data;
  EvalConfig eval;
  bool stage2_lr_explicit = false;  // otherwise follows optim.learning_rate
};

// Sets "section.key" from its text form.
void set_option(RunConfig& cfg, const std::string& dotted_key, const std::string& value);
std::vector<std::string> option_keys();

RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::filesystem::path& path);

// Every key with its resolved value, in a fixed order.
std::string render_config(const RunConfig& cfg);

// Recomputes cfg.train.fingerprint from the training-relevant sections.
void refresh_fingerprint(RunConfig& cfg);

Dataset load_dataset(const DataConfig& data);

}  // namespace pcct

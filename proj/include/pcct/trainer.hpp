#pragma once

// Two-stage training: class-balanced metric learning (stage 1) followed by
// class-center loss fine-tuning (stage 2), plus the cross-entropy baselines.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pcct/centers.hpp"
#include "pcct/checkpoint.hpp"
#include "pcct/data.hpp"
#include "pcct/losses.hpp"
#include "pcct/nn.hpp"
#include "pcct/sampling.hpp"

namespace pcct {

enum class Method { kPcct, kBaseline };
enum class Stage1Loss { kTriplet, kPairwise, kQuadruplet };
enum class Stage2Loss { kCenterTriplet, kCenterPairwise, kCenterQuadruplet };
enum class BaselineStrategy { kBce, kWce, kOce, kWfce };
enum class FinalCenters { kAuto, kComputed, kLearned };

std::string to_string(Stage1Loss l);
std::string to_string(Stage2Loss l);
std::string to_string(BaselineStrategy s);
std::string to_string(FinalCenters f);
Stage1Loss parse_stage1_loss(const std::string& s);
Stage2Loss parse_stage2_loss(const std::string& s);
BaselineStrategy parse_baseline(const std::string& s);
FinalCenters parse_final_centers(const std::string& s);

struct ModelConfig {
  std::vector<std::size_t> hidden{64, 64};
  std::size_t embedding_dim = 128;
  Activation activation = Activation::kRelu;
  Normalization normalization = Normalization::kL2;
};

struct Stage1Config {
  std::size_t epochs = 200;
  std::size_t m_per_class = 10;
  Stage1Loss loss = Stage1Loss::kTriplet;
  Mining mining = Mining::kRandomHard;
  double lambda_ce = 0.0;  // weight of an added cross-entropy term; 0 = metric loss only
  std::size_t batches_per_epoch = 0;  // 0: ceil(N / (m * K))
};

struct Stage2Config {
  std::size_t epochs = 200;
  std::size_t batch_size = 16;
  Stage2Loss loss = Stage2Loss::kCenterTriplet;
  CenterMode center_mode = CenterMode::kComputed;
  CenterInit center_init = CenterInit::kFromComputed;
  double learning_rate = 1e-4;
  std::size_t freeze_layers = 0;  // leading extractor layers kept fixed
  // kAuto: computed mode -> recomputed from the final parameters,
  // trainable mode -> the learned rows.
  FinalCenters final_centers = FinalCenters::kAuto;
};

struct BaselineConfig {
  BaselineStrategy strategy = BaselineStrategy::kBce;
  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  double focal_gamma = 2.0;
};

struct TrainConfig {
  Method method = Method::kPcct;
  ModelConfig model;
  LossHyper hyper;
  AdamConfig adam;
  Stage1Config stage1;
  Stage2Config stage2;
  BaselineConfig baseline;
  std::uint64_t seed = 0;
  // Stop a stage after this many epochs without a lower mean loss; 0 = off.
  std::size_t early_stop_patience = 0;
  std::uint64_t fingerprint = 0;  // of the effective config text
};

void validate(const TrainConfig& cfg, const Dataset& train);

struct EpochRecord {
  std::string stage;  // "stage1", "stage2", "baseline"
  std::size_t epoch = 0;  // 1-based within the stage
  double mean_loss = 0.0;
  std::size_t units = 0;  // triplets / pairs / quadruplets / samples used
  double seconds = 0.0;   // wall time; excluded from deterministic outputs
  std::uint64_t start_fingerprint = 0;  // extractor parameters at epoch start
  std::uint64_t centers_fingerprint = 0;  // extractor parameters the centers came from
  std::int64_t centers_epoch = -1;
};

using EpochObserver = std::function<void(const EpochRecord&)>;

struct RunRecord {
  std::string method;
  std::vector<EpochRecord> epochs;
  bool stage2_converged = false;  // stopped because no unit had a positive loss
  std::optional<Checkpoint> stage1;
  Checkpoint final;
};

// Fresh, seeded model for `train`.
Checkpoint init_checkpoint(const TrainConfig& cfg, const Dataset& train);

// Balanced-batch metric learning. The returned checkpoint carries centers
// computed from its final parameters.
Checkpoint run_stage1(const TrainConfig& cfg, const Dataset& train, Checkpoint init, RunRecord* record = nullptr,
                      const EpochObserver& observer = {});

// Center-loss fine-tuning starting from `from`.
Checkpoint run_stage2(const TrainConfig& cfg, const Dataset& train, const Checkpoint& from, RunRecord* record = nullptr,
                      const EpochObserver& observer = {});

RunRecord run_pcct(const TrainConfig& cfg, const Dataset& train, const EpochObserver& observer = {});

// Pair-wise / quadruplet variants: the original loss in stage 1, its center
// form in stage 2.
RunRecord run_extension(const TrainConfig& cfg, const Dataset& train, const EpochObserver& observer = {});

RunRecord run_baseline(const TrainConfig& cfg, const Dataset& train, const EpochObserver& observer = {});

// Dispatches on cfg.method.
RunRecord train(const TrainConfig& cfg, const Dataset& train, const EpochObserver& observer = {});

std::string method_name(const TrainConfig& cfg);

// JSON rendering without wall times, so reruns compare byte-equal.
std::string run_record_json(const RunRecord& record);

}  // namespace pcct

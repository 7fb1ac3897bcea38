#pragma once

// Binary checkpoint container.
//
// Layout (all integers and floats little-endian):
//   magic     "PCCTCKPT" (8 bytes)
//   u32       format version (1)
//   u64       config fingerprint
//   i64       epoch
//   u8        activation (0 relu, 1 tanh)
//   u8        embedding normalization (0 none, 1 l2)
//   u8        p of the L_p distance used for nearest-center prediction
//   u8        center mode (0 none, 1 computed, 2 trainable)
//   i64       center source epoch
//   u64       center source fingerprint
//   u32       class count, then u64 training-set size per class
//   u32       tensor count, then per tensor:
//               u32 name length, name bytes, u32 rank, u64 extents..., f64 values...
// Tensor names: "extractor.<i>.weight", "extractor.<i>.bias", "head.weight",
// "head.bias", "centers".

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "pcct/centers.hpp"
#include "pcct/nn.hpp"

namespace pcct {

struct Checkpoint {
  FeatureExtractor extractor;
  std::optional<Linear> head;
  std::optional<CenterTable> centers;
  std::int64_t epoch = 0;
  int p_norm = 2;
  std::uint64_t config_fingerprint = 0;
  std::vector<std::size_t> class_sizes;  // training-set class sizes
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Predicted labels for row-major features: argmax of the head when present,
// nearest class center otherwise.
std::vector<int> predict(const Checkpoint& ckpt, std::span<const double> features, std::size_t rows);

}  // namespace pcct

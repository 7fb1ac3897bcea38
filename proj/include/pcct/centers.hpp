#pragma once

// Class-center tables: computed (per-class mean embeddings) or trainable.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pcct/data.hpp"
#include "pcct/nn.hpp"
#include "pcct/tensor.hpp"

namespace pcct {

enum class CenterMode { kComputed, kTrainable };
enum class CenterInit { kFromComputed, kRandom };

std::string to_string(CenterMode m);
CenterMode parse_center_mode(const std::string& name);
std::string to_string(CenterInit i);
CenterInit parse_center_init(const std::string& name);

struct CenterTable {
  Tensor centers;  // [K, D]; requires_grad in trainable mode
  CenterMode mode = CenterMode::kComputed;
  std::int64_t source_epoch = -1;  // epoch whose parameters produced computed rows
  std::uint64_t source_fingerprint = 0;  // extractor fingerprint those rows came from

  std::size_t num_classes() const { return centers.dim(0); }
  std::size_t dim() const { return centers.dim(1); }
  std::span<const double> row(std::size_t k) const { return centers.values().subspan(k * dim(), dim()); }
  CenterTable clone() const;
};

// Row k = mean of f(x) over class-k samples of `data`.
CenterTable compute_centers(const FeatureExtractor& extractor, const Dataset& data, std::int64_t source_epoch = -1);

// Mean of the rows of `embeddings` per class; the reduction runs in sample order.
std::vector<double> class_means(std::span<const double> embeddings, std::size_t dim, const DatasetIndex& index);

CenterTable init_trainable_centers(std::size_t num_classes, std::size_t dim, CenterInit init, Rng& rng,
                                   const CenterTable* computed = nullptr);

struct CenterPrediction {
  int label = 0;
  std::vector<double> distances;
};

// argmin_k ||f - c_k||_p; ties go to the smallest class id.
CenterPrediction nearest_center_predict(std::span<const double> embedding, const CenterTable& table, int p_norm);
std::vector<int> nearest_center_predict_all(std::span<const double> embeddings, const CenterTable& table, int p_norm);

}  // namespace pcct

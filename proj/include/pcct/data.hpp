#pragma once

// Synthetic imbalanced Gaussian datasets and CSV ingestion.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pcct/sampling.hpp"

namespace pcct {

struct Dataset {
  std::size_t dim = 0;
  std::vector<double> features;  // row-major [rows, dim]
  std::vector<int> labels;
  DatasetIndex index;

  Dataset() = default;
  Dataset(std::size_t dim, std::vector<double> features, std::vector<int> labels, std::size_t num_classes = 0);

  std::size_t rows() const { return labels.size(); }
  std::size_t num_classes() const { return index.num_classes(); }
  std::span<const double> row(std::size_t i) const { return {features.data() + i * dim, dim}; }
  // Row-major copy of the selected rows.
  std::vector<double> gather(std::span<const std::size_t> rows) const;
  // New dataset of the selected rows; keeps the class count.
  Dataset subset(std::span<const std::size_t> rows) const;
  std::uint64_t fingerprint() const;
};

struct SyntheticSpec {
  std::string name = "custom";
  std::vector<std::size_t> class_sizes;
  std::size_t input_dim = 2;
  std::vector<double> means;   // row-major [K, input_dim]
  std::vector<double> sigmas;  // per class
  // Optional sub-clusters: class k draws its samples round-robin from modes[k]
  // Gaussians whose centers sit around mean_k with RMS offset mode_radius and
  // average exactly mean_k. Empty means one mode per class.
  std::vector<std::size_t> modes;
  double mode_radius = 0.0;
  std::uint64_t seed = 0;

  std::size_t num_classes() const { return class_sizes.size(); }
  double imbalance_ratio() const;
  void validate() const;
};

// Presets: "skin7-like" (K=7, 335..6, in_dim 16, multi-modal head classes),
// "chestxray-like" (1000/100/15), "separable-3" (balanced, well separated).
SyntheticSpec preset_spec(const std::string& name, std::uint64_t seed);

// Sub-cluster centers of every class, row-major [sum(modes), input_dim].
std::vector<double> mode_centers(const SyntheticSpec& spec);
std::vector<std::string> preset_names();

Dataset gen_gaussian_imbalanced(const SyntheticSpec& spec);

// Header `label,f0,f1,...`; one sample per line.
Dataset load_csv(const std::filesystem::path& path);
void save_csv(const Dataset& data, const std::filesystem::path& path);

// Sidecar JSON recording a generator spec (seed and parameters).
void save_spec_json(const SyntheticSpec& spec, const std::filesystem::path& path);
SyntheticSpec load_spec_json(const std::filesystem::path& path);

}  // namespace pcct

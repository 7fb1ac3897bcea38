#pragma once

// Batch construction and triplet / pair / quadruplet formation.
//
// Stage-1 batches are class-balanced: exactly m samples from every class,
// drawn with replacement when a class holds fewer than m samples. Units
// (triplets, pairs, quadruplets) refer to positions inside a batch, not to
// dataset rows.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pcct/losses.hpp"
#include "pcct/rng.hpp"

namespace pcct {

class DatasetIndex {
 public:
  DatasetIndex() = default;
  // K defaults to max(label) + 1.
  explicit DatasetIndex(std::span<const int> labels, std::size_t num_classes = 0);

  std::size_t num_classes() const { return members_.size(); }
  std::size_t num_samples() const { return labels_.size(); }
  const std::vector<std::size_t>& members(std::size_t k) const { return members_.at(k); }
  std::vector<std::size_t> class_sizes() const;
  int label(std::size_t sample) const { return labels_.at(sample); }
  const std::vector<int>& labels() const { return labels_; }

 private:
  std::vector<std::vector<std::size_t>> members_;
  std::vector<int> labels_;
};

enum class Stage { kStage1, kStage2 };

struct BatchPlan {
  std::vector<std::size_t> indices;  // dataset rows, in batch order
  std::vector<int> labels;           // label of each batch position
  std::size_t m_per_class = 0;       // stage 1
  std::size_t batch_size = 0;        // stage 2
  Stage stage = Stage::kStage1;
};

struct Triplet {
  std::size_t anchor, positive, negative;
};

struct Pair {
  std::size_t a, b;
  bool same_class;
};

struct Quadruplet {
  std::size_t anchor, positive, negative1, negative2;
};

// Anchor position paired with one negative class center.
struct CenterTriplet {
  std::size_t anchor;
  int negative_class;
};

enum class Mining { kRandom, kRandomHard };

std::string to_string(Mining m);
Mining parse_mining(const std::string& name);

BatchPlan build_balanced_batch(const DatasetIndex& index, std::size_t m_per_class, Rng& rng);

// Uniform flat batches covering a shuffled order of `rows`; the last batch may be short.
std::vector<BatchPlan> build_flat_batches(const DatasetIndex& index, std::span<const std::size_t> rows,
                                          std::size_t batch_size, Rng& rng);

// `embeddings` is row-major [batch size, dim]. Anchors without an in-batch
// positive are skipped.
std::vector<Triplet> form_triplets(const BatchPlan& batch, std::span<const double> embeddings, std::size_t dim,
                                   Mining strategy, const LossHyper& hyper, Rng& rng);

// Every (anchor, class k != class(anchor)) with a strictly positive center-triplet loss.
std::vector<CenterTriplet> form_center_triplets(std::span<const int> batch_labels, std::span<const double> embeddings,
                                                std::span<const double> centers, std::size_t dim,
                                                const LossHyper& hyper);

std::vector<Pair> form_pairs(const BatchPlan& batch, Rng& rng);

std::vector<Quadruplet> form_quadruplets(const BatchPlan& batch, Rng& rng);

// One epoch of the oversampling baseline: every class contributes max_k N_k
// draws with replacement; the stream is shuffled.
std::vector<std::size_t> oversample_indices(const DatasetIndex& index, Rng& rng);

// L_p distance between two raw rows.
double row_distance(std::span<const double> x, std::span<const double> y, int p_norm);

}  // namespace pcct

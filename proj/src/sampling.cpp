#include "pcct/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "pcct/error.hpp"

namespace pcct {

namespace {

// Batch positions grouped by label, in label order.
std::map<int, std::vector<std::size_t>> positions_by_class(std::span<const int> labels) {
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(i);
  return groups;
}

std::vector<int> other_classes(const std::map<int, std::vector<std::size_t>>& groups, int exclude_a,
                               int exclude_b = std::numeric_limits<int>::min()) {
  std::vector<int> out;
  for (const auto& [k, _] : groups) {
    if (k != exclude_a && k != exclude_b) out.push_back(k);
  }
  return out;
}

std::size_t pick_other(const std::vector<std::size_t>& pool, std::size_t self, Rng& rng) {
  // uniform over pool \ {self}; pool contains self exactly once
  std::size_t j = uniform_index(rng, pool.size() - 1);
  auto it = std::find(pool.begin(), pool.end(), self);
  auto pos = static_cast<std::size_t>(it - pool.begin());
  return pool[j >= pos ? j + 1 : j];
}

std::span<const double> row_of(std::span<const double> m, std::size_t i, std::size_t dim) {
  return m.subspan(i * dim, dim);
}

}  // namespace

DatasetIndex::DatasetIndex(std::span<const int> labels, std::size_t num_classes) : labels_(labels.begin(), labels.end()) {
  std::size_t k = num_classes;
  for (int l : labels) {
    require(l >= 0, ErrorKind::kContract, "labels must be nonnegative");
    k = std::max(k, static_cast<std::size_t>(l) + 1);
  }
  require(num_classes == 0 || k == num_classes, ErrorKind::kContract, "label exceeds the declared class count");
  members_.resize(k);
  for (std::size_t i = 0; i < labels.size(); ++i) members_[static_cast<std::size_t>(labels[i])].push_back(i);
}

std::vector<std::size_t> DatasetIndex::class_sizes() const {
  std::vector<std::size_t> s;
  s.reserve(members_.size());
  for (const auto& m : members_) s.push_back(m.size());
  return s;
}

std::string to_string(Mining m) { return m == Mining::kRandom ? "random" : "random_hard"; }

Mining parse_mining(const std::string& name) {
  if (name == "random") return Mining::kRandom;
  if (name == "random_hard") return Mining::kRandomHard;
  fail(ErrorKind::kParse, "unknown mining strategy '" + name + "'");
}

double row_distance(std::span<const double> x, std::span<const double> y, int p_norm) {
  double s = 0.0;
  if (p_norm == 2) {
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
    return std::sqrt(s);
  }
  if (p_norm == 1) {
    for (std::size_t i = 0; i < x.size(); ++i) s += std::abs(x[i] - y[i]);
    return s;
  }
  for (std::size_t i = 0; i < x.size(); ++i) s += std::pow(std::abs(x[i] - y[i]), p_norm);
  return std::pow(s, 1.0 / p_norm);
}

BatchPlan build_balanced_batch(const DatasetIndex& index, std::size_t m_per_class, Rng& rng) {
  require(m_per_class >= 1, ErrorKind::kContract, "m_per_class must be at least 1");
  require(index.num_classes() >= 1, ErrorKind::kContract, "balanced batch needs at least one class");
  BatchPlan plan;
  plan.stage = Stage::kStage1;
  plan.m_per_class = m_per_class;
  std::vector<std::pair<std::size_t, int>> picked;
  picked.reserve(m_per_class * index.num_classes());
  for (std::size_t k = 0; k < index.num_classes(); ++k) {
    const auto& members = index.members(k);
    require(!members.empty(), ErrorKind::kContract, "class " + std::to_string(k) + " has no samples");
    if (members.size() >= m_per_class) {
      std::vector<std::size_t> pool(members);
      for (std::size_t i = 0; i < m_per_class; ++i) {
        std::size_t j = i + uniform_index(rng, pool.size() - i);
        std::swap(pool[i], pool[j]);
        picked.emplace_back(pool[i], static_cast<int>(k));
      }
    } else {
      for (std::size_t i = 0; i < m_per_class; ++i) {
        picked.emplace_back(members[uniform_index(rng, members.size())], static_cast<int>(k));
      }
    }
  }
  std::shuffle(picked.begin(), picked.end(), rng);
  for (const auto& [row, label] : picked) {
    plan.indices.push_back(row);
    plan.labels.push_back(label);
  }
  return plan;
}

std::vector<BatchPlan> build_flat_batches(const DatasetIndex& index, std::span<const std::size_t> rows,
                                          std::size_t batch_size, Rng& rng) {
  require(batch_size >= 1, ErrorKind::kContract, "batch_size must be at least 1");
  std::vector<std::size_t> order(rows.begin(), rows.end());
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<BatchPlan> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    BatchPlan plan;
    plan.stage = Stage::kStage2;
    plan.batch_size = batch_size;
    const std::size_t end = std::min(order.size(), start + batch_size);
    for (std::size_t i = start; i < end; ++i) {
      plan.indices.push_back(order[i]);
      plan.labels.push_back(index.label(order[i]));
    }
    batches.push_back(std::move(plan));
  }
  return batches;
}

std::vector<Triplet> form_triplets(const BatchPlan& batch, std::span<const double> embeddings, std::size_t dim,
                                   Mining strategy, const LossHyper& hyper, Rng& rng) {
  const auto groups = positions_by_class(batch.labels);
  require(groups.size() >= 2, ErrorKind::kContract, "form_triplets: batch must contain at least two classes");
  require(embeddings.size() == batch.labels.size() * dim, ErrorKind::kDimension,
          "form_triplets: embedding matrix does not match the batch");
  std::vector<Triplet> out;
  out.reserve(batch.labels.size());
  for (std::size_t a = 0; a < batch.labels.size(); ++a) {
    const int y = batch.labels[a];
    const auto& same = groups.at(y);
    if (same.size() < 2) continue;
    const std::size_t p = pick_other(same, a, rng);
    std::size_t n = 0;
    if (strategy == Mining::kRandom) {
      const auto classes = other_classes(groups, y);
      const auto& pool = groups.at(classes[uniform_index(rng, classes.size())]);
      n = pool[uniform_index(rng, pool.size())];
    } else {
      const auto fa = row_of(embeddings, a, dim);
      const double d_ap = row_distance(fa, row_of(embeddings, p, dim), hyper.p_norm);
      std::vector<std::size_t> semi_hard;
      std::size_t hardest = 0;
      double hardest_d = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < batch.labels.size(); ++j) {
        if (batch.labels[j] == y) continue;
        const double d_an = row_distance(fa, row_of(embeddings, j, dim), hyper.p_norm);
        if (d_an > d_ap && d_an < d_ap + hyper.alpha) semi_hard.push_back(j);
        if (d_an < hardest_d) {
          hardest_d = d_an;
          hardest = j;
        }
      }
      n = semi_hard.empty() ? hardest : semi_hard[uniform_index(rng, semi_hard.size())];
    }
    out.push_back({a, p, n});
  }
  return out;
}

std::vector<CenterTriplet> form_center_triplets(std::span<const int> batch_labels, std::span<const double> embeddings,
                                                std::span<const double> centers, std::size_t dim,
                                                const LossHyper& hyper) {
  require(dim > 0 && centers.size() % dim == 0, ErrorKind::kDimension, "form_center_triplets: bad center matrix");
  require(embeddings.size() == batch_labels.size() * dim, ErrorKind::kDimension,
          "form_center_triplets: embedding matrix does not match the batch");
  const std::size_t k_total = centers.size() / dim;
  std::vector<CenterTriplet> out;
  for (std::size_t a = 0; a < batch_labels.size(); ++a) {
    const auto y = static_cast<std::size_t>(batch_labels[a]);
    require(y < k_total, ErrorKind::kContract, "form_center_triplets: centers do not cover class " + std::to_string(y));
    const auto fa = row_of(embeddings, a, dim);
    const double d_pos = row_distance(fa, row_of(centers, y, dim), hyper.p_norm);
    for (std::size_t k = 0; k < k_total; ++k) {
      if (k == y) continue;
      const double d_neg = row_distance(fa, row_of(centers, k, dim), hyper.p_norm);
      if ((d_pos - d_neg) + hyper.alpha > 0.0) out.push_back({a, static_cast<int>(k)});
    }
  }
  return out;
}

std::vector<Pair> form_pairs(const BatchPlan& batch, Rng& rng) {
  const auto groups = positions_by_class(batch.labels);
  require(groups.size() >= 2, ErrorKind::kContract, "form_pairs: batch must contain at least two classes");
  std::vector<Pair> out;
  out.reserve(2 * batch.labels.size());
  for (std::size_t a = 0; a < batch.labels.size(); ++a) {
    const int y = batch.labels[a];
    const auto& same = groups.at(y);
    if (same.size() >= 2) out.push_back({a, pick_other(same, a, rng), true});
    const auto classes = other_classes(groups, y);
    const auto& pool = groups.at(classes[uniform_index(rng, classes.size())]);
    out.push_back({a, pool[uniform_index(rng, pool.size())], false});
  }
  return out;
}

std::vector<Quadruplet> form_quadruplets(const BatchPlan& batch, Rng& rng) {
  const auto groups = positions_by_class(batch.labels);
  require(groups.size() >= 3, ErrorKind::kContract, "form_quadruplets: batch must contain at least three classes");
  std::vector<Quadruplet> out;
  out.reserve(batch.labels.size());
  for (std::size_t a = 0; a < batch.labels.size(); ++a) {
    const int y = batch.labels[a];
    const auto& same = groups.at(y);
    if (same.size() < 2) continue;
    const std::size_t p = pick_other(same, a, rng);
    const auto first = other_classes(groups, y);
    const int c1 = first[uniform_index(rng, first.size())];
    const auto second = other_classes(groups, y, c1);
    const int c2 = second[uniform_index(rng, second.size())];
    const auto& pool1 = groups.at(c1);
    const auto& pool2 = groups.at(c2);
    out.push_back({a, p, pool1[uniform_index(rng, pool1.size())], pool2[uniform_index(rng, pool2.size())]});
  }
  return out;
}

std::vector<std::size_t> oversample_indices(const DatasetIndex& index, Rng& rng) {
  std::size_t largest = 0;
  for (std::size_t k = 0; k < index.num_classes(); ++k) largest = std::max(largest, index.members(k).size());
  std::vector<std::size_t> stream;
  stream.reserve(largest * index.num_classes());
  for (std::size_t k = 0; k < index.num_classes(); ++k) {
    const auto& members = index.members(k);
    if (members.empty()) continue;
    for (std::size_t i = 0; i < largest; ++i) stream.push_back(members[uniform_index(rng, members.size())]);
  }
  std::shuffle(stream.begin(), stream.end(), rng);
  return stream;
}

}  // namespace pcct

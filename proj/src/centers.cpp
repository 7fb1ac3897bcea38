#include "pcct/centers.hpp"

#include "pcct/error.hpp"

namespace pcct {

std::string to_string(CenterMode m) { return m == CenterMode::kComputed ? "computed" : "trainable"; }

CenterMode parse_center_mode(const std::string& name) {
  if (name == "computed") return CenterMode::kComputed;
  if (name == "trainable") return CenterMode::kTrainable;
  fail(ErrorKind::kParse, "unknown center mode '" + name + "'");
}

std::string to_string(CenterInit i) { return i == CenterInit::kFromComputed ? "from_computed" : "random"; }

CenterInit parse_center_init(const std::string& name) {
  if (name == "from_computed") return CenterInit::kFromComputed;
  if (name == "random") return CenterInit::kRandom;
  fail(ErrorKind::kParse, "unknown center init '" + name + "'");
}

CenterTable CenterTable::clone() const {
  CenterTable t = *this;
  t.centers = centers.clone();
  return t;
}

std::vector<double> class_means(std::span<const double> embeddings, std::size_t dim, const DatasetIndex& index) {
  const std::size_t k_total = index.num_classes();
  std::vector<double> means(k_total * dim, 0.0);
  for (std::size_t k = 0; k < k_total; ++k) {
    const auto& members = index.members(k);
    require(!members.empty(), ErrorKind::kContract, "class " + std::to_string(k) + " has no samples; cannot compute its center");
    double* out = means.data() + k * dim;
    for (auto i : members) {
      const double* e = embeddings.data() + i * dim;
      for (std::size_t j = 0; j < dim; ++j) out[j] += e[j];
    }
    const double inv = 1.0 / static_cast<double>(members.size());
    for (std::size_t j = 0; j < dim; ++j) out[j] *= inv;
  }
  return means;
}

CenterTable compute_centers(const FeatureExtractor& extractor, const Dataset& data, std::int64_t source_epoch) {
  require(data.dim == extractor.input_dim(), ErrorKind::kDimension, "compute_centers: data width differs from extractor input");
  const std::size_t d = extractor.embedding_dim();
  auto emb = extractor.embed(data.features, data.rows());
  CenterTable table;
  table.centers = Tensor::matrix(data.num_classes(), d, class_means(emb, d, data.index));
  table.mode = CenterMode::kComputed;
  table.source_epoch = source_epoch;
  table.source_fingerprint = extractor.fingerprint();
  return table;
}

CenterTable init_trainable_centers(std::size_t num_classes, std::size_t dim, CenterInit init, Rng& rng,
                                   const CenterTable* computed) {
  require(num_classes >= 1 && dim >= 1, ErrorKind::kContract, "trainable centers need K, D >= 1");
  CenterTable table;
  table.mode = CenterMode::kTrainable;
  if (init == CenterInit::kFromComputed) {
    require(computed != nullptr, ErrorKind::kContract, "from_computed initialization needs a computed table");
    require(computed->num_classes() == num_classes && computed->dim() == dim, ErrorKind::kDimension,
            "computed table shape differs from the requested trainable table");
    auto v = computed->centers.values();
    table.centers = Tensor::matrix(num_classes, dim, std::vector<double>(v.begin(), v.end()), true);
    table.source_epoch = computed->source_epoch;
    table.source_fingerprint = computed->source_fingerprint;
  } else {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> v(num_classes * dim);
    for (auto& x : v) x = normal(rng);
    table.centers = Tensor::matrix(num_classes, dim, std::move(v), true);
  }
  return table;
}

CenterPrediction nearest_center_predict(std::span<const double> embedding, const CenterTable& table, int p_norm) {
  require(embedding.size() == table.dim(), ErrorKind::kDimension, "nearest_center_predict: embedding width differs from centers");
  CenterPrediction pred;
  pred.distances.resize(table.num_classes());
  for (std::size_t k = 0; k < table.num_classes(); ++k) {
    pred.distances[k] = row_distance(embedding, table.row(k), p_norm);
    if (pred.distances[k] < pred.distances[static_cast<std::size_t>(pred.label)]) pred.label = static_cast<int>(k);
  }
  return pred;
}

std::vector<int> nearest_center_predict_all(std::span<const double> embeddings, const CenterTable& table, int p_norm) {
  const std::size_t d = table.dim();
  require(embeddings.size() % d == 0, ErrorKind::kDimension, "embedding matrix width differs from centers");
  std::vector<int> out;
  out.reserve(embeddings.size() / d);
  for (std::size_t i = 0; i * d < embeddings.size(); ++i) {
    out.push_back(nearest_center_predict(embeddings.subspan(i * d, d), table, p_norm).label);
  }
  return out;
}

}  // namespace pcct

#include "pcct/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include "pcct/error.hpp"

namespace pcct {

namespace {

constexpr std::array<char, 8> kMagic = {'P', 'C', 'C', 'T', 'C', 'K', 'P', 'T'};

class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}
  template <class T>
  void put(T v) {
    static_assert(std::is_integral_v<T>);
    using U = std::make_unsigned_t<T>;
    auto u = static_cast<U>(v);
    for (std::size_t b = 0; b < sizeof(T); ++b) os_.put(static_cast<char>((u >> (8 * b)) & 0xffU));
  }
  void put_f64(double v) { put(std::bit_cast<std::uint64_t>(v)); }
  void put_bytes(const char* p, std::size_t n) { os_.write(p, static_cast<std::streamsize>(n)); }
  void put_tensor(const std::string& name, const Tensor& t) {
    put(static_cast<std::uint32_t>(name.size()));
    put_bytes(name.data(), name.size());
    put(static_cast<std::uint32_t>(t.rank()));
    for (auto e : t.shape()) put(static_cast<std::uint64_t>(e));
    for (double v : t.values()) put_f64(v);
  }

 private:
  std::ostream& os_;
};

class Reader {
 public:
  Reader(std::istream& is, std::string source) : is_(is), source_(std::move(source)) {}
  template <class T>
  T get() {
    static_assert(std::is_integral_v<T>);
    using U = std::make_unsigned_t<T>;
    U u = 0;
    for (std::size_t b = 0; b < sizeof(T); ++b) {
      int c = is_.get();
      require(c != EOF, ErrorKind::kParse, source_ + ": truncated checkpoint");
      u |= static_cast<U>(static_cast<U>(c & 0xff) << (8 * b));
    }
    return static_cast<T>(u);
  }
  double get_f64() { return std::bit_cast<double>(get<std::uint64_t>()); }
  std::string get_bytes(std::size_t n) {
    require(n < (1u << 20), ErrorKind::kParse, source_ + ": implausible field length");
    std::string s(n, '\0');
    is_.read(s.data(), static_cast<std::streamsize>(n));
    require(static_cast<std::size_t>(is_.gcount()) == n, ErrorKind::kParse, source_ + ": truncated checkpoint");
    return s;
  }
  std::pair<std::string, Tensor> get_tensor() {
    auto name = get_bytes(get<std::uint32_t>());
    auto rank = get<std::uint32_t>();
    require(rank <= 2, ErrorKind::kParse, source_ + ": tensor '" + name + "' has unsupported rank");
    Shape shape;
    for (std::uint32_t i = 0; i < rank; ++i) shape.push_back(static_cast<std::size_t>(get<std::uint64_t>()));
    const std::size_t n = shape_numel(shape);
    require(n < (1u << 28), ErrorKind::kParse, source_ + ": tensor '" + name + "' too large");
    std::vector<double> v(n);
    for (auto& x : v) x = get_f64();
    return {name, Tensor(std::move(shape), std::move(v), true)};
  }

 private:
  std::istream& is_;
  std::string source_;
};

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), ErrorKind::kIo, "cannot write " + path.string());
  Writer w(os);
  w.put_bytes(kMagic.data(), kMagic.size());
  w.put(kCheckpointVersion);
  w.put(ckpt.config_fingerprint);
  w.put(ckpt.epoch);
  w.put(static_cast<std::uint8_t>(ckpt.extractor.activation() == Activation::kRelu ? 0 : 1));
  w.put(static_cast<std::uint8_t>(ckpt.extractor.normalization() == Normalization::kNone ? 0 : 1));
  w.put(static_cast<std::uint8_t>(ckpt.p_norm));
  std::uint8_t mode = 0;
  if (ckpt.centers) mode = ckpt.centers->mode == CenterMode::kComputed ? 1 : 2;
  w.put(mode);
  w.put(ckpt.centers ? ckpt.centers->source_epoch : std::int64_t{-1});
  w.put(ckpt.centers ? ckpt.centers->source_fingerprint : std::uint64_t{0});
  w.put(static_cast<std::uint32_t>(ckpt.class_sizes.size()));
  for (auto n : ckpt.class_sizes) w.put(static_cast<std::uint64_t>(n));

  const auto& layers = ckpt.extractor.layers();
  std::uint32_t count = static_cast<std::uint32_t>(2 * layers.size()) + (ckpt.head ? 2u : 0u) + (ckpt.centers ? 1u : 0u);
  w.put(count);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    w.put_tensor("extractor." + std::to_string(i) + ".weight", layers[i].weight);
    w.put_tensor("extractor." + std::to_string(i) + ".bias", layers[i].bias);
  }
  if (ckpt.head) {
    w.put_tensor("head.weight", ckpt.head->weight);
    w.put_tensor("head.bias", ckpt.head->bias);
  }
  if (ckpt.centers) w.put_tensor("centers", ckpt.centers->centers);
  require(static_cast<bool>(os), ErrorKind::kIo, "write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), ErrorKind::kIo, "cannot open " + path.string());
  Reader r(is, path.string());
  auto magic = r.get_bytes(kMagic.size());
  require(std::memcmp(magic.data(), kMagic.data(), kMagic.size()) == 0, ErrorKind::kParse, path.string() + ": not a checkpoint file");
  auto version = r.get<std::uint32_t>();
  require(version == kCheckpointVersion, ErrorKind::kParse, path.string() + ": unsupported checkpoint version " + std::to_string(version));
  Checkpoint ckpt;
  ckpt.config_fingerprint = r.get<std::uint64_t>();
  ckpt.epoch = r.get<std::int64_t>();
  const auto act = r.get<std::uint8_t>() == 0 ? Activation::kRelu : Activation::kTanh;
  const auto norm = r.get<std::uint8_t>() == 0 ? Normalization::kNone : Normalization::kL2;
  ckpt.p_norm = r.get<std::uint8_t>();
  require(ckpt.p_norm >= 1, ErrorKind::kParse, path.string() + ": invalid p_norm");
  const auto mode = r.get<std::uint8_t>();
  const auto src_epoch = r.get<std::int64_t>();
  const auto src_fp = r.get<std::uint64_t>();
  const auto k = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < k; ++i) ckpt.class_sizes.push_back(static_cast<std::size_t>(r.get<std::uint64_t>()));

  std::map<std::string, Tensor> tensors;
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    auto [name, t] = r.get_tensor();
    tensors.emplace(std::move(name), std::move(t));
  }
  std::vector<Linear> layers;
  for (std::size_t i = 0;; ++i) {
    auto w = tensors.find("extractor." + std::to_string(i) + ".weight");
    auto b = tensors.find("extractor." + std::to_string(i) + ".bias");
    if (w == tensors.end() || b == tensors.end()) break;
    layers.emplace_back(w->second, b->second);
  }
  ckpt.extractor = FeatureExtractor(std::move(layers), act, norm);
  if (tensors.count("head.weight") && tensors.count("head.bias")) {
    ckpt.head = Linear(tensors.at("head.weight"), tensors.at("head.bias"));
  }
  if (mode != 0) {
    require(tensors.count("centers") == 1, ErrorKind::kParse, path.string() + ": center table missing");
    CenterTable table;
    table.centers = tensors.at("centers");
    table.mode = mode == 1 ? CenterMode::kComputed : CenterMode::kTrainable;
    if (table.mode == CenterMode::kComputed) table.centers = table.centers.detach();
    table.source_epoch = src_epoch;
    table.source_fingerprint = src_fp;
    ckpt.centers = std::move(table);
  }
  return ckpt;
}

std::vector<int> predict(const Checkpoint& ckpt, std::span<const double> features, std::size_t rows) {
  require(features.size() == rows * ckpt.extractor.input_dim(), ErrorKind::kDimension,
          "predict: data width " + std::to_string(rows ? features.size() / rows : 0) + " differs from model input " +
              std::to_string(ckpt.extractor.input_dim()));
  auto emb = ckpt.extractor.embed(features, rows);
  if (ckpt.head) {
    NoGradGuard guard;
    const std::size_t d = ckpt.extractor.embedding_dim();
    auto logits = ckpt.head->forward(Tensor::matrix(rows, d, std::move(emb)));
    const std::size_t k = logits.dim(1);
    std::vector<int> out(rows);
    auto v = logits.values();
    for (std::size_t i = 0; i < rows; ++i) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < k; ++j) {
        if (v[i * k + j] > v[i * k + best]) best = j;
      }
      out[i] = static_cast<int>(best);
    }
    return out;
  }
  require(ckpt.centers.has_value(), ErrorKind::kContract, "checkpoint has neither a classifier head nor class centers");
  return nearest_center_predict_all(emb, *ckpt.centers, ckpt.p_norm);
}

}  // namespace pcct

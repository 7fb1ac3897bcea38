#include "pcct/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "pcct/error.hpp"
#include "pcct/nn.hpp"

namespace pcct {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string parse_error(const std::filesystem::path& path, std::size_t line_no, const std::string& what) {
  return path.string() + ":" + std::to_string(line_no) + ": " + what;
}

}  // namespace

Dataset::Dataset(std::size_t dim_, std::vector<double> features_, std::vector<int> labels_, std::size_t num_classes)
    : dim(dim_), features(std::move(features_)), labels(std::move(labels_)), index(labels, num_classes) {
  require(features.size() == labels.size() * dim, ErrorKind::kDimension, "dataset: feature matrix does not match labels");
}

std::vector<double> Dataset::gather(std::span<const std::size_t> rows) const {
  std::vector<double> out;
  out.reserve(rows.size() * dim);
  for (auto r : rows) {
    auto src = row(r);
    out.insert(out.end(), src.begin(), src.end());
  }
  return out;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  std::vector<int> l;
  l.reserve(rows.size());
  for (auto r : rows) l.push_back(labels.at(r));
  return Dataset(dim, gather(rows), std::move(l), num_classes());
}

std::uint64_t Dataset::fingerprint() const {
  std::uint64_t h = fingerprint_values(features);
  for (int l : labels) h = fnv1a(std::to_string(l) + ";", h);
  return h;
}

double SyntheticSpec::imbalance_ratio() const {
  auto [mn, mx] = std::minmax_element(class_sizes.begin(), class_sizes.end());
  return static_cast<double>(*mx) / static_cast<double>(*mn);
}

void SyntheticSpec::validate() const {
  const std::size_t k = class_sizes.size();
  require(k >= 1, ErrorKind::kContract, "synthetic spec: at least one class required");
  require(input_dim >= 1, ErrorKind::kContract, "synthetic spec: input_dim must be positive");
  for (auto n : class_sizes) require(n >= 1, ErrorKind::kContract, "synthetic spec: class sizes must be positive");
  require(means.size() == k * input_dim, ErrorKind::kDimension, "synthetic spec: means must be [K, input_dim]");
  require(sigmas.size() == k, ErrorKind::kDimension, "synthetic spec: one sigma per class required");
  for (double s : sigmas) require(s > 0.0 && std::isfinite(s), ErrorKind::kContract, "synthetic spec: sigma must be > 0");
  require(modes.empty() || modes.size() == k, ErrorKind::kDimension, "synthetic spec: one mode count per class required");
  for (auto m : modes) require(m >= 1, ErrorKind::kContract, "synthetic spec: mode counts must be positive");
  require(mode_radius >= 0.0 && std::isfinite(mode_radius), ErrorKind::kContract, "synthetic spec: mode_radius must be >= 0");
}

std::vector<std::string> preset_names() { return {"skin7-like", "chestxray-like", "separable-3"}; }

SyntheticSpec preset_spec(const std::string& name, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.name = name;
  spec.seed = seed;
  // Class k sits at scale * e_k; remaining input dimensions carry pure noise.
  auto simplex = [&](std::size_t k, std::size_t dim, double scale) {
    spec.input_dim = dim;
    spec.means.assign(k * dim, 0.0);
    for (std::size_t c = 0; c < k; ++c) spec.means[c * dim + c] = scale;
  };
  if (name == "skin7-like") {
    // 6705 -> 115 scaled down 20x, geometric in between
    const double head = 335.0, tail = 6.0;
    const double ratio = std::pow(tail / head, 1.0 / 6.0);
    for (int k = 0; k < 7; ++k) spec.class_sizes.push_back(static_cast<std::size_t>(std::lround(head * std::pow(ratio, k))));
    simplex(7, 16, 3.0);
    spec.sigmas.assign(7, 0.8);
    // The four largest classes are spread over several sub-clusters.
    spec.modes = {3, 3, 3, 3, 1, 1, 1};
    spec.mode_radius = 3.0;
  } else if (name == "chestxray-like") {
    spec.class_sizes = {1000, 100, 15};
    simplex(3, 16, 3.0);
    spec.sigmas.assign(3, 1.0);
  } else if (name == "separable-3") {
    spec.class_sizes = {60, 60, 60};
    simplex(3, 4, 6.0);
    spec.sigmas.assign(3, 0.5);
  } else {
    fail(ErrorKind::kContract, "unknown dataset preset '" + name + "'");
  }
  return spec;
}

std::vector<double> mode_centers(const SyntheticSpec& spec) {
  spec.validate();
  const std::size_t d = spec.input_dim;
  Rng rng(derive_seed(spec.seed, "modes"));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> out;
  for (std::size_t k = 0; k < spec.num_classes(); ++k) {
    const std::size_t m = spec.modes.empty() ? 1 : spec.modes[k];
    std::vector<double> offsets(m * d, 0.0);
    if (m > 1) {
      for (auto& v : offsets) v = normal(rng);
      // Center the offsets, then scale them to the requested RMS length.
      for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (std::size_t q = 0; q < m; ++q) mean += offsets[q * d + j];
        mean /= static_cast<double>(m);
        for (std::size_t q = 0; q < m; ++q) offsets[q * d + j] -= mean;
      }
      double ss = 0.0;
      for (double v : offsets) ss += v * v;
      const double rms = std::sqrt(ss / static_cast<double>(m));
      for (auto& v : offsets) v *= rms > 0.0 ? spec.mode_radius / rms : 0.0;
    }
    for (std::size_t q = 0; q < m; ++q) {
      for (std::size_t j = 0; j < d; ++j) out.push_back(spec.means[k * d + j] + offsets[q * d + j]);
    }
  }
  return out;
}

Dataset gen_gaussian_imbalanced(const SyntheticSpec& spec) {
  const auto centers = mode_centers(spec);
  Rng rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t d = spec.input_dim;
  std::vector<double> features;
  std::vector<int> labels;
  std::size_t first_mode = 0;
  for (std::size_t k = 0; k < spec.num_classes(); ++k) {
    const std::size_t m = spec.modes.empty() ? 1 : spec.modes[k];
    for (std::size_t i = 0; i < spec.class_sizes[k]; ++i) {
      const double* c = centers.data() + (first_mode + i % m) * d;
      for (std::size_t j = 0; j < d; ++j) features.push_back(c[j] + spec.sigmas[k] * normal(rng));
      labels.push_back(static_cast<int>(k));
    }
    first_mode += m;
  }
  return Dataset(d, std::move(features), std::move(labels), spec.num_classes());
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::kIo, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  bool have_header = false;
  std::vector<double> features;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_csv(line);
    if (!have_header) {
      require(cells.size() >= 2 && cells[0] == "label", ErrorKind::kParse,
              parse_error(path, line_no, "expected header 'label,f0,f1,...'"));
      dim = cells.size() - 1;
      have_header = true;
      continue;
    }
    require(cells.size() == dim + 1, ErrorKind::kParse,
            parse_error(path, line_no, "expected " + std::to_string(dim + 1) + " columns, got " + std::to_string(cells.size())));
    int label = -1;
    auto [lp, lec] = std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), label);
    require(lec == std::errc() && lp == cells[0].data() + cells[0].size() && label >= 0, ErrorKind::kParse,
            parse_error(path, line_no, "label '" + cells[0] + "' is not a nonnegative integer"));
    labels.push_back(label);
    for (std::size_t j = 1; j < cells.size(); ++j) {
      double v = 0.0;
      const auto& c = cells[j];
      auto [p, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      require(ec == std::errc() && p == c.data() + c.size() && !c.empty() && std::isfinite(v), ErrorKind::kParse,
              parse_error(path, line_no, "feature '" + c + "' is not a finite number"));
      features.push_back(v);
    }
  }
  require(have_header, ErrorKind::kParse, path.string() + ": empty file");
  require(!labels.empty(), ErrorKind::kParse, path.string() + ": no samples after the header");
  return Dataset(dim, std::move(features), std::move(labels));
}

void save_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::kIo, "cannot write " + path.string());
  out << "label";
  for (std::size_t j = 0; j < data.dim; ++j) out << ",f" << j;
  out << '\n';
  char buf[64];
  for (std::size_t i = 0; i < data.rows(); ++i) {
    out << data.labels[i];
    for (double v : data.row(i)) {
      auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
      out << ',' << std::string_view(buf, static_cast<std::size_t>(p - buf));
    }
    out << '\n';
  }
  require(static_cast<bool>(out), ErrorKind::kIo, "write failed for " + path.string());
}

void save_spec_json(const SyntheticSpec& spec, const std::filesystem::path& path) {
  nlohmann::json j;
  j["name"] = spec.name;
  j["seed"] = spec.seed;
  j["class_sizes"] = spec.class_sizes;
  j["input_dim"] = spec.input_dim;
  j["means"] = spec.means;
  j["sigmas"] = spec.sigmas;
  j["modes"] = spec.modes;
  j["mode_radius"] = spec.mode_radius;
  j["imbalance_ratio"] = spec.imbalance_ratio();
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::kIo, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

SyntheticSpec load_spec_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::kIo, "cannot open " + path.string());
  SyntheticSpec spec;
  try {
    auto j = nlohmann::json::parse(in);
    spec.name = j.value("name", std::string("custom"));
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.class_sizes = j.at("class_sizes").get<std::vector<std::size_t>>();
    spec.input_dim = j.at("input_dim").get<std::size_t>();
    spec.means = j.at("means").get<std::vector<double>>();
    spec.sigmas = j.at("sigmas").get<std::vector<double>>();
    spec.modes = j.value("modes", std::vector<std::size_t>{});
    spec.mode_radius = j.value("mode_radius", 0.0);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kParse, path.string() + ": " + e.what());
  }
  spec.validate();
  return spec;
}

}  // namespace pcct

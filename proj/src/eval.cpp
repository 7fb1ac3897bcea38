#include "pcct/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "pcct/error.hpp"

namespace pcct {

namespace {

double round2(double v) { return std::round(v * 100.0) / 100.0; }

nlohmann::json metrics_json(const MetricsReport& r) {
  nlohmann::json j;
  j["MCP"] = round2(r.mcp);
  j["MCR"] = round2(r.mcr);
  j["MF1"] = round2(r.mf1);
  j["empty"] = r.empty;
  auto& classes = j["classes"] = nlohmann::json::array();
  for (const auto& c : r.per_class) {
    classes.push_back({{"class", c.class_id},
                       {"precision", round2(c.precision)},
                       {"recall", round2(c.recall)},
                       {"f1", round2(c.f1)},
                       {"support", c.support},
                       {"zero_division", c.zero_division}});
  }
  return j;
}

nlohmann::json summary_json(const Summary& s) { return {{"mean", round2(s.mean)}, {"std", round2(s.stddev)}}; }

}  // namespace

std::size_t ConfusionMatrix::total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted, std::size_t num_classes) {
  require(truth.size() == predicted.size(), ErrorKind::kDimension, "confusion: label streams differ in length");
  ConfusionMatrix cm{num_classes, std::vector<std::size_t>(num_classes * num_classes, 0)};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i], p = predicted[i];
    require(t >= 0 && p >= 0 && static_cast<std::size_t>(t) < num_classes && static_cast<std::size_t>(p) < num_classes,
            ErrorKind::kContract, "confusion: label out of range [0, " + std::to_string(num_classes) + ")");
    cm.counts[static_cast<std::size_t>(t) * num_classes + static_cast<std::size_t>(p)] += 1;
  }
  return cm;
}

ConfusionMatrix confusion_from_rows(std::vector<std::vector<std::size_t>> rows) {
  ConfusionMatrix cm;
  cm.num_classes = rows.size();
  for (const auto& r : rows) {
    require(r.size() == rows.size(), ErrorKind::kDimension, "confusion matrix must be square");
    cm.counts.insert(cm.counts.end(), r.begin(), r.end());
  }
  return cm;
}

MetricsReport macro_metrics(const ConfusionMatrix& cm) {
  const std::size_t k = cm.num_classes;
  require(k > 0, ErrorKind::kContract, "macro_metrics: empty confusion matrix");
  MetricsReport r;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t tp = cm.at(c, c), fp = 0, fn = 0;
    for (std::size_t o = 0; o < k; ++o) {
      if (o == c) continue;
      fp += cm.at(o, c);
      fn += cm.at(c, o);
    }
    ClassMetrics m;
    m.class_id = static_cast<int>(c);
    m.support = tp + fn;
    if (tp + fp > 0) {
      m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    } else {
      m.zero_division = true;
    }
    if (tp + fn > 0) {
      m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    } else {
      m.zero_division = true;
    }
    if (m.precision + m.recall > 0.0) {
      m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    } else {
      m.zero_division = true;
    }
    m.precision *= 100.0;
    m.recall *= 100.0;
    m.f1 *= 100.0;
    r.mcp += m.precision;
    r.mcr += m.recall;
    r.mf1 += m.f1;
    r.per_class.push_back(m);
  }
  r.mcp /= static_cast<double>(k);
  r.mcr /= static_cast<double>(k);
  r.mf1 /= static_cast<double>(k);
  return r;
}

MetricsReport small_class_report(const MetricsReport& report, std::span<const std::size_t> class_sizes,
                                 std::size_t threshold) {
  require(threshold >= 1, ErrorKind::kContract, "small-class threshold must be at least 1");
  MetricsReport r;
  for (const auto& c : report.per_class) {
    const auto id = static_cast<std::size_t>(c.class_id);
    require(id < class_sizes.size(), ErrorKind::kContract, "small_class_report: class sizes do not cover the report");
    if (class_sizes[id] <= threshold) r.per_class.push_back(c);
  }
  if (r.per_class.empty()) {
    r.empty = true;
    return r;
  }
  for (const auto& c : r.per_class) {
    r.mcp += c.precision;
    r.mcr += c.recall;
    r.mf1 += c.f1;
  }
  const double n = static_cast<double>(r.per_class.size());
  r.mcp /= n;
  r.mcr /= n;
  r.mf1 /= n;
  return r;
}

std::vector<FoldSplit> stratified_kfold(const DatasetIndex& index, std::size_t k, std::uint64_t seed) {
  require(k >= 2, ErrorKind::kContract, "k-fold cross-validation needs k >= 2");
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> test(k);
  std::size_t deal = 0;
  for (std::size_t c = 0; c < index.num_classes(); ++c) {
    std::vector<std::size_t> members(index.members(c));
    std::shuffle(members.begin(), members.end(), rng);
    for (auto m : members) test[deal++ % k].push_back(m);
  }
  std::vector<FoldSplit> folds(k);
  for (std::size_t f = 0; f < k; ++f) {
    std::sort(test[f].begin(), test[f].end());
    folds[f].test = test[f];
    for (std::size_t g = 0; g < k; ++g) {
      if (g != f) folds[f].train.insert(folds[f].train.end(), test[g].begin(), test[g].end());
    }
    std::sort(folds[f].train.begin(), folds[f].train.end());
  }
  return folds;
}

Compactness compactness(std::span<const double> embeddings, std::span<const int> labels,
                        std::span<const double> centers, std::size_t dim, int p_norm) {
  require(dim > 0 && embeddings.size() == labels.size() * dim && centers.size() % dim == 0, ErrorKind::kDimension,
          "compactness: inconsistent shapes");
  const std::size_t k = centers.size() / dim;
  Compactness out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto y = static_cast<std::size_t>(labels[i]);
    require(y < k, ErrorKind::kContract, "compactness: centers do not cover class " + std::to_string(y));
    out.within += row_distance(embeddings.subspan(i * dim, dim), centers.subspan(y * dim, dim), p_norm);
  }
  if (!labels.empty()) out.within /= static_cast<double>(labels.size());
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      out.inter += row_distance(centers.subspan(a * dim, dim), centers.subspan(b * dim, dim), p_norm);
      ++pairs;
    }
  }
  if (pairs) out.inter /= static_cast<double>(pairs);
  return out;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorKind::kDimension, "wilcoxon: paired samples differ in length");
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] - b[i] != 0.0) d.push_back(a[i] - b[i]);
  }
  WilcoxonResult res;
  res.n = d.size();
  if (d.empty()) {
    res.status = TestStatus::kUndefined;
    return res;
  }
  require(d.size() >= 5, ErrorKind::kContract, "wilcoxon: at least 5 nonzero differences required");

  const std::size_t n = d.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return std::abs(d[i]) < std::abs(d[j]); });
  // Doubled average ranks are integers even with ties.
  std::vector<std::size_t> rank2(n);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) ++j;
    const std::size_t t = j - i + 1;
    for (std::size_t q = i; q <= j; ++q) rank2[order[q]] = (i + 1) + (j + 1);
    tie_term += static_cast<double>(t * t * t - t);
    i = j + 1;
  }
  std::size_t w2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i] > 0) w2 += rank2[i];
  }
  res.statistic = static_cast<double>(w2) / 2.0;

  if (n <= 25) {
    const std::size_t max_sum = n * (n + 1);
    std::vector<double> ways(max_sum + 1, 0.0);
    ways[0] = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t s = max_sum + 1; s-- > rank2[i];) ways[s] += ways[s - rank2[i]];
    }
    const double total = std::ldexp(1.0, static_cast<int>(n));
    double lower = 0.0, upper = 0.0;
    for (std::size_t s = 0; s <= max_sum; ++s) {
      if (s <= w2) lower += ways[s];
      if (s >= w2) upper += ways[s];
    }
    res.p_value = std::min(1.0, 2.0 * std::min(lower, upper) / total);
    res.exact = true;
  } else {
    const double nn = static_cast<double>(n);
    const double mu = nn * (nn + 1.0) / 4.0;
    const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
    const double z = (res.statistic - mu) / std::sqrt(var);
    res.p_value = std::erfc(std::abs(z) / std::sqrt(2.0));
  }
  res.significant = res.p_value < 0.05;
  return res;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

AggregateReport aggregate(std::vector<MetricsReport> folds, std::vector<MetricsReport> small_class_folds) {
  AggregateReport agg;
  std::vector<double> p, r, f;
  for (const auto& m : folds) {
    p.push_back(m.mcp);
    r.push_back(m.mcr);
    f.push_back(m.mf1);
  }
  agg.mcp = summarize(p);
  agg.mcr = summarize(r);
  agg.mf1 = summarize(f);
  std::vector<double> sp, sr, sf;
  for (const auto& m : small_class_folds) {
    if (m.empty) continue;
    sp.push_back(m.mcp);
    sr.push_back(m.mcr);
    sf.push_back(m.mf1);
  }
  agg.small_class_empty = sf.empty();
  agg.small_mcp = summarize(sp);
  agg.small_mcr = summarize(sr);
  agg.small_mf1 = summarize(sf);
  agg.folds = std::move(folds);
  agg.small_class_folds = std::move(small_class_folds);
  return agg;
}

std::string format_percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string report_json(const MetricsReport& report, const MetricsReport* small_class) {
  nlohmann::json j;
  j["overall"] = metrics_json(report);
  if (small_class) j["small_class"] = metrics_json(*small_class);
  return j.dump(2) + "\n";
}

std::string report_csv(const MetricsReport& report, const MetricsReport* small_class) {
  std::ostringstream os;
  os << "scope,class,precision,recall,f1,support,zero_division\n";
  for (const auto& c : report.per_class) {
    os << "class," << c.class_id << ',' << format_percent(c.precision) << ',' << format_percent(c.recall) << ','
       << format_percent(c.f1) << ',' << c.support << ',' << (c.zero_division ? 1 : 0) << '\n';
  }
  os << "macro,all," << format_percent(report.mcp) << ',' << format_percent(report.mcr) << ','
     << format_percent(report.mf1) << ",,\n";
  if (small_class && !small_class->empty) {
    os << "macro,small," << format_percent(small_class->mcp) << ',' << format_percent(small_class->mcr) << ','
       << format_percent(small_class->mf1) << ",,\n";
  }
  return os.str();
}

std::string aggregate_json(const AggregateReport& agg) {
  nlohmann::json j;
  j["MCP"] = summary_json(agg.mcp);
  j["MCR"] = summary_json(agg.mcr);
  j["MF1"] = summary_json(agg.mf1);
  if (!agg.small_class_empty) {
    j["small_class"] = {{"MCP", summary_json(agg.small_mcp)},
                        {"MCR", summary_json(agg.small_mcr)},
                        {"MF1", summary_json(agg.small_mf1)}};
  }
  auto& folds = j["folds"] = nlohmann::json::array();
  for (std::size_t i = 0; i < agg.folds.size(); ++i) {
    auto f = metrics_json(agg.folds[i]);
    if (i < agg.small_class_folds.size()) f["small_class"] = metrics_json(agg.small_class_folds[i]);
    folds.push_back(std::move(f));
  }
  return j.dump(2) + "\n";
}

}  // namespace pcct

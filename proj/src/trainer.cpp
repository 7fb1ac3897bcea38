#include "pcct/trainer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "pcct/error.hpp"

namespace pcct {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<std::size_t> to_size_labels(std::span<const int> labels) {
  std::vector<std::size_t> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = static_cast<std::size_t>(labels[i]);
  return out;
}

Tensor batch_input(const Dataset& data, const BatchPlan& plan) {
  return Tensor::matrix(plan.indices.size(), data.dim, data.gather(plan.indices));
}

void check_finite(const Tensor& loss, const std::string& where) {
  if (!std::isfinite(loss.item())) fail(ErrorKind::kDiverged, where + ": non-finite loss " + std::to_string(loss.item()));
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << v;
  return os.str();
}

// Tracks the plateau rule; returns true when the stage should stop.
class Plateau {
 public:
  explicit Plateau(std::size_t patience) : patience_(patience) {}
  bool update(double loss) {
    if (patience_ == 0) return false;
    if (loss < best_) {
      best_ = loss;
      stale_ = 0;
      return false;
    }
    return ++stale_ >= patience_;
  }

 private:
  std::size_t patience_;
  std::size_t stale_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
};

struct StepOutcome {
  Tensor loss;
  std::size_t units = 0;
};

StepOutcome stage1_loss(const TrainConfig& cfg, const BatchPlan& plan, const Tensor& emb, Rng& rng) {
  const std::size_t d = emb.dim(1);
  StepOutcome out;
  switch (cfg.stage1.loss) {
    case Stage1Loss::kTriplet: {
      auto ts = form_triplets(plan, emb.values(), d, cfg.stage1.mining, cfg.hyper, rng);
      if (ts.empty()) return out;
      std::vector<std::size_t> a, p, n;
      for (const auto& t : ts) {
        a.push_back(t.anchor);
        p.push_back(t.positive);
        n.push_back(t.negative);
      }
      out.loss = batch_mean(triplet_loss(gather_rows(emb, a), gather_rows(emb, p), gather_rows(emb, n), cfg.hyper));
      out.units = ts.size();
      break;
    }
    case Stage1Loss::kPairwise: {
      auto ps = form_pairs(plan, rng);
      if (ps.empty()) return out;
      std::vector<std::size_t> a, b;
      std::vector<char> same_storage;
      for (const auto& pr : ps) {
        a.push_back(pr.a);
        b.push_back(pr.b);
        same_storage.push_back(pr.same_class ? 1 : 0);
      }
      std::unique_ptr<bool[]> same(new bool[ps.size()]);
      for (std::size_t i = 0; i < ps.size(); ++i) same[i] = same_storage[i] != 0;
      out.loss = batch_mean(pairwise_loss(gather_rows(emb, a), gather_rows(emb, b),
                                          std::span<const bool>(same.get(), ps.size()), cfg.hyper));
      out.units = ps.size();
      break;
    }
    case Stage1Loss::kQuadruplet: {
      auto qs = form_quadruplets(plan, rng);
      if (qs.empty()) return out;
      std::vector<std::size_t> a, p, n1, n2;
      for (const auto& q : qs) {
        a.push_back(q.anchor);
        p.push_back(q.positive);
        n1.push_back(q.negative1);
        n2.push_back(q.negative2);
      }
      out.loss = batch_mean(quadruplet_loss(gather_rows(emb, a), gather_rows(emb, p), gather_rows(emb, n1),
                                            gather_rows(emb, n2), cfg.hyper));
      out.units = qs.size();
      break;
    }
  }
  return out;
}

// Units of the center losses: every anchor in the batch against the centers
// that give it a positive loss.
StepOutcome stage2_loss(const TrainConfig& cfg, std::span<const int> labels, const Tensor& emb, const Tensor& centers) {
  const std::size_t d = emb.dim(1);
  const std::size_t k_total = centers.dim(0);
  auto ev = emb.values();
  auto cv = centers.values();
  auto erow = [&](std::size_t i) { return ev.subspan(i * d, d); };
  auto crow = [&](std::size_t k) { return cv.subspan(k * d, d); };
  const auto& h = cfg.hyper;
  StepOutcome out;
  switch (cfg.stage2.loss) {
    case Stage2Loss::kCenterTriplet: {
      auto units = form_center_triplets(labels, ev, cv, d, h);
      if (units.empty()) return out;
      std::vector<std::size_t> a, ca, cn;
      for (const auto& u : units) {
        a.push_back(u.anchor);
        ca.push_back(static_cast<std::size_t>(labels[u.anchor]));
        cn.push_back(static_cast<std::size_t>(u.negative_class));
      }
      out.loss = batch_mean(center_triplet_loss(gather_rows(emb, a), gather_rows(centers, ca), gather_rows(centers, cn), h));
      out.units = units.size();
      break;
    }
    case Stage2Loss::kCenterPairwise: {
      std::vector<std::size_t> a, c;
      std::vector<char> same_flags;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto y = static_cast<std::size_t>(labels[i]);
        if (row_distance(erow(i), crow(y), h.p_norm) > 0.0) {
          a.push_back(i);
          c.push_back(y);
          same_flags.push_back(1);
        }
        for (std::size_t k = 0; k < k_total; ++k) {
          if (k == y) continue;
          if (h.alpha - row_distance(erow(i), crow(k), h.p_norm) > 0.0) {
            a.push_back(i);
            c.push_back(k);
            same_flags.push_back(0);
          }
        }
      }
      if (a.empty()) return out;
      std::unique_ptr<bool[]> same(new bool[a.size()]);
      for (std::size_t i = 0; i < a.size(); ++i) same[i] = same_flags[i] != 0;
      out.loss = batch_mean(center_pairwise_loss(gather_rows(emb, a), gather_rows(centers, c),
                                                 std::span<const bool>(same.get(), a.size()), h));
      out.units = a.size();
      break;
    }
    case Stage2Loss::kCenterQuadruplet: {
      std::vector<std::size_t> a, cp, cn1, cn2;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto y = static_cast<std::size_t>(labels[i]);
        const double d_ap = row_distance(erow(i), crow(y), h.p_norm);
        for (std::size_t k1 = 0; k1 < k_total; ++k1) {
          if (k1 == y) continue;
          const double first = (d_ap - row_distance(erow(i), crow(k1), h.p_norm)) + h.alpha;
          for (std::size_t k2 = 0; k2 < k_total; ++k2) {
            if (k2 == y || k2 == k1) continue;
            const double second = (d_ap - row_distance(crow(k1), crow(k2), h.p_norm)) + h.beta;
            if (std::max(first, 0.0) + std::max(second, 0.0) > 0.0) {
              a.push_back(i);
              cp.push_back(y);
              cn1.push_back(k1);
              cn2.push_back(k2);
            }
          }
        }
      }
      if (a.empty()) return out;
      out.loss = batch_mean(center_quadruplet_loss(gather_rows(emb, a), gather_rows(centers, cp),
                                                   gather_rows(centers, cn1), gather_rows(centers, cn2), h));
      out.units = a.size();
      break;
    }
  }
  return out;
}

void finish_epoch(EpochRecord rec, RunRecord* record, const EpochObserver& observer) {
  if (observer) observer(rec);
  if (record) record->epochs.push_back(std::move(rec));
}

std::vector<std::size_t> all_rows(const Dataset& data) {
  std::vector<std::size_t> rows(data.rows());
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

}  // namespace

std::string to_string(Stage1Loss l) {
  switch (l) {
    case Stage1Loss::kTriplet: return "triplet";
    case Stage1Loss::kPairwise: return "pairwise";
    case Stage1Loss::kQuadruplet: return "quadruplet";
  }
  return "?";
}

std::string to_string(Stage2Loss l) {
  switch (l) {
    case Stage2Loss::kCenterTriplet: return "center_triplet";
    case Stage2Loss::kCenterPairwise: return "center_pairwise";
    case Stage2Loss::kCenterQuadruplet: return "center_quadruplet";
  }
  return "?";
}

std::string to_string(BaselineStrategy s) {
  switch (s) {
    case BaselineStrategy::kBce: return "bce";
    case BaselineStrategy::kWce: return "wce";
    case BaselineStrategy::kOce: return "oce";
    case BaselineStrategy::kWfce: return "wfce";
  }
  return "?";
}

std::string to_string(FinalCenters f) {
  switch (f) {
    case FinalCenters::kAuto: return "auto";
    case FinalCenters::kComputed: return "computed";
    case FinalCenters::kLearned: return "learned";
  }
  return "?";
}

Stage1Loss parse_stage1_loss(const std::string& s) {
  if (s == "triplet") return Stage1Loss::kTriplet;
  if (s == "pairwise") return Stage1Loss::kPairwise;
  if (s == "quadruplet") return Stage1Loss::kQuadruplet;
  fail(ErrorKind::kParse, "unknown stage-1 loss '" + s + "'");
}

Stage2Loss parse_stage2_loss(const std::string& s) {
  if (s == "center_triplet") return Stage2Loss::kCenterTriplet;
  if (s == "center_pairwise") return Stage2Loss::kCenterPairwise;
  if (s == "center_quadruplet") return Stage2Loss::kCenterQuadruplet;
  fail(ErrorKind::kParse, "unknown stage-2 loss '" + s + "'");
}

BaselineStrategy parse_baseline(const std::string& s) {
  if (s == "bce") return BaselineStrategy::kBce;
  if (s == "wce") return BaselineStrategy::kWce;
  if (s == "oce") return BaselineStrategy::kOce;
  if (s == "wfce") return BaselineStrategy::kWfce;
  fail(ErrorKind::kParse, "unknown baseline strategy '" + s + "'");
}

FinalCenters parse_final_centers(const std::string& s) {
  if (s == "auto") return FinalCenters::kAuto;
  if (s == "computed") return FinalCenters::kComputed;
  if (s == "learned") return FinalCenters::kLearned;
  fail(ErrorKind::kParse, "unknown final-centers option '" + s + "'");
}

std::string method_name(const TrainConfig& cfg) {
  if (cfg.method == Method::kBaseline) return "baseline:" + to_string(cfg.baseline.strategy);
  return "pcct";
}

void validate(const TrainConfig& cfg, const Dataset& train) {
  require(train.rows() > 0, ErrorKind::kContract, "training set is empty");
  require(train.num_classes() >= 2, ErrorKind::kContract, "training needs at least two classes");
  for (std::size_t k = 0; k < train.num_classes(); ++k) {
    require(!train.index.members(k).empty(), ErrorKind::kContract,
            "class " + std::to_string(k) + " has no training samples");
  }
  require(cfg.model.embedding_dim >= 1, ErrorKind::kContract, "embedding_dim must be positive");
  for (auto h : cfg.model.hidden) require(h >= 1, ErrorKind::kContract, "hidden layer sizes must be positive");
  const bool quad = cfg.stage1.loss == Stage1Loss::kQuadruplet || cfg.stage2.loss == Stage2Loss::kCenterQuadruplet;
  validate(cfg.hyper, quad && cfg.method == Method::kPcct);
  if (cfg.method == Method::kPcct && quad) {
    require(train.num_classes() >= 3, ErrorKind::kContract, "quadruplet losses need at least three classes");
  }
  require(cfg.stage1.m_per_class >= 1, ErrorKind::kContract, "stage1.m_per_class must be at least 1");
  require(cfg.stage2.batch_size >= 1 && cfg.baseline.batch_size >= 1, ErrorKind::kContract, "batch sizes must be positive");
  require(cfg.adam.learning_rate > 0 && cfg.stage2.learning_rate > 0, ErrorKind::kContract, "learning rates must be positive");
  require(cfg.stage2.freeze_layers <= cfg.model.hidden.size() + 1, ErrorKind::kContract, "stage2.freeze_layers exceeds layer count");
}

Checkpoint init_checkpoint(const TrainConfig& cfg, const Dataset& train) {
  std::vector<std::size_t> sizes{train.dim};
  sizes.insert(sizes.end(), cfg.model.hidden.begin(), cfg.model.hidden.end());
  sizes.push_back(cfg.model.embedding_dim);
  Rng rng(derive_seed(cfg.seed, "init"));
  Checkpoint ckpt;
  ckpt.extractor = FeatureExtractor(sizes, rng, cfg.model.activation, cfg.model.normalization);
  ckpt.p_norm = cfg.hyper.p_norm;
  ckpt.config_fingerprint = cfg.fingerprint;
  ckpt.class_sizes = train.index.class_sizes();
  return ckpt;
}

Checkpoint run_stage1(const TrainConfig& cfg, const Dataset& train, Checkpoint ckpt, RunRecord* record,
                      const EpochObserver& observer) {
  validate(cfg, train);
  require(ckpt.extractor.input_dim() == train.dim, ErrorKind::kDimension, "stage 1: model input differs from data width");
  Rng rng(derive_seed(cfg.seed, "stage1"));
  auto& ex = ckpt.extractor;
  const std::size_t k_total = train.num_classes();
  std::optional<Linear> head;
  auto params = ex.parameters();
  if (cfg.stage1.lambda_ce > 0.0) {
    Rng hr(derive_seed(cfg.seed, "stage1.head"));
    head.emplace(ex.embedding_dim(), k_total, hr);
    params.push_back(head->weight);
    params.push_back(head->bias);
  }
  AdamState opt(cfg.adam);
  const std::size_t per_batch = cfg.stage1.m_per_class * k_total;
  const std::size_t batches = cfg.stage1.batches_per_epoch
                                  ? cfg.stage1.batches_per_epoch
                                  : std::max<std::size_t>(1, (train.rows() + per_batch - 1) / per_batch);
  Plateau plateau(cfg.early_stop_patience);
  std::size_t epoch = 0;
  for (epoch = 1; epoch <= cfg.stage1.epochs; ++epoch) {
    const auto t0 = Clock::now();
    EpochRecord rec;
    rec.stage = "stage1";
    rec.epoch = epoch;
    rec.start_fingerprint = ex.fingerprint();
    double loss_sum = 0.0;
    std::size_t counted = 0;
    for (std::size_t b = 0; b < batches; ++b) {
      auto plan = build_balanced_batch(train.index, cfg.stage1.m_per_class, rng);
      auto emb = ex.forward(batch_input(train, plan));
      auto step = stage1_loss(cfg, plan, emb, rng);
      if (step.units == 0) continue;
      Tensor loss = step.loss;
      if (head) {
        auto labels = to_size_labels(plan.labels);
        loss = add(loss, scale(batch_mean(cross_entropy(head->forward(emb), labels)), cfg.stage1.lambda_ce));
      }
      check_finite(loss, "stage 1 epoch " + std::to_string(epoch));
      loss.backward();
      adam_step(params, opt);
      zero_grads(params);
      loss_sum += loss.item();
      ++counted;
      rec.units += step.units;
    }
    rec.mean_loss = counted ? loss_sum / static_cast<double>(counted) : 0.0;
    rec.seconds = seconds_since(t0);
    const double epoch_loss = rec.mean_loss;
    finish_epoch(std::move(rec), record, observer);
    if (plateau.update(epoch_loss)) {
      ++epoch;
      break;
    }
  }
  const auto ran = static_cast<std::int64_t>(epoch - 1);
  ckpt.epoch = ran;
  ckpt.head.reset();
  ckpt.p_norm = cfg.hyper.p_norm;
  ckpt.config_fingerprint = cfg.fingerprint;
  ckpt.class_sizes = train.index.class_sizes();
  ckpt.centers = compute_centers(ex, train, ran);
  return ckpt;
}

Checkpoint run_stage2(const TrainConfig& cfg, const Dataset& train, const Checkpoint& from, RunRecord* record,
                      const EpochObserver& observer) {
  validate(cfg, train);
  Checkpoint ckpt;
  ckpt.extractor = from.extractor;
  ckpt.p_norm = cfg.hyper.p_norm;
  ckpt.config_fingerprint = cfg.fingerprint;
  ckpt.class_sizes = train.index.class_sizes();
  auto& ex = ckpt.extractor;
  require(ex.input_dim() == train.dim, ErrorKind::kDimension, "stage 2: model input differs from data width");
  const std::size_t k_total = train.num_classes();
  const std::size_t d = ex.embedding_dim();
  const bool trainable = cfg.stage2.center_mode == CenterMode::kTrainable;

  CenterTable table;
  if (trainable) {
    Rng crng(derive_seed(cfg.seed, "centers"));
    if (cfg.stage2.center_init == CenterInit::kFromComputed) {
      const bool reuse = from.centers && from.centers->mode == CenterMode::kComputed &&
                         from.centers->source_fingerprint == ex.fingerprint();
      const CenterTable computed = reuse ? from.centers->clone() : compute_centers(ex, train, from.epoch);
      table = init_trainable_centers(k_total, d, CenterInit::kFromComputed, crng, &computed);
    } else {
      table = init_trainable_centers(k_total, d, CenterInit::kRandom, crng);
    }
  }

  auto params = ex.parameters_from(cfg.stage2.freeze_layers);
  if (trainable) params.push_back(table.centers);
  auto all_params = ex.parameters();
  AdamConfig adam = cfg.adam;
  adam.learning_rate = cfg.stage2.learning_rate;
  AdamState opt(adam);
  Rng rng(derive_seed(cfg.seed, "stage2"));
  const auto rows = all_rows(train);
  Plateau plateau(cfg.early_stop_patience);

  std::size_t epoch = 0;
  for (epoch = 1; epoch <= cfg.stage2.epochs; ++epoch) {
    const auto t0 = Clock::now();
    EpochRecord rec;
    rec.stage = "stage2";
    rec.epoch = epoch;
    rec.start_fingerprint = ex.fingerprint();
    if (!trainable) {
      // Centers from the parameters of the previous epoch, frozen for this one.
      table = compute_centers(ex, train, static_cast<std::int64_t>(epoch) - 1);
    }
    rec.centers_fingerprint = table.source_fingerprint;
    rec.centers_epoch = table.source_epoch;
    double loss_sum = 0.0;
    std::size_t counted = 0;
    for (const auto& plan : build_flat_batches(train.index, rows, cfg.stage2.batch_size, rng)) {
      auto emb = ex.forward(batch_input(train, plan));
      auto step = stage2_loss(cfg, plan.labels, emb, table.centers);
      if (step.units == 0) continue;
      check_finite(step.loss, "stage 2 epoch " + std::to_string(epoch));
      step.loss.backward();
      adam_step(params, opt);
      zero_grads(params);
      zero_grads(all_params);
      loss_sum += step.loss.item();
      ++counted;
      rec.units += step.units;
    }
    rec.mean_loss = counted ? loss_sum / static_cast<double>(counted) : 0.0;
    rec.seconds = seconds_since(t0);
    const bool converged = rec.units == 0;
    const double epoch_loss = rec.mean_loss;
    finish_epoch(std::move(rec), record, observer);
    if (converged) {
      if (record) record->stage2_converged = true;
      ++epoch;
      break;
    }
    if (plateau.update(epoch_loss)) {
      ++epoch;
      break;
    }
  }
  ckpt.epoch = from.epoch + static_cast<std::int64_t>(epoch - 1);

  const bool learned = trainable && cfg.stage2.final_centers != FinalCenters::kComputed;
  if (learned) {
    CenterTable out = table;
    out.centers = Tensor::matrix(k_total, d, std::vector<double>(table.centers.values().begin(), table.centers.values().end()));
    out.mode = CenterMode::kTrainable;
    ckpt.centers = std::move(out);
  } else {
    ckpt.centers = compute_centers(ex, train, ckpt.epoch);
  }
  return ckpt;
}

RunRecord run_pcct(const TrainConfig& cfg, const Dataset& train, const EpochObserver& observer) {
  validate(cfg, train);
  RunRecord record;
  record.method = method_name(cfg);
  auto stage1 = run_stage1(cfg, train, init_checkpoint(cfg, train), &record, observer);
  record.final = run_stage2(cfg, train, stage1, &record, observer);
  record.stage1 = std::move(stage1);
  return record;
}

RunRecord run_extension(const TrainConfig& cfg, const Dataset& train, const EpochObserver& observer) {
  const bool pair = cfg.stage1.loss == Stage1Loss::kPairwise && cfg.stage2.loss == Stage2Loss::kCenterPairwise;
  const bool quad = cfg.stage1.loss == Stage1Loss::kQuadruplet && cfg.stage2.loss == Stage2Loss::kCenterQuadruplet;
  require(pair || quad, ErrorKind::kContract,
          "extension runs pair pairwise with center_pairwise or quadruplet with center_quadruplet");
  if (quad) require(train.num_classes() >= 3, ErrorKind::kContract, "quadruplet losses need at least three classes");
  return run_pcct(cfg, train, observer);
}

RunRecord run_baseline(const TrainConfig& cfg, const Dataset& train, const EpochObserver& observer) {
  validate(cfg, train);
  RunRecord record;
  record.method = method_name(cfg);
  Checkpoint ckpt = init_checkpoint(cfg, train);
  auto& ex = ckpt.extractor;
  Rng hr(derive_seed(cfg.seed, "baseline.head"));
  Linear head(ex.embedding_dim(), train.num_classes(), hr);
  auto params = ex.parameters();
  params.push_back(head.weight);
  params.push_back(head.bias);
  AdamState opt(cfg.adam);
  Rng rng(derive_seed(cfg.seed, "baseline"));

  const auto strategy = cfg.baseline.strategy;
  std::vector<double> weights;
  if (strategy == BaselineStrategy::kWce || strategy == BaselineStrategy::kWfce) {
    weights = inverse_frequency_weights(train.index.class_sizes());
  }
  std::optional<std::span<const double>> w;
  if (!weights.empty()) w = std::span<const double>(weights);
  const auto rows = all_rows(train);
  Plateau plateau(cfg.early_stop_patience);

  std::size_t epoch = 0;
  for (epoch = 1; epoch <= cfg.baseline.epochs; ++epoch) {
    const auto t0 = Clock::now();
    EpochRecord rec;
    rec.stage = "baseline";
    rec.epoch = epoch;
    rec.start_fingerprint = ex.fingerprint();
    const auto stream = strategy == BaselineStrategy::kOce ? oversample_indices(train.index, rng) : rows;
    double loss_sum = 0.0;
    std::size_t counted = 0;
    for (const auto& plan : build_flat_batches(train.index, stream, cfg.baseline.batch_size, rng)) {
      auto logits = head.forward(ex.forward(batch_input(train, plan)));
      auto labels = to_size_labels(plan.labels);
      auto per = strategy == BaselineStrategy::kWfce ? focal_loss(logits, labels, cfg.baseline.focal_gamma, w)
                                                      : cross_entropy(logits, labels, w);
      auto loss = batch_mean(per);
      check_finite(loss, "baseline epoch " + std::to_string(epoch));
      loss.backward();
      adam_step(params, opt);
      zero_grads(params);
      loss_sum += loss.item();
      ++counted;
      rec.units += plan.indices.size();
    }
    rec.mean_loss = counted ? loss_sum / static_cast<double>(counted) : 0.0;
    rec.seconds = seconds_since(t0);
    const double epoch_loss = rec.mean_loss;
    finish_epoch(std::move(rec), &record, observer);
    if (plateau.update(epoch_loss)) {
      ++epoch;
      break;
    }
  }
  ckpt.epoch = static_cast<std::int64_t>(epoch - 1);
  ckpt.head = std::move(head);
  record.final = std::move(ckpt);
  return record;
}

RunRecord train(const TrainConfig& cfg, const Dataset& train_set, const EpochObserver& observer) {
  if (cfg.method == Method::kBaseline) return run_baseline(cfg, train_set, observer);
  if (cfg.stage1.loss != Stage1Loss::kTriplet || cfg.stage2.loss != Stage2Loss::kCenterTriplet) {
    return run_extension(cfg, train_set, observer);
  }
  return run_pcct(cfg, train_set, observer);
}

std::string run_record_json(const RunRecord& record) {
  nlohmann::json j;
  j["method"] = record.method;
  j["stage2_converged"] = record.stage2_converged;
  auto& epochs = j["epochs"] = nlohmann::json::array();
  for (const auto& e : record.epochs) {
    nlohmann::json r{{"stage", e.stage},
                     {"epoch", e.epoch},
                     {"mean_loss", e.mean_loss},
                     {"units", e.units},
                     {"start_fingerprint", hex(e.start_fingerprint)}};
    if (e.stage == "stage2") {
      r["centers_fingerprint"] = hex(e.centers_fingerprint);
      r["centers_epoch"] = e.centers_epoch;
    }
    epochs.push_back(std::move(r));
  }
  if (record.stage1) {
    j["stage1_checkpoint"] = {{"epoch", record.stage1->epoch}, {"fingerprint", hex(record.stage1->extractor.fingerprint())}};
  }
  j["final_checkpoint"] = {{"epoch", record.final.epoch}, {"fingerprint", hex(record.final.extractor.fingerprint())}};
  return j.dump(2) + "\n";
}

}  // namespace pcct

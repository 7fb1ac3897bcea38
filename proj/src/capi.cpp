#include "pcct_c.h"

#include <cstring>
#include <exception>
#include <fstream>
#include <mutex>
#include <new>
#include <string>

#include "pcct/config.hpp"
#include "pcct/error.hpp"
#include "pcct/experiment.hpp"

struct pcct_dataset {
  pcct::Dataset data;
  std::optional<pcct::SyntheticSpec> spec;
};

struct pcct_config {
  pcct::RunConfig cfg;
};

struct pcct_model {
  pcct::Checkpoint ckpt;
};

namespace {

thread_local std::string g_last_error;

pcct_status status_of(pcct::ErrorKind kind) {
  switch (kind) {
    case pcct::ErrorKind::kDimension: return PCCT_ERR_DIMENSION;
    case pcct::ErrorKind::kContract: return PCCT_ERR_CONTRACT;
    case pcct::ErrorKind::kParse: return PCCT_ERR_PARSE;
    case pcct::ErrorKind::kIo: return PCCT_ERR_IO;
    case pcct::ErrorKind::kDiverged: return PCCT_ERR_DIVERGED;
  }
  return PCCT_ERR_INTERNAL;
}

template <typename F>
pcct_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return PCCT_OK;
  } catch (const pcct::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return PCCT_ERR_INTERNAL;
  } catch (const std::filesystem::filesystem_error& e) {
    g_last_error = e.what();
    return PCCT_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PCCT_ERR_INTERNAL;
  }
}

#define PCCT_REQUIRE_ARG(p)                                   \
  do {                                                        \
    if ((p) == nullptr) {                                     \
      g_last_error = std::string("null argument: ") + #p;     \
      return PCCT_ERR_NULL_ARGUMENT;                          \
    }                                                         \
  } while (0)

pcct::JobObserver bridge(pcct_epoch_callback cb, void* user) {
  if (!cb) return {};
  return [cb, user](const std::string& tag, const pcct::EpochRecord& rec) {
    cb(tag.c_str(), rec.stage.c_str(), rec.epoch, rec.mean_loss, rec.seconds, user);
  };
}

}  // namespace

extern "C" {

const char* pcct_version(void) { return "1.0.0"; }

const char* pcct_last_error(void) { return g_last_error.c_str(); }

const char* pcct_status_name(pcct_status status) {
  switch (status) {
    case PCCT_OK: return "ok";
    case PCCT_ERR_DIMENSION: return "dimension error";
    case PCCT_ERR_CONTRACT: return "contract error";
    case PCCT_ERR_PARSE: return "parse error";
    case PCCT_ERR_IO: return "io error";
    case PCCT_ERR_DIVERGED: return "training diverged";
    case PCCT_ERR_NULL_ARGUMENT: return "null argument";
    case PCCT_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void pcct_string_free(char* s) { delete[] s; }

pcct_status pcct_dataset_generate(const char* preset, uint64_t seed, pcct_dataset** out) {
  PCCT_REQUIRE_ARG(preset);
  PCCT_REQUIRE_ARG(out);
  return guarded([&] {
    auto spec = pcct::preset_spec(preset, seed);
    *out = new pcct_dataset{pcct::gen_gaussian_imbalanced(spec), spec};
  });
}

pcct_status pcct_dataset_generate_from_spec(const char* spec_json_path, pcct_dataset** out) {
  PCCT_REQUIRE_ARG(spec_json_path);
  PCCT_REQUIRE_ARG(out);
  return guarded([&] {
    auto spec = pcct::load_spec_json(spec_json_path);
    *out = new pcct_dataset{pcct::gen_gaussian_imbalanced(spec), spec};
  });
}

pcct_status pcct_dataset_load_csv(const char* path, pcct_dataset** out) {
  PCCT_REQUIRE_ARG(path);
  PCCT_REQUIRE_ARG(out);
  return guarded([&] { *out = new pcct_dataset{pcct::load_csv(path), std::nullopt}; });
}

pcct_status pcct_dataset_save(const pcct_dataset* data, const char* csv_path, const char* sidecar_path) {
  PCCT_REQUIRE_ARG(data);
  PCCT_REQUIRE_ARG(csv_path);
  return guarded([&] {
    pcct::save_csv(data->data, csv_path);
    if (sidecar_path) {
      pcct::require(data->spec.has_value(), pcct::ErrorKind::kContract, "dataset was not generated; no spec to write");
      pcct::save_spec_json(*data->spec, sidecar_path);
    }
  });
}

pcct_status pcct_dataset_shape(const pcct_dataset* data, size_t* rows, size_t* dim, size_t* classes) {
  PCCT_REQUIRE_ARG(data);
  if (rows) *rows = data->data.rows();
  if (dim) *dim = data->data.dim;
  if (classes) *classes = data->data.num_classes();
  return PCCT_OK;
}

pcct_status pcct_dataset_class_size(const pcct_dataset* data, size_t class_id, size_t* out) {
  PCCT_REQUIRE_ARG(data);
  PCCT_REQUIRE_ARG(out);
  return guarded([&] {
    pcct::require(class_id < data->data.num_classes(), pcct::ErrorKind::kContract, "class id out of range");
    *out = data->data.index.members(class_id).size();
  });
}

void pcct_dataset_free(pcct_dataset* data) { delete data; }

pcct_status pcct_config_default(pcct_config** out) {
  PCCT_REQUIRE_ARG(out);
  return guarded([&] {
    auto* c = new pcct_config{};
    pcct::refresh_fingerprint(c->cfg);
    *out = c;
  });
}

pcct_status pcct_config_load(const char* path, pcct_config** out) {
  PCCT_REQUIRE_ARG(path);
  PCCT_REQUIRE_ARG(out);
  return guarded([&] { *out = new pcct_config{pcct::load_config(path)}; });
}

pcct_status pcct_config_set(pcct_config* cfg, const char* key, const char* value) {
  PCCT_REQUIRE_ARG(cfg);
  PCCT_REQUIRE_ARG(key);
  PCCT_REQUIRE_ARG(value);
  return guarded([&] { pcct::set_option(cfg->cfg, key, value); });
}

pcct_status pcct_config_render(const pcct_config* cfg, char** out) {
  PCCT_REQUIRE_ARG(cfg);
  PCCT_REQUIRE_ARG(out);
  return guarded([&] {
    const auto text = pcct::render_config(cfg->cfg);
    char* buf = new char[text.size() + 1];
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *out = buf;
  });
}

pcct_status pcct_config_dataset(const pcct_config* cfg, pcct_dataset** out) {
  PCCT_REQUIRE_ARG(cfg);
  PCCT_REQUIRE_ARG(out);
  return guarded([&] {
    const auto& d = cfg->cfg.data;
    if (!d.path.empty()) {
      *out = new pcct_dataset{pcct::load_csv(d.path), std::nullopt};
    } else {
      auto spec = pcct::preset_spec(d.preset, d.seed);
      *out = new pcct_dataset{pcct::gen_gaussian_imbalanced(spec), spec};
    }
  });
}

void pcct_config_free(pcct_config* cfg) { delete cfg; }

pcct_status pcct_train(const pcct_config* cfg, const pcct_dataset* data, size_t holdout_fold, const char* out_dir,
                       pcct_epoch_callback cb, void* user, double* mf1_out) {
  PCCT_REQUIRE_ARG(cfg);
  PCCT_REQUIRE_ARG(data);
  PCCT_REQUIRE_ARG(out_dir);
  return guarded([&] {
    auto res = pcct::train_holdout(cfg->cfg, data->data, holdout_fold, out_dir, bridge(cb, user));
    if (mf1_out) *mf1_out = res.eval.overall.mf1;
  });
}

pcct_status pcct_evaluate(const char* checkpoint_path, const pcct_dataset* data, size_t small_class_threshold,
                          const char* out_dir, double* mf1_out) {
  PCCT_REQUIRE_ARG(checkpoint_path);
  PCCT_REQUIRE_ARG(data);
  PCCT_REQUIRE_ARG(out_dir);
  return guarded([&] {
    auto ev = pcct::evaluate_to(checkpoint_path, data->data, small_class_threshold, out_dir);
    if (mf1_out) *mf1_out = ev.overall.mf1;
  });
}

pcct_status pcct_crossval(const pcct_config* cfg, const pcct_dataset* data, size_t folds, size_t jobs,
                          const char* out_dir, pcct_epoch_callback cb, void* user, double* mf1_mean_out) {
  PCCT_REQUIRE_ARG(cfg);
  PCCT_REQUIRE_ARG(data);
  PCCT_REQUIRE_ARG(out_dir);
  return guarded([&] {
    std::filesystem::path out(out_dir);
    std::filesystem::create_directories(out);
    pcct::RunConfig effective = cfg->cfg;
    effective.eval.folds = folds;
    effective.eval.jobs = jobs;
    pcct::write_text(out / "config.ini", pcct::render_config(effective));
    auto res = pcct::crossval(effective.train, data->data, folds, jobs, effective.eval.small_class_threshold,
                              bridge(cb, user));
    pcct::write_text(out / "crossval.json", pcct::crossval_json(res));
    if (mf1_mean_out) *mf1_mean_out = res.aggregate.mf1.mean;
  });
}

pcct_status pcct_sweep(const pcct_config* cfg, const pcct_dataset* data, const char* axis, const double* values,
                       size_t count, size_t jobs, const char* out_dir, pcct_epoch_callback cb, void* user) {
  PCCT_REQUIRE_ARG(cfg);
  PCCT_REQUIRE_ARG(data);
  PCCT_REQUIRE_ARG(axis);
  PCCT_REQUIRE_ARG(out_dir);
  if (count > 0) PCCT_REQUIRE_ARG(values);
  return guarded([&] {
    const auto ax = pcct::parse_sweep_axis(axis);
    std::filesystem::path out(out_dir);
    std::filesystem::create_directories(out);
    pcct::RunConfig effective = cfg->cfg;
    effective.eval.jobs = jobs;
    pcct::write_text(out / "config.ini", pcct::render_config(effective));
    auto rows = pcct::sweep(effective, data->data, ax, std::vector<double>(values, values + count), jobs, bridge(cb, user));
    pcct::write_text(out / "sweep.csv", pcct::sweep_csv(ax, rows));
  });
}

pcct_status pcct_model_load(const char* checkpoint_path, pcct_model** out) {
  PCCT_REQUIRE_ARG(checkpoint_path);
  PCCT_REQUIRE_ARG(out);
  return guarded([&] { *out = new pcct_model{pcct::load_checkpoint(checkpoint_path)}; });
}

pcct_status pcct_model_input_dim(const pcct_model* model, size_t* out) {
  PCCT_REQUIRE_ARG(model);
  PCCT_REQUIRE_ARG(out);
  *out = model->ckpt.extractor.input_dim();
  return PCCT_OK;
}

pcct_status pcct_model_predict(const pcct_model* model, const double* features, size_t rows, size_t dim, int* labels) {
  PCCT_REQUIRE_ARG(model);
  if (rows > 0) {
    PCCT_REQUIRE_ARG(features);
    PCCT_REQUIRE_ARG(labels);
  }
  return guarded([&] {
    pcct::require(dim == model->ckpt.extractor.input_dim(), pcct::ErrorKind::kDimension,
                  "model expects " + std::to_string(model->ckpt.extractor.input_dim()) + " features, got " +
                      std::to_string(dim));
    auto pred = pcct::predict(model->ckpt, std::span<const double>(features, rows * dim), rows);
    std::copy(pred.begin(), pred.end(), labels);
  });
}

void pcct_model_free(pcct_model* model) { delete model; }

}  // extern "C"

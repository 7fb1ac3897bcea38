#include "pcct/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "pcct/error.hpp"

namespace pcct {

namespace {

struct Option {
  std::string key;  // section.name
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

std::string bad_value(const std::string& key, const std::string& value, const std::string& expected) {
  return "config key '" + key + "': '" + value + "' is not " + expected;
}

std::uint64_t to_u64(const std::string& key, const std::string& s) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  require(ec == std::errc() && p == s.data() + s.size() && !s.empty(), ErrorKind::kParse,
          bad_value(key, s, "a nonnegative integer"));
  return v;
}

double to_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  require(ec == std::errc() && p == s.data() + s.size() && !s.empty() && std::isfinite(v), ErrorKind::kParse,
          bad_value(key, s, "a finite number"));
  return v;
}

std::string fmt(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string fmt(std::uint64_t v) { return std::to_string(v); }

std::string join(const std::vector<std::size_t>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + std::to_string(xs[i]);
  return out;
}

std::vector<std::size_t> split_sizes(const std::string& key, const std::string& s) {
  std::vector<std::size_t> out;
  if (s.empty()) return out;
  std::istringstream is(s);
  std::string cell;
  while (std::getline(is, cell, ',')) {
    auto b = cell.find_first_not_of(' ');
    auto e = cell.find_last_not_of(' ');
    require(b != std::string::npos, ErrorKind::kParse, bad_value(key, s, "a comma-separated list of sizes"));
    out.push_back(static_cast<std::size_t>(to_u64(key, cell.substr(b, e - b + 1))));
  }
  return out;
}

// Wraps the enum parsers so their errors name the key.
template <typename F>
auto keyed(const std::string& key, const std::string& value, F parse) {
  try {
    return parse(value);
  } catch (const Error& e) {
    fail(ErrorKind::kParse, "config key '" + key + "': " + e.what());
  }
}

std::string method_text(const TrainConfig& t) { return method_name(t); }

void set_method(RunConfig& c, const std::string& v) {
  if (v == "pcct") {
    c.train.method = Method::kPcct;
    return;
  }
  const std::string prefix = "baseline:";
  require(v.rfind(prefix, 0) == 0, ErrorKind::kParse, bad_value("run.method", v, "'pcct' or 'baseline:<bce|wce|oce|wfce>'"));
  c.train.method = Method::kBaseline;
  c.train.baseline.strategy = keyed("run.method", v.substr(prefix.size()), parse_baseline);
}

const std::vector<Option>& options() {
  static const std::vector<Option> table = [] {
    std::vector<Option> t;
    auto add = [&](std::string key, std::function<void(RunConfig&, const std::string&)> set,
                   std::function<std::string(const RunConfig&)> get) {
      t.push_back({std::move(key), std::move(set), std::move(get)});
    };
    auto sz = [&](std::string key, auto member) {
      add(key, [key, member](RunConfig& c, const std::string& v) { member(c) = static_cast<std::size_t>(to_u64(key, v)); },
          [member](const RunConfig& c) { return fmt(static_cast<std::uint64_t>(member(c))); });
    };
    auto real_opt = [&](std::string key, auto member) {
      add(key, [key, member](RunConfig& c, const std::string& v) { member(c) = to_double(key, v); },
          [member](const RunConfig& c) { return fmt(member(c)); });
    };

    add("run.method", set_method, [](const RunConfig& c) { return method_text(c.train); });
    add("run.seed", [](RunConfig& c, const std::string& v) { c.train.seed = to_u64("run.seed", v); },
        [](const RunConfig& c) { return fmt(c.train.seed); });
    sz("run.early_stop_patience", [](auto& c) -> auto& { return c.train.early_stop_patience; });

    add("model.hidden", [](RunConfig& c, const std::string& v) { c.train.model.hidden = split_sizes("model.hidden", v); },
        [](const RunConfig& c) { return join(c.train.model.hidden); });
    sz("model.embedding_dim", [](auto& c) -> auto& { return c.train.model.embedding_dim; });
    add("model.activation",
        [](RunConfig& c, const std::string& v) { c.train.model.activation = keyed("model.activation", v, parse_activation); },
        [](const RunConfig& c) { return to_string(c.train.model.activation); });
    add("model.normalization",
        [](RunConfig& c, const std::string& v) {
          c.train.model.normalization = keyed("model.normalization", v, parse_normalization);
        },
        [](const RunConfig& c) { return to_string(c.train.model.normalization); });

    add("optim.learning_rate",
        [](RunConfig& c, const std::string& v) {
          c.train.adam.learning_rate = to_double("optim.learning_rate", v);
          if (!c.stage2_lr_explicit) c.train.stage2.learning_rate = c.train.adam.learning_rate;
        },
        [](const RunConfig& c) { return fmt(c.train.adam.learning_rate); });
    real_opt("optim.beta1", [](auto& c) -> auto& { return c.train.adam.beta1; });
    real_opt("optim.beta2", [](auto& c) -> auto& { return c.train.adam.beta2; });
    real_opt("optim.epsilon", [](auto& c) -> auto& { return c.train.adam.epsilon; });

    real_opt("loss.alpha", [](auto& c) -> auto& { return c.train.hyper.alpha; });
    real_opt("loss.beta", [](auto& c) -> auto& { return c.train.hyper.beta; });
    add("loss.p_norm",
        [](RunConfig& c, const std::string& v) {
          auto p = to_u64("loss.p_norm", v);
          require(p == 1 || p == 2, ErrorKind::kParse, bad_value("loss.p_norm", v, "1 or 2"));
          c.train.hyper.p_norm = static_cast<int>(p);
        },
        [](const RunConfig& c) { return std::to_string(c.train.hyper.p_norm); });

    sz("stage1.epochs", [](auto& c) -> auto& { return c.train.stage1.epochs; });
    sz("stage1.m_per_class", [](auto& c) -> auto& { return c.train.stage1.m_per_class; });
    add("stage1.loss", [](RunConfig& c, const std::string& v) { c.train.stage1.loss = keyed("stage1.loss", v, parse_stage1_loss); },
        [](const RunConfig& c) { return to_string(c.train.stage1.loss); });
    add("stage1.mining", [](RunConfig& c, const std::string& v) { c.train.stage1.mining = keyed("stage1.mining", v, parse_mining); },
        [](const RunConfig& c) { return to_string(c.train.stage1.mining); });
    real_opt("stage1.lambda_ce", [](auto& c) -> auto& { return c.train.stage1.lambda_ce; });
    sz("stage1.batches_per_epoch", [](auto& c) -> auto& { return c.train.stage1.batches_per_epoch; });

    sz("stage2.epochs", [](auto& c) -> auto& { return c.train.stage2.epochs; });
    sz("stage2.batch_size", [](auto& c) -> auto& { return c.train.stage2.batch_size; });
    add("stage2.loss", [](RunConfig& c, const std::string& v) { c.train.stage2.loss = keyed("stage2.loss", v, parse_stage2_loss); },
        [](const RunConfig& c) { return to_string(c.train.stage2.loss); });
    add("stage2.center_mode",
        [](RunConfig& c, const std::string& v) { c.train.stage2.center_mode = keyed("stage2.center_mode", v, parse_center_mode); },
        [](const RunConfig& c) { return to_string(c.train.stage2.center_mode); });
    add("stage2.center_init",
        [](RunConfig& c, const std::string& v) { c.train.stage2.center_init = keyed("stage2.center_init", v, parse_center_init); },
        [](const RunConfig& c) { return to_string(c.train.stage2.center_init); });
    add("stage2.learning_rate",
        [](RunConfig& c, const std::string& v) {
          c.train.stage2.learning_rate = to_double("stage2.learning_rate", v);
          c.stage2_lr_explicit = true;
        },
        [](const RunConfig& c) { return fmt(c.train.stage2.learning_rate); });
    sz("stage2.freeze_layers", [](auto& c) -> auto& { return c.train.stage2.freeze_layers; });
    add("stage2.final_centers",
        [](RunConfig& c, const std::string& v) { c.train.stage2.final_centers = keyed("stage2.final_centers", v, parse_final_centers); },
        [](const RunConfig& c) { return to_string(c.train.stage2.final_centers); });

    sz("baseline.epochs", [](auto& c) -> auto& { return c.train.baseline.epochs; });
    sz("baseline.batch_size", [](auto& c) -> auto& { return c.train.baseline.batch_size; });
    real_opt("baseline.focal_gamma", [](auto& c) -> auto& { return c.train.baseline.focal_gamma; });

    add("data.preset", [](RunConfig& c, const std::string& v) { c.data.preset = v; },
        [](const RunConfig& c) { return c.data.preset; });
    add("data.path", [](RunConfig& c, const std::string& v) { c.data.path = v; }, [](const RunConfig& c) { return c.data.path; });
    add("data.seed", [](RunConfig& c, const std::string& v) { c.data.seed = to_u64("data.seed", v); },
        [](const RunConfig& c) { return fmt(c.data.seed); });

    sz("eval.folds", [](auto& c) -> auto& { return c.eval.folds; });
    sz("eval.small_class_threshold", [](auto& c) -> auto& { return c.eval.small_class_threshold; });
    sz("eval.jobs", [](auto& c) -> auto& { return c.eval.jobs; });
    return t;
  }();
  return table;
}

const Option* find_option(const std::string& key) {
  for (const auto& o : options()) {
    if (o.key == key) return &o;
  }
  return nullptr;
}

std::string section_of(const std::string& key) { return key.substr(0, key.find('.')); }

std::string render_sections(const RunConfig& cfg, bool training_only) {
  std::ostringstream os;
  std::string current;
  for (const auto& o : options()) {
    const auto section = section_of(o.key);
    if (training_only && (section == "data" || section == "eval")) continue;
    if (section != current) {
      if (!current.empty()) os << '\n';
      os << '[' << section << "]\n";
      current = section;
    }
    os << o.key.substr(section.size() + 1) << " = " << o.get(cfg) << '\n';
  }
  return os.str();
}

}  // namespace

void set_option(RunConfig& cfg, const std::string& dotted_key, const std::string& value) {
  const Option* o = find_option(dotted_key);
  require(o != nullptr, ErrorKind::kParse, "unknown config key '" + dotted_key + "'");
  o->set(cfg, value);
  refresh_fingerprint(cfg);
}

std::vector<std::string> option_keys() {
  std::vector<std::string> keys;
  for (const auto& o : options()) keys.push_back(o.key);
  return keys;
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
  boost::property_tree::ptree tree;
  std::istringstream is(text);
  try {
    boost::property_tree::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    fail(ErrorKind::kParse, origin + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  RunConfig cfg;
  for (const auto& [section, body] : tree) {
    require(!body.empty() || body.data().empty(), ErrorKind::kParse,
            origin + ": key '" + section + "' must sit inside a [section]");
    for (const auto& [key, node] : body) {
      const std::string dotted = section + "." + key;
      try {
        set_option(cfg, dotted, node.data());
      } catch (const Error& e) {
        fail(ErrorKind::kParse, origin + ": " + e.what());
      }
    }
  }
  refresh_fingerprint(cfg);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::string render_config(const RunConfig& cfg) { return render_sections(cfg, false); }

void refresh_fingerprint(RunConfig& cfg) { cfg.train.fingerprint = fnv1a(render_sections(cfg, true)); }

Dataset load_dataset(const DataConfig& data) {
  if (!data.path.empty()) return load_csv(data.path);
  return gen_gaussian_imbalanced(preset_spec(data.preset, data.seed));
}

}  // namespace pcct

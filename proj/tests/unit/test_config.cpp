#include <doctest.h>

#include "pcct/config.hpp"
#include "pcct/error.hpp"

using namespace pcct;

TEST_CASE("defaults") {
  RunConfig c;
  CHECK(c.train.hyper.alpha == 0.5);
  CHECK(c.train.hyper.beta == 0.25);
  CHECK(c.train.hyper.p_norm == 2);
  CHECK(c.train.adam.learning_rate == 1e-4);
  CHECK(c.train.adam.beta2 == 0.99);
  CHECK(c.train.stage1.epochs == 200);
  CHECK(c.train.stage2.epochs == 200);
  CHECK(c.train.stage1.m_per_class == 10);
  CHECK(c.train.stage2.batch_size == 16);
  CHECK(c.train.baseline.batch_size == 32);
  CHECK(c.train.model.embedding_dim == 128);
  CHECK(c.eval.folds == 5);
  CHECK(c.eval.small_class_threshold == 20);
}

TEST_CASE("parsing sections") {
  auto c = parse_config(
      "[run]\nmethod = baseline:wfce\nseed = 7\n"
      "[model]\nhidden = 32,16\nnormalization = none\n"
      "[loss]\nalpha = 0.3\n"
      "[stage2]\ncenter_mode = trainable\n");
  CHECK(c.train.method == Method::kBaseline);
  CHECK(c.train.baseline.strategy == BaselineStrategy::kWfce);
  CHECK(c.train.seed == 7);
  CHECK(c.train.model.hidden == std::vector<std::size_t>{32, 16});
  CHECK(c.train.model.normalization == Normalization::kNone);
  CHECK(c.train.hyper.alpha == 0.3);
  CHECK(c.train.stage2.center_mode == CenterMode::kTrainable);
}

TEST_CASE("unknown keys and malformed values are rejected") {
  CHECK_THROWS_AS(parse_config("[run]\ncolour = red\n"), Error);
  CHECK_THROWS_AS(parse_config("[nope]\nseed = 1\n"), Error);
  CHECK_THROWS_AS(parse_config("seed = 1\n"), Error);
  CHECK_THROWS_AS(parse_config("[stage1]\nepochs = many\n"), Error);
  CHECK_THROWS_AS(parse_config("[loss]\np_norm = 3\n"), Error);
  CHECK_THROWS_AS(parse_config("[run\nseed = 1\n"), Error);
  try {
    parse_config("[run]\nbogus = 1\n", "x.ini");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kParse);
    CHECK(std::string(e.what()).find("x.ini") != std::string::npos);
  }
}

TEST_CASE("learning rate propagates to stage 2 unless set explicitly") {
  RunConfig c;
  set_option(c, "optim.learning_rate", "0.001");
  CHECK(c.train.stage2.learning_rate == 0.001);
  set_option(c, "stage2.learning_rate", "0.0005");
  set_option(c, "optim.learning_rate", "0.002");
  CHECK(c.train.stage2.learning_rate == 0.0005);
}

TEST_CASE("rendering round-trips and fingerprints ignore data and eval") {
  RunConfig c;
  set_option(c, "loss.alpha", "0.7");
  set_option(c, "model.hidden", "8,4");
  const auto text = render_config(c);
  auto back = parse_config(text);
  CHECK(render_config(back) == text);
  CHECK(back.train.fingerprint == c.train.fingerprint);

  RunConfig d = c;
  set_option(d, "eval.jobs", "4");
  set_option(d, "data.seed", "3");
  CHECK(d.train.fingerprint == c.train.fingerprint);
  set_option(d, "run.seed", "3");
  CHECK(d.train.fingerprint != c.train.fingerprint);
}

TEST_CASE("every key is settable from its rendered value") {
  RunConfig c;
  const auto text = render_config(c);
  for (const auto& key : option_keys()) CHECK(text.find(key.substr(key.find('.') + 1)) != std::string::npos);
  CHECK(option_keys().size() > 30);
}

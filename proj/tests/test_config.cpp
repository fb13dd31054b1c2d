#include "config.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace credanno;
using testing::contains;
using testing::error_of;

TEST_SUITE("config") {

TEST_CASE("empty config gives the default training settings") {
  auto cfg = parse_config("");
  const auto& r = cfg.run;
  CHECK(r.seed_epochs == 100);
  CHECK(r.resume_epochs == 50);
  CHECK(r.quench_period == 10);
  CHECK(r.batch_size == 128);
  CHECK(r.momentum == 0.9);
  CHECK(r.base_lr == 0.00025);
  CHECK(r.seed_fraction == 0.01);
  CHECK(r.request_fraction == 0.0);
  CHECK(r.confidence_threshold == 0.7);
  CHECK(r.strategy == Strategy::LeastConfidence);
  CHECK(r.seeding == SeedingMode::Sparse);
  CHECK(r.pseudo_labels == PseudoMode::Dynamic);
  CHECK(r.quenching);
  CHECK(cfg.data.synthetic());
  CHECK(cfg.n_repeats == 1);
}

TEST_CASE("values, comments and overrides") {
  auto cfg = parse_config("# budget\nseed_fraction = 0.05\nquench_period=7 # odd on purpose\n\nstrategy = random\n",
                          {{"seed_fraction", "0.01"}, {"n_repeats", "3"}});
  CHECK(cfg.run.seed_fraction == 0.01);
  CHECK(cfg.run.quench_period == 7);
  CHECK(cfg.run.strategy == Strategy::Random);
  CHECK(cfg.n_repeats == 3);
}

TEST_CASE("constraint violations name the key") {
  CHECK(contains(error_of([] { parse_config("seed_fraction = 1.5\n"); }), "seed_fraction"));
  CHECK(contains(error_of([] { parse_config("seed_fraction = 0.5\nrequest_fraction = 0.6\n"); }),
                 "seed_fraction + request_fraction"));
  CHECK(contains(error_of([] { parse_config("quench_period = 0\n"); }), "quench_period"));
  CHECK(contains(error_of([] { parse_config("confidence_threshold = 0.3\n"); }), "confidence_threshold"));
  CHECK(contains(error_of([] { parse_config("bogus_key = 1\n"); }), "bogus_key"));
  CHECK(contains(error_of([] { parse_config("batch_size = many\n"); }), "batch_size"));
  CHECK(contains(error_of([] { parse_config("just some words\n"); }), "line 1"));
  CHECK(contains(error_of([] { parse_config("features = f.csv\n"); }), "together"));
  try {
    parse_config("seed_fraction = 1.5\n");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
  }
}

TEST_CASE("a quench period that leaves a partial segment is accepted") {
  auto cfg = parse_config("quench_period = 7\nresume_epochs = 50\n");
  CHECK(cfg.run.quench_period == 7);
}

TEST_CASE("the echo reproduces the configuration") {
  auto cfg = parse_config(
      "seed_fraction = 0.02\nrequest_fraction = 0.0900000000000001\nbase_lr = 3e-4\nattr_feed = logits\n"
      "joint_backprop = true\nseeding = random\npseudo_labels = static\nquenching = false\nschedule = full_span\n"
      "ablation_budgets = 0.2, 0.02\nsynth_separation = 6.5\nsynth_seed = 11\nseed_candidates = global\n");
  auto echo = config_echo(cfg);
  auto again = parse_config(echo);
  CHECK(config_echo(again) == echo);
  for (const auto& key : config_keys()) CHECK(get_config_value(again, key) == get_config_value(cfg, key));
  CHECK(again.run.request_fraction == cfg.run.request_fraction);
  CHECK(again.run.predictor.feed == AttrFeed::Logits);
  CHECK(again.ablation_budgets == std::vector<double>{0.2, 0.02});
}

TEST_CASE("missing config file is a config error") {
  try {
    load_config("/nonexistent/run.cfg");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
  }
}

TEST_CASE("configured file dataset") {
  testing::TempDir dir("cfgds");
  auto synth = parse_config("synth_n_train = 20\nsynth_n_test = 6\nsynth_dim = 3\n");
  auto ds = load_configured_dataset(synth);
  CHECK(ds.train_rows().size() == 20);
  write_dataset(dir.path(), ds);
  auto files = parse_config("features = " + (dir / "features.csv").string() + "\nannotations = " +
                            (dir / "annotations.csv").string() + "\nsplit = " + (dir / "split.csv").string() +
                            "\nschema = " + (dir / "schema.txt").string() + "\n");
  auto back = load_configured_dataset(files);
  CHECK(back.features() == ds.features());
  CHECK(back.annotations() == ds.annotations());
}

}  // TEST_SUITE

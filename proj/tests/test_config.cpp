#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "boxdistill/config.hpp"
#include "boxdistill/error.hpp"
#include "boxdistill/json_io.hpp"

using namespace boxdistill;
using nlohmann::json;

TEST_CASE("default config is valid and resolves all seeds") {
  const ExperimentConfig cfg;
  CHECK(cfg.validate().empty());
  const ExperimentConfig r = cfg.resolved();
  CHECK(r.data.synthetic.seed != 0);
  CHECK(r.source_model.init_seed != 0);
  CHECK(r.target_model.init_seed != 0);
  CHECK(r.student_model.init_seed != 0);
  CHECK(r.opt_source.seed != 0);
  CHECK(r.source_model.out_classes == 3);
  CHECK(r.source_model.width_factor == 8);  // small-encdec default

  // resolution is a pure function of the config
  const ExperimentConfig r2 = cfg.resolved();
  CHECK(r.data.synthetic.seed == r2.data.synthetic.seed);
  CHECK(r.opt_stage2.seed == r2.opt_stage2.seed);

  // different master -> different derived seeds
  ExperimentConfig other = cfg;
  other.seeds.master = 2;
  CHECK(other.resolved().data.synthetic.seed != r.data.synthetic.seed);
}

TEST_CASE("json round trip preserves the config") {
  ExperimentConfig cfg;
  cfg.data.synthetic.noise_std = 0.07;
  cfg.opt_stage1.epochs = 17;
  cfg.stage2.use_strong_aug = false;
  cfg.output_dir = "runs/x";
  const ExperimentConfig back = ExperimentConfig::from_json(cfg.to_json());
  CHECK(back.data.synthetic.noise_std == 0.07);
  CHECK(back.opt_stage1.epochs == 17);
  CHECK(back.stage2.use_strong_aug == false);
  CHECK(back.output_dir == "runs/x");
  CHECK(stable_hash(back.to_json()) == stable_hash(cfg.to_json()));
}

TEST_CASE("dotted-key overrides reach nested fields, last wins") {
  json j;
  apply_overrides(j, {"optimizer.stage1.epochs=5",
                      "data.synthetic.noise_std=0.12",
                      "stage2.use_strong_aug=false",
                      "optimizer.stage1.epochs=9",
                      "output_dir=runs/override"});
  const ExperimentConfig cfg = ExperimentConfig::from_json(j);
  CHECK(cfg.opt_stage1.epochs == 9);
  CHECK(cfg.data.synthetic.noise_std == 0.12);
  CHECK(cfg.stage2.use_strong_aug == false);
  CHECK(cfg.output_dir == "runs/override");
}

TEST_CASE("string overrides without quotes parse as strings") {
  json j;
  apply_overrides(j, {"source_model.architecture=tiny-encdec"});
  const ExperimentConfig cfg = ExperimentConfig::from_json(j);
  CHECK(cfg.source_model.architecture == "tiny-encdec");
}

TEST_CASE("malformed overrides are configuration errors") {
  json j;
  CHECK_THROWS_AS(apply_overrides(j, {"no_equals_sign"}), ConfigError);
  CHECK_THROWS_AS(apply_overrides(j, {"=5"}), ConfigError);
  CHECK_THROWS_AS(apply_overrides(j, {"a..b=5"}), ConfigError);
}

TEST_CASE("validation enumerates every failure at once") {
  ExperimentConfig cfg;
  cfg.data.synthetic.blur_sigma = -1.0;
  cfg.opt_source.learning_rate = 0.0;
  cfg.opt_stage2.batch_size = 0;
  cfg.source_model.architecture = "alexnet";
  cfg.weak.noise_std_max = -2.0;
  cfg.output_dir = "";
  const auto errors = cfg.validate();
  CHECK(errors.size() >= 5);
}

TEST_CASE("directory kind requires the four dataset paths") {
  ExperimentConfig cfg;
  cfg.data.kind = "directory";
  const auto errors = cfg.validate();
  CHECK(errors.size() >= 4);
}

TEST_CASE("explicit out_classes must match the dataset") {
  ExperimentConfig cfg;
  cfg.source_model.out_classes = 5;
  const auto errors = cfg.validate();
  CHECK(!errors.empty());
}

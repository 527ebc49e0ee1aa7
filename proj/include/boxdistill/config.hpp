#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "boxdistill/augment.hpp"
#include "boxdistill/model.hpp"
#include "boxdistill/optimizer.hpp"
#include "boxdistill/synthetic.hpp"

namespace boxdistill {

struct DataConfig {
  std::string kind = "synthetic";  // "synthetic" | "directory"
  // synthetic benchmark
  SyntheticShiftSpec synthetic;
  int image_size = 64;
  int n_train = 200;
  int n_test = 50;
  // directory datasets (images/ + masks/ layout)
  std::string source_train_dir, source_test_dir;
  std::string target_train_dir, target_test_dir;
  int class_count = 3;
};

struct StagesConfig {
  bool source = true;
  bool stage1 = true;
  bool stage2 = true;
};

struct Stage2Config {
  bool use_strong_aug = true;
};

struct SeedsConfig {
  std::uint64_t master = 1;
};

/// Full declarative description of a run. Component seeds left at zero are
/// derived from seeds.master at resolve time, so varying one master seed
/// reseeds the whole pipeline coherently.
struct ExperimentConfig {
  DataConfig data;
  ModelSpec source_model, target_model, student_model;
  OptimizerConfig opt_source, opt_stage1, opt_stage2;
  AugmentationPolicy weak = AugmentationPolicy::weak_default();
  AugmentationPolicy strong = AugmentationPolicy::strong_default();
  Stage2Config stage2;
  StagesConfig stages;
  SeedsConfig seeds;
  std::string output_dir = "runs/default";
  std::string blackbox_endpoint;  // "host:port" -> query a served predictor

  ExperimentConfig();

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  /// Derives zero seeds from seeds.master, fills architecture defaults and
  /// ties model out_classes to the dataset class count.
  ExperimentConfig resolved() const;

  /// Collects every validation failure (empty result means valid).
  std::vector<std::string> validate() const;
};

ExperimentConfig load_config(const std::filesystem::path& file);

/// Applies `key.path=value` overrides onto a config json; values parse as
/// json literals when possible, else as strings. Last override wins.
void apply_overrides(nlohmann::json& j,
                     const std::vector<std::string>& overrides);

}  // namespace boxdistill

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "boxdistill/augment.hpp"
#include "boxdistill/blackbox.hpp"
#include "boxdistill/dataset.hpp"
#include "boxdistill/model.hpp"
#include "boxdistill/optimizer.hpp"

namespace boxdistill {

struct StageReport {
  std::string stage;  // "source" | "stage1" | "stage2"
  std::vector<double> step_losses;   // mean loss per optimization step
  std::vector<double> epoch_losses;  // mean loss per epoch
  int best_epoch = -1;               // epoch of the lowest mean loss
  double wall_clock_sec = 0.0;
  long query_count = 0;  // black-box queries consumed by this stage
  std::string checkpoint_path;       // filled when the orchestrator saves
  std::string best_checkpoint_path;
  nlohmann::json metrics;  // target-test evaluation, attached afterwards

  nlohmann::json to_json() const;
};

struct TrainOutput {
  SegmentationModel model;       // last-epoch parameters (the deliverable)
  std::vector<double> best_parameters;  // best-loss snapshot
  StageReport report;
};

/// Stage 0: supervised source training with pixel-mean cross-entropy.
/// Deterministic given (spec.init_seed, opt.seed). Non-finite loss aborts
/// with a TrainingError diagnostic.
TrainOutput train_source(const Dataset& source_train, const ModelSpec& spec,
                         const OptimizerConfig& opt);

/// Stage I: distill a fresh target model from the frozen soft pseudo-label
/// cache on raw (unaugmented) target images, KL(cached teacher || student).
/// The cache must cover every sample; no black-box queries happen here.
TrainOutput train_stage1(const PseudoLabelCache& cache,
                         const Dataset& target_train,
                         const ModelSpec& target_spec,
                         const OptimizerConfig& opt);

/// Stage II: two-view distillation. Per step the frozen stage-I teacher
/// labels a weak view, and a freshly initialized student learns from a
/// strong view (or the raw image when use_strong_aug is false):
/// KL(teacher(weak) || student(strong)). Issues zero black-box queries.
TrainOutput train_stage2(const SegmentationModel& teacher,
                         const Dataset& target_train,
                         const ModelSpec& student_spec,
                         const AugmentationPolicy& weak,
                         const AugmentationPolicy& strong,
                         const OptimizerConfig& opt, bool use_strong_aug);

}  // namespace boxdistill

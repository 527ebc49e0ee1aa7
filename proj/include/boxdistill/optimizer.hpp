#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "boxdistill/model.hpp"

namespace boxdistill {

/// Adaptive-moment gradient descent settings. Defaults follow the training
/// recipe: Adam, lr 1e-4, batch size 8; epoch counts are stage-dependent
/// (200 for source training, 100 per adaptation stage).
struct OptimizerConfig {
  std::string method = "adam";
  double learning_rate = 1e-4;
  int batch_size = 8;
  int epochs = 100;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  /// Throws ConfigError on invalid values.
  void validate() const;
};

/// Adam with bias correction. State arrays parallel the model's parameter
/// views; one optimizer instance per trained model.
class AdamOptimizer {
public:
  AdamOptimizer(SegmentationModel& model, const OptimizerConfig& config);

  /// Applies one update from the model's accumulated gradients, scaled by
  /// 1/batch_scale (pass the number of samples the gradients were summed
  /// over).
  void step(double batch_scale);

private:
  SegmentationModel& model_;
  OptimizerConfig cfg_;
  long t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace boxdistill

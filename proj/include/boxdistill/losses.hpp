#pragma once

#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "boxdistill/model.hpp"
#include "boxdistill/tensor.hpp"

namespace boxdistill {

/// Scalar loss in nats, averaged over pixels (and batch when accumulated).
struct LossValue {
  double value = 0.0;
  long pixel_count = 0;
};

// Probabilities are floored at kProbEps before any log. Gradients are zero
// in the floored region.
inline constexpr double kProbEps = 1e-8;

/// Pixel-mean cross-entropy of a probability map against integer labels:
/// -mean log p[target]. grad (optional) receives d(loss)/d(prediction).
LossValue cross_entropy(const SoftLabelMap& prediction, const LabelMask& target,
                        SoftLabelMap* grad = nullptr);

/// Pixel-mean forward KL divergence D_KL(teacher || student) =
/// mean_pixels sum_k t_k (log t_k - log s_k). The teacher is a constant:
/// grad (optional) receives d(loss)/d(student) only.
LossValue kl_distillation(const SoftLabelMap& teacher,
                          const SoftLabelMap& student,
                          SoftLabelMap* grad = nullptr);

/// A training target: hard labels select cross-entropy, soft labels select
/// KL distillation with the stored map as the (constant) teacher.
using LossTarget = std::variant<LabelMask, SoftLabelMap>;

LossValue loss_with_grad(const SoftLabelMap& prediction,
                         const LossTarget& target, SoftLabelMap* grad);

struct GradCheckResult {
  double max_rel_error = 0.0;
  int params_checked = 0;
};

/// Verifies analytic parameter gradients of the batch-mean loss against
/// central finite differences (step 1e-4) on `num_params` randomly sampled
/// parameters (at least 20). Relative error uses max(|analytic|, |fd|, 1e-8)
/// as denominator.
GradCheckResult loss_gradient_check(
    SegmentationModel& model,
    const std::vector<std::pair<ImageTensor, LossTarget>>& batch,
    int num_params, std::uint64_t seed);

}  // namespace boxdistill

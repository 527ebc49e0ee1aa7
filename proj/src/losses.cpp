#include "boxdistill/losses.hpp"

#include <algorithm>
#include <cmath>

#include "boxdistill/error.hpp"
#include "boxdistill/rng.hpp"

namespace boxdistill {

LossValue cross_entropy(const SoftLabelMap& prediction, const LabelMask& target,
                        SoftLabelMap* grad) {
  if (prediction.height != target.height || prediction.width != target.width)
    throw InputError("cross_entropy: prediction/target shape mismatch");
  const long n = static_cast<long>(prediction.height) * prediction.width;
  if (grad) *grad = SoftLabelMap(prediction.height, prediction.width,
                                 prediction.classes);
  double sum = 0.0;
  for (int y = 0; y < prediction.height; ++y) {
    for (int x = 0; x < prediction.width; ++x) {
      const int t = target.at(y, x);
      if (t < 0 || t >= prediction.classes)
        throw InputError("cross_entropy: target class out of range");
      const double p = prediction.at(y, x, t);
      const double pf = std::max(p, kProbEps);
      sum -= std::log(pf);
      if (grad && p > kProbEps) grad->at(y, x, t) = -1.0 / (n * pf);
    }
  }
  return {sum / n, n};
}

LossValue kl_distillation(const SoftLabelMap& teacher,
                          const SoftLabelMap& student, SoftLabelMap* grad) {
  if (teacher.height != student.height || teacher.width != student.width ||
      teacher.classes != student.classes)
    throw InputError("kl_distillation: teacher/student shape mismatch");
  const long n = static_cast<long>(teacher.height) * teacher.width;
  if (grad) *grad = SoftLabelMap(student.height, student.width, student.classes);
  double sum = 0.0;
  const std::size_t total = teacher.values.size();
  for (std::size_t i = 0; i < total; ++i) {
    const double t = teacher.values[i];
    const double s = student.values[i];
    const double sf = std::max(s, kProbEps);
    if (t > 0.0) sum += t * (std::log(std::max(t, kProbEps)) - std::log(sf));
    if (grad && s > kProbEps) grad->values[i] = -t / (n * sf);
  }
  return {sum / n, n};
}

LossValue loss_with_grad(const SoftLabelMap& prediction,
                         const LossTarget& target, SoftLabelMap* grad) {
  if (const auto* mask = std::get_if<LabelMask>(&target))
    return cross_entropy(prediction, *mask, grad);
  return kl_distillation(std::get<SoftLabelMap>(target), prediction, grad);
}

namespace {

double batch_loss(SegmentationModel& model,
                  const std::vector<std::pair<ImageTensor, LossTarget>>& batch) {
  double sum = 0.0;
  for (const auto& [image, target] : batch) {
    const SoftLabelMap pred = model.predict(image);
    sum += loss_with_grad(pred, target, nullptr).value;
  }
  return sum / static_cast<double>(batch.size());
}

}  // namespace

GradCheckResult loss_gradient_check(
    SegmentationModel& model,
    const std::vector<std::pair<ImageTensor, LossTarget>>& batch,
    int num_params, std::uint64_t seed) {
  if (batch.empty()) throw InputError("loss_gradient_check: empty batch");
  num_params = std::max(num_params, 20);

  // Analytic batch-mean gradient.
  model.zero_grads();
  for (const auto& [image, target] : batch) {
    const SoftLabelMap pred = model.forward_train(image);
    SoftLabelMap grad;
    loss_with_grad(pred, target, &grad);
    model.backward(grad);
  }
  const double inv_b = 1.0 / static_cast<double>(batch.size());

  auto& views = model.param_views();
  std::size_t total = 0;
  for (const auto& v : views) total += v.size;

  RngStream rng(seed);
  GradCheckResult result;
  const double h = 1e-4;
  for (int s = 0; s < num_params; ++s) {
    std::size_t idx = rng.next_u64() % total;
    double* value = nullptr;
    double analytic = 0.0;
    for (const auto& v : views) {
      if (idx < v.size) {
        value = v.value + idx;
        analytic = v.grad[idx] * inv_b;
        break;
      }
      idx -= v.size;
    }

    const double saved = *value;
    *value = saved + h;
    const double lp = batch_loss(model, batch);
    *value = saved - h;
    const double lm = batch_loss(model, batch);
    *value = saved;

    const double fd = (lp - lm) / (2.0 * h);
    const double denom = std::max({std::abs(analytic), std::abs(fd), 1e-8});
    result.max_rel_error =
        std::max(result.max_rel_error, std::abs(analytic - fd) / denom);
    ++result.params_checked;
  }
  return result;
}

}  // namespace boxdistill

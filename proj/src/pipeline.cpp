#include "boxdistill/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "boxdistill/error.hpp"
#include "boxdistill/losses.hpp"

namespace boxdistill {

nlohmann::json StageReport::to_json() const {
  nlohmann::json j;
  j["stage"] = stage;
  j["step_losses"] = step_losses;
  j["epoch_losses"] = epoch_losses;
  j["best_epoch"] = best_epoch;
  j["wall_clock_sec"] = wall_clock_sec;
  j["query_count"] = query_count;
  j["checkpoint"] = checkpoint_path;
  j["best_checkpoint"] = best_checkpoint_path;
  if (!metrics.is_null()) j["metrics"] = metrics;
  return j;
}

namespace {

// One sample's forward/loss/backward; gradients accumulate in the model.
using StepFn = std::function<double(SegmentationModel&, int sample_index,
                                    int epoch)>;

void shuffle_indices(std::vector<int>& order, RngStream rng) {
  for (int i = static_cast<int>(order.size()) - 1; i > 0; --i) {
    const int j = rng.uniform_int(0, i);
    std::swap(order[i], order[j]);
  }
}

TrainOutput run_training(SegmentationModel model, const std::string& stage,
                         int sample_count, const OptimizerConfig& opt,
                         const StepFn& step) {
  opt.validate();
  const auto t0 = std::chrono::steady_clock::now();

  TrainOutput out{std::move(model), {}, {}};
  out.report.stage = stage;
  AdamOptimizer adam(out.model, opt);
  const RngStream shuffle_root = RngStream(opt.seed).fork("shuffle");

  std::vector<int> order(sample_count);
  std::iota(order.begin(), order.end(), 0);
  double best_loss = std::numeric_limits<double>::infinity();

  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    shuffle_indices(order, shuffle_root.fork(static_cast<std::uint64_t>(epoch)));
    double epoch_sum = 0.0;
    int epoch_steps = 0;
    for (int start = 0; start < sample_count; start += opt.batch_size) {
      const int end = std::min(start + opt.batch_size, sample_count);
      out.model.zero_grads();
      double batch_sum = 0.0;
      for (int i = start; i < end; ++i)
        batch_sum += step(out.model, order[i], epoch);
      const int batch_n = end - start;
      const double batch_mean = batch_sum / batch_n;
      if (!std::isfinite(batch_mean))
        throw TrainingError(stage + " diverged: non-finite loss at epoch " +
                            std::to_string(epoch) + ", step " +
                            std::to_string(out.report.step_losses.size()));
      adam.step(static_cast<double>(batch_n));
      out.report.step_losses.push_back(batch_mean);
      epoch_sum += batch_mean * batch_n;
      epoch_steps += batch_n;
    }
    const double epoch_mean = epoch_sum / epoch_steps;
    out.report.epoch_losses.push_back(epoch_mean);
    if (epoch_mean < best_loss) {
      best_loss = epoch_mean;
      out.report.best_epoch = epoch;
      out.best_parameters = out.model.parameters_flat();
    }
  }

  out.report.wall_clock_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return out;
}

}  // namespace

TrainOutput train_source(const Dataset& source_train, const ModelSpec& spec,
                         const OptimizerConfig& opt) {
  if (!source_train.labeled())
    throw ConfigError("train_source: source training set must be labeled");
  source_train.validate();
  SegmentationModel model = build_model(spec);
  if (model.spec().out_classes != source_train.class_count)
    throw ConfigError("train_source: model out_classes != dataset classes");

  const auto& samples = source_train.samples;
  auto step = [&samples](SegmentationModel& m, int idx, int) {
    const Sample& s = samples[idx];
    const SoftLabelMap pred = m.forward_train(s.image);
    SoftLabelMap grad;
    const LossValue loss = cross_entropy(pred, *s.mask, &grad);
    m.backward(grad);
    return loss.value;
  };
  TrainOutput out = run_training(std::move(model), "source",
                                 static_cast<int>(samples.size()), opt, step);
  out.report.query_count = 0;
  return out;
}

TrainOutput train_stage1(const PseudoLabelCache& cache,
                         const Dataset& target_train,
                         const ModelSpec& target_spec,
                         const OptimizerConfig& opt) {
  if (target_train.samples.empty())
    throw ConfigError("train_stage1: empty target training set");
  for (const Sample& s : target_train.samples)
    if (!cache.contains(s.id))
      throw ConfigError("train_stage1: pseudo-label cache misses sample '" +
                        s.id + "'");

  SegmentationModel model = build_model(target_spec);
  const int k = model.spec().out_classes;
  for (const Sample& s : target_train.samples) {
    const SoftLabelMap& t = cache.at(s.id);
    if (t.classes != k || t.height != s.image.height ||
        t.width != s.image.width)
      throw ConfigError("train_stage1: cached label shape mismatch for '" +
                        s.id + "'");
  }

  const auto& samples = target_train.samples;
  auto step = [&samples, &cache](SegmentationModel& m, int idx, int) {
    const Sample& s = samples[idx];
    const SoftLabelMap pred = m.forward_train(s.image);
    SoftLabelMap grad;
    const LossValue loss = kl_distillation(cache.at(s.id), pred, &grad);
    m.backward(grad);
    return loss.value;
  };
  TrainOutput out = run_training(std::move(model), "stage1",
                                 static_cast<int>(samples.size()), opt, step);
  // All teacher knowledge arrived through the precomputed cache.
  out.report.query_count = static_cast<long>(cache.size());
  return out;
}

TrainOutput train_stage2(const SegmentationModel& teacher,
                         const Dataset& target_train,
                         const ModelSpec& student_spec,
                         const AugmentationPolicy& weak,
                         const AugmentationPolicy& strong,
                         const OptimizerConfig& opt, bool use_strong_aug) {
  if (target_train.samples.empty())
    throw ConfigError("train_stage2: empty target training set");
  weak.validate();
  strong.validate();
  if (weak.kind != AugmentationPolicy::Kind::weak ||
      strong.kind != AugmentationPolicy::Kind::strong)
    throw ConfigError("train_stage2: augmentation policies have wrong kinds");

  SegmentationModel student = build_model(student_spec);
  if (student.spec().out_classes != teacher.spec().out_classes)
    throw ConfigError("train_stage2: teacher/student class count mismatch");
  if (student.spec().in_channels != teacher.spec().in_channels)
    throw ConfigError("train_stage2: teacher/student channel mismatch");

  const auto& samples = target_train.samples;
  const RngStream view_root = RngStream(opt.seed).fork("views");
  auto step = [&](SegmentationModel& m, int idx, int epoch) {
    const Sample& s = samples[idx];
    const RngStream rng = view_root.fork(static_cast<std::uint64_t>(epoch))
                              .fork(static_cast<std::uint64_t>(idx));
    auto [weak_view, strong_view] = sample_two_views(s.image, weak, strong, rng);
    const SoftLabelMap teacher_map = teacher.predict(weak_view);
    const ImageTensor& student_in = use_strong_aug ? strong_view : s.image;
    const SoftLabelMap pred = m.forward_train(student_in);
    SoftLabelMap grad;
    const LossValue loss = kl_distillation(teacher_map, pred, &grad);
    m.backward(grad);
    return loss.value;
  };
  TrainOutput out = run_training(std::move(student), "stage2",
                                 static_cast<int>(samples.size()), opt, step);
  out.report.query_count = 0;
  return out;
}

}  // namespace boxdistill

#include "boxdistill/optimizer.hpp"

#include <cmath>

#include "boxdistill/error.hpp"

namespace boxdistill {

void OptimizerConfig::validate() const {
  if (method != "adam")
    throw ConfigError("optimizer method must be 'adam', got '" + method + "'");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
    throw ConfigError("adam betas must lie in [0,1)");
  if (!(eps > 0.0)) throw ConfigError("adam eps must be > 0");
}

AdamOptimizer::AdamOptimizer(SegmentationModel& model,
                             const OptimizerConfig& config)
    : model_(model), cfg_(config) {
  cfg_.validate();
  for (const auto& view : model_.param_views()) {
    m_.emplace_back(view.size, 0.0);
    v_.emplace_back(view.size, 0.0);
  }
}

void AdamOptimizer::step(double batch_scale) {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  const double inv_scale = 1.0 / batch_scale;
  auto& views = model_.param_views();
  for (std::size_t i = 0; i < views.size(); ++i) {
    auto& view = views[i];
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < view.size; ++j) {
      const double g = view.grad[j] * inv_scale;
      m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g;
      v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      view.value[j] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

}  // namespace boxdistill

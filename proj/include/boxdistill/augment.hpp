#pragma once

#include <utility>

#include "boxdistill/rng.hpp"
#include "boxdistill/tensor.hpp"

namespace boxdistill {

/// Stochastic photometric transform family. Weak policies add Gaussian
/// noise only; strong policies chain blur, contrast, brightness and gamma,
/// each applied independently with probability apply_prob in that fixed
/// order. Purely photometric: masks are untouched by construction. Outputs
/// are clamped to [0,1].
struct AugmentationPolicy {
  enum class Kind { weak, strong };
  Kind kind = Kind::weak;

  // weak: noise std drawn uniformly per application
  double noise_std_min = 0.0;
  double noise_std_max = 0.05;

  // strong parameter ranges
  double blur_sigma_min = 0.5;
  double blur_sigma_max = 2.0;
  double contrast_min = 0.65;
  double contrast_max = 1.5;
  double brightness_min = -0.1;
  double brightness_max = 0.1;
  double gamma_min = 0.7;
  double gamma_max = 1.5;

  // Per-transform application probability: weak noise always fires,
  // each strong transform fires independently.
  double apply_prob = 1.0;

  static AugmentationPolicy weak_default();
  static AugmentationPolicy strong_default();

  void validate() const;
};

/// One stochastic draw of the policy; deterministic given rng.
ImageTensor apply(const AugmentationPolicy& policy, const ImageTensor& image,
                  RngStream rng);

/// Two independent draws (separate substreams) on the same underlying image.
std::pair<ImageTensor, ImageTensor> sample_two_views(
    const ImageTensor& image, const AugmentationPolicy& weak,
    const AugmentationPolicy& strong, RngStream rng);

}  // namespace boxdistill

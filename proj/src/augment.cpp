#include "boxdistill/augment.hpp"

#include "boxdistill/error.hpp"
#include "boxdistill/image_ops.hpp"

namespace boxdistill {

AugmentationPolicy AugmentationPolicy::weak_default() {
  AugmentationPolicy p;
  p.kind = Kind::weak;
  p.apply_prob = 1.0;
  return p;
}

AugmentationPolicy AugmentationPolicy::strong_default() {
  AugmentationPolicy p;
  p.kind = Kind::strong;
  p.apply_prob = 0.5;
  return p;
}

void AugmentationPolicy::validate() const {
  if (apply_prob < 0.0 || apply_prob > 1.0)
    throw ConfigError("augmentation: apply_prob must be in [0,1]");
  if (kind == Kind::weak) {
    if (noise_std_min < 0.0 || noise_std_max < noise_std_min)
      throw ConfigError("augmentation: invalid weak noise range");
  } else {
    if (blur_sigma_min < 0.0 || blur_sigma_max < blur_sigma_min)
      throw ConfigError("augmentation: invalid blur sigma range");
    if (contrast_min <= 0.0 || contrast_max < contrast_min)
      throw ConfigError("augmentation: invalid contrast range");
    if (brightness_max < brightness_min)
      throw ConfigError("augmentation: invalid brightness range");
    if (gamma_min <= 0.0 || gamma_max < gamma_min)
      throw ConfigError("augmentation: invalid gamma range");
  }
}

ImageTensor apply(const AugmentationPolicy& policy, const ImageTensor& image,
                  RngStream rng) {
  policy.validate();
  image.validate();
  ImageTensor out = image;
  if (policy.kind == AugmentationPolicy::Kind::weak) {
    if (rng.bernoulli(policy.apply_prob)) {
      const double std = rng.uniform(policy.noise_std_min, policy.noise_std_max);
      add_gaussian_noise(out, std, rng);
    }
  } else {
    // Fixed order: blur -> contrast -> brightness -> gamma. Exact-identity
    // parameter draws are skipped so an identity-parameterized policy
    // reproduces the input bit-for-bit.
    if (rng.bernoulli(policy.apply_prob)) {
      const double sigma =
          rng.uniform(policy.blur_sigma_min, policy.blur_sigma_max);
      if (sigma > 0.0) out = gaussian_blur(out, sigma);
    }
    if (rng.bernoulli(policy.apply_prob)) {
      const double scale = rng.uniform(policy.contrast_min, policy.contrast_max);
      if (scale != 1.0) scale_contrast(out, scale);
    }
    if (rng.bernoulli(policy.apply_prob)) {
      const double delta =
          rng.uniform(policy.brightness_min, policy.brightness_max);
      if (delta != 0.0) shift_brightness(out, delta);
    }
    if (rng.bernoulli(policy.apply_prob)) {
      const double gamma = rng.uniform(policy.gamma_min, policy.gamma_max);
      if (gamma != 1.0) {
        out.clamp01();
        apply_gamma(out, gamma);
      }
    }
  }
  out.clamp01();
  return out;
}

std::pair<ImageTensor, ImageTensor> sample_two_views(
    const ImageTensor& image, const AugmentationPolicy& weak,
    const AugmentationPolicy& strong, RngStream rng) {
  if (weak.kind != AugmentationPolicy::Kind::weak ||
      strong.kind != AugmentationPolicy::Kind::strong)
    throw ConfigError("sample_two_views: policies must be (weak, strong)");
  return {apply(weak, image, rng.fork("weak")),
          apply(strong, image, rng.fork("strong"))};
}

}  // namespace boxdistill

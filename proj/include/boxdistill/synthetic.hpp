#pragma once

#include <array>
#include <cstdint>
#include <utility>

#include "boxdistill/dataset.hpp"

namespace boxdistill {

/// Photometric acquisition shift between the two synthetic domains.
/// The identity spec (offset 0, sigma 0, scale 1, noise 0) reproduces the
/// source rendering bit-exactly for the same seed.
struct SyntheticShiftSpec {
  int class_count = 3;  // background + two nested structures
  std::array<int, 2> shape_count_range = {1, 3};  // background distractors
  double intensity_offset = 0.0;
  double blur_sigma = 0.0;
  double contrast_scale = 1.0;
  double noise_std = 0.0;
  std::uint64_t seed = 0;

  bool is_identity() const {
    return intensity_offset == 0.0 && blur_sigma == 0.0 &&
           contrast_scale == 1.0 && noise_std == 0.0;
  }

  /// Throws ConfigError on invalid parameters (negative sigma/noise,
  /// non-positive contrast, bad shape range, unsupported class count).
  void validate() const;
};

/// Deterministic two-domain segmentation benchmark. Source and target share
/// the same label-generating geometry (sample i of both domains renders the
/// same scene); target images additionally pass through the shift transform.
/// Ground-truth masks are exact by construction. Target-train samples carry
/// no labels; target-test keeps them for held-out evaluation.
std::pair<DomainSplits, DomainSplits> generate_synthetic_pair(
    const SyntheticShiftSpec& spec, int n_train, int n_test, int image_size);

}  // namespace boxdistill

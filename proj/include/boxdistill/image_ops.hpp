#pragma once

#include "boxdistill/rng.hpp"
#include "boxdistill/tensor.hpp"

namespace boxdistill {

// Photometric primitives shared by the synthetic domain shift and the
// augmentation policies. All of them preserve shape (no geometric change)
// and leave clamping to the caller unless noted.

/// Separable Gaussian blur with reflect border, kernel radius ceil(3*sigma).
/// sigma <= 0 returns the input untouched.
ImageTensor gaussian_blur(const ImageTensor& image, double sigma);

/// Additive i.i.d. Gaussian noise per value.
void add_gaussian_noise(ImageTensor& image, double stddev, RngStream& rng);

/// Scale contrast about the per-channel mean: v -> (v - mean) * scale + mean.
void scale_contrast(ImageTensor& image, double scale);

/// Additive brightness shift.
void shift_brightness(ImageTensor& image, double delta);

/// Gamma curve v -> v^gamma on [0,1] values (input clamped first).
void apply_gamma(ImageTensor& image, double gamma);

}  // namespace boxdistill

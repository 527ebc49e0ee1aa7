#pragma once

#include <cstdint>
#include <vector>

namespace boxdistill {

/// Dense float image, values in [0, 1], channel-last layout (y, x, c).
struct ImageTensor {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> values;

  ImageTensor() = default;
  ImageTensor(int h, int w, int c)
      : height(h), width(w), channels(c),
        values(static_cast<std::size_t>(h) * w * c, 0.0) {}

  double& at(int y, int x, int c) {
    return values[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  double at(int y, int x, int c) const {
    return values[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  std::size_t size() const { return values.size(); }

  void clamp01();

  /// Throws InputError unless dims are positive and every value is a finite
  /// number in [0, 1].
  void validate() const;
};

/// Integer class index per pixel, in [0, K-1].
struct LabelMask {
  int height = 0;
  int width = 0;
  std::vector<int> values;

  LabelMask() = default;
  LabelMask(int h, int w)
      : height(h), width(w), values(static_cast<std::size_t>(h) * w, 0) {}

  int& at(int y, int x) {
    return values[static_cast<std::size_t>(y) * width + x];
  }
  int at(int y, int x) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }

  /// Throws DataError if any value falls outside [0, class_count).
  void validate(int class_count) const;
};

/// Per-pixel class probability vectors, channel-last (y, x, k).
struct SoftLabelMap {
  int height = 0;
  int width = 0;
  int classes = 0;
  std::vector<double> values;

  SoftLabelMap() = default;
  SoftLabelMap(int h, int w, int k)
      : height(h), width(w), classes(k),
        values(static_cast<std::size_t>(h) * w * k, 0.0) {}

  double& at(int y, int x, int k) {
    return values[(static_cast<std::size_t>(y) * width + x) * classes + k];
  }
  double at(int y, int x, int k) const {
    return values[(static_cast<std::size_t>(y) * width + x) * classes + k];
  }

  bool row_stochastic(double tol = 1e-5) const;

  /// Throws InputError unless every pixel distribution sums to 1 within tol
  /// and all entries lie in [0, 1].
  void validate(double tol = 1e-5) const;

  /// Per-pixel argmax; ties resolve to the lowest class index.
  LabelMask argmax() const;
};

/// Bilinear interpolation, half-pixel-center convention, edge clamp.
/// Resizing to the identical size is an exact copy.
ImageTensor resize(const ImageTensor& image, int out_h, int out_w);

/// Nearest-neighbor, half-pixel-center convention. Output contains only
/// class indices present in the input.
LabelMask resize_mask(const LabelMask& mask, int out_h, int out_w);

}  // namespace boxdistill

#include "boxdistill/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "boxdistill/error.hpp"

namespace boxdistill {

void ImageTensor::clamp01() {
  for (double& v : values) v = std::clamp(v, 0.0, 1.0);
}

void ImageTensor::validate() const {
  if (height <= 0 || width <= 0 || channels <= 0)
    throw InputError("ImageTensor: dimensions must be positive");
  if (values.size() != static_cast<std::size_t>(height) * width * channels)
    throw InputError("ImageTensor: value buffer does not match dimensions");
  for (const double v : values) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      throw InputError("ImageTensor: value outside [0,1]: " +
                       std::to_string(v));
  }
}

void LabelMask::validate(int class_count) const {
  if (height <= 0 || width <= 0)
    throw DataError("LabelMask: dimensions must be positive");
  if (values.size() != static_cast<std::size_t>(height) * width)
    throw DataError("LabelMask: value buffer does not match dimensions");
  for (const int v : values) {
    if (v < 0 || v >= class_count)
      throw DataError("LabelMask: class index " + std::to_string(v) +
                      " outside [0," + std::to_string(class_count) + ")");
  }
}

bool SoftLabelMap::row_stochastic(double tol) const {
  const int n = height * width;
  for (int p = 0; p < n; ++p) {
    double sum = 0.0;
    for (int k = 0; k < classes; ++k) {
      const double v = values[static_cast<std::size_t>(p) * classes + k];
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) return false;
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol) return false;
  }
  return true;
}

void SoftLabelMap::validate(double tol) const {
  if (height <= 0 || width <= 0 || classes <= 0)
    throw InputError("SoftLabelMap: dimensions must be positive");
  if (values.size() != static_cast<std::size_t>(height) * width * classes)
    throw InputError("SoftLabelMap: value buffer does not match dimensions");
  if (!row_stochastic(tol))
    throw InputError("SoftLabelMap: per-pixel probabilities not row-stochastic");
}

LabelMask SoftLabelMap::argmax() const {
  LabelMask out(height, width);
  const int n = height * width;
  for (int p = 0; p < n; ++p) {
    int best = 0;
    double best_v = values[static_cast<std::size_t>(p) * classes];
    for (int k = 1; k < classes; ++k) {
      const double v = values[static_cast<std::size_t>(p) * classes + k];
      if (v > best_v) {
        best_v = v;
        best = k;
      }
    }
    out.values[p] = best;
  }
  return out;
}

namespace {

// Half-pixel-center source coordinate for output index i.
inline double src_coord(int i, double scale) { return (i + 0.5) * scale - 0.5; }

}  // namespace

ImageTensor resize(const ImageTensor& image, int out_h, int out_w) {
  image.validate();
  if (out_h <= 0 || out_w <= 0)
    throw InputError("resize: output dimensions must be positive");
  if (out_h == image.height && out_w == image.width) return image;

  ImageTensor out(out_h, out_w, image.channels);
  const double sy = static_cast<double>(image.height) / out_h;
  const double sx = static_cast<double>(image.width) / out_w;
  for (int y = 0; y < out_h; ++y) {
    const double fy = std::clamp(src_coord(y, sy), 0.0,
                                 static_cast<double>(image.height - 1));
    const int y0 = static_cast<int>(std::floor(fy));
    const int y1 = std::min(y0 + 1, image.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      const double fx = std::clamp(src_coord(x, sx), 0.0,
                                   static_cast<double>(image.width - 1));
      const int x0 = static_cast<int>(std::floor(fx));
      const int x1 = std::min(x0 + 1, image.width - 1);
      const double wx = fx - x0;
      for (int c = 0; c < image.channels; ++c) {
        const double top =
            image.at(y0, x0, c) * (1.0 - wx) + image.at(y0, x1, c) * wx;
        const double bot =
            image.at(y1, x0, c) * (1.0 - wx) + image.at(y1, x1, c) * wx;
        out.at(y, x, c) = top * (1.0 - wy) + bot * wy;
      }
    }
  }
  out.clamp01();  // guard rounding at the boundaries
  return out;
}

LabelMask resize_mask(const LabelMask& mask, int out_h, int out_w) {
  if (mask.height <= 0 || mask.width <= 0)
    throw InputError("resize_mask: empty input");
  if (out_h <= 0 || out_w <= 0)
    throw InputError("resize_mask: output dimensions must be positive");
  if (out_h == mask.height && out_w == mask.width) return mask;

  LabelMask out(out_h, out_w);
  const double sy = static_cast<double>(mask.height) / out_h;
  const double sx = static_cast<double>(mask.width) / out_w;
  for (int y = 0; y < out_h; ++y) {
    const int yi = std::clamp(static_cast<int>(std::floor((y + 0.5) * sy)), 0,
                              mask.height - 1);
    for (int x = 0; x < out_w; ++x) {
      const int xi = std::clamp(static_cast<int>(std::floor((x + 0.5) * sx)),
                                0, mask.width - 1);
      out.at(y, x) = mask.at(yi, xi);
    }
  }
  return out;
}

}  // namespace boxdistill

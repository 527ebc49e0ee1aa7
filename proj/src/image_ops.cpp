#include "boxdistill/image_ops.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace boxdistill {

namespace {

// Reflect index into [0, n) (mirror without repeating the edge sample,
// matching the usual BORDER_REFLECT_101 convention).
inline int reflect(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i = std::abs(i) % period;
  return i < n ? i : period - i;
}

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    k[i + radius] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

}  // namespace

ImageTensor gaussian_blur(const ImageTensor& image, double sigma) {
  if (sigma <= 0.0) return image;
  const auto kernel = gaussian_kernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  const int h = image.height, w = image.width, c = image.channels;

  ImageTensor tmp(h, w, c);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i)
          acc += kernel[i + radius] * image.at(y, reflect(x + i, w), ch);
        tmp.at(y, x, ch) = acc;
      }

  ImageTensor out(h, w, c);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i)
          acc += kernel[i + radius] * tmp.at(reflect(y + i, h), x, ch);
        out.at(y, x, ch) = acc;
      }
  return out;
}

void add_gaussian_noise(ImageTensor& image, double stddev, RngStream& rng) {
  if (stddev <= 0.0) return;
  for (double& v : image.values) v += rng.normal(0.0, stddev);
}

void scale_contrast(ImageTensor& image, double scale) {
  const int n = image.height * image.width;
  for (int ch = 0; ch < image.channels; ++ch) {
    double mean = 0.0;
    for (int y = 0; y < image.height; ++y)
      for (int x = 0; x < image.width; ++x) mean += image.at(y, x, ch);
    mean /= n;
    for (int y = 0; y < image.height; ++y)
      for (int x = 0; x < image.width; ++x)
        image.at(y, x, ch) = (image.at(y, x, ch) - mean) * scale + mean;
  }
}

void shift_brightness(ImageTensor& image, double delta) {
  for (double& v : image.values) v += delta;
}

void apply_gamma(ImageTensor& image, double gamma) {
  for (double& v : image.values) v = std::pow(std::clamp(v, 0.0, 1.0), gamma);
}

}  // namespace boxdistill

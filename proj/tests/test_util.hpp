#pragma once

// Shared helpers and independent oracles for the test suites. Oracles here
// deliberately avoid the library's implementation paths: sums are written
// out long-hand so they can disagree with the production code.

#include <cmath>
#include <optional>
#include <vector>

#include "boxdistill/dataset.hpp"
#include "boxdistill/rng.hpp"
#include "boxdistill/tensor.hpp"

namespace testutil {

using namespace boxdistill;

inline ImageTensor random_image(int h, int w, int c, std::uint64_t seed) {
  ImageTensor img(h, w, c);
  RngStream rng(seed);
  for (double& v : img.values) v = rng.uniform();
  return img;
}

inline LabelMask random_mask(int h, int w, int classes, std::uint64_t seed) {
  LabelMask m(h, w);
  RngStream rng(seed);
  for (int& v : m.values) v = rng.uniform_int(0, classes - 1);
  return m;
}

/// Row-stochastic map with entries bounded away from 0.
inline SoftLabelMap random_soft_map(int h, int w, int k, std::uint64_t seed) {
  SoftLabelMap m(h, w, k);
  RngStream rng(seed);
  for (int p = 0; p < h * w; ++p) {
    double sum = 0.0;
    for (int c = 0; c < k; ++c) {
      const double v = 0.05 + rng.uniform();
      m.values[static_cast<std::size_t>(p) * k + c] = v;
      sum += v;
    }
    for (int c = 0; c < k; ++c)
      m.values[static_cast<std::size_t>(p) * k + c] /= sum;
  }
  return m;
}

// --- loss oracles -----------------------------------------------------------

inline double oracle_cross_entropy(const SoftLabelMap& pred,
                                   const LabelMask& target, double eps) {
  double total = 0.0;
  int n = 0;
  for (int y = 0; y < pred.height; ++y)
    for (int x = 0; x < pred.width; ++x) {
      double p = pred.at(y, x, target.at(y, x));
      if (p < eps) p = eps;
      total += -std::log(p);
      ++n;
    }
  return total / n;
}

inline double oracle_kl(const SoftLabelMap& teacher, const SoftLabelMap& student,
                        double eps) {
  double total = 0.0;
  int n = 0;
  for (int y = 0; y < teacher.height; ++y)
    for (int x = 0; x < teacher.width; ++x) {
      double pixel = 0.0;
      for (int k = 0; k < teacher.classes; ++k) {
        const double t = teacher.at(y, x, k);
        double tf = t < eps ? eps : t;
        double s = student.at(y, x, k);
        if (s < eps) s = eps;
        if (t > 0.0) pixel += t * (std::log(tf) - std::log(s));
      }
      total += pixel;
      ++n;
    }
  return total / n;
}

// --- metric oracles ---------------------------------------------------------

/// Dice by direct pixel counting (independent enumeration).
inline double oracle_dice(const LabelMask& a, const LabelMask& b, int cls) {
  long na = 0, nb = 0, nab = 0;
  for (int y = 0; y < a.height; ++y)
    for (int x = 0; x < a.width; ++x) {
      const bool ia = a.at(y, x) == cls;
      const bool ib = b.at(y, x) == cls;
      if (ia) ++na;
      if (ib) ++nb;
      if (ia && ib) ++nab;
    }
  if (na + nb == 0) return 100.0;
  return 200.0 * static_cast<double>(nab) / static_cast<double>(na + nb);
}

/// Boundary by definition: structure pixel with a 4-neighbor outside.
inline std::vector<std::pair<int, int>> oracle_boundary(const LabelMask& m,
                                                        int cls) {
  std::vector<std::pair<int, int>> pts;
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) {
      if (m.at(y, x) != cls) continue;
      bool edge = false;
      const int dy[4] = {-1, 1, 0, 0};
      const int dx[4] = {0, 0, -1, 1};
      for (int i = 0; i < 4; ++i) {
        const int ny = y + dy[i], nx = x + dx[i];
        if (ny < 0 || ny >= m.height || nx < 0 || nx >= m.width ||
            m.at(ny, nx) != cls) {
          edge = true;
          break;
        }
      }
      if (edge) pts.emplace_back(y, x);
    }
  return pts;
}

/// Brute-force all-pairs symmetric average surface distance.
inline std::optional<double> oracle_asd(const LabelMask& pred,
                                        const LabelMask& truth, int cls) {
  const auto bp = oracle_boundary(pred, cls);
  const auto bt = oracle_boundary(truth, cls);
  if (bp.empty() || bt.empty()) return std::nullopt;
  auto directed = [](const std::vector<std::pair<int, int>>& from,
                     const std::vector<std::pair<int, int>>& to) {
    double total = 0.0;
    for (const auto& [fy, fx] : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& [ty, tx] : to) {
        const double d = std::hypot(static_cast<double>(fy - ty),
                                    static_cast<double>(fx - tx));
        if (d < best) best = d;
      }
      total += best;
    }
    return total / static_cast<double>(from.size());
  };
  return 0.5 * (directed(bp, bt) + directed(bt, bp));
}

// --- dataset helpers --------------------------------------------------------

inline Dataset tiny_labeled_dataset(int n, int size, int classes,
                                    std::uint64_t seed, Domain domain,
                                    Split split) {
  Dataset ds;
  ds.domain = domain;
  ds.split = split;
  ds.class_count = classes;
  for (int i = 0; i < n; ++i) {
    Sample s;
    s.id = "s" + std::to_string(i);
    s.image = random_image(size, size, 1, seed + i);
    // Correlate label with intensity so the task is learnable.
    LabelMask m(size, size);
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        const double v = s.image.at(y, x, 0);
        m.at(y, x) = v < 0.33 ? 0 : (v < 0.66 ? 1 : std::min(2, classes - 1));
      }
    s.mask = m;
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

}  // namespace testutil

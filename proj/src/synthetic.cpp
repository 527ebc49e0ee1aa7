#include "boxdistill/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "boxdistill/error.hpp"
#include "boxdistill/image_ops.hpp"
#include "boxdistill/rng.hpp"

namespace boxdistill {

void SyntheticShiftSpec::validate() const {
  if (class_count != 3)
    throw ConfigError("synthetic benchmark renders exactly 3 classes, got " +
                      std::to_string(class_count));
  if (shape_count_range[0] < 0 || shape_count_range[1] < shape_count_range[0])
    throw ConfigError("synthetic: invalid shape_count_range");
  if (blur_sigma < 0.0) throw ConfigError("synthetic: blur_sigma < 0");
  if (noise_std < 0.0) throw ConfigError("synthetic: noise_std < 0");
  if (contrast_scale <= 0.0) throw ConfigError("synthetic: contrast_scale <= 0");
  if (!std::isfinite(intensity_offset))
    throw ConfigError("synthetic: intensity_offset not finite");
}

namespace {

struct Ellipse {
  double cx, cy, rx, ry, angle;
  // Normalized squared radius; <= 1 means inside.
  double eval(double x, double y) const {
    const double dx = x - cx, dy = y - cy;
    const double ca = std::cos(angle), sa = std::sin(angle);
    const double u = ca * dx + sa * dy;
    const double v = -sa * dx + ca * dy;
    return (u * u) / (rx * rx) + (v * v) / (ry * ry);
  }
};

// Renders one scene: shaded background with distractor rings, a bright
// "disc" structure (class 1) and a brighter "cup" nested inside (class 2).
// The mask is exact; the image gets mild smoothing plus base texture noise.
void render_scene(RngStream rng, int size, ImageTensor& image,
                  LabelMask& mask, const SyntheticShiftSpec& spec) {
  const double s = static_cast<double>(size);
  image = ImageTensor(size, size, 1);
  mask = LabelMask(size, size);

  const double base = rng.uniform(0.15, 0.32);
  const double gx = rng.uniform(-0.08, 0.08);
  const double gy = rng.uniform(-0.08, 0.08);

  struct Bump {
    double cx, cy, sigma, amp;
  };
  std::array<Bump, 2> bumps;
  for (Bump& b : bumps) {
    b.cx = rng.uniform(0.0, s);
    b.cy = rng.uniform(0.0, s);
    b.sigma = rng.uniform(0.15, 0.30) * s;
    b.amp = rng.uniform(0.03, 0.08) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
  }

  const int n_rings =
      rng.uniform_int(spec.shape_count_range[0], spec.shape_count_range[1]);
  struct Ring {
    double cx, cy, r, thick, delta;
  };
  std::vector<Ring> rings(n_rings);
  for (Ring& r : rings) {
    r.cx = rng.uniform(0.05, 0.95) * s;
    r.cy = rng.uniform(0.05, 0.95) * s;
    r.r = rng.uniform(0.06, 0.14) * s;
    r.thick = rng.uniform(0.02, 0.05) * s;
    r.delta = rng.uniform(0.08, 0.18) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
  }

  Ellipse disc;
  disc.cx = rng.uniform(0.32, 0.68) * s;
  disc.cy = rng.uniform(0.32, 0.68) * s;
  disc.rx = rng.uniform(0.16, 0.26) * s;
  disc.ry = rng.uniform(0.16, 0.26) * s;
  disc.angle = rng.uniform(0.0, 3.14159265358979323846);
  const double disc_intensity = rng.uniform(0.55, 0.70);

  Ellipse cup;
  cup.cx = disc.cx + rng.uniform(-0.04, 0.04) * s;
  cup.cy = disc.cy + rng.uniform(-0.04, 0.04) * s;
  cup.rx = disc.rx * rng.uniform(0.45, 0.62);
  cup.ry = disc.ry * rng.uniform(0.45, 0.62);
  cup.angle = disc.angle;
  const double cup_intensity = rng.uniform(0.80, 0.95);

  for (int yi = 0; yi < size; ++yi) {
    for (int xi = 0; xi < size; ++xi) {
      const double x = xi + 0.5, y = yi + 0.5;
      double v = base + gx * (x / s - 0.5) + gy * (y / s - 0.5);
      for (const Bump& b : bumps) {
        const double d2 = (x - b.cx) * (x - b.cx) + (y - b.cy) * (y - b.cy);
        v += b.amp * std::exp(-0.5 * d2 / (b.sigma * b.sigma));
      }
      for (const Ring& r : rings) {
        const double d =
            std::sqrt((x - r.cx) * (x - r.cx) + (y - r.cy) * (y - r.cy));
        if (std::abs(d - r.r) <= r.thick) v += r.delta;
      }
      int cls = 0;
      if (cup.eval(x, y) <= 1.0) {
        cls = 2;
        v = cup_intensity;
      } else if (disc.eval(x, y) <= 1.0) {
        cls = 1;
        v = disc_intensity;
      }
      image.at(yi, xi, 0) = v;
      mask.at(yi, xi) = cls;
    }
  }

  image = gaussian_blur(image, 0.7);
  RngStream noise_rng = rng.fork("texture");
  add_gaussian_noise(image, 0.01, noise_rng);
  image.clamp01();
}

ImageTensor apply_shift(const ImageTensor& clean,
                        const SyntheticShiftSpec& spec, RngStream rng) {
  if (spec.is_identity()) return clean;
  ImageTensor out = clean;
  if (spec.blur_sigma > 0.0) out = gaussian_blur(out, spec.blur_sigma);
  if (spec.contrast_scale != 1.0) scale_contrast(out, spec.contrast_scale);
  if (spec.intensity_offset != 0.0)
    shift_brightness(out, spec.intensity_offset);
  if (spec.noise_std > 0.0) add_gaussian_noise(out, spec.noise_std, rng);
  out.clamp01();
  return out;
}

std::string sample_id(Split split, int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%04d", to_string(split).c_str(), index);
  return buf;
}

}  // namespace

std::pair<DomainSplits, DomainSplits> generate_synthetic_pair(
    const SyntheticShiftSpec& spec, int n_train, int n_test, int image_size) {
  spec.validate();
  if (n_train < 1 || n_test < 1)
    throw ConfigError("synthetic: n_train and n_test must be >= 1");
  if (image_size < 16) throw ConfigError("synthetic: image_size must be >= 16");

  DomainSplits source, target;
  const RngStream root(spec.seed);

  auto make_split = [&](Split split, int count, Dataset& src_out,
                        Dataset& tgt_out, bool target_labeled) {
    src_out.domain = Domain::source;
    tgt_out.domain = Domain::target;
    src_out.split = tgt_out.split = split;
    src_out.class_count = tgt_out.class_count = spec.class_count;
    const RngStream split_rng = root.fork(to_string(split));
    for (int i = 0; i < count; ++i) {
      const RngStream scene_rng = split_rng.fork(static_cast<std::uint64_t>(i));
      ImageTensor clean;
      LabelMask mask;
      render_scene(scene_rng, image_size, clean, mask, spec);

      Sample src;
      src.id = sample_id(split, i);
      src.image = clean;
      src.mask = mask;

      Sample tgt;
      tgt.id = src.id;
      tgt.image = apply_shift(clean, spec, scene_rng.fork("shift"));
      if (target_labeled) tgt.mask = mask;

      src_out.samples.push_back(std::move(src));
      tgt_out.samples.push_back(std::move(tgt));
    }
  };

  make_split(Split::train, n_train, source.train, target.train,
             /*target_labeled=*/false);
  make_split(Split::test, n_test, source.test, target.test,
             /*target_labeled=*/true);
  return {std::move(source), std::move(target)};
}

}  // namespace boxdistill

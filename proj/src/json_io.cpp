#include "boxdistill/json_io.hpp"

#include <cinttypes>
#include <cstdio>

#include "boxdistill/rng.hpp"

namespace boxdistill {

namespace {

template <typename T>
void get_to_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

}  // namespace

void to_json(json& j, const ModelSpec& s) {
  j = json{{"architecture", s.architecture}, {"width_factor", s.width_factor},
           {"depth", s.depth},               {"in_channels", s.in_channels},
           {"out_classes", s.out_classes},   {"init_seed", s.init_seed}};
}

void from_json(const json& j, ModelSpec& s) {
  get_to_if(j, "architecture", s.architecture);
  get_to_if(j, "width_factor", s.width_factor);
  get_to_if(j, "depth", s.depth);
  get_to_if(j, "in_channels", s.in_channels);
  get_to_if(j, "out_classes", s.out_classes);
  get_to_if(j, "init_seed", s.init_seed);
}

void to_json(json& j, const OptimizerConfig& c) {
  j = json{{"method", c.method},         {"learning_rate", c.learning_rate},
           {"batch_size", c.batch_size}, {"epochs", c.epochs},
           {"seed", c.seed},             {"beta1", c.beta1},
           {"beta2", c.beta2},           {"eps", c.eps}};
}

void from_json(const json& j, OptimizerConfig& c) {
  get_to_if(j, "method", c.method);
  get_to_if(j, "learning_rate", c.learning_rate);
  get_to_if(j, "batch_size", c.batch_size);
  get_to_if(j, "epochs", c.epochs);
  get_to_if(j, "seed", c.seed);
  get_to_if(j, "beta1", c.beta1);
  get_to_if(j, "beta2", c.beta2);
  get_to_if(j, "eps", c.eps);
}

void to_json(json& j, const SyntheticShiftSpec& s) {
  j = json{{"class_count", s.class_count},
           {"shape_count_range", s.shape_count_range},
           {"intensity_offset", s.intensity_offset},
           {"blur_sigma", s.blur_sigma},
           {"contrast_scale", s.contrast_scale},
           {"noise_std", s.noise_std},
           {"seed", s.seed}};
}

void from_json(const json& j, SyntheticShiftSpec& s) {
  get_to_if(j, "class_count", s.class_count);
  get_to_if(j, "shape_count_range", s.shape_count_range);
  get_to_if(j, "intensity_offset", s.intensity_offset);
  get_to_if(j, "blur_sigma", s.blur_sigma);
  get_to_if(j, "contrast_scale", s.contrast_scale);
  get_to_if(j, "noise_std", s.noise_std);
  get_to_if(j, "seed", s.seed);
}

void to_json(json& j, const AugmentationPolicy& p) {
  j = json{{"kind", p.kind == AugmentationPolicy::Kind::weak ? "weak" : "strong"},
           {"apply_prob", p.apply_prob}};
  if (p.kind == AugmentationPolicy::Kind::weak) {
    j["noise_std"] = {p.noise_std_min, p.noise_std_max};
  } else {
    j["blur_sigma"] = {p.blur_sigma_min, p.blur_sigma_max};
    j["contrast"] = {p.contrast_min, p.contrast_max};
    j["brightness"] = {p.brightness_min, p.brightness_max};
    j["gamma"] = {p.gamma_min, p.gamma_max};
  }
}

void from_json(const json& j, AugmentationPolicy& p) {
  std::string kind = p.kind == AugmentationPolicy::Kind::weak ? "weak" : "strong";
  get_to_if(j, "kind", kind);
  p = kind == "weak" ? AugmentationPolicy::weak_default()
                     : AugmentationPolicy::strong_default();
  get_to_if(j, "apply_prob", p.apply_prob);
  auto range = [&](const char* key, double& lo, double& hi) {
    if (j.contains(key)) {
      const auto& r = j.at(key);
      lo = r.at(0).get<double>();
      hi = r.at(1).get<double>();
    }
  };
  range("noise_std", p.noise_std_min, p.noise_std_max);
  range("blur_sigma", p.blur_sigma_min, p.blur_sigma_max);
  range("contrast", p.contrast_min, p.contrast_max);
  range("brightness", p.brightness_min, p.brightness_max);
  range("gamma", p.gamma_min, p.gamma_max);
}

std::string stable_hash(const json& j) {
  const std::string dump = j.dump();
  const std::uint64_t h = RngStream::fnv1a(dump);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

}  // namespace boxdistill

#include "boxdistill/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "boxdistill/error.hpp"

namespace boxdistill {

double dice_percent(const LabelMask& prediction, const LabelMask& truth,
                    int class_id) {
  if (prediction.height != truth.height || prediction.width != truth.width)
    throw InputError("dice: shape mismatch");
  long p = 0, t = 0, both = 0;
  for (std::size_t i = 0; i < prediction.values.size(); ++i) {
    const bool in_p = prediction.values[i] == class_id;
    const bool in_t = truth.values[i] == class_id;
    p += in_p;
    t += in_t;
    both += in_p && in_t;
  }
  if (p + t == 0) return 100.0;
  return 100.0 * 2.0 * static_cast<double>(both) / static_cast<double>(p + t);
}

std::vector<std::pair<int, int>> boundary_pixels(const LabelMask& mask,
                                                 int class_id) {
  std::vector<std::pair<int, int>> out;
  const int h = mask.height, w = mask.width;
  auto inside = [&](int y, int x) {
    return y >= 0 && y < h && x >= 0 && x < w && mask.at(y, x) == class_id;
  };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (mask.at(y, x) != class_id) continue;
      if (!inside(y - 1, x) || !inside(y + 1, x) || !inside(y, x - 1) ||
          !inside(y, x + 1))
        out.emplace_back(y, x);
    }
  return out;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1-D squared distance transform (lower envelope of parabolas).
void dt1d(const std::vector<double>& f, std::vector<double>& d,
          std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  d.assign(n, 0.0);
  v.assign(n, 0);
  z.assign(n + 1, 0.0);
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    if (f[q] == kInf) continue;
    double s;
    while (true) {
      if (f[v[k]] == kInf) {
        // no finite parabola yet; replace
        if (k == 0) {
          v[0] = q;
          z[0] = -kInf;
          z[1] = kInf;
          break;
        }
        --k;
        continue;
      }
      s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
      if (s <= z[k]) {
        --k;
        continue;
      }
      ++k;
      v[k] = q;
      z[k] = s;
      z[k + 1] = kInf;
      break;
    }
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double base = f[v[k]];
    d[q] = base == kInf ? kInf
                        : (q - v[k]) * static_cast<double>(q - v[k]) + base;
  }
}

// Exact Euclidean squared distance to the nearest seed pixel.
std::vector<double> edt_squared(const std::vector<std::pair<int, int>>& seeds,
                                int h, int w) {
  std::vector<double> grid(static_cast<std::size_t>(h) * w, kInf);
  for (const auto& [y, x] : seeds) grid[static_cast<std::size_t>(y) * w + x] = 0.0;

  std::vector<double> f, d, z;
  std::vector<int> v;
  // Pass 1: along rows.
  f.resize(w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) f[x] = grid[static_cast<std::size_t>(y) * w + x];
    dt1d(f, d, v, z);
    for (int x = 0; x < w; ++x) grid[static_cast<std::size_t>(y) * w + x] = d[x];
  }
  // Pass 2: along columns.
  f.resize(h);
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) f[y] = grid[static_cast<std::size_t>(y) * w + x];
    dt1d(f, d, v, z);
    for (int y = 0; y < h; ++y) grid[static_cast<std::size_t>(y) * w + x] = d[y];
  }
  return grid;
}

double directed_mean(const std::vector<std::pair<int, int>>& from,
                     const std::vector<double>& dist_sq, int w) {
  double sum = 0.0;
  for (const auto& [y, x] : from)
    sum += std::sqrt(dist_sq[static_cast<std::size_t>(y) * w + x]);
  return sum / static_cast<double>(from.size());
}

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (const double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

double std_of(const std::vector<double>& xs, double mean) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (const double x : xs) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(xs.size()));
}

}  // namespace

std::optional<double> average_surface_distance(const LabelMask& prediction,
                                               const LabelMask& truth,
                                               int class_id) {
  if (prediction.height != truth.height || prediction.width != truth.width)
    throw InputError("average_surface_distance: shape mismatch");
  const auto bp = boundary_pixels(prediction, class_id);
  const auto bt = boundary_pixels(truth, class_id);
  if (bp.empty() || bt.empty()) return std::nullopt;

  const int h = prediction.height, w = prediction.width;
  const auto dist_to_t = edt_squared(bt, h, w);
  const auto dist_to_p = edt_squared(bp, h, w);
  return 0.5 * (directed_mean(bp, dist_to_t, w) + directed_mean(bt, dist_to_p, w));
}

MetricReport evaluate_predictions(const std::vector<LabelMask>& predictions,
                                  const Dataset& test) {
  if (!test.labeled()) throw InputError("evaluate: test set has no labels");
  if (predictions.size() != test.samples.size())
    throw InputError("evaluate: prediction/case count mismatch");

  MetricReport report;
  report.case_count = static_cast<int>(test.samples.size());
  for (int cls = 1; cls < test.class_count; ++cls) {
    ClassMetrics cm;
    cm.class_id = cls;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
      const LabelMask& truth = *test.samples[i].mask;
      cm.dsc_cases.push_back(dice_percent(predictions[i], truth, cls));
      cm.asd_cases.push_back(average_surface_distance(predictions[i], truth, cls));
    }
    cm.dsc_mean = mean_of(cm.dsc_cases);
    cm.dsc_std = std_of(cm.dsc_cases, cm.dsc_mean);
    std::vector<double> defined;
    for (const auto& a : cm.asd_cases)
      if (a) defined.push_back(*a);
    cm.asd_defined = static_cast<int>(defined.size());
    cm.asd_undefined = static_cast<int>(cm.asd_cases.size() - defined.size());
    cm.asd_mean = defined.empty() ? std::numeric_limits<double>::quiet_NaN()
                                  : mean_of(defined);
    cm.asd_std = defined.empty() ? std::numeric_limits<double>::quiet_NaN()
                                 : std_of(defined, cm.asd_mean);
    report.classes.push_back(std::move(cm));
  }

  double dsc_sum = 0.0, asd_sum = 0.0;
  int asd_classes = 0;
  for (const auto& cm : report.classes) {
    dsc_sum += cm.dsc_mean;
    if (cm.asd_defined > 0) {
      asd_sum += cm.asd_mean;
      ++asd_classes;
    }
  }
  report.mean_dsc =
      report.classes.empty() ? 0.0 : dsc_sum / report.classes.size();
  report.mean_asd = asd_classes == 0
                        ? std::numeric_limits<double>::quiet_NaN()
                        : asd_sum / asd_classes;
  return report;
}

MetricReport evaluate(const SegmentationModel& model, const Dataset& test) {
  if (!test.labeled()) throw InputError("evaluate: test set has no labels");
  std::vector<LabelMask> predictions;
  predictions.reserve(test.samples.size());
  for (const Sample& s : test.samples)
    predictions.push_back(model.predict(s.image).argmax());
  return evaluate_predictions(predictions, test);
}

namespace {

nlohmann::json opt_to_json(const std::optional<double>& v) {
  if (v) return *v;
  return nullptr;
}

double num_or_nan(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN()
                     : j.get<double>();
}

nlohmann::json nan_to_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

}  // namespace

nlohmann::json MetricReport::to_json() const {
  nlohmann::json j;
  j["case_count"] = case_count;
  j["mean_dsc"] = mean_dsc;
  j["mean_asd"] = nan_to_null(mean_asd);
  j["classes"] = nlohmann::json::array();
  for (const auto& cm : classes) {
    nlohmann::json cj;
    cj["class_id"] = cm.class_id;
    cj["dsc_mean"] = cm.dsc_mean;
    cj["dsc_std"] = cm.dsc_std;
    cj["asd_mean"] = nan_to_null(cm.asd_mean);
    cj["asd_std"] = nan_to_null(cm.asd_std);
    cj["asd_defined"] = cm.asd_defined;
    cj["asd_undefined"] = cm.asd_undefined;
    cj["dsc_cases"] = cm.dsc_cases;
    cj["asd_cases"] = nlohmann::json::array();
    for (const auto& a : cm.asd_cases) cj["asd_cases"].push_back(opt_to_json(a));
    j["classes"].push_back(std::move(cj));
  }
  return j;
}

MetricReport MetricReport::from_json(const nlohmann::json& j) {
  MetricReport r;
  r.case_count = j.at("case_count").get<int>();
  r.mean_dsc = j.at("mean_dsc").get<double>();
  r.mean_asd = num_or_nan(j.at("mean_asd"));
  for (const auto& cj : j.at("classes")) {
    ClassMetrics cm;
    cm.class_id = cj.at("class_id").get<int>();
    cm.dsc_mean = cj.at("dsc_mean").get<double>();
    cm.dsc_std = cj.at("dsc_std").get<double>();
    cm.asd_mean = num_or_nan(cj.at("asd_mean"));
    cm.asd_std = num_or_nan(cj.at("asd_std"));
    cm.asd_defined = cj.at("asd_defined").get<int>();
    cm.asd_undefined = cj.at("asd_undefined").get<int>();
    cm.dsc_cases = cj.at("dsc_cases").get<std::vector<double>>();
    for (const auto& a : cj.at("asd_cases"))
      cm.asd_cases.push_back(a.is_null() ? std::nullopt
                                         : std::optional<double>(a.get<double>()));
    r.classes.push_back(std::move(cm));
  }
  return r;
}

namespace {

std::string cell(double mean, double stddev) {
  if (std::isnan(mean)) return "n/a";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.2f+-%.2f", mean, stddev);
  return buf;
}

}  // namespace

std::string MetricReport::table_header() const {
  std::ostringstream os;
  os << std::left;
  os.width(18);
  os << "model";
  for (const auto& cm : classes) {
    std::string h = "DSC[%] c" + std::to_string(cm.class_id);
    os.width(16);
    os << h;
  }
  os.width(16);
  os << "DSC[%] avg";
  for (const auto& cm : classes) {
    std::string h = "ASD[px] c" + std::to_string(cm.class_id);
    os.width(16);
    os << h;
  }
  os.width(16);
  os << "ASD[px] avg";
  return os.str();
}

std::string MetricReport::table_row(const std::string& label) const {
  std::ostringstream os;
  os << std::left;
  os.width(18);
  os << label;
  for (const auto& cm : classes) {
    os.width(16);
    os << cell(cm.dsc_mean, cm.dsc_std);
  }
  {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", mean_dsc);
    os.width(16);
    os << buf;
  }
  for (const auto& cm : classes) {
    os.width(16);
    os << cell(cm.asd_mean, cm.asd_std);
  }
  if (std::isnan(mean_asd)) {
    os.width(16);
    os << "n/a";
  } else {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", mean_asd);
    os.width(16);
    os << buf;
  }
  return os.str();
}

}  // namespace boxdistill

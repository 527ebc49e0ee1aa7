#include "boxdistill/report.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>

#include <json.hpp>

#include "boxdistill/checkpoint.hpp"
#include "boxdistill/config.hpp"
#include "boxdistill/error.hpp"
#include "boxdistill/experiment.hpp"
#include "boxdistill/metrics.hpp"

namespace boxdistill {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

cv::Mat image_to_bgr(const ImageTensor& image) {
  cv::Mat out(image.height, image.width, CV_8UC3);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x) {
      unsigned char v;
      if (image.channels == 1) {
        v = static_cast<unsigned char>(
            std::lround(std::clamp(image.at(y, x, 0), 0.0, 1.0) * 255.0));
        out.at<cv::Vec3b>(y, x) = {v, v, v};
      } else {
        auto px = [&](int c) {
          return static_cast<unsigned char>(std::lround(
              std::clamp(image.at(y, x, std::min(c, image.channels - 1)), 0.0,
                         1.0) *
              255.0));
        };
        out.at<cv::Vec3b>(y, x) = {px(2), px(1), px(0)};
      }
    }
  return out;
}

const std::array<cv::Vec3b, 6> kClassColors = {
    cv::Vec3b(60, 200, 60),   // class 1: green
    cv::Vec3b(50, 60, 230),   // class 2: red
    cv::Vec3b(230, 160, 40),  // class 3: blue-ish
    cv::Vec3b(40, 220, 230),  // yellow
    cv::Vec3b(220, 60, 220),  // magenta
    cv::Vec3b(230, 230, 230),
};

void write_mat(const cv::Mat& mat, const fs::path& png) {
  if (png.has_parent_path()) fs::create_directories(png.parent_path());
  if (!cv::imwrite(png.string(), mat))
    throw DataError("failed to write " + png.string());
}

}  // namespace

void render_loss_curve(const std::vector<double>& losses,
                       const std::string& title, const fs::path& png) {
  const int w = 640, h = 400, ml = 60, mb = 40, mt = 40, mr = 20;
  cv::Mat canvas(h, w, CV_8UC3, cv::Scalar(255, 255, 255));
  cv::putText(canvas, title, {ml, 26}, cv::FONT_HERSHEY_SIMPLEX, 0.6,
              {30, 30, 30}, 1, cv::LINE_AA);
  cv::rectangle(canvas, {ml, mt}, {w - mr, h - mb}, cv::Scalar(120, 120, 120));
  if (losses.empty()) {
    write_mat(canvas, png);
    return;
  }
  double lo = *std::min_element(losses.begin(), losses.end());
  double hi = *std::max_element(losses.begin(), losses.end());
  if (hi - lo < 1e-12) hi = lo + 1e-12;
  const int pw = w - ml - mr, ph = h - mt - mb;
  cv::Point prev;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    const int x =
        ml + static_cast<int>(pw * (losses.size() == 1
                                        ? 0.5
                                        : static_cast<double>(i) /
                                              (losses.size() - 1)));
    const int y =
        mt + static_cast<int>(ph * (1.0 - (losses[i] - lo) / (hi - lo)));
    const cv::Point p(x, y);
    if (i > 0) cv::line(canvas, prev, p, {180, 80, 30}, 1, cv::LINE_AA);
    prev = p;
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", hi);
  cv::putText(canvas, buf, {4, mt + 10}, cv::FONT_HERSHEY_SIMPLEX, 0.4,
              {90, 90, 90}, 1, cv::LINE_AA);
  std::snprintf(buf, sizeof(buf), "%.4g", lo);
  cv::putText(canvas, buf, {4, h - mb}, cv::FONT_HERSHEY_SIMPLEX, 0.4,
              {90, 90, 90}, 1, cv::LINE_AA);
  cv::putText(canvas, "step", {w / 2, h - 12}, cv::FONT_HERSHEY_SIMPLEX, 0.45,
              {90, 90, 90}, 1, cv::LINE_AA);
  write_mat(canvas, png);
}

void render_bar_chart(const std::vector<std::pair<std::string, double>>& rows,
                      const std::string& title, const std::string& unit,
                      const fs::path& png) {
  const int w = 720, h = 420, ml = 70, mb = 90, mt = 50, mr = 20;
  cv::Mat canvas(h, w, CV_8UC3, cv::Scalar(255, 255, 255));
  cv::putText(canvas, title, {ml, 28}, cv::FONT_HERSHEY_SIMPLEX, 0.6,
              {30, 30, 30}, 1, cv::LINE_AA);
  cv::rectangle(canvas, {ml, mt}, {w - mr, h - mb}, cv::Scalar(120, 120, 120));
  if (!rows.empty()) {
    double hi = 0.0;
    for (const auto& [_, v] : rows) hi = std::max(hi, v);
    if (hi <= 0.0) hi = 1.0;
    const int pw = w - ml - mr, ph = h - mt - mb;
    const int n = static_cast<int>(rows.size());
    const int slot = pw / n;
    for (int i = 0; i < n; ++i) {
      const int bw = std::max(10, slot * 3 / 5);
      const int x0 = ml + i * slot + (slot - bw) / 2;
      const int bh = static_cast<int>(ph * rows[i].second / (hi * 1.1));
      cv::rectangle(canvas, {x0, h - mb - bh}, {x0 + bw, h - mb},
                    cv::Scalar(160, 110, 40), cv::FILLED);
      char buf[48];
      std::snprintf(buf, sizeof(buf), "%.2f", rows[i].second);
      cv::putText(canvas, buf, {x0 - 4, h - mb - bh - 6},
                  cv::FONT_HERSHEY_SIMPLEX, 0.45, {60, 60, 60}, 1,
                  cv::LINE_AA);
      cv::putText(canvas, rows[i].first, {x0 - 10, h - mb + 20 + (i % 2) * 16},
                  cv::FONT_HERSHEY_SIMPLEX, 0.42, {30, 30, 30}, 1,
                  cv::LINE_AA);
    }
  }
  cv::putText(canvas, unit, {8, mt + 14}, cv::FONT_HERSHEY_SIMPLEX, 0.45,
              {90, 90, 90}, 1, cv::LINE_AA);
  write_mat(canvas, png);
}

ImageTensor render_overlay(const ImageTensor& image, const LabelMask& mask) {
  if (mask.height != image.height || mask.width != image.width)
    throw InputError("render_overlay: image/mask shape mismatch");
  cv::Mat bgr = image_to_bgr(image);
  int max_class = 0;
  for (const int v : mask.values) max_class = std::max(max_class, v);
  for (int cls = 1; cls <= max_class; ++cls) {
    const cv::Vec3b color = kClassColors[(cls - 1) % kClassColors.size()];
    for (const auto& [y, x] : boundary_pixels(mask, cls))
      bgr.at<cv::Vec3b>(y, x) = color;
  }
  ImageTensor out(image.height, image.width, 3);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x) {
      const cv::Vec3b px = bgr.at<cv::Vec3b>(y, x);
      out.at(y, x, 0) = px[2] / 255.0;
      out.at(y, x, 1) = px[1] / 255.0;
      out.at(y, x, 2) = px[0] / 255.0;
    }
  return out;
}

void save_image_png(const ImageTensor& image, const fs::path& png) {
  write_mat(image_to_bgr(image), png);
}

namespace {

bool is_run_dir(const fs::path& dir) {
  return fs::exists(dir / "manifest.json");
}

struct RunData {
  fs::path dir;
  json manifest;
  std::map<std::string, json> stage_reports;  // stage -> report json
  json summary;                               // metrics/summary.json
};

std::vector<RunData> collect_runs(const fs::path& root,
                                  std::vector<std::string>& warnings) {
  std::vector<fs::path> candidates;
  if (is_run_dir(root)) {
    candidates.push_back(root);
  } else if (fs::is_directory(root)) {
    for (const auto& e : fs::directory_iterator(root))
      if (e.is_directory() && is_run_dir(e.path()))
        candidates.push_back(e.path());
    std::sort(candidates.begin(), candidates.end());
  }

  std::vector<RunData> runs;
  for (const fs::path& dir : candidates) {
    RunData run;
    run.dir = dir;
    {
      std::ifstream is(dir / "manifest.json");
      run.manifest = json::parse(is, nullptr, false);
      if (run.manifest.is_discarded()) {
        warnings.push_back("unreadable manifest in " + dir.string());
        continue;
      }
    }
    for (const char* stage : {"source", "stage1", "stage2"}) {
      const fs::path rp = stage_report_path(dir, stage);
      if (!fs::exists(rp)) continue;
      std::ifstream is(rp);
      json r = json::parse(is, nullptr, false);
      if (!r.is_discarded()) run.stage_reports[stage] = std::move(r);
    }
    const fs::path sp = metrics_summary_path(dir, false);
    if (fs::exists(sp)) {
      std::ifstream is(sp);
      run.summary = json::parse(is, nullptr, false);
      if (run.summary.is_discarded()) run.summary = json();
    } else {
      warnings.push_back("no metric summary in " + dir.string());
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

// Canonical ablation row order, mirroring the staged method.
int row_rank(const std::string& label) {
  if (label == "source") return 0;
  if (label == "stage1") return 1;
  if (label == "stage2-noaug") return 2;
  if (label == "stage2+aug") return 3;
  return 4;
}

void render_overlays(const RunData& run, const fs::path& out_dir, int max_cases,
                     std::vector<std::string>& warnings) {
  // Best available model: stage2 > stage1 > source.
  fs::path ckpt;
  for (const char* stage : {"stage2", "stage1", "source"}) {
    const fs::path p = checkpoint_path(run.dir, stage, false);
    if (fs::exists(p)) {
      ckpt = p;
      break;
    }
  }
  if (ckpt.empty()) {
    warnings.push_back("no checkpoint for overlays in " + run.dir.string());
    return;
  }
  if (!run.manifest.contains("config")) return;
  ExperimentConfig cfg;
  try {
    cfg = ExperimentConfig::from_json(run.manifest["config"]);
  } catch (const std::exception& e) {
    warnings.push_back("bad config in manifest: " + std::string(e.what()));
    return;
  }
  try {
    const SegmentationModel model = load_checkpoint(ckpt);
    const auto [source, target] = prepare_data(cfg.resolved());
    const int n =
        std::min<int>(max_cases, static_cast<int>(target.test.samples.size()));
    for (int i = 0; i < n; ++i) {
      const Sample& s = target.test.samples[i];
      const LabelMask pred = model.predict(s.image).argmax();
      const ImageTensor pred_overlay = render_overlay(s.image, pred);
      save_image_png(pred_overlay, out_dir / (s.id + "_pred.png"));
      if (s.mask) {
        const ImageTensor truth_overlay = render_overlay(s.image, *s.mask);
        save_image_png(truth_overlay, out_dir / (s.id + "_truth.png"));
        // Side-by-side panel: input | truth | prediction.
        ImageTensor panel(s.image.height, s.image.width * 3, 3);
        for (int y = 0; y < s.image.height; ++y)
          for (int x = 0; x < s.image.width; ++x)
            for (int c = 0; c < 3; ++c) {
              panel.at(y, x, c) =
                  s.image.at(y, x, std::min(c, s.image.channels - 1));
              panel.at(y, x + s.image.width, c) = truth_overlay.at(y, x, c);
              panel.at(y, x + 2 * s.image.width, c) = pred_overlay.at(y, x, c);
            }
        save_image_png(panel, out_dir / (s.id + "_panel.png"));
      }
    }
  } catch (const std::exception& e) {
    warnings.push_back("overlay rendering failed for " + run.dir.string() +
                       ": " + e.what());
  }
}

}  // namespace

ReportSummary generate_report(const fs::path& root,
                              const ReportOptions& options) {
  ReportSummary summary;
  summary.report_dir = root / "report";
  fs::create_directories(summary.report_dir);

  const std::vector<RunData> runs = collect_runs(root, summary.warnings);
  summary.runs_found = static_cast<int>(runs.size());
  if (runs.empty()) {
    summary.warnings.push_back("no completed runs under " + root.string());
    std::ofstream os(summary.report_dir / "README.txt");
    os << "No completed runs found. Expected run directories containing "
          "manifest.json.\n";
    return summary;
  }

  // Loss curves per run & stage.
  for (const RunData& run : runs) {
    const std::string tag = run.dir.filename().string();
    for (const auto& [stage, report] : run.stage_reports) {
      if (!report.contains("step_losses")) continue;
      const auto losses = report["step_losses"].get<std::vector<double>>();
      render_loss_curve(losses, tag + " / " + stage + " train loss",
                        summary.report_dir /
                            ("loss_" + tag + "_" + stage + ".png"));
    }
  }

  // Ablation bars: aggregate summary rows across runs by label.
  std::map<std::string, std::vector<double>> dsc_rows, asd_rows;
  for (const RunData& run : runs) {
    if (!run.summary.contains("rows")) continue;
    for (const auto& row : run.summary["rows"]) {
      const std::string label = row.value("label", "?");
      const auto& m = row["metrics"];
      if (m.contains("mean_dsc"))
        dsc_rows[label].push_back(m["mean_dsc"].get<double>());
      if (m.contains("mean_asd") && !m["mean_asd"].is_null())
        asd_rows[label].push_back(m["mean_asd"].get<double>());
    }
  }
  auto to_bars = [](const std::map<std::string, std::vector<double>>& rows) {
    std::vector<std::pair<std::string, double>> bars;
    for (const auto& [label, values] : rows) {
      double s = 0.0;
      for (const double v : values) s += v;
      bars.emplace_back(label, s / values.size());
    }
    std::sort(bars.begin(), bars.end(), [](const auto& a, const auto& b) {
      return row_rank(a.first) < row_rank(b.first);
    });
    return bars;
  };
  if (!dsc_rows.empty())
    render_bar_chart(to_bars(dsc_rows), "Ablation: mean DSC by stage",
                     "DSC [%]", summary.report_dir / "ablation_dsc.png");
  if (!asd_rows.empty())
    render_bar_chart(to_bars(asd_rows), "Ablation: mean ASD by stage",
                     "ASD [px]", summary.report_dir / "ablation_asd.png");

  render_overlays(runs.back(), summary.report_dir / "overlays",
                  options.max_overlay_cases, summary.warnings);
  return summary;
}

}  // namespace boxdistill

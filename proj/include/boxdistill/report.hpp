#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "boxdistill/tensor.hpp"

namespace boxdistill {

struct ReportOptions {
  int max_overlay_cases = 4;
};

struct ReportSummary {
  int runs_found = 0;
  std::filesystem::path report_dir;
  std::vector<std::string> warnings;
};

/// Renders a loss-curve line plot to a PNG.
void render_loss_curve(const std::vector<double>& losses,
                       const std::string& title,
                       const std::filesystem::path& png);

/// Renders a labeled bar chart (one bar per row) to a PNG.
void render_bar_chart(const std::vector<std::pair<std::string, double>>& rows,
                      const std::string& title, const std::string& unit,
                      const std::filesystem::path& png);

/// Paints class boundaries over the image; output is a 3-channel image with
/// exactly the input's height and width.
ImageTensor render_overlay(const ImageTensor& image, const LabelMask& mask);

void save_image_png(const ImageTensor& image, const std::filesystem::path& png);

/// Scans root (a run directory, or a directory of run directories) and
/// emits <root>/report: per-stage loss curves, a DSC/ASD bar summary across
/// ablation rows in canonical order, and qualitative prediction overlays for
/// the first few target-test cases. Missing pieces produce warnings, not
/// failures.
ReportSummary generate_report(const std::filesystem::path& root,
                              const ReportOptions& options = {});

}  // namespace boxdistill

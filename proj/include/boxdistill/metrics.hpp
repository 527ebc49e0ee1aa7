#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "boxdistill/dataset.hpp"
#include "boxdistill/model.hpp"
#include "boxdistill/tensor.hpp"

namespace boxdistill {

/// Dice overlap in percent: 100 * 2|P∩T| / (|P|+|T|). Both structures
/// empty -> 100; exactly one empty -> 0.
double dice_percent(const LabelMask& prediction, const LabelMask& truth,
                    int class_id);

/// Symmetric average surface distance in pixels: the two directed mean
/// nearest-boundary distances, averaged. Boundaries are 4-connectivity
/// erosion differences (out-of-image counts as background); distances are
/// Euclidean between pixel centers, computed with an exact distance
/// transform. Returns nullopt when either structure is empty.
std::optional<double> average_surface_distance(const LabelMask& prediction,
                                               const LabelMask& truth,
                                               int class_id);

/// Boundary pixels of the class structure: member pixels with a 4-neighbor
/// outside the structure (or on the image border).
std::vector<std::pair<int, int>> boundary_pixels(const LabelMask& mask,
                                                 int class_id);

struct ClassMetrics {
  int class_id = 0;
  std::vector<double> dsc_cases;                 // percent, one per case
  std::vector<std::optional<double>> asd_cases;  // pixels; nullopt = undefined
  double dsc_mean = 0.0, dsc_std = 0.0;
  double asd_mean = 0.0, asd_std = 0.0;  // over defined cases only
  int asd_defined = 0;
  int asd_undefined = 0;
};

/// Per-class and aggregate DSC/ASD over a labeled test set. Aggregates are
/// mean +- std across cases (population std); undefined ASD cases are
/// excluded from the aggregate and counted.
struct MetricReport {
  std::vector<ClassMetrics> classes;  // foreground classes 1..K-1
  int case_count = 0;
  double mean_dsc = 0.0;  // average of per-class DSC means
  double mean_asd = 0.0;  // average of per-class ASD means (defined classes)

  nlohmann::json to_json() const;
  static MetricReport from_json(const nlohmann::json& j);
  /// Fixed-width table: one row, class columns plus Avg, mean+-std cells.
  std::string table_row(const std::string& label) const;
  std::string table_header() const;
};

MetricReport evaluate_predictions(const std::vector<LabelMask>& predictions,
                                  const Dataset& test);

/// Runs the model on every test image (argmax decision) and scores it.
/// Throws InputError if the test set is unlabeled.
MetricReport evaluate(const SegmentationModel& model, const Dataset& test);

}  // namespace boxdistill

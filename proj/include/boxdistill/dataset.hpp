#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "boxdistill/tensor.hpp"

namespace boxdistill {

enum class Domain { source, target };
enum class Split { train, test };

std::string to_string(Domain d);
std::string to_string(Split s);

struct Sample {
  std::string id;
  ImageTensor image;
  std::optional<LabelMask> mask;
};

/// One split of one domain. Immutable after construction; safe to read
/// concurrently.
struct Dataset {
  Domain domain = Domain::source;
  Split split = Split::train;
  int class_count = 0;
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
  bool labeled() const;

  /// Checks mask ranges, image/mask shape agreement, value ranges and
  /// sample-id uniqueness. Throws DataError on violation.
  void validate() const;
};

struct DomainSplits {
  Dataset train;
  Dataset test;
};

/// Loads `dir/images/<id>.png` (+ `dir/masks/<id>.png` when the masks
/// directory exists). Images are rescaled from 8-bit to [0,1]; masks are
/// 8-bit class indices and must stay below class_count.
Dataset load_dataset(const std::filesystem::path& dir, int class_count,
                     Domain domain, Split split);

/// Writes the dataset in the layout load_dataset expects. Unlabeled
/// datasets produce no masks directory.
void save_dataset(const std::filesystem::path& dir, const Dataset& dataset);

}  // namespace boxdistill

#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include "boxdistill/dataset.hpp"
#include "boxdistill/model.hpp"
#include "boxdistill/tensor.hpp"

namespace boxdistill {

/// The entire capability surface the adaptation side gets from the source
/// model: image in, probability map out. No parameters, no gradients, no
/// pre-softmax logits, no architecture internals are reachable through this
/// interface. Implementations must be stateless w.r.t. queries (identical
/// inputs give identical outputs) and safe for concurrent use.
class BlackBoxPredictor {
public:
  virtual ~BlackBoxPredictor() = default;

  virtual SoftLabelMap predict(const ImageTensor& image) const = 0;
  virtual int num_classes() const = 0;
  virtual int in_channels() const = 0;
  /// Opaque provenance label (never model internals).
  virtual std::string identity() const = 0;

  long query_count() const { return queries_.load(); }

protected:
  void count_query() const { ++queries_; }

private:
  mutable std::atomic<long> queries_{0};
};

/// Wraps a trained model behind the black-box surface. Owns a private,
/// frozen copy; nothing of the model leaks through the public interface.
class LocalBlackBox final : public BlackBoxPredictor {
public:
  explicit LocalBlackBox(SegmentationModel model);

  SoftLabelMap predict(const ImageTensor& image) const override;
  int num_classes() const override { return model_.spec().out_classes; }
  int in_channels() const override { return model_.spec().in_channels; }
  std::string identity() const override { return "local"; }

private:
  const SegmentationModel model_;
};

std::unique_ptr<BlackBoxPredictor> wrap_as_blackbox(
    const SegmentationModel& model);

struct CacheProvenance {
  std::string predictor_identity;
  std::string created_at_utc;
};

/// Frozen soft pseudo-labels, one per target-train sample. Entries are
/// rounded through float32 on insertion, matching the on-disk and on-wire
/// precision, so local and remote predictors produce identical caches.
/// The binary cache file carries no timestamps (reruns are byte-identical);
/// provenance lives in a sidecar json.
class PseudoLabelCache {
public:
  void insert(const std::string& sample_id, const SoftLabelMap& map);
  bool contains(const std::string& sample_id) const;
  const SoftLabelMap& at(const std::string& sample_id) const;
  std::size_t size() const { return entries_.size(); }

  /// True when every sample of the dataset has an entry.
  bool covers(const Dataset& dataset) const;

  const CacheProvenance& provenance() const { return provenance_; }
  void set_provenance(CacheProvenance p) { provenance_ = std::move(p); }

  void save(const std::filesystem::path& file) const;
  static PseudoLabelCache load(const std::filesystem::path& file);

private:
  std::map<std::string, SoftLabelMap> entries_;  // ordered → stable files
  CacheProvenance provenance_;
};

/// Queries the predictor once per target-train sample (exactly
/// |target_train| queries) and freezes the outputs. A predictor failure
/// aborts with the offending sample id in the message.
PseudoLabelCache precompute_pseudo_labels(const BlackBoxPredictor& predictor,
                                          const Dataset& target_train);

}  // namespace boxdistill

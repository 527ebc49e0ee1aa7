#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "boxdistill/layers.hpp"
#include "boxdistill/tensor.hpp"

namespace boxdistill {

/// Declarative description of a segmentation network. Two models built from
/// identical specs have identical parameter values.
struct ModelSpec {
  std::string architecture = "small-encdec";  // or "tiny-encdec"
  int width_factor = 0;  // channels at the top level; 0 = architecture default
  int depth = 0;         // downsampling levels; 0 = architecture default
  int in_channels = 1;
  int out_classes = 3;
  std::uint64_t init_seed = 1;

  /// Fills architecture defaults (small: width 8, tiny: width 4, depth 2)
  /// and validates. Throws ConfigError on unknown architecture or bad dims.
  ModelSpec resolved() const;

  bool operator==(const ModelSpec&) const = default;
};

struct ParamView {
  double* value = nullptr;
  double* grad = nullptr;
  std::size_t size = 0;
};

/// U-shaped encoder-decoder: per level Conv-IN-ReLU x2 blocks with 2x2 max
/// pooling down, nearest-neighbor upsampling with skip concatenation up, and
/// a 1x1 conv + per-pixel softmax head. Inputs whose sides are not divisible
/// by 2^depth are edge-padded and the output cropped back.
class SegmentationModel {
public:
  enum class Mode { train, eval };

  explicit SegmentationModel(const ModelSpec& spec);

  const ModelSpec& spec() const { return spec_; }
  Mode mode() const { return mode_; }
  void set_mode(Mode m) { mode_ = m; }

  /// Eval forward: pure function of (parameters, image), safe to call
  /// concurrently on a frozen model. The result is validated row-stochastic.
  SoftLabelMap predict(const ImageTensor& image) const;

  /// Training forward: caches activations for the following backward.
  /// The model owns one training workspace; one trainer at a time.
  SoftLabelMap forward_train(const ImageTensor& image);

  /// Backpropagates d(loss)/d(probabilities) from the last forward_train,
  /// accumulating into parameter gradients.
  void backward(const SoftLabelMap& grad_wrt_probs);

  void zero_grads();
  std::vector<ParamView>& param_views() { return views_; }
  std::size_t parameter_count() const;

  std::vector<double> parameters_flat() const;
  void set_parameters_flat(const std::vector<double>& flat);

private:
  struct Workspace {
    MatRM input;
    std::vector<BlockCache> enc;
    std::vector<MatRM> pooled;
    std::vector<IMatRM> pool_argmax;
    BlockCache bottleneck;
    std::vector<BlockCache> dec;
    std::vector<MatRM> concat;  // decoder block inputs [upsampled | skip]
    ConvCache head;
    MatRM logits;
    MatRM probs;
    int h = 0, w = 0;            // padded dims
    int orig_h = 0, orig_w = 0;  // caller-side dims
  };

  MatRM to_matrix(const ImageTensor& image, int& pad_h, int& pad_w) const;
  void run_forward(const MatRM& input, int h, int w, Workspace& ws) const;
  SoftLabelMap probs_to_map(const Workspace& ws) const;
  void collect_views();

  ModelSpec spec_;
  Mode mode_ = Mode::train;
  std::vector<ConvBlock> enc_;
  ConvBlock bottleneck_;
  std::vector<ConvBlock> dec_;  // index i operates at level i
  Conv2d head_;
  std::vector<ParamView> views_;
  Workspace train_ws_;
};

/// build_model: constructs a freshly initialized network from the spec,
/// deterministic given init_seed.
inline SegmentationModel build_model(const ModelSpec& spec) {
  return SegmentationModel(spec);
}

}  // namespace boxdistill

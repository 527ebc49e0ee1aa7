#pragma once

#include <Eigen/Dense>

#include "boxdistill/rng.hpp"

namespace boxdistill {

// Feature maps are (H*W) x C row-major matrices, so the raw buffer is the
// same channel-last (y, x, c) layout the tensor types use. Convolutions run
// as im2col + GEMM. Forward methods are const and write only into the
// caller-provided cache, which keeps eval-mode inference safe to call from
// several threads at once; backward accumulates into the layer's grad
// members and is single-owner.

using MatRM =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using IMatRM =
    Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Builds the im2col matrix for a k x k kernel with same-padding, stride 1.
/// cols is (h*w) x (k*k*c); out-of-image taps are zero.
void im2col(const MatRM& in, int h, int w, int ksize, MatRM& cols);

/// Adjoint of im2col: scatter-adds column gradients back to input layout.
void col2im(const MatRM& dcols, int h, int w, int ksize, MatRM& din);

struct ConvCache {
  MatRM cols;  // GEMM left operand: im2col matrix (or input copy for 1x1)
  int h = 0, w = 0;
};

struct Conv2d {
  int in_c = 0, out_c = 0, ksize = 3;
  MatRM weight;  // (ksize*ksize*in_c) x out_c
  Eigen::VectorXd bias;
  MatRM dweight;
  Eigen::VectorXd dbias;

  void build(int in_channels, int out_channels, int k, RngStream& rng);
  void forward(const MatRM& in, int h, int w, ConvCache& cache,
               MatRM& out) const;
  /// Accumulates dweight/dbias; fills din unless want_input_grad is false.
  void backward(const MatRM& dout, const ConvCache& cache, MatRM& din,
                bool want_input_grad = true);
};

struct NormCache {
  MatRM xhat;
  Eigen::VectorXd istd;
};

/// Per-channel spatial normalization with affine parameters. No running
/// statistics, so train- and eval-mode forwards are the same deterministic
/// function of the input.
struct InstanceNorm {
  static constexpr double kEps = 1e-5;
  int channels = 0;
  Eigen::VectorXd gamma, beta, dgamma, dbeta;

  void build(int c);
  void forward(const MatRM& in, NormCache& cache, MatRM& out) const;
  void backward(const MatRM& dout, const NormCache& cache, MatRM& din);
};

inline void relu_inplace(MatRM& x) { x = x.cwiseMax(0.0); }

/// din = dout gated by the post-activation values (out > 0).
inline void relu_backward(const MatRM& dout, const MatRM& out, MatRM& din) {
  din = ((out.array() > 0.0).cast<double>() * dout.array()).matrix();
}

/// 2x2 max pooling, stride 2. argmax records the winning input row per
/// (output pixel, channel); ties resolve to the first scanned position.
void maxpool2x2(const MatRM& in, int h, int w, MatRM& out, IMatRM& argmax);
void maxpool2x2_backward(const MatRM& dout, const IMatRM& argmax, int in_h,
                         int in_w, MatRM& din);

/// Nearest-neighbor 2x upsampling and its adjoint.
void upsample2x(const MatRM& in, int h, int w, MatRM& out);
void upsample2x_backward(const MatRM& dout, int in_h, int in_w, MatRM& din);

/// Row-wise softmax with max subtraction; out may alias in.
void softmax_rows(const MatRM& logits, MatRM& probs);

/// dlogits given dprobs and the cached probs: p .* (g - <g,p>).
void softmax_backward(const MatRM& dprobs, const MatRM& probs, MatRM& dlogits);

struct BlockCache {
  ConvCache c1, c2;
  NormCache n1, n2;
  MatRM a1, a2;  // post-ReLU activations; a2 is the block output
};

/// Conv -> InstanceNorm -> ReLU, twice. forward leaves the result in
/// cache.a2.
struct ConvBlock {
  Conv2d conv1, conv2;
  InstanceNorm norm1, norm2;

  void build(int in_channels, int out_channels, RngStream& rng);
  void forward(const MatRM& in, int h, int w, BlockCache& cache) const;
  void backward(const MatRM& dout, const BlockCache& cache, MatRM& din,
                bool want_input_grad = true);
};

}  // namespace boxdistill

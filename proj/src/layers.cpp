#include "boxdistill/layers.hpp"

#include <cmath>

namespace boxdistill {

void im2col(const MatRM& in, int h, int w, int ksize, MatRM& cols) {
  const int c = static_cast<int>(in.cols());
  const int pad = (ksize - 1) / 2;
  cols.resize(static_cast<Eigen::Index>(h) * w,
              static_cast<Eigen::Index>(ksize) * ksize * c);
  for (int dy = 0; dy < ksize; ++dy) {
    for (int dx = 0; dx < ksize; ++dx) {
      const int col0 = (dy * ksize + dx) * c;
      for (int y = 0; y < h; ++y) {
        const int sy = y + dy - pad;
        if (sy < 0 || sy >= h) {
          cols.block(static_cast<Eigen::Index>(y) * w, col0, w, c).setZero();
          continue;
        }
        // Valid x range for this tap: sx = x + dx - pad in [0, w).
        const int x0 = std::max(0, pad - dx);
        const int x1 = std::min(w, w + pad - dx);
        if (x0 > 0)
          cols.block(static_cast<Eigen::Index>(y) * w, col0, x0, c).setZero();
        if (x1 < w)
          cols.block(static_cast<Eigen::Index>(y) * w + x1, col0, w - x1, c)
              .setZero();
        if (x1 > x0)
          cols.block(static_cast<Eigen::Index>(y) * w + x0, col0, x1 - x0, c) =
              in.block(static_cast<Eigen::Index>(sy) * w + (x0 + dx - pad), 0,
                       x1 - x0, c);
      }
    }
  }
}

void col2im(const MatRM& dcols, int h, int w, int ksize, MatRM& din) {
  const int c = static_cast<int>(dcols.cols()) / (ksize * ksize);
  const int pad = (ksize - 1) / 2;
  din.setZero(static_cast<Eigen::Index>(h) * w, c);
  for (int dy = 0; dy < ksize; ++dy) {
    for (int dx = 0; dx < ksize; ++dx) {
      const int col0 = (dy * ksize + dx) * c;
      for (int y = 0; y < h; ++y) {
        const int sy = y + dy - pad;
        if (sy < 0 || sy >= h) continue;
        const int x0 = std::max(0, pad - dx);
        const int x1 = std::min(w, w + pad - dx);
        if (x1 > x0)
          din.block(static_cast<Eigen::Index>(sy) * w + (x0 + dx - pad), 0,
                    x1 - x0, c) +=
              dcols.block(static_cast<Eigen::Index>(y) * w + x0, col0, x1 - x0,
                          c);
      }
    }
  }
}

void Conv2d::build(int in_channels, int out_channels, int k, RngStream& rng) {
  in_c = in_channels;
  out_c = out_channels;
  ksize = k;
  const int fan_in = k * k * in_c;
  const double stddev = std::sqrt(2.0 / fan_in);
  weight.resize(fan_in, out_c);
  for (Eigen::Index i = 0; i < weight.rows(); ++i)
    for (Eigen::Index j = 0; j < weight.cols(); ++j)
      weight(i, j) = rng.normal(0.0, stddev);
  bias = Eigen::VectorXd::Zero(out_c);
  dweight = MatRM::Zero(fan_in, out_c);
  dbias = Eigen::VectorXd::Zero(out_c);
}

void Conv2d::forward(const MatRM& in, int h, int w, ConvCache& cache,
                     MatRM& out) const {
  cache.h = h;
  cache.w = w;
  if (ksize == 1)
    cache.cols = in;
  else
    im2col(in, h, w, ksize, cache.cols);
  out.noalias() = cache.cols * weight;
  out.rowwise() += bias.transpose();
}

void Conv2d::backward(const MatRM& dout, const ConvCache& cache, MatRM& din,
                      bool want_input_grad) {
  dweight.noalias() += cache.cols.transpose() * dout;
  dbias.noalias() += dout.colwise().sum().transpose();
  if (!want_input_grad) return;
  if (ksize == 1) {
    din.noalias() = dout * weight.transpose();
  } else {
    MatRM dcols;
    dcols.noalias() = dout * weight.transpose();
    col2im(dcols, cache.h, cache.w, ksize, din);
  }
}

void InstanceNorm::build(int c) {
  channels = c;
  gamma = Eigen::VectorXd::Ones(c);
  beta = Eigen::VectorXd::Zero(c);
  dgamma = Eigen::VectorXd::Zero(c);
  dbeta = Eigen::VectorXd::Zero(c);
}

void InstanceNorm::forward(const MatRM& in, NormCache& cache,
                           MatRM& out) const {
  const Eigen::Index n = in.rows();
  cache.istd.resize(channels);
  cache.xhat.resize(n, channels);
  out.resize(n, channels);
  for (int c = 0; c < channels; ++c) {
    const auto col = in.col(c);
    const double mean = col.mean();
    const double var = (col.array() - mean).square().sum() / n;
    const double istd = 1.0 / std::sqrt(var + kEps);
    cache.istd(c) = istd;
    cache.xhat.col(c) = (col.array() - mean) * istd;
    out.col(c) = cache.xhat.col(c) * gamma(c);
    out.col(c).array() += beta(c);
  }
}

void InstanceNorm::backward(const MatRM& dout, const NormCache& cache,
                            MatRM& din) {
  const Eigen::Index n = dout.rows();
  din.resize(n, channels);
  for (int c = 0; c < channels; ++c) {
    const auto dy = dout.col(c);
    const auto xh = cache.xhat.col(c);
    dgamma(c) += dy.dot(xh);
    dbeta(c) += dy.sum();
    const double g = gamma(c);
    const double mean_dxhat = g * dy.mean();
    const double mean_dxhat_xhat = g * dy.dot(xh) / n;
    din.col(c) =
        cache.istd(c) *
        (g * dy.array() - mean_dxhat - xh.array() * mean_dxhat_xhat);
  }
}

void maxpool2x2(const MatRM& in, int h, int w, MatRM& out, IMatRM& argmax) {
  const int c = static_cast<int>(in.cols());
  const int oh = h / 2, ow = w / 2;
  out.resize(static_cast<Eigen::Index>(oh) * ow, c);
  argmax.resize(static_cast<Eigen::Index>(oh) * ow, c);
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      const Eigen::Index orow = static_cast<Eigen::Index>(oy) * ow + ox;
      const int r00 = (2 * oy) * w + 2 * ox;
      const int candidates[4] = {r00, r00 + 1, r00 + w, r00 + w + 1};
      for (int ch = 0; ch < c; ++ch) {
        int best = candidates[0];
        double best_v = in(candidates[0], ch);
        for (int i = 1; i < 4; ++i) {
          const double v = in(candidates[i], ch);
          if (v > best_v) {
            best_v = v;
            best = candidates[i];
          }
        }
        out(orow, ch) = best_v;
        argmax(orow, ch) = best;
      }
    }
  }
}

void maxpool2x2_backward(const MatRM& dout, const IMatRM& argmax, int in_h,
                         int in_w, MatRM& din) {
  const int c = static_cast<int>(dout.cols());
  din.setZero(static_cast<Eigen::Index>(in_h) * in_w, c);
  for (Eigen::Index r = 0; r < dout.rows(); ++r)
    for (int ch = 0; ch < c; ++ch) din(argmax(r, ch), ch) += dout(r, ch);
}

void upsample2x(const MatRM& in, int h, int w, MatRM& out) {
  const int c = static_cast<int>(in.cols());
  const int oh = 2 * h, ow = 2 * w;
  out.resize(static_cast<Eigen::Index>(oh) * ow, c);
  for (int y = 0; y < oh; ++y) {
    const int sy = y / 2;
    for (int x = 0; x < ow; ++x)
      out.row(static_cast<Eigen::Index>(y) * ow + x) =
          in.row(static_cast<Eigen::Index>(sy) * w + x / 2);
  }
}

void upsample2x_backward(const MatRM& dout, int in_h, int in_w, MatRM& din) {
  const int c = static_cast<int>(dout.cols());
  din.setZero(static_cast<Eigen::Index>(in_h) * in_w, c);
  const int ow = 2 * in_w;
  for (int y = 0; y < 2 * in_h; ++y) {
    const int sy = y / 2;
    for (int x = 0; x < ow; ++x)
      din.row(static_cast<Eigen::Index>(sy) * in_w + x / 2) +=
          dout.row(static_cast<Eigen::Index>(y) * ow + x);
  }
}

void softmax_rows(const MatRM& logits, MatRM& probs) {
  probs = logits;
  for (Eigen::Index r = 0; r < probs.rows(); ++r) {
    auto row = probs.row(r);
    row.array() -= row.maxCoeff();
    row = row.array().exp();
    row /= row.sum();
  }
}

void softmax_backward(const MatRM& dprobs, const MatRM& probs,
                      MatRM& dlogits) {
  dlogits.resize(probs.rows(), probs.cols());
  for (Eigen::Index r = 0; r < probs.rows(); ++r) {
    const double dot = dprobs.row(r).dot(probs.row(r));
    dlogits.row(r) =
        probs.row(r).array() * (dprobs.row(r).array() - dot);
  }
}

void ConvBlock::build(int in_channels, int out_channels, RngStream& rng) {
  conv1.build(in_channels, out_channels, 3, rng);
  norm1.build(out_channels);
  conv2.build(out_channels, out_channels, 3, rng);
  norm2.build(out_channels);
}

void ConvBlock::forward(const MatRM& in, int h, int w,
                        BlockCache& cache) const {
  MatRM t;
  conv1.forward(in, h, w, cache.c1, t);
  norm1.forward(t, cache.n1, cache.a1);
  relu_inplace(cache.a1);
  conv2.forward(cache.a1, h, w, cache.c2, t);
  norm2.forward(t, cache.n2, cache.a2);
  relu_inplace(cache.a2);
}

void ConvBlock::backward(const MatRM& dout, const BlockCache& cache,
                         MatRM& din, bool want_input_grad) {
  MatRM d1, d2;
  relu_backward(dout, cache.a2, d1);
  norm2.backward(d1, cache.n2, d2);
  conv2.backward(d2, cache.c2, d1);
  relu_backward(d1, cache.a1, d2);
  norm1.backward(d2, cache.n1, d1);
  conv1.backward(d1, cache.c1, din, want_input_grad);
}

}  // namespace boxdistill

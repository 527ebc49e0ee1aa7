#include "boxdistill/model.hpp"

#include <cmath>
#include <cstring>

#include "boxdistill/error.hpp"

namespace boxdistill {

ModelSpec ModelSpec::resolved() const {
  ModelSpec r = *this;
  if (r.architecture == "small-encdec") {
    if (r.width_factor == 0) r.width_factor = 8;
  } else if (r.architecture == "tiny-encdec") {
    if (r.width_factor == 0) r.width_factor = 4;
  } else {
    throw ConfigError("unknown architecture '" + r.architecture + "'");
  }
  if (r.depth == 0) r.depth = 2;
  if (r.width_factor < 2)
    throw ConfigError("model width_factor must be >= 2");
  if (r.depth < 1 || r.depth > 4)
    throw ConfigError("model depth must be in [1,4]");
  if (r.in_channels < 1) throw ConfigError("model in_channels must be >= 1");
  if (r.out_classes < 2) throw ConfigError("model out_classes must be >= 2");
  return r;
}

SegmentationModel::SegmentationModel(const ModelSpec& spec)
    : spec_(spec.resolved()) {
  RngStream rng(spec_.init_seed);
  const int d = spec_.depth;
  const int w0 = spec_.width_factor;

  enc_.resize(d);
  int in_c = spec_.in_channels;
  for (int i = 0; i < d; ++i) {
    const int c = w0 << i;
    enc_[i].build(in_c, c, rng);
    in_c = c;
  }
  bottleneck_.build(in_c, w0 << d, rng);
  dec_.resize(d);
  for (int i = d - 1; i >= 0; --i) {
    const int c = w0 << i;
    const int above = w0 << (i + 1);  // channels arriving from below
    dec_[i].build(above + c, c, rng);
  }
  head_.build(w0, spec_.out_classes, 1, rng);
  collect_views();
}

void SegmentationModel::collect_views() {
  views_.clear();
  auto add_conv = [&](Conv2d& cv) {
    views_.push_back({cv.weight.data(), cv.dweight.data(),
                      static_cast<std::size_t>(cv.weight.size())});
    views_.push_back({cv.bias.data(), cv.dbias.data(),
                      static_cast<std::size_t>(cv.bias.size())});
  };
  auto add_norm = [&](InstanceNorm& nm) {
    views_.push_back({nm.gamma.data(), nm.dgamma.data(),
                      static_cast<std::size_t>(nm.gamma.size())});
    views_.push_back({nm.beta.data(), nm.dbeta.data(),
                      static_cast<std::size_t>(nm.beta.size())});
  };
  auto add_block = [&](ConvBlock& b) {
    add_conv(b.conv1);
    add_norm(b.norm1);
    add_conv(b.conv2);
    add_norm(b.norm2);
  };
  for (auto& b : enc_) add_block(b);
  add_block(bottleneck_);
  for (auto& b : dec_) add_block(b);
  add_conv(head_);
}

std::size_t SegmentationModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& v : views_) n += v.size;
  return n;
}

std::vector<double> SegmentationModel::parameters_flat() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& v : views_) flat.insert(flat.end(), v.value, v.value + v.size);
  return flat;
}

void SegmentationModel::set_parameters_flat(const std::vector<double>& flat) {
  if (flat.size() != parameter_count())
    throw InputError("set_parameters_flat: size mismatch");
  std::size_t off = 0;
  for (auto& v : views_) {
    std::memcpy(v.value, flat.data() + off, v.size * sizeof(double));
    off += v.size;
  }
}

void SegmentationModel::zero_grads() {
  for (auto& v : views_) std::memset(v.grad, 0, v.size * sizeof(double));
}

MatRM SegmentationModel::to_matrix(const ImageTensor& image, int& pad_h,
                                   int& pad_w) const {
  if (image.channels != spec_.in_channels)
    throw InputError("forward: image has " + std::to_string(image.channels) +
                     " channels, model expects " +
                     std::to_string(spec_.in_channels));
  if (image.height <= 0 || image.width <= 0)
    throw InputError("forward: empty image");

  const int div = 1 << spec_.depth;
  pad_h = (div - image.height % div) % div;
  pad_w = (div - image.width % div) % div;
  const int h = image.height + pad_h;
  const int w = image.width + pad_w;

  MatRM m(static_cast<Eigen::Index>(h) * w, spec_.in_channels);
  for (int y = 0; y < h; ++y) {
    const int sy = std::min(y, image.height - 1);  // edge replicate
    for (int x = 0; x < w; ++x) {
      const int sx = std::min(x, image.width - 1);
      for (int c = 0; c < spec_.in_channels; ++c)
        m(static_cast<Eigen::Index>(y) * w + x, c) = image.at(sy, sx, c);
    }
  }
  return m;
}

void SegmentationModel::run_forward(const MatRM& input, int h, int w,
                                    Workspace& ws) const {
  const int d = spec_.depth;
  ws.h = h;
  ws.w = w;
  ws.enc.resize(d);
  ws.pooled.resize(d);
  ws.pool_argmax.resize(d);
  ws.dec.resize(d);
  ws.concat.resize(d);

  const MatRM* cur = &input;
  int ch = h, cw = w;
  for (int i = 0; i < d; ++i) {
    enc_[i].forward(*cur, ch, cw, ws.enc[i]);
    maxpool2x2(ws.enc[i].a2, ch, cw, ws.pooled[i], ws.pool_argmax[i]);
    cur = &ws.pooled[i];
    ch /= 2;
    cw /= 2;
  }
  bottleneck_.forward(*cur, ch, cw, ws.bottleneck);
  cur = &ws.bottleneck.a2;
  for (int i = d - 1; i >= 0; --i) {
    MatRM up;
    upsample2x(*cur, ch, cw, up);
    ch *= 2;
    cw *= 2;
    const MatRM& skip = ws.enc[i].a2;
    ws.concat[i].resize(up.rows(), up.cols() + skip.cols());
    ws.concat[i].leftCols(up.cols()) = up;
    ws.concat[i].rightCols(skip.cols()) = skip;
    dec_[i].forward(ws.concat[i], ch, cw, ws.dec[i]);
    cur = &ws.dec[i].a2;
  }
  head_.forward(*cur, ch, cw, ws.head, ws.logits);
  softmax_rows(ws.logits, ws.probs);
}

SoftLabelMap SegmentationModel::probs_to_map(const Workspace& ws) const {
  SoftLabelMap out(ws.orig_h, ws.orig_w, spec_.out_classes);
  for (int y = 0; y < ws.orig_h; ++y)
    for (int x = 0; x < ws.orig_w; ++x)
      for (int k = 0; k < spec_.out_classes; ++k)
        out.at(y, x, k) = ws.probs(static_cast<Eigen::Index>(y) * ws.w + x, k);
  return out;
}

SoftLabelMap SegmentationModel::predict(const ImageTensor& image) const {
  Workspace ws;
  int pad_h = 0, pad_w = 0;
  const MatRM input = to_matrix(image, pad_h, pad_w);
  ws.orig_h = image.height;
  ws.orig_w = image.width;
  run_forward(input, image.height + pad_h, image.width + pad_w, ws);
  SoftLabelMap out = probs_to_map(ws);
  out.validate();
  return out;
}

SoftLabelMap SegmentationModel::forward_train(const ImageTensor& image) {
  int pad_h = 0, pad_w = 0;
  train_ws_.input = to_matrix(image, pad_h, pad_w);
  train_ws_.orig_h = image.height;
  train_ws_.orig_w = image.width;
  run_forward(train_ws_.input, image.height + pad_h, image.width + pad_w,
              train_ws_);
  return probs_to_map(train_ws_);
}

void SegmentationModel::backward(const SoftLabelMap& grad_wrt_probs) {
  Workspace& ws = train_ws_;
  if (grad_wrt_probs.height != ws.orig_h || grad_wrt_probs.width != ws.orig_w ||
      grad_wrt_probs.classes != spec_.out_classes)
    throw InputError("backward: gradient shape does not match last forward");

  // Padded rows/columns were cropped from the output, so they get zero grad.
  MatRM dprobs = MatRM::Zero(ws.probs.rows(), ws.probs.cols());
  for (int y = 0; y < ws.orig_h; ++y)
    for (int x = 0; x < ws.orig_w; ++x)
      for (int k = 0; k < spec_.out_classes; ++k)
        dprobs(static_cast<Eigen::Index>(y) * ws.w + x, k) =
            grad_wrt_probs.at(y, x, k);

  const int d = spec_.depth;
  MatRM dcur;
  softmax_backward(dprobs, ws.probs, dcur);
  {
    MatRM tmp;
    head_.backward(dcur, ws.head, tmp);
    dcur.swap(tmp);
  }
  int ch = ws.h, cw = ws.w;
  // Decoder blocks run at full-to-coarse resolution going up the chain.
  std::vector<MatRM> dskip(d);
  for (int i = 0; i <= d - 1; ++i) {
    MatRM dconcat;
    dec_[i].backward(dcur, ws.dec[i], dconcat);
    const int up_c = spec_.width_factor << (i + 1);
    MatRM ddown;
    upsample2x_backward(dconcat.leftCols(up_c), ch / 2, cw / 2, ddown);
    dskip[i] = dconcat.rightCols(dconcat.cols() - up_c);
    dcur.swap(ddown);
    ch /= 2;
    cw /= 2;
  }
  {
    MatRM tmp;
    bottleneck_.backward(dcur, ws.bottleneck, tmp);
    dcur.swap(tmp);
  }
  for (int i = d - 1; i >= 0; --i) {
    MatRM dpre_pool;
    maxpool2x2_backward(dcur, ws.pool_argmax[i], ch * 2, cw * 2, dpre_pool);
    dpre_pool += dskip[i];
    MatRM tmp;
    enc_[i].backward(dpre_pool, ws.enc[i], tmp, /*want_input_grad=*/i > 0);
    dcur.swap(tmp);
    ch *= 2;
    cw *= 2;
  }
}

}  // namespace boxdistill

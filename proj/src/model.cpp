#include "xdeval/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "xdeval/errors.hpp"
#include "xdeval/rng.hpp"

namespace xdeval {

namespace {

void reset(Tensor& t, std::vector<std::size_t> shape) {
  t.shape = std::move(shape);
  t.data.assign(shape_product(t.shape), 0.0);
}

// out[y][x] (+)= bias + sum_{ci,ky,kx} w * in[y+ky-1][x+kx-1], zero padded.
void conv3x3_same(const Tensor& in, const Tensor& w, const Tensor& b,
                  Tensor& out) {
  const std::size_t cin = in.shape[0];
  const std::size_t h = in.shape[1];
  const std::size_t w_ = in.shape[2];
  const std::size_t cout = w.shape[0];
  reset(out, {cout, h, w_});

  for (std::size_t co = 0; co < cout; ++co) {
    double* outp = out.data.data() + co * h * w_;
    std::fill(outp, outp + h * w_, b.data[co]);
    for (std::size_t ci = 0; ci < cin; ++ci) {
      const double* inp = in.data.data() + ci * h * w_;
      const double* wp = w.data.data() + (co * cin + ci) * 9;
      for (int ky = 0; ky < 3; ++ky) {
        const int dy = ky - 1;
        const std::size_t y0 = dy < 0 ? 1 : 0;
        const std::size_t y1 = dy > 0 ? h - 1 : h;
        for (int kx = 0; kx < 3; ++kx) {
          const int dx = kx - 1;
          const std::size_t x0 = dx < 0 ? 1 : 0;
          const std::size_t x1 = dx > 0 ? w_ - 1 : w_;
          const double wv = wp[ky * 3 + kx];
          if (wv == 0.0) continue;
          for (std::size_t y = y0; y < y1; ++y) {
            const double* src = inp + (y + dy) * w_ + dx;
            double* dst = outp + y * w_;
            for (std::size_t x = x0; x < x1; ++x) dst[x] += wv * src[x];
          }
        }
      }
    }
  }
}

void conv3x3_backward(const Tensor& in, const Tensor& w, const Tensor& dout,
                      Tensor& dw, Tensor& db, Tensor* din) {
  const std::size_t cin = in.shape[0];
  const std::size_t h = in.shape[1];
  const std::size_t w_ = in.shape[2];
  const std::size_t cout = w.shape[0];

  for (std::size_t co = 0; co < cout; ++co) {
    const double* doutp = dout.data.data() + co * h * w_;
    double acc_b = 0.0;
    for (std::size_t i = 0; i < h * w_; ++i) acc_b += doutp[i];
    db.data[co] += acc_b;

    for (std::size_t ci = 0; ci < cin; ++ci) {
      const double* inp = in.data.data() + ci * h * w_;
      double* dwp = dw.data.data() + (co * cin + ci) * 9;
      double* dinp = din ? din->data.data() + ci * h * w_ : nullptr;
      for (int ky = 0; ky < 3; ++ky) {
        const int dy = ky - 1;
        const std::size_t y0 = dy < 0 ? 1 : 0;
        const std::size_t y1 = dy > 0 ? h - 1 : h;
        for (int kx = 0; kx < 3; ++kx) {
          const int dx = kx - 1;
          const std::size_t x0 = dx < 0 ? 1 : 0;
          const std::size_t x1 = dx > 0 ? w_ - 1 : w_;
          double acc = 0.0;
          for (std::size_t y = y0; y < y1; ++y) {
            const double* src = inp + (y + dy) * w_ + dx;
            const double* dof = doutp + y * w_;
            for (std::size_t x = x0; x < x1; ++x) acc += dof[x] * src[x];
          }
          dwp[ky * 3 + kx] += acc;
          if (dinp) {
            const double wv = w.data[(co * cin + ci) * 9 + ky * 3 + kx];
            if (wv == 0.0) continue;
            for (std::size_t y = y0; y < y1; ++y) {
              double* dst = dinp + (y + dy) * w_ + dx;
              const double* dof = doutp + y * w_;
              for (std::size_t x = x0; x < x1; ++x) dst[x] += wv * dof[x];
            }
          }
        }
      }
    }
  }
}

void relu_inplace(Tensor& t) {
  for (double& v : t.data) {
    if (v < 0.0) v = 0.0;
  }
}

}  // namespace

// 2x2 stride-2 max pooling; ties keep the first row-major element.
void maxpool2(const Tensor& in, Tensor& out,
              std::vector<std::uint32_t>& argmax) {
  const std::size_t c = in.shape[0];
  const std::size_t h = in.shape[1];
  const std::size_t w = in.shape[2];
  const std::size_t oh = h / 2;
  const std::size_t ow = w / 2;
  reset(out, {c, oh, ow});
  argmax.assign(c * oh * ow, 0);

  for (std::size_t ch = 0; ch < c; ++ch) {
    const double* inp = in.data.data() + ch * h * w;
    double* outp = out.data.data() + ch * oh * ow;
    std::uint32_t* arg = argmax.data() + ch * oh * ow;
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        const std::size_t y = 2 * oy;
        const std::size_t x = 2 * ox;
        std::size_t best = y * w + x;
        double val = inp[best];
        const std::size_t cands[3] = {y * w + x + 1, (y + 1) * w + x,
                                      (y + 1) * w + x + 1};
        for (std::size_t cand : cands) {
          if (inp[cand] > val) {
            val = inp[cand];
            best = cand;
          }
        }
        outp[oy * ow + ox] = val;
        arg[oy * ow + ox] = static_cast<std::uint32_t>(best);
      }
    }
  }
}

void maxpool2_backward(const Tensor& dout,
                       const std::vector<std::uint32_t>& argmax,
                       const std::vector<std::size_t>& in_shape, Tensor& din) {
  reset(din, in_shape);
  const std::size_t c = in_shape[0];
  const std::size_t plane = in_shape[1] * in_shape[2];
  const std::size_t oplane = dout.shape[1] * dout.shape[2];
  for (std::size_t ch = 0; ch < c; ++ch) {
    const double* doutp = dout.data.data() + ch * oplane;
    const std::uint32_t* arg = argmax.data() + ch * oplane;
    double* dinp = din.data.data() + ch * plane;
    for (std::size_t i = 0; i < oplane; ++i) dinp[arg[i]] += doutp[i];
  }
}

namespace {

void relu_backward_inplace(Tensor& grad, const Tensor& relu_out) {
  for (std::size_t i = 0; i < grad.data.size(); ++i) {
    if (relu_out.data[i] <= 0.0) grad.data[i] = 0.0;
  }
}

void global_average_pool(const Tensor& in, std::vector<double>& out) {
  const std::size_t c = in.shape[0];
  const std::size_t plane = in.shape[1] * in.shape[2];
  out.assign(c, 0.0);
  for (std::size_t ch = 0; ch < c; ++ch) {
    const double* inp = in.data.data() + ch * plane;
    double acc = 0.0;
    for (std::size_t i = 0; i < plane; ++i) acc += inp[i];
    out[ch] = acc / static_cast<double>(plane);
  }
}

void linear(const std::vector<double>& in, const Tensor& w, const Tensor& b,
            std::vector<double>& out) {
  const std::size_t o = w.shape[0];
  const std::size_t k = w.shape[1];
  out.assign(o, 0.0);
  for (std::size_t i = 0; i < o; ++i) {
    double acc = b.data[i];
    const double* wp = w.data.data() + i * k;
    for (std::size_t j = 0; j < k; ++j) acc += wp[j] * in[j];
    out[i] = acc;
  }
}

void check_image_shape(const Tensor& image) {
  if (image.shape.size() != 3 || image.shape[0] != 3) {
    throw ShapeMismatch("expected a {3, H, W} image tensor");
  }
  const std::size_t h = image.shape[1];
  const std::size_t w = image.shape[2];
  if (h < 8 || w < 8 || h % 8 != 0 || w % 8 != 0) {
    throw ShapeMismatch("image height and width must be multiples of 8, got " +
                        std::to_string(h) + "x" + std::to_string(w));
  }
}

}  // namespace

ModelParams ModelParams::zeros() {
  ModelParams p;
  p.conv1_w = Tensor::zeros({8, 3, 3, 3});
  p.conv1_b = Tensor::zeros({8});
  p.conv2_w = Tensor::zeros({16, 8, 3, 3});
  p.conv2_b = Tensor::zeros({16});
  p.conv3_w = Tensor::zeros({32, 16, 3, 3});
  p.conv3_b = Tensor::zeros({32});
  p.cls_w = Tensor::zeros({kNumClasses, 32});
  p.cls_b = Tensor::zeros({kNumClasses});
  p.box_w = Tensor::zeros({4, 32});
  p.box_b = Tensor::zeros({4});
  return p;
}

ModelParams ModelParams::random_init(std::uint64_t seed) {
  ModelParams p = zeros();
  Rng backbone_rng(derive_seed(seed, 1));
  Rng head_rng(derive_seed(seed, 2));

  const auto he_fill = [](Tensor& t, std::size_t fan_in, Rng& rng) {
    const double scale = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (double& v : t.data) v = rng.normal(0.0, scale);
  };
  he_fill(p.conv1_w, 3 * 9, backbone_rng);
  he_fill(p.conv2_w, 8 * 9, backbone_rng);
  he_fill(p.conv3_w, 16 * 9, backbone_rng);
  p.conv1_b.fill(0.01);
  p.conv2_b.fill(0.01);
  p.conv3_b.fill(0.01);

  const auto head_fill = [](Tensor& t, Rng& rng) {
    const double scale = std::sqrt(1.0 / 32.0);
    for (double& v : t.data) v = rng.normal(0.0, scale);
  };
  head_fill(p.cls_w, head_rng);
  head_fill(p.box_w, head_rng);
  return p;
}

bool is_backbone_tensor(const char* name) {
  for (const char* b : kBackboneTensorNames) {
    if (std::strcmp(name, b) == 0) return true;
  }
  return false;
}

BackboneWeights extract_backbone(const ModelParams& params) {
  return BackboneWeights{params.conv1_w, params.conv1_b, params.conv2_w,
                         params.conv2_b, params.conv3_w, params.conv3_b};
}

void apply_backbone(ModelParams& params, const BackboneWeights& backbone) {
  params.conv1_w = backbone.conv1_w;
  params.conv1_b = backbone.conv1_b;
  params.conv2_w = backbone.conv2_w;
  params.conv2_b = backbone.conv2_b;
  params.conv3_w = backbone.conv3_w;
  params.conv3_b = backbone.conv3_b;
}

void forward(const ModelParams& params, const Tensor& image,
             ForwardCache& cache) {
  check_image_shape(image);
  cache.input = image;

  conv3x3_same(cache.input, params.conv1_w, params.conv1_b, cache.block1_relu);
  relu_inplace(cache.block1_relu);
  maxpool2(cache.block1_relu, cache.block1_out, cache.block1_argmax);

  conv3x3_same(cache.block1_out, params.conv2_w, params.conv2_b,
               cache.block2_relu);
  relu_inplace(cache.block2_relu);
  maxpool2(cache.block2_relu, cache.block2_out, cache.block2_argmax);

  conv3x3_same(cache.block2_out, params.conv3_w, params.conv3_b,
               cache.block3_relu);
  relu_inplace(cache.block3_relu);
  maxpool2(cache.block3_relu, cache.conv3_act, cache.block3_argmax);

  global_average_pool(cache.conv3_act, cache.features);
  linear(cache.features, params.cls_w, params.cls_b, cache.logits);
  cache.probs = softmax(cache.logits);
  linear(cache.features, params.box_w, params.box_b, cache.box_raw);
  cache.box.assign(4, 0.0);
  for (std::size_t i = 0; i < 4; ++i) {
    cache.box[i] = 1.0 / (1.0 + std::exp(-cache.box_raw[i]));
  }
}

ForwardCache forward(const ModelParams& params, const Tensor& image) {
  ForwardCache cache;
  forward(params, image, cache);
  return cache;
}

std::vector<double> softmax(const std::vector<double>& logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

double detection_loss(const std::vector<double>& logits,
                      const std::vector<double>& box, int target_class,
                      const BoxTarget& target_box) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double v : logits) sum += std::exp(v - m);
  const double ce = m + std::log(sum) - logits[target_class];
  double box_err = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double d = box[i] - target_box[i];
    box_err += d * d;
  }
  return ce + box_err;
}

void backward_accumulate(const ModelParams& params, const ForwardCache& cache,
                         int target_class, const BoxTarget& target_box,
                         ModelParams& grads) {
  const std::size_t feat_n = cache.features.size();

  std::vector<double> dlogits(cache.probs);
  dlogits[target_class] -= 1.0;
  std::vector<double> dbox_raw(4);
  for (std::size_t i = 0; i < 4; ++i) {
    const double s = cache.box[i];
    dbox_raw[i] = 2.0 * (s - target_box[i]) * s * (1.0 - s);
  }

  std::vector<double> dfeat(feat_n, 0.0);
  for (std::size_t c = 0; c < dlogits.size(); ++c) {
    grads.cls_b.data[c] += dlogits[c];
    double* gw = grads.cls_w.data.data() + c * feat_n;
    const double* w = params.cls_w.data.data() + c * feat_n;
    for (std::size_t k = 0; k < feat_n; ++k) {
      gw[k] += dlogits[c] * cache.features[k];
      dfeat[k] += w[k] * dlogits[c];
    }
  }
  for (std::size_t j = 0; j < 4; ++j) {
    grads.box_b.data[j] += dbox_raw[j];
    double* gw = grads.box_w.data.data() + j * feat_n;
    const double* w = params.box_w.data.data() + j * feat_n;
    for (std::size_t k = 0; k < feat_n; ++k) {
      gw[k] += dbox_raw[j] * cache.features[k];
      dfeat[k] += w[k] * dbox_raw[j];
    }
  }

  thread_local Tensor d_act, d_relu3, d_b2out, d_relu2, d_b1out, d_relu1;

  // GAP spreads each channel gradient uniformly over its plane.
  const std::size_t plane3 = cache.conv3_act.shape[1] * cache.conv3_act.shape[2];
  reset(d_act, cache.conv3_act.shape);
  for (std::size_t c = 0; c < feat_n; ++c) {
    const double g = dfeat[c] / static_cast<double>(plane3);
    double* p = d_act.data.data() + c * plane3;
    for (std::size_t i = 0; i < plane3; ++i) p[i] = g;
  }

  maxpool2_backward(d_act, cache.block3_argmax, cache.block3_relu.shape,
                    d_relu3);
  relu_backward_inplace(d_relu3, cache.block3_relu);
  reset(d_b2out, cache.block2_out.shape);
  conv3x3_backward(cache.block2_out, params.conv3_w, d_relu3, grads.conv3_w,
                   grads.conv3_b, &d_b2out);

  maxpool2_backward(d_b2out, cache.block2_argmax, cache.block2_relu.shape,
                    d_relu2);
  relu_backward_inplace(d_relu2, cache.block2_relu);
  reset(d_b1out, cache.block1_out.shape);
  conv3x3_backward(cache.block1_out, params.conv2_w, d_relu2, grads.conv2_w,
                   grads.conv2_b, &d_b1out);

  maxpool2_backward(d_b1out, cache.block1_argmax, cache.block1_relu.shape,
                    d_relu1);
  relu_backward_inplace(d_relu1, cache.block1_relu);
  conv3x3_backward(cache.input, params.conv1_w, d_relu1, grads.conv1_w,
                   grads.conv1_b, nullptr);
}

ModelParams backward(const ModelParams& params, const ForwardCache& cache,
                     int target_class, const BoxTarget& target_box) {
  ModelParams grads = ModelParams::zeros();
  backward_accumulate(params, cache, target_class, target_box, grads);
  return grads;
}

Tensor logit_gradient_conv3(const ModelParams& params,
                            const ForwardCache& cache, int class_id) {
  if (class_id < 0 || class_id >= kNumClasses) {
    throw ValidationError("class_id must lie in [0, " +
                          std::to_string(kNumClasses - 1) + "]");
  }
  const std::size_t plane = cache.conv3_act.shape[1] * cache.conv3_act.shape[2];
  Tensor grad = Tensor::zeros(cache.conv3_act.shape);
  const double* w = params.cls_w.data.data() +
                    static_cast<std::size_t>(class_id) * 32;
  for (std::size_t c = 0; c < 32; ++c) {
    const double g = w[c] / static_cast<double>(plane);
    double* p = grad.data.data() + c * plane;
    for (std::size_t i = 0; i < plane; ++i) p[i] = g;
  }
  return grad;
}

std::vector<Detection> predict_detection(const ModelParams& params,
                                         const Tensor& image,
                                         std::int64_t image_id,
                                         double score_threshold) {
  ForwardCache cache = forward(params, image);
  std::size_t best = 0;
  for (std::size_t c = 1; c < cache.probs.size(); ++c) {
    if (cache.probs[c] > cache.probs[best]) best = c;
  }
  const double score = cache.probs[best];
  if (score < score_threshold) return {};

  const double img_w = static_cast<double>(image.shape[2]);
  const double img_h = static_cast<double>(image.shape[1]);
  const double bw = cache.box[2] * img_w;
  const double bh = cache.box[3] * img_h;
  const double x = cache.box[0] * img_w - bw / 2.0;
  const double y = cache.box[1] * img_h - bh / 2.0;
  return {Detection{image_id, static_cast<int>(best) + 1, Box(x, y, bw, bh),
                    score}};
}

std::vector<double> bilinear_upsample(const std::vector<double>& src,
                                      std::size_t h, std::size_t w,
                                      std::size_t out_h, std::size_t out_w) {
  std::vector<double> out(out_h * out_w);
  const double sy = static_cast<double>(h) / static_cast<double>(out_h);
  const double sx = static_cast<double>(w) / static_cast<double>(out_w);
  for (std::size_t oy = 0; oy < out_h; ++oy) {
    double fy = (static_cast<double>(oy) + 0.5) * sy - 0.5;
    if (fy < 0.0) fy = 0.0;
    if (fy > static_cast<double>(h - 1)) fy = static_cast<double>(h - 1);
    const std::size_t y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, h - 1);
    const double wy = fy - static_cast<double>(y0);
    for (std::size_t ox = 0; ox < out_w; ++ox) {
      double fx = (static_cast<double>(ox) + 0.5) * sx - 0.5;
      if (fx < 0.0) fx = 0.0;
      if (fx > static_cast<double>(w - 1)) fx = static_cast<double>(w - 1);
      const std::size_t x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, w - 1);
      const double wx = fx - static_cast<double>(x0);
      const double top = (1.0 - wx) * src[y0 * w + x0] + wx * src[y0 * w + x1];
      const double bot = (1.0 - wx) * src[y1 * w + x0] + wx * src[y1 * w + x1];
      out[oy * out_w + ox] = (1.0 - wy) * top + wy * bot;
    }
  }
  return out;
}

Grid grad_cam(const ModelParams& params, const Tensor& image, int class_id) {
  ForwardCache cache = forward(params, image);
  const Tensor grad = logit_gradient_conv3(params, cache, class_id);

  const std::size_t h3 = cache.conv3_act.shape[1];
  const std::size_t w3 = cache.conv3_act.shape[2];
  const std::size_t plane = h3 * w3;

  // Channel weights are the spatial means of the logit gradient.
  std::vector<double> cam(plane, 0.0);
  for (std::size_t c = 0; c < 32; ++c) {
    const double* g = grad.data.data() + c * plane;
    double alpha = 0.0;
    for (std::size_t i = 0; i < plane; ++i) alpha += g[i];
    alpha /= static_cast<double>(plane);
    const double* act = cache.conv3_act.data.data() + c * plane;
    for (std::size_t i = 0; i < plane; ++i) cam[i] += alpha * act[i];
  }
  for (double& v : cam) {
    if (v < 0.0) v = 0.0;
  }

  const std::size_t img_h = image.shape[1];
  const std::size_t img_w = image.shape[2];
  std::vector<double> up = bilinear_upsample(cam, h3, w3, img_h, img_w);

  const auto [mn_it, mx_it] = std::minmax_element(up.begin(), up.end());
  const double mn = *mn_it;
  const double mx = *mx_it;
  if (mx > mn) {
    for (double& v : up) v = (v - mn) / (mx - mn);
  } else {
    std::fill(up.begin(), up.end(), 0.0);
  }
  return Grid(img_w, img_h, std::move(up));
}

}  // namespace xdeval

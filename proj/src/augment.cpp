#include "xdeval/augment.hpp"

#include <algorithm>
#include <cmath>

#include "xdeval/errors.hpp"
#include "xdeval/model.hpp"

namespace xdeval {

namespace {

Tensor hflip_image(const Tensor& in) {
  const std::size_t c = in.shape[0], h = in.shape[1], w = in.shape[2];
  Tensor out = Tensor::zeros(in.shape);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < h; ++y) {
      const double* src = in.data.data() + (ch * h + y) * w;
      double* dst = out.data.data() + (ch * h + y) * w;
      for (std::size_t x = 0; x < w; ++x) dst[x] = src[w - 1 - x];
    }
  }
  return out;
}

Tensor vflip_image(const Tensor& in) {
  const std::size_t c = in.shape[0], h = in.shape[1], w = in.shape[2];
  Tensor out = Tensor::zeros(in.shape);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < h; ++y) {
      const double* src = in.data.data() + (ch * h + (h - 1 - y)) * w;
      double* dst = out.data.data() + (ch * h + y) * w;
      std::copy(src, src + w, dst);
    }
  }
  return out;
}

// Clockwise quarter turn: pixel (y, x) of an HxW plane lands at
// (x, H-1-y) in the resulting WxH plane.
Tensor rot90_image(const Tensor& in) {
  const std::size_t c = in.shape[0], h = in.shape[1], w = in.shape[2];
  Tensor out = Tensor::zeros({c, w, h});
  for (std::size_t ch = 0; ch < c; ++ch) {
    const double* src = in.data.data() + ch * h * w;
    double* dst = out.data.data() + ch * h * w;
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        dst[x * h + (h - 1 - y)] = src[y * w + x];
      }
    }
  }
  return out;
}

AugmentedSample crop_resize(const Tensor& image, const Box& box, Rng& rng) {
  const std::size_t h = image.shape[1];
  const std::size_t w = image.shape[2];

  // Crop extent: a fraction of the image, never smaller than the pixel
  // span of the ground-truth box so the object always survives the crop.
  const auto pick_extent = [&rng](double lo_frac, std::size_t full,
                                  double box_lo, double box_hi) {
    const std::size_t span = static_cast<std::size_t>(
        std::ceil(box_hi) - std::floor(box_lo));
    std::size_t ext = static_cast<std::size_t>(
        std::llround(rng.uniform(lo_frac, 1.0) * static_cast<double>(full)));
    ext = std::clamp(ext, std::max<std::size_t>(span, 8), full);
    return ext;
  };
  const std::size_t cw = pick_extent(0.8, w, box.x_min(), box.x_max());
  const std::size_t ch = pick_extent(0.8, h, box.y_min(), box.y_max());

  const auto pick_offset = [&rng](std::size_t ext, std::size_t full,
                                  double box_lo, double box_hi) {
    const long lo = std::max<long>(
        0, static_cast<long>(std::ceil(box_hi)) - static_cast<long>(ext));
    const long hi = std::min<long>(static_cast<long>(full - ext),
                                   static_cast<long>(std::floor(box_lo)));
    return static_cast<std::size_t>(rng.uniform_int(lo, std::max(lo, hi)));
  };
  const std::size_t x0 = pick_offset(cw, w, box.x_min(), box.x_max());
  const std::size_t y0 = pick_offset(ch, h, box.y_min(), box.y_max());

  // Cut the window, then interpolate each channel back to HxW.
  Tensor out = Tensor::zeros(image.shape);
  std::vector<double> window(ch * cw);
  for (std::size_t c = 0; c < image.shape[0]; ++c) {
    const double* src = image.data.data() + c * h * w;
    for (std::size_t y = 0; y < ch; ++y) {
      std::copy(src + (y0 + y) * w + x0, src + (y0 + y) * w + x0 + cw,
                window.data() + y * cw);
    }
    std::vector<double> up = bilinear_upsample(window, ch, cw, h, w);
    std::copy(up.begin(), up.end(),
              out.data.data() + c * h * w);
  }

  const double sx = static_cast<double>(w) / static_cast<double>(cw);
  const double sy = static_cast<double>(h) / static_cast<double>(ch);
  Box new_box((box.x_min() - static_cast<double>(x0)) * sx,
              (box.y_min() - static_cast<double>(y0)) * sy, box.width() * sx,
              box.height() * sy);
  return {std::move(out), new_box};
}

}  // namespace

AugmentedSample apply_augment(const Tensor& image, const Box& box,
                              AugmentOp op, Rng& rng) {
  if (image.shape.size() != 3) {
    throw ShapeMismatch("augment expects a {C, H, W} image tensor");
  }
  const double h = static_cast<double>(image.shape[1]);
  const double w = static_cast<double>(image.shape[2]);

  switch (op) {
    case AugmentOp::kIdentity:
      return {image, box};
    case AugmentOp::kHFlip:
      return {hflip_image(image),
              Box(w - box.x_min() - box.width(), box.y_min(), box.width(),
                  box.height())};
    case AugmentOp::kVFlip:
      return {vflip_image(image),
              Box(box.x_min(), h - box.y_min() - box.height(), box.width(),
                  box.height())};
    case AugmentOp::kRot90:
      return {rot90_image(image),
              Box(h - box.y_min() - box.height(), box.x_min(), box.height(),
                  box.width())};
    case AugmentOp::kRot180: {
      AugmentedSample once = apply_augment(image, box, AugmentOp::kHFlip, rng);
      return apply_augment(once.image, once.box, AugmentOp::kVFlip, rng);
    }
    case AugmentOp::kRot270: {
      AugmentedSample once = apply_augment(image, box, AugmentOp::kRot90, rng);
      AugmentedSample twice =
          apply_augment(once.image, once.box, AugmentOp::kRot90, rng);
      return apply_augment(twice.image, twice.box, AugmentOp::kRot90, rng);
    }
    case AugmentOp::kCropResize:
      return crop_resize(image, box, rng);
  }
  throw ValidationError("unknown augmentation op");
}

AugmentedSample augment(const Tensor& image, const Box& box, Rng& rng) {
  const auto op =
      static_cast<AugmentOp>(rng.uniform_int(0, kNumAugmentOps - 1));
  return apply_augment(image, box, op, rng);
}

}  // namespace xdeval

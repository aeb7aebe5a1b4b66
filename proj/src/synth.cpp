#include "xdeval/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "xdeval/errors.hpp"

namespace xdeval {

namespace {

// Foreground objects share one warm color ramp, so color alone never
// identifies a class — only shape separates the categories.  Clutter uses a
// muted foliage ramp instead: it is background texture, chromatically distinct
// from any object, and its difficulty comes from edge density, not disguise.
struct Color {
  double r, g, b;
};

Color warm(double brightness) {
  return {brightness, 0.85 * brightness, 0.55 * brightness};
}

Color foliage(double brightness) {
  return {0.45 * brightness, 0.55 * brightness, 0.3 * brightness};
}

void put_pixel(Tensor& image, std::size_t y, std::size_t x, const Color& c) {
  const std::size_t h = image.shape[1];
  const std::size_t w = image.shape[2];
  image.data[0 * h * w + y * w + x] = c.r;
  image.data[1 * h * w + y * w + x] = c.g;
  image.data[2 * h * w + y * w + x] = c.b;
}

void draw_rect(Tensor& image, long x0, long y0, long rw, long rh,
               const Color& c) {
  const long h = static_cast<long>(image.shape[1]);
  const long w = static_cast<long>(image.shape[2]);
  const long ya = std::max(0L, y0);
  const long yb = std::min(h, y0 + rh);
  const long xa = std::max(0L, x0);
  const long xb = std::min(w, x0 + rw);
  for (long y = ya; y < yb; ++y) {
    for (long x = xa; x < xb; ++x) {
      put_pixel(image, static_cast<std::size_t>(y),
                static_cast<std::size_t>(x), c);
    }
  }
}

}  // namespace

const char* background_mode_name(BackgroundMode mode) {
  switch (mode) {
    case BackgroundMode::kPlain:
      return "plain";
    case BackgroundMode::kMildClutter:
      return "mild_clutter";
    case BackgroundMode::kHeavyClutter:
      return "heavy_clutter";
  }
  return "plain";
}

BackgroundMode background_mode_from_name(const std::string& name) {
  if (name == "plain") return BackgroundMode::kPlain;
  if (name == "mild_clutter") return BackgroundMode::kMildClutter;
  if (name == "heavy_clutter") return BackgroundMode::kHeavyClutter;
  throw ValidationError("unknown background mode: " + name);
}

void DomainSpec::validate() const {
  if (height < 16 || width < 16 || height % 8 != 0 || width % 8 != 0) {
    throw ValidationError(
        "domain image size must be a multiple of 8 and at least 16x16");
  }
  if (!(clutter_density >= 0.0 && clutter_density <= 1.0)) {
    throw ValidationError("clutter_density must lie in [0, 1]");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw ValidationError("noise_sigma must be finite and non-negative");
  }
  if (!(object_scale_min > 0.0) || !(object_scale_max >= object_scale_min) ||
      !(object_scale_max < 0.9)) {
    throw ValidationError(
        "object scale range must satisfy 0 < min <= max < 0.9");
  }
}

DomainSpec DomainSpec::plain() {
  DomainSpec d;
  d.name = "plain";
  d.background = BackgroundMode::kPlain;
  d.clutter_density = 0.0;
  d.noise_sigma = 0.02;
  return d;
}

DomainSpec DomainSpec::mild_clutter() {
  DomainSpec d;
  d.name = "mild_clutter";
  d.background = BackgroundMode::kMildClutter;
  d.clutter_density = 0.3;
  d.noise_sigma = 0.03;
  return d;
}

DomainSpec DomainSpec::heavy_clutter() {
  DomainSpec d;
  d.name = "heavy_clutter";
  d.background = BackgroundMode::kHeavyClutter;
  d.clutter_density = 0.9;
  d.noise_sigma = 0.04;
  return d;
}

void render_background(const DomainSpec& domain, Rng& bg_rng, Tensor& image) {
  const std::size_t h = domain.height;
  const std::size_t w = domain.width;

  // Dark greenish base; the exact level varies slightly per image.
  const double g = bg_rng.uniform(0.08, 0.20);
  const Color base{0.8 * g, g, 0.9 * g};
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) put_pixel(image, y, x, base);
  }

  const int patches =
      domain.background == BackgroundMode::kPlain
          ? 0
          : static_cast<int>(std::llround(domain.clutter_density *
                                          kMaxClutterPatches));
  for (int p = 0; p < patches; ++p) {
    const std::int64_t kind = bg_rng.uniform_int(0, 1);
    const long cx = static_cast<long>(
        bg_rng.uniform_int(0, static_cast<std::int64_t>(w) - 1));
    const long cy = static_cast<long>(
        bg_rng.uniform_int(0, static_cast<std::int64_t>(h) - 1));
    const Color c = foliage(bg_rng.uniform(0.45, 0.95));
    if (kind == 0) {
      // Elongated bar, horizontal or vertical. Far from any foreground
      // shape's aspect ratio.
      const bool horizontal = bg_rng.uniform_int(0, 1) == 0;
      const long len = static_cast<long>(bg_rng.uniform_int(8, 20));
      const long thick = static_cast<long>(bg_rng.uniform_int(1, 3));
      if (horizontal) {
        draw_rect(image, cx - len / 2, cy - thick / 2, len, thick, c);
      } else {
        draw_rect(image, cx - thick / 2, cy - len / 2, thick, len, c);
      }
    } else {
      // Small plus sign: two crossing strokes.
      const long arm = static_cast<long>(bg_rng.uniform_int(2, 4));
      const long thick = static_cast<long>(bg_rng.uniform_int(1, 2));
      draw_rect(image, cx - arm, cy - thick / 2, 2 * arm + 1, thick, c);
      draw_rect(image, cx - thick / 2, cy - arm, thick, 2 * arm + 1, c);
    }
  }
}

ObjectRender render_object(const DomainSpec& domain, Rng& obj_rng,
                           Tensor& image) {
  const std::size_t h = domain.height;
  const std::size_t w = domain.width;
  const double side = static_cast<double>(std::min(h, w));

  const int category =
      static_cast<int>(obj_rng.uniform_int(1, 4));
  const double s =
      obj_rng.uniform(domain.object_scale_min, domain.object_scale_max) * side;
  const double e = s / 2.0;
  const double cx = obj_rng.uniform(e + 1.0, static_cast<double>(w) - e - 1.0);
  const double cy = obj_rng.uniform(e + 1.0, static_cast<double>(h) - e - 1.0);
  const Color color = warm(obj_rng.uniform(0.75, 0.95));

  const double r_out = s / 2.0;
  const double r_in = 0.55 * r_out;
  const double tri_h = s * std::sqrt(3.0) / 4.0;  // half-height

  const auto inside = [&](double px, double py) {
    const double dx = px - cx;
    const double dy = py - cy;
    switch (category) {
      case 1:  // disk
        return dx * dx + dy * dy <= r_out * r_out;
      case 2:  // square
        return std::abs(dx) <= s / 2.0 && std::abs(dy) <= s / 2.0;
      case 3: {  // upward triangle
        if (dy < -tri_h || dy > tri_h) return false;
        const double half_width_here = (dy + tri_h) / (2.0 * tri_h) * (s / 2.0);
        return std::abs(dx) <= half_width_here;
      }
      case 4: {  // ring
        const double d2 = dx * dx + dy * dy;
        return d2 >= r_in * r_in && d2 <= r_out * r_out;
      }
      default:
        return false;
    }
  };

  ObjectRender render;
  render.category_id = category;
  render.painted.assign(h * w, 0);
  long xmin = static_cast<long>(w), xmax = -1;
  long ymin = static_cast<long>(h), ymax = -1;

  const long y0 = std::max(0L, static_cast<long>(std::floor(cy - e)) - 1);
  const long y1 = std::min(static_cast<long>(h) - 1,
                           static_cast<long>(std::ceil(cy + e)) + 1);
  const long x0 = std::max(0L, static_cast<long>(std::floor(cx - e)) - 1);
  const long x1 = std::min(static_cast<long>(w) - 1,
                           static_cast<long>(std::ceil(cx + e)) + 1);
  for (long y = y0; y <= y1; ++y) {
    for (long x = x0; x <= x1; ++x) {
      if (!inside(static_cast<double>(x) + 0.5, static_cast<double>(y) + 0.5)) {
        continue;
      }
      put_pixel(image, static_cast<std::size_t>(y), static_cast<std::size_t>(x),
                color);
      render.painted[static_cast<std::size_t>(y) * w +
                     static_cast<std::size_t>(x)] = 1;
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (xmax < xmin) {
    throw ValidationError("object rendering painted no pixels");
  }
  render.box = Box(static_cast<double>(xmin), static_cast<double>(ymin),
                   static_cast<double>(xmax - xmin + 1),
                   static_cast<double>(ymax - ymin + 1));
  return render;
}

void apply_noise(const DomainSpec& domain, Rng& noise_rng, Tensor& image) {
  if (domain.noise_sigma == 0.0) return;
  for (double& v : image.data) {
    v = std::clamp(v + noise_rng.normal(0.0, domain.noise_sigma), 0.0, 1.0);
  }
}

DatasetBundle generate(const DomainSpec& domain, std::size_t n,
                       std::uint64_t seed) {
  domain.validate();
  if (n < 1) throw ValidationError("generate requires n >= 1");

  DatasetBundle bundle;
  bundle.domain = domain;
  bundle.seed = seed;
  bundle.images.reserve(n);
  bundle.ground_truths.reserve(n);

  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t image_seed = derive_seed(seed, i);
    Rng bg_rng(derive_seed(image_seed, 1));
    Rng obj_rng(derive_seed(image_seed, 2));
    Rng noise_rng(derive_seed(image_seed, 3));

    Tensor image = Tensor::zeros({3, domain.height, domain.width});
    render_background(domain, bg_rng, image);
    const ObjectRender render = render_object(domain, obj_rng, image);
    apply_noise(domain, noise_rng, image);

    bundle.images.push_back(std::move(image));
    bundle.ground_truths.push_back(GroundTruth{
        static_cast<std::int64_t>(i) + 1, render.category_id, render.box});
  }
  return bundle;
}

void SplitRatios::validate() const {
  if (!(train > 0.0 && val > 0.0 && test > 0.0)) {
    throw ValidationError("split ratios must be positive");
  }
  if (std::abs(train + val + test - 1.0) > 1e-9) {
    throw ValidationError("split ratios must sum to 1");
  }
}

SplitResult split(const DatasetBundle& bundle, const SplitRatios& ratios,
                  std::uint64_t seed) {
  ratios.validate();
  const std::size_t n = bundle.size();
  if (n < 5) {
    throw TooSmall("cannot split a bundle of " + std::to_string(n) +
                   " images; need at least 5");
  }

  const std::size_t n_val =
      static_cast<std::size_t>(std::floor(ratios.val * static_cast<double>(n)));
  const std::size_t n_test = static_cast<std::size_t>(
      std::floor(ratios.test * static_cast<double>(n)));
  const std::size_t n_train = n - n_val - n_test;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(i)));
    std::swap(order[i], order[j]);
  }

  const auto take = [&](std::size_t begin, std::size_t count) {
    DatasetBundle part;
    part.domain = bundle.domain;
    part.seed = bundle.seed;
    part.images.reserve(count);
    part.ground_truths.reserve(count);
    for (std::size_t k = begin; k < begin + count; ++k) {
      part.images.push_back(bundle.images[order[k]]);
      part.ground_truths.push_back(bundle.ground_truths[order[k]]);
    }
    return part;
  };

  SplitResult result;
  result.train = take(0, n_train);
  result.val = take(n_train, n_val);
  result.test = take(n_train + n_val, n_test);
  return result;
}

}  // namespace xdeval

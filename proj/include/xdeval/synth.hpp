#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "xdeval/detection.hpp"
#include "xdeval/geometry.hpp"
#include "xdeval/rng.hpp"
#include "xdeval/tensor.hpp"

namespace xdeval {

// The four foreground categories, ids 1..4 in annotation files.
inline constexpr std::array<const char*, 4> kClassNames = {
    "disk", "square", "triangle", "ring"};

enum class BackgroundMode {
  kPlain = 0,      // flat background + sensor noise
  kMildClutter,    // a few distractor patches
  kHeavyClutter,   // dense distractor patches
};

const char* background_mode_name(BackgroundMode mode);
BackgroundMode background_mode_from_name(const std::string& name);

// One image domain. Every image contains exactly one foreground shape,
// drawn fully inside the frame; clutter patches are bars and plus signs,
// which can never be mistaken for one of the four foreground shapes.
struct DomainSpec {
  std::string name = "plain";
  BackgroundMode background = BackgroundMode::kPlain;
  double clutter_density = 0.0;  // fraction of the maximum patch budget
  double noise_sigma = 0.02;
  std::size_t height = 64;
  std::size_t width = 64;
  double object_scale_min = 0.5;  // object size as fraction of min(H, W)
  double object_scale_max = 0.75;

  void validate() const;

  static DomainSpec plain();
  static DomainSpec mild_clutter();
  static DomainSpec heavy_clutter();
};

// Patch budget at clutter_density == 1.
inline constexpr int kMaxClutterPatches = 20;

struct DatasetBundle {
  DomainSpec domain;
  std::uint64_t seed = 0;
  std::vector<Tensor> images;                // {3, H, W}, values in [0, 1]
  std::vector<GroundTruth> ground_truths;    // one per image, same order

  std::size_t size() const { return images.size(); }
};

// The shape actually painted for one object: its class, the exact pixel
// set it covered, and the tight bounding box of that pixel set.
struct ObjectRender {
  int category_id = 0;                  // 1..4
  std::vector<std::uint8_t> painted;    // H*W row-major 0/1
  Box box = Box(0.0, 0.0, 1.0, 1.0);
};

// Draws the background (base color plus clutter per the domain) into
// `image` using `bg_rng`. Exposed so tests can reproduce single images.
void render_background(const DomainSpec& domain, Rng& bg_rng, Tensor& image);

// Draws one foreground object on top of `image` and reports exactly which
// pixels it painted.
ObjectRender render_object(const DomainSpec& domain, Rng& obj_rng,
                           Tensor& image);

// Adds clipped Gaussian sensor noise.
void apply_noise(const DomainSpec& domain, Rng& noise_rng, Tensor& image);

// Deterministic dataset generation. Image i uses three RNG streams derived
// from (seed, i) — object, background, noise — so images are independent
// of generation order and a zero-clutter domain renders pixel-identically
// to the plain domain under the same seed.
DatasetBundle generate(const DomainSpec& domain, std::size_t n,
                       std::uint64_t seed);

struct SplitRatios {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;

  void validate() const;
};

struct SplitResult {
  DatasetBundle train;
  DatasetBundle val;
  DatasetBundle test;
};

// Shuffled partition with floor-allocated val/test sizes and the
// remainder assigned to train. Bundles of fewer than 5 images cannot be
// split meaningfully and raise TooSmall.
SplitResult split(const DatasetBundle& bundle, const SplitRatios& ratios,
                  std::uint64_t seed);

}  // namespace xdeval

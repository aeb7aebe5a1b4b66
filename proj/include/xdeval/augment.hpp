#pragma once

#include "xdeval/geometry.hpp"
#include "xdeval/rng.hpp"
#include "xdeval/tensor.hpp"

namespace xdeval {

// The augmentation menu: flips, quarter-turn rotations, and a random crop
// (always containing the full ground-truth box) followed by a resize back
// to the original dimensions. Rotations are clockwise.
enum class AugmentOp {
  kIdentity = 0,
  kHFlip,
  kVFlip,
  kRot90,
  kRot180,
  kRot270,
  kCropResize,
};

inline constexpr int kNumAugmentOps = 7;

struct AugmentedSample {
  Tensor image;
  Box box;
};

// Applies one specific transform. Only kCropResize draws from `rng`
// (crop extent and offset); the others are deterministic.
AugmentedSample apply_augment(const Tensor& image, const Box& box,
                              AugmentOp op, Rng& rng);

// Uniformly samples one of the seven transforms and applies it.
AugmentedSample augment(const Tensor& image, const Box& box, Rng& rng);

}  // namespace xdeval

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "xdeval/detection.hpp"
#include "xdeval/grid.hpp"
#include "xdeval/tensor.hpp"

namespace xdeval {

inline constexpr int kNumClasses = 4;

// Three 3x3 conv blocks (stride-1, pad-1, each followed by ReLU and 2x2 max
// pooling), global average pooling, and two linear heads. The conv stack is
// the transferable backbone; the heads are task-specific.
struct ModelParams {
  Tensor conv1_w;  // {8, 3, 3, 3}
  Tensor conv1_b;  // {8}
  Tensor conv2_w;  // {16, 8, 3, 3}
  Tensor conv2_b;  // {16}
  Tensor conv3_w;  // {32, 16, 3, 3}
  Tensor conv3_b;  // {32}
  Tensor cls_w;    // {kNumClasses, 32}
  Tensor cls_b;    // {kNumClasses}
  Tensor box_w;    // {4, 32}
  Tensor box_b;    // {4}

  static ModelParams zeros();

  // He-style init for the backbone, small-scale init for the heads. The two
  // use independent derived streams so head draws do not depend on whether
  // the backbone was also drawn.
  static ModelParams random_init(std::uint64_t seed);

  template <typename F>
  void for_each(F&& f) {
    f("conv1.weight", conv1_w);
    f("conv1.bias", conv1_b);
    f("conv2.weight", conv2_w);
    f("conv2.bias", conv2_b);
    f("conv3.weight", conv3_w);
    f("conv3.bias", conv3_b);
    f("cls_head.weight", cls_w);
    f("cls_head.bias", cls_b);
    f("box_head.weight", box_w);
    f("box_head.bias", box_b);
  }
  template <typename F>
  void for_each(F&& f) const {
    const_cast<ModelParams*>(this)->for_each(
        [&f](const char* name, Tensor& t) { f(name, static_cast<const Tensor&>(t)); });
  }
};

inline const std::array<const char*, 6> kBackboneTensorNames = {
    "conv1.weight", "conv1.bias", "conv2.weight",
    "conv2.bias",   "conv3.weight", "conv3.bias"};

bool is_backbone_tensor(const char* name);

// conv1..conv3 weights only, as exported by pretraining.
struct BackboneWeights {
  Tensor conv1_w, conv1_b, conv2_w, conv2_b, conv3_w, conv3_b;

  template <typename F>
  void for_each(F&& f) {
    f("conv1.weight", conv1_w);
    f("conv1.bias", conv1_b);
    f("conv2.weight", conv2_w);
    f("conv2.bias", conv2_b);
    f("conv3.weight", conv3_w);
    f("conv3.bias", conv3_b);
  }
  template <typename F>
  void for_each(F&& f) const {
    const_cast<BackboneWeights*>(this)->for_each(
        [&f](const char* name, Tensor& t) {
          f(name, static_cast<const Tensor&>(t));
        });
  }
};

BackboneWeights extract_backbone(const ModelParams& params);
void apply_backbone(ModelParams& params, const BackboneWeights& backbone);

// Everything the backward pass and GradCAM need from one forward pass.
struct ForwardCache {
  Tensor input;                       // {3, H, W}
  Tensor block1_relu;                 // {8, H, W}
  Tensor block1_out;                  // {8, H/2, W/2}
  std::vector<std::uint32_t> block1_argmax;
  Tensor block2_relu;                 // {16, H/2, W/2}
  Tensor block2_out;                  // {16, H/4, W/4}
  std::vector<std::uint32_t> block2_argmax;
  Tensor block3_relu;                 // {32, H/4, W/4}
  Tensor conv3_act;                   // {32, H/8, W/8}, the GradCAM target
  std::vector<std::uint32_t> block3_argmax;
  std::vector<double> features;       // {32}, global average pool
  std::vector<double> logits;         // {kNumClasses}
  std::vector<double> probs;          // softmax(logits)
  std::vector<double> box_raw;        // {4}, pre-sigmoid
  std::vector<double> box;            // {4}, (cx, cy, w, h) in (0, 1)
};

// Runs the detector on a {3, H, W} image (H, W multiples of 8, >= 8).
void forward(const ModelParams& params, const Tensor& image,
             ForwardCache& cache);
ForwardCache forward(const ModelParams& params, const Tensor& image);

// Normalized regression target; (cx, cy, w, h) each in (0, 1).
using BoxTarget = std::array<double, 4>;

// Softmax cross-entropy plus summed squared box error.
double detection_loss(const std::vector<double>& logits,
                      const std::vector<double>& box, int target_class,
                      const BoxTarget& target_box);

// Exact reverse-mode gradients of detection_loss with respect to every
// parameter, accumulated into `grads` (caller zeroes between batches).
// Max-pool gradient ties route to the first row-major maximal element.
void backward_accumulate(const ModelParams& params, const ForwardCache& cache,
                         int target_class, const BoxTarget& target_box,
                         ModelParams& grads);
ModelParams backward(const ModelParams& params, const ForwardCache& cache,
                     int target_class, const BoxTarget& target_box);

// d(logit_c) / d(conv3 activation); shape {32, H/8, W/8}.
Tensor logit_gradient_conv3(const ModelParams& params,
                            const ForwardCache& cache, int class_id);

// Argmax class prediction with its softmax score and a denormalized pixel
// box; empty when the score falls below the threshold.
std::vector<Detection> predict_detection(const ModelParams& params,
                                         const Tensor& image,
                                         std::int64_t image_id,
                                         double score_threshold);

// Channel-gradient-weighted activation map over the conv3 activation,
// bilinearly upsampled to the input size and min-max normalized to [0, 1].
// A nowhere-positive weighted sum yields the all-zero map.
Grid grad_cam(const ModelParams& params, const Tensor& image, int class_id);

// Bilinear upsampling of a {h, w} plane to {out_h, out_w} (half-pixel
// centers, edges clamped).
std::vector<double> bilinear_upsample(const std::vector<double>& src,
                                      std::size_t h, std::size_t w,
                                      std::size_t out_h, std::size_t out_w);

// 2x2 stride-2 max pooling over a {c, h, w} tensor; ties keep the first
// row-major element. Argmax entries are per-channel flat plane indices.
void maxpool2(const Tensor& in, Tensor& out,
              std::vector<std::uint32_t>& argmax);
void maxpool2_backward(const Tensor& dout,
                       const std::vector<std::uint32_t>& argmax,
                       const std::vector<std::size_t>& in_shape, Tensor& din);

std::vector<double> softmax(const std::vector<double>& logits);

}  // namespace xdeval

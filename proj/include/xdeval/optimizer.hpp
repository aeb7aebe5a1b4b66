#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <string>

#include "xdeval/model.hpp"
#include "xdeval/tensor.hpp"

namespace xdeval {

// AdamW with decoupled weight decay:
//   m <- b1*m + (1-b1)*g         v <- b2*v + (1-b2)*g^2
//   theta <- theta - lr * (mhat / (sqrt(vhat) + eps) + decay * theta)
// Bias correction uses a single global step count shared by all tensors.
struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

struct OptimState {
  AdamWConfig config;
  std::uint64_t step = 0;                 // completed update steps
  std::map<std::string, Tensor> m;        // first-moment estimate per tensor
  std::map<std::string, Tensor> v;        // second-moment estimate per tensor

  explicit OptimState(AdamWConfig config = {}) : config(config) {}
};

// Applies one AdamW update to every parameter tensor from its gradient.
// When freeze_backbone is set, backbone tensors are skipped entirely: no
// parameter update, no weight decay, and no moment accumulation.
void adamw_step(OptimState& state, ModelParams& params,
                const ModelParams& grads, bool freeze_backbone = false);

// Single-tensor update used by adamw_step; exposed for targeted tests.
void adamw_update_tensor(const AdamWConfig& config, std::uint64_t step,
                         Tensor& theta, const Tensor& grad, Tensor& m,
                         Tensor& v);

// Reduce-on-plateau schedule: a validation value below best - min_delta
// resets the stall counter; otherwise the counter grows and, once it
// exceeds `patience`, the learning rate is multiplied by `factor`.
struct PlateauState {
  double best_val_loss = std::numeric_limits<double>::infinity();
  int epochs_since_improvement = 0;
  int patience = 5;
  double factor = 0.1;
  double min_delta = 1e-4;
  double current_lr = 1e-3;
};

// Feeds one validation measurement; returns true when the learning rate
// was reduced this call.
bool plateau_step(PlateauState& state, double val_loss);

}  // namespace xdeval

#include "xdeval/optimizer.hpp"

#include <cmath>

#include "xdeval/errors.hpp"

namespace xdeval {

void adamw_update_tensor(const AdamWConfig& config, std::uint64_t step,
                         Tensor& theta, const Tensor& grad, Tensor& m,
                         Tensor& v) {
  if (grad.data.size() != theta.data.size()) {
    throw ShapeMismatch("gradient shape does not match parameter shape");
  }
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < theta.data.size(); ++i) {
    const double g = grad.data[i];
    m.data[i] = config.beta1 * m.data[i] + (1.0 - config.beta1) * g;
    v.data[i] = config.beta2 * v.data[i] + (1.0 - config.beta2) * g * g;
    const double mhat = m.data[i] / bc1;
    const double vhat = v.data[i] / bc2;
    theta.data[i] -= config.lr * (mhat / (std::sqrt(vhat) + config.eps) +
                                  config.weight_decay * theta.data[i]);
  }
}

void adamw_step(OptimState& state, ModelParams& params,
                const ModelParams& grads, bool freeze_backbone) {
  ++state.step;
  std::map<std::string, const Tensor*> grad_by_name;
  grads.for_each([&](const char* name, const Tensor& g) {
    grad_by_name.emplace(name, &g);
  });
  params.for_each([&](const char* name, Tensor& theta) {
    if (freeze_backbone && is_backbone_tensor(name)) return;
    auto [mit, inserted_m] = state.m.try_emplace(name);
    if (inserted_m) mit->second = Tensor::zeros(theta.shape);
    auto [vit, inserted_v] = state.v.try_emplace(name);
    if (inserted_v) vit->second = Tensor::zeros(theta.shape);
    adamw_update_tensor(state.config, state.step, theta,
                        *grad_by_name.at(name), mit->second, vit->second);
  });
}

bool plateau_step(PlateauState& state, double val_loss) {
  if (!std::isfinite(val_loss)) {
    throw ValidationError("plateau_step requires a finite validation loss");
  }
  if (val_loss < state.best_val_loss - state.min_delta) {
    state.best_val_loss = val_loss;
    state.epochs_since_improvement = 0;
    return false;
  }
  ++state.epochs_since_improvement;
  if (state.epochs_since_improvement > state.patience) {
    state.current_lr *= state.factor;
    state.epochs_since_improvement = 0;
    return true;
  }
  return false;
}

}  // namespace xdeval

#include <doctest.h>

#include <cmath>
#include <limits>

#include "xdeval/errors.hpp"
#include "xdeval/model.hpp"
#include "xdeval/optimizer.hpp"
#include "xdeval/rng.hpp"

using namespace xdeval;

namespace {

// The update formula, written out independently of the implementation:
//   m' = b1*m + (1-b1)*g          v' = b2*v + (1-b2)*g^2
//   theta' = theta - lr*(m'/(1-b1^t) / (sqrt(v'/(1-b2^t)) + eps)
//                        + decay*theta)
double reference_update(const AdamWConfig& c, std::uint64_t t, double theta,
                        double g, double& m, double& v) {
  m = c.beta1 * m + (1.0 - c.beta1) * g;
  v = c.beta2 * v + (1.0 - c.beta2) * g * g;
  const double mhat = m / (1.0 - std::pow(c.beta1, static_cast<double>(t)));
  const double vhat = v / (1.0 - std::pow(c.beta2, static_cast<double>(t)));
  return theta -
         c.lr * (mhat / (std::sqrt(vhat) + c.eps) + c.weight_decay * theta);
}

ModelParams random_grads(Rng& rng) {
  ModelParams g = ModelParams::zeros();
  g.for_each([&](const char*, Tensor& t) {
    for (double& v : t.data) v = rng.normal(0.0, 1.0);
  });
  return g;
}

}  // namespace

TEST_CASE("single-step hand case: theta=1, g=1, lr=0.1 lands near 0.899") {
  AdamWConfig config;
  config.lr = 0.1;
  Tensor theta = Tensor::zeros({1});
  theta.data[0] = 1.0;
  Tensor grad = Tensor::zeros({1});
  grad.data[0] = 1.0;
  Tensor m = Tensor::zeros({1});
  Tensor v = Tensor::zeros({1});
  adamw_update_tensor(config, 1, theta, grad, m, v);

  // After one step the bias corrections cancel the moment scaling exactly:
  // mhat = 1, vhat = 1, so theta' = 1 - 0.1*(1/(1+1e-8) + 0.01).
  CHECK(theta.data[0] == doctest::Approx(0.899).epsilon(1e-6));

  double rm = 0.0, rv = 0.0;
  const double want = reference_update(config, 1, 1.0, 1.0, rm, rv);
  CHECK(theta.data[0] == doctest::Approx(want).epsilon(1e-12));
  CHECK(m.data[0] == doctest::Approx(rm).epsilon(1e-15));
  CHECK(v.data[0] == doctest::Approx(rv).epsilon(1e-15));
}

TEST_CASE("multi-step updates keep matching the reference formula") {
  AdamWConfig config;
  config.lr = 0.05;
  config.weight_decay = 0.02;
  Tensor theta = Tensor::zeros({1});
  theta.data[0] = -0.7;
  Tensor m = Tensor::zeros({1});
  Tensor v = Tensor::zeros({1});
  double rt = -0.7, rm = 0.0, rv = 0.0;
  Rng rng(41);
  for (std::uint64_t t = 1; t <= 20; ++t) {
    Tensor grad = Tensor::zeros({1});
    grad.data[0] = rng.normal(0.0, 1.0);
    adamw_update_tensor(config, t, theta, grad, m, v);
    rt = reference_update(config, t, rt, grad.data[0], rm, rv);
    CHECK(theta.data[0] == doctest::Approx(rt).epsilon(1e-12));
  }
}

TEST_CASE("zero gradient with decay shrinks the parameter multiplicatively") {
  AdamWConfig config;
  config.lr = 0.1;
  config.weight_decay = 0.5;
  Tensor theta = Tensor::zeros({1});
  theta.data[0] = 2.0;
  Tensor grad = Tensor::zeros({1});
  Tensor m = Tensor::zeros({1});
  Tensor v = Tensor::zeros({1});
  adamw_update_tensor(config, 1, theta, grad, m, v);
  // mhat = 0 so the moment term vanishes; only decoupled decay acts.
  CHECK(theta.data[0] == 2.0 - 0.1 * (0.5 * 2.0));
  CHECK(m.data[0] == 0.0);
  CHECK(v.data[0] == 0.0);
}

TEST_CASE("zero gradient and zero decay change nothing, bitwise") {
  AdamWConfig config;
  config.weight_decay = 0.0;
  Tensor theta = Tensor::zeros({3});
  theta.data = {0.25, -1.5, 3.0};
  const std::vector<double> before = theta.data;
  Tensor grad = Tensor::zeros({3});
  Tensor m = Tensor::zeros({3});
  Tensor v = Tensor::zeros({3});
  for (std::uint64_t t = 1; t <= 5; ++t) {
    adamw_update_tensor(config, t, theta, grad, m, v);
  }
  CHECK(theta.data == before);
}

TEST_CASE("mismatched gradient shape is rejected") {
  AdamWConfig config;
  Tensor theta = Tensor::zeros({4});
  Tensor grad = Tensor::zeros({5});
  Tensor m = Tensor::zeros({4});
  Tensor v = Tensor::zeros({4});
  CHECK_THROWS_AS(adamw_update_tensor(config, 1, theta, grad, m, v),
                  ShapeMismatch);
}

TEST_CASE("frozen backbone stays bit-identical over many steps") {
  OptimState state;
  ModelParams params = ModelParams::random_init(42);
  const ModelParams initial = params;
  Rng rng(43);
  for (int step = 0; step < 10; ++step) {
    const ModelParams grads = random_grads(rng);
    adamw_step(state, params, grads, /*freeze_backbone=*/true);
  }
  CHECK(params.conv1_w.data == initial.conv1_w.data);
  CHECK(params.conv1_b.data == initial.conv1_b.data);
  CHECK(params.conv2_w.data == initial.conv2_w.data);
  CHECK(params.conv2_b.data == initial.conv2_b.data);
  CHECK(params.conv3_w.data == initial.conv3_w.data);
  CHECK(params.conv3_b.data == initial.conv3_b.data);
  // Heads do move.
  CHECK(params.cls_w.data != initial.cls_w.data);
  CHECK(params.box_w.data != initial.box_w.data);
  // Frozen tensors accumulate no optimizer state at all.
  CHECK(state.m.size() == 4);
  CHECK(state.m.count("conv1.weight") == 0);
  CHECK(state.m.count("cls_head.weight") == 1);
  CHECK(state.step == 10);
}

TEST_CASE("full step touches every tensor and matches per-tensor updates") {
  OptimState state;
  ModelParams params = ModelParams::random_init(44);
  ModelParams mirror = params;
  Rng rng(45);
  const ModelParams grads = random_grads(rng);
  adamw_step(state, params, grads);

  std::map<std::string, const Tensor*> grad_by_name;
  grads.for_each([&](const char* name, const Tensor& g) {
    grad_by_name.emplace(name, &g);
  });
  mirror.for_each([&](const char* name, Tensor& theta) {
    Tensor m = Tensor::zeros(theta.shape);
    Tensor v = Tensor::zeros(theta.shape);
    adamw_update_tensor(state.config, 1, theta, *grad_by_name.at(name), m, v);
  });
  params.for_each([&](const char* name, Tensor& updated) {
    mirror.for_each([&](const char* n2, Tensor& expected) {
      if (std::string(name) == n2) CHECK(updated.data == expected.data);
    });
  });
}

TEST_CASE("plateau schedule") {
  SUBCASE("strictly improving losses never reduce the rate") {
    PlateauState state;
    const double lr0 = state.current_lr;
    double loss = 1.0;
    for (int i = 0; i < 50; ++i) {
      CHECK_FALSE(plateau_step(state, loss));
      loss -= 0.01;
    }
    CHECK(state.current_lr == lr0);
    CHECK(state.epochs_since_improvement == 0);
  }

  SUBCASE("constant loss for patience+1 epochs after a best: one reduction") {
    PlateauState state;
    CHECK_FALSE(plateau_step(state, 1.0));  // establishes the best
    for (int i = 0; i < state.patience; ++i) {
      CHECK_FALSE(plateau_step(state, 1.0));
    }
    CHECK(state.current_lr == 1e-3);  // still untouched at the limit
    CHECK(plateau_step(state, 1.0));  // stall patience+1 triggers the cut
    CHECK(state.current_lr == 1e-3 * 0.1);
    CHECK(state.epochs_since_improvement == 0);
  }

  SUBCASE("two stall runs compound to a hundredth of the rate") {
    PlateauState state;
    plateau_step(state, 1.0);
    int reductions = 0;
    for (int i = 0; i < 12; ++i) {
      if (plateau_step(state, 1.0)) ++reductions;
    }
    CHECK(reductions == 2);
    CHECK(state.current_lr == 1e-3 * 0.1 * 0.1);
  }

  SUBCASE("improvement must beat best by more than min_delta") {
    PlateauState state;
    plateau_step(state, 1.0);
    // Exactly best - min_delta is not an improvement.
    CHECK_FALSE(plateau_step(state, 1.0 - state.min_delta));
    CHECK(state.epochs_since_improvement == 1);
    CHECK(state.best_val_loss == 1.0);
    // Strictly below the margin is.
    CHECK_FALSE(plateau_step(state, 1.0 - state.min_delta - 1e-9));
    CHECK(state.epochs_since_improvement == 0);
    CHECK(state.best_val_loss == 1.0 - state.min_delta - 1e-9);
  }

  SUBCASE("an improvement mid-stall resets the counter") {
    PlateauState state;
    plateau_step(state, 1.0);
    for (int i = 0; i < 4; ++i) plateau_step(state, 1.0);
    CHECK(state.epochs_since_improvement == 4);
    plateau_step(state, 0.5);
    CHECK(state.epochs_since_improvement == 0);
    // A fresh stall run still needs patience+1 epochs.
    for (int i = 0; i < state.patience; ++i) {
      CHECK_FALSE(plateau_step(state, 0.5));
    }
    CHECK(plateau_step(state, 0.5));
  }

  SUBCASE("non-finite validation losses are rejected") {
    PlateauState state;
    CHECK_THROWS_AS(
        plateau_step(state, std::numeric_limits<double>::quiet_NaN()),
        ValidationError);
    CHECK_THROWS_AS(
        plateau_step(state, std::numeric_limits<double>::infinity()),
        ValidationError);
  }
}

#include "xdeval/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xdeval/augment.hpp"
#include "xdeval/errors.hpp"

namespace xdeval {

const char* transfer_regime_name(TransferRegime regime) {
  switch (regime) {
    case TransferRegime::kNoPretrain:
      return "no_pretrain";
    case TransferRegime::kFreezeBackbone:
      return "freeze_backbone";
    case TransferRegime::kFineTuneAll:
      return "fine_tune_all";
  }
  return "no_pretrain";
}

TransferRegime transfer_regime_from_name(const std::string& name) {
  if (name == "no_pretrain") return TransferRegime::kNoPretrain;
  if (name == "freeze_backbone") return TransferRegime::kFreezeBackbone;
  if (name == "fine_tune_all") return TransferRegime::kFineTuneAll;
  throw ValidationError("unknown transfer regime: " + name);
}

void TrainConfig::validate() const {
  if (epochs < 0) throw ValidationError("epochs must be >= 0");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) {
    throw ValidationError("learning rate must be finite and positive");
  }
}

BoxTarget box_target(const Box& box, std::size_t height, std::size_t width) {
  const double w = static_cast<double>(width);
  const double h = static_cast<double>(height);
  return {(box.x_min() + box.width() / 2.0) / w,
          (box.y_min() + box.height() / 2.0) / h, box.width() / w,
          box.height() / h};
}

double mean_loss(const ModelParams& params, const DatasetBundle& bundle) {
  if (bundle.size() == 0) {
    throw EmptySample("mean_loss requires a non-empty bundle");
  }
  ForwardCache cache;
  double sum = 0.0;
  for (std::size_t i = 0; i < bundle.size(); ++i) {
    forward(params, bundle.images[i], cache);
    const GroundTruth& gt = bundle.ground_truths[i];
    const BoxTarget target = box_target(gt.box, bundle.images[i].shape[1],
                                        bundle.images[i].shape[2]);
    sum += detection_loss(cache.logits, cache.box, gt.category_id - 1, target);
  }
  return sum / static_cast<double>(bundle.size());
}

double accuracy(const ModelParams& params, const DatasetBundle& bundle) {
  if (bundle.size() == 0) {
    throw EmptySample("accuracy requires a non-empty bundle");
  }
  ForwardCache cache;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < bundle.size(); ++i) {
    forward(params, bundle.images[i], cache);
    const std::size_t best =
        std::max_element(cache.probs.begin(), cache.probs.end()) -
        cache.probs.begin();
    if (static_cast<int>(best) + 1 == bundle.ground_truths[i].category_id) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(bundle.size());
}

std::vector<Detection> predict_bundle(const ModelParams& params,
                                      const DatasetBundle& bundle,
                                      double score_threshold) {
  std::vector<Detection> detections;
  for (std::size_t i = 0; i < bundle.size(); ++i) {
    auto dets = predict_detection(params, bundle.images[i],
                                  bundle.ground_truths[i].image_id,
                                  score_threshold);
    detections.insert(detections.end(), dets.begin(), dets.end());
  }
  return detections;
}

TrainResult train(const DatasetBundle& train_set, const DatasetBundle& val_set,
                  const TrainConfig& config,
                  const BackboneWeights* pretrained) {
  config.validate();
  if (config.regime != TransferRegime::kNoPretrain && pretrained == nullptr) {
    throw ValidationError(std::string(transfer_regime_name(config.regime)) +
                          " requires pretrained backbone weights");
  }

  TrainResult result;
  result.params = ModelParams::random_init(config.seed);
  if (config.regime != TransferRegime::kNoPretrain) {
    apply_backbone(result.params, *pretrained);
  }
  if (config.epochs == 0) return result;

  if (train_set.size() == 0 || val_set.size() == 0) {
    throw EmptySample("training requires non-empty train and val bundles");
  }

  const bool freeze = config.regime == TransferRegime::kFreezeBackbone;
  Rng shuffle_rng(derive_seed(config.seed, 101));
  Rng aug_rng(derive_seed(config.seed, 102));

  OptimState opt(AdamWConfig{});
  opt.config.lr = config.lr;
  PlateauState sched;
  sched.current_lr = config.lr;

  ModelParams grads = ModelParams::zeros();
  ForwardCache cache;
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    opt.config.lr = sched.current_lr;
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      const std::size_t j = static_cast<std::size_t>(
          shuffle_rng.uniform_int(0, static_cast<std::int64_t>(i)));
      std::swap(order[i], order[j]);
    }

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(
          order.size(), start + static_cast<std::size_t>(config.batch_size));
      grads.for_each([](const char*, Tensor& g) { g.fill(0.0); });

      for (std::size_t k = start; k < stop; ++k) {
        const std::size_t idx = order[k];
        const GroundTruth& gt = train_set.ground_truths[idx];

        const Tensor* image = &train_set.images[idx];
        Box box = gt.box;
        AugmentedSample augmented{Tensor{}, box};
        if (config.augmentation) {
          augmented = augment(*image, box, aug_rng);
          image = &augmented.image;
          box = augmented.box;
        }

        forward(result.params, *image, cache);
        const int target_class = gt.category_id - 1;
        const BoxTarget target =
            box_target(box, image->shape[1], image->shape[2]);
        const double loss =
            detection_loss(cache.logits, cache.box, target_class, target);
        if (!std::isfinite(loss)) {
          throw Diverged("non-finite training loss at epoch " +
                         std::to_string(epoch));
        }
        loss_sum += loss;
        backward_accumulate(result.params, cache, target_class, target, grads);
      }

      const double inv = 1.0 / static_cast<double>(stop - start);
      grads.for_each([inv](const char*, Tensor& g) {
        for (double& v : g.data) v *= inv;
      });
      adamw_step(opt, result.params, grads, freeze);
    }

    const double train_loss = loss_sum / static_cast<double>(order.size());
    const double val_loss = mean_loss(result.params, val_set);
    if (!std::isfinite(val_loss)) {
      throw Diverged("non-finite validation loss at epoch " +
                     std::to_string(epoch));
    }
    const double lr_used = opt.config.lr;
    plateau_step(sched, val_loss);
    result.history.push_back(EpochStats{train_loss, val_loss, lr_used});
  }
  return result;
}

BackboneWeights pretrain(const DatasetBundle& source_train,
                         const DatasetBundle& source_val, TrainConfig config) {
  config.regime = TransferRegime::kNoPretrain;
  const TrainResult result = train(source_train, source_val, config);
  return extract_backbone(result.params);
}

}  // namespace xdeval

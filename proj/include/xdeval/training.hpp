#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xdeval/model.hpp"
#include "xdeval/optimizer.hpp"
#include "xdeval/synth.hpp"

namespace xdeval {

enum class TransferRegime {
  kNoPretrain = 0,     // backbone and heads both freshly initialized
  kFreezeBackbone,     // pretrained backbone, never updated
  kFineTuneAll,        // pretrained backbone, all parameters updated
};

const char* transfer_regime_name(TransferRegime regime);
TransferRegime transfer_regime_from_name(const std::string& name);

struct TrainConfig {
  int epochs = 200;
  int batch_size = 16;
  std::uint64_t seed = 0;
  bool augmentation = true;
  TransferRegime regime = TransferRegime::kNoPretrain;
  double lr = 1e-3;

  // Zero epochs is allowed and returns the initialized parameters
  // untouched; useful for init-only runs and baseline checks.
  void validate() const;
};

struct EpochStats {
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;  // learning rate in effect during the epoch's updates
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochStats> history;
};

// Trains on `train_set` with per-epoch validation on `val_set`. Heads are
// always randomly initialized from the seed; the backbone starts from
// `pretrained` for the two pretrained regimes. Identical inputs produce
// bit-identical results. Non-finite losses raise Diverged.
TrainResult train(const DatasetBundle& train_set, const DatasetBundle& val_set,
                  const TrainConfig& config,
                  const BackboneWeights* pretrained = nullptr);

// Trains from scratch on the source domain and exports the backbone.
BackboneWeights pretrain(const DatasetBundle& source_train,
                         const DatasetBundle& source_val, TrainConfig config);

// Mean detection loss over a bundle (no augmentation).
double mean_loss(const ModelParams& params, const DatasetBundle& bundle);

// Fraction of images whose argmax class matches the ground truth.
double accuracy(const ModelParams& params, const DatasetBundle& bundle);

// Runs the detector over every image, tagging detections with the
// bundle's ground-truth image ids.
std::vector<Detection> predict_bundle(const ModelParams& params,
                                      const DatasetBundle& bundle,
                                      double score_threshold);

// Normalized (cx, cy, w, h) regression target for a box in an HxW image.
BoxTarget box_target(const Box& box, std::size_t height, std::size_t width);

}  // namespace xdeval

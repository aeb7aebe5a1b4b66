#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "xdeval/average_precision.hpp"
#include "xdeval/localization.hpp"
#include "xdeval/summary.hpp"
#include "xdeval/synth.hpp"
#include "xdeval/training.hpp"

namespace xdeval {

// A full benchmark: three domains, a pretraining budget, a per-run training
// budget, and the metric configurations. One experiment covers, per seed,
// the three transfer regimes (trained on the target split) and the three
// training-data compositions (fine-tuned on growing unions), all evaluated
// on the target test split.
struct ExperimentSpec {
  DomainSpec source = DomainSpec::plain();
  DomainSpec auxiliary = DomainSpec::mild_clutter();
  DomainSpec target = DomainSpec::heavy_clutter();
  std::size_t images_per_domain = 200;
  SplitRatios split_ratios;
  TrainConfig pretrain_config;
  TrainConfig train_config;
  ApConfig ap_config;
  XaiEvalConfig xai_config;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string out_dir = "experiment_out";

  void validate() const;
};

// Desk-scale defaults: minutes of CPU, small images, few epochs.
ExperimentSpec default_experiment_spec();
ExperimentSpec read_experiment_spec(const std::string& path);
void write_experiment_spec(const ExperimentSpec& spec,
                           const std::string& path);

// Stable hexadecimal digest of the canonical spec serialization.
std::string config_hash(const ExperimentSpec& spec);

// Metrics of one trained model on the target test split. AL/TKI are
// undefined (xai_defined == false) when no detection could be explained.
struct RunMetrics {
  double ap = 0.0;  // mean AP in [0, 1]
  bool xai_defined = false;
  MetricSummary al;
  MetricSummary tki;
  std::size_t detections = 0;
  std::size_t matched = 0;
  std::size_t evaluated = 0;
  std::size_t skipped_no_relevance = 0;
};

// Fixed run labels, in report order.
inline constexpr const char* kRegimeSection = "transfer_regime";
inline constexpr const char* kCompositionSection = "data_composition";
inline constexpr std::array<const char*, 3> kRegimeLabels = {
    "freeze_backbone", "no_pretrain", "fine_tune_all"};
inline constexpr std::array<const char*, 3> kCompositionLabels = {
    "target_only", "target_plus_auxiliary", "all_training_sets"};

struct SeedResults {
  std::uint64_t seed = 0;
  // Keys are "<section>/<label>"; insertion order is the report order.
  std::vector<std::pair<std::string, RunMetrics>> runs;
};

// Evaluates one model: AP over all raw detections, AL/TKI over explained
// matched detections per the XAI config.
RunMetrics evaluate_model(const ModelParams& params,
                          const DatasetBundle& test_set,
                          const ExperimentSpec& spec);

// Runs the full per-seed schedule: dataset generation, pretraining, the
// three regimes, the three compositions. Deterministic per (spec, seed).
SeedResults run_seed(const ExperimentSpec& spec, std::uint64_t seed);

struct ReportRow {
  std::string section;
  std::string label;
  double ap = 0.0;  // median over seeds, in [0, 1]
  bool xai_defined = false;
  double al_mean = 0.0;
  double al_variance = 0.0;
  double tki_mean = 0.0;
  double tki_variance = 0.0;
  std::size_t detections = 0;
  std::size_t matched = 0;
  std::size_t evaluated = 0;
  std::size_t skipped_no_relevance = 0;
};

struct Report {
  std::string toolkit_version;
  std::string config_hash;
  std::vector<std::uint64_t> seeds;
  std::vector<ReportRow> rows;
};

// Median aggregation across seeds (metric medians over the seeds where the
// value is defined; counts use the lower median).
Report aggregate_report(const ExperimentSpec& spec,
                        const std::vector<SeedResults>& results);

// End-to-end driver. Writes spec.json, raw/seed_<s>.json after each seed,
// and report.{json,md,csv} under spec.out_dir; completed files stay on disk
// if a later stage fails. Progress goes to stderr.
Report run_experiment(const ExperimentSpec& spec);

Report load_report(const std::string& path);

// format is "json", "md", or "csv".
std::string render_report(const Report& report, const std::string& format);

}  // namespace xdeval

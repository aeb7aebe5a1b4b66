#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xdeval/average_precision.hpp"
#include "xdeval/experiment.hpp"
#include "xdeval/localization.hpp"

namespace xdeval::cli {

// All commands throw the toolkit's typed errors; run_cli maps them to exit
// codes (0 success, 2 validation/input, 3 undefined metric, 1 otherwise).

// Generates, splits, and writes all three domains of `spec` under
// out_dir/<domain>/<train|val|test>.
void cmd_synth(const ExperimentSpec& spec, std::uint64_t seed,
               const std::string& out_dir);

// Pretrains on the source domain and writes the backbone checkpoint.
void cmd_pretrain(const ExperimentSpec& spec, std::uint64_t seed,
                  const std::string& out_path);

// Trains on bundle directories and writes a full model checkpoint.
void cmd_train(const std::string& train_dir, const std::string& val_dir,
               const ExperimentSpec& spec, std::uint64_t seed,
               TransferRegime regime,
               const std::optional<std::string>& backbone_path,
               const std::string& out_path);

// Runs the detector over a bundle and writes a detections file.
void cmd_predict(const std::string& model_path, const std::string& bundle_dir,
                 double score_threshold, const std::string& out_path);

// Writes one NPY attribution grid per detection plus a manifest; optional
// PGM heatmap exports alongside.
void cmd_explain(const std::string& model_path, const std::string& bundle_dir,
                 const std::string& detections_path,
                 const std::string& out_dir, bool write_pgm);

// Renders an ApReport in the requested format ("json", "md", or "csv").
std::string render_ap_report(const ApReport& report, const ApConfig& config,
                             const std::string& format);
void cmd_eval_ap(const std::string& annotations_path,
                 const std::string& detections_path, const ApConfig& config,
                 const std::string& format,
                 const std::optional<std::string>& out_path);

// Renders an XaiEvalResult in the requested format.
std::string render_xai_report(const XaiEvalResult& result,
                              const XaiEvalConfig& config,
                              const std::string& format);
void cmd_eval_xai(const std::string& annotations_path,
                  const std::string& detections_path,
                  const std::string& manifest_path,
                  const XaiEvalConfig& config, const std::string& format,
                  const std::optional<std::string>& out_path);

// Full benchmark; prints the markdown report to stdout.
void cmd_experiment(ExperimentSpec spec,
                    const std::vector<std::uint64_t>& seed_override,
                    const std::optional<std::string>& out_override);

// Re-renders a stored report.json.
void cmd_report(const std::string& report_path, const std::string& format,
                const std::optional<std::string>& out_path);

// Parses argv, dispatches, and maps errors to exit codes.
int run_cli(int argc, const char* const* argv);

}  // namespace xdeval::cli

#include "xdeval/cli_commands.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "json_util.hpp"
#include "xdeval/errors.hpp"
#include "xdeval/io_bundle.hpp"
#include "xdeval/io_checkpoint.hpp"
#include "xdeval/io_coco.hpp"
#include "xdeval/io_netpbm.hpp"
#include "xdeval/io_npy.hpp"
#include "xdeval/model.hpp"
#include "xdeval/synth.hpp"
#include "xdeval/training.hpp"
#include "xdeval/version.hpp"

namespace xdeval::cli {

namespace {

namespace fs = std::filesystem;
using jsonio::ordered_json;

struct DomainSeeds {
  const DomainSpec* domain;
  std::uint64_t generate_tag;
  std::uint64_t split_tag;
};

// The same derived streams the experiment driver uses, so bundles written
// by `synth` are exactly what `experiment` trains on for that seed.
std::array<DomainSeeds, 3> domain_seeds(const ExperimentSpec& spec) {
  return {DomainSeeds{&spec.source, 11, 21},
          DomainSeeds{&spec.auxiliary, 12, 22},
          DomainSeeds{&spec.target, 13, 23}};
}

SplitResult make_split(const ExperimentSpec& spec, const DomainSeeds& ds,
                       std::uint64_t seed) {
  const DatasetBundle bundle = generate(*ds.domain, spec.images_per_domain,
                                        derive_seed(seed, ds.generate_tag));
  return split(bundle, spec.split_ratios, derive_seed(seed, ds.split_tag));
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string shortest(double v) { return ordered_json(v).dump(); }

void emit(const std::string& text, const std::optional<std::string>& out) {
  std::cout << text;
  if (out) {
    std::ofstream f(*out, std::ios::binary | std::ios::trunc);
    f << text;
    if (!f) throw FormatError("failed writing " + *out);
  }
}

ordered_json summary_to_json(const MetricSummary& s) {
  return {{"mean", s.mean},
          {"variance", s.variance},
          {"std", s.std},
          {"count", s.count}};
}

}  // namespace

void cmd_synth(const ExperimentSpec& spec, std::uint64_t seed,
               const std::string& out_dir) {
  spec.validate();
  for (const DomainSeeds& ds : domain_seeds(spec)) {
    const SplitResult splits = make_split(spec, ds, seed);
    const fs::path base = fs::path(out_dir) / ds.domain->name;
    const std::array<std::pair<const char*, const DatasetBundle*>, 3> parts = {
        {{"train", &splits.train}, {"val", &splits.val}, {"test", &splits.test}}};
    for (const auto& [name, bundle] : parts) {
      const std::string dir = (base / name).string();
      write_bundle(*bundle, dir);
      std::cout << ds.domain->name << "/" << name << ": " << bundle->size()
                << " images -> " << dir << "\n";
    }
  }
}

void cmd_pretrain(const ExperimentSpec& spec, std::uint64_t seed,
                  const std::string& out_path) {
  spec.validate();
  const SplitResult source = make_split(spec, domain_seeds(spec)[0], seed);
  TrainConfig config = spec.pretrain_config;
  config.seed = seed;
  const BackboneWeights backbone =
      pretrain(source.train, source.val, config);
  save_backbone(backbone, out_path);
  std::cout << "pretrained backbone on " << spec.source.name << " ("
            << source.train.size() << " train / " << source.val.size()
            << " val images, " << config.epochs << " epochs) -> " << out_path
            << "\n";
}

void cmd_train(const std::string& train_dir, const std::string& val_dir,
               const ExperimentSpec& spec, std::uint64_t seed,
               TransferRegime regime,
               const std::optional<std::string>& backbone_path,
               const std::string& out_path) {
  const DatasetBundle train_set = read_bundle(train_dir);
  const DatasetBundle val_set = read_bundle(val_dir);
  TrainConfig config = spec.train_config;
  config.seed = seed;
  config.regime = regime;
  std::optional<BackboneWeights> backbone;
  if (backbone_path) backbone = load_backbone(*backbone_path);
  if (regime != TransferRegime::kNoPretrain && !backbone) {
    throw ValidationError(std::string(transfer_regime_name(regime)) +
                          " needs pretrained weights; pass --backbone");
  }
  const TrainResult result = train(train_set, val_set, config,
                                   backbone ? &*backbone : nullptr);
  save_checkpoint(result.params, out_path);
  std::cout << "trained " << transfer_regime_name(regime) << " for "
            << result.history.size() << " epochs";
  if (!result.history.empty()) {
    const EpochStats& last = result.history.back();
    std::cout << " (final train loss " << fixed(last.train_loss, 4)
              << ", val loss " << fixed(last.val_loss, 4) << ", val accuracy "
              << fixed(accuracy(result.params, val_set), 3) << ")";
  }
  std::cout << " -> " << out_path << "\n";
}

void cmd_predict(const std::string& model_path, const std::string& bundle_dir,
                 double score_threshold, const std::string& out_path) {
  const ModelParams params = load_checkpoint(model_path);
  const DatasetBundle bundle = read_bundle(bundle_dir);
  const std::vector<Detection> detections =
      predict_bundle(params, bundle, score_threshold);
  write_detections(detections, out_path);
  std::cout << detections.size() << " detections over " << bundle.size()
            << " images -> " << out_path << "\n";
}

void cmd_explain(const std::string& model_path, const std::string& bundle_dir,
                 const std::string& detections_path,
                 const std::string& out_dir, bool write_pgm) {
  const ModelParams params = load_checkpoint(model_path);
  const DatasetBundle bundle = read_bundle(bundle_dir);
  const std::vector<Detection> detections = read_detections(detections_path);

  std::map<std::int64_t, std::size_t> index_of;
  for (std::size_t i = 0; i < bundle.ground_truths.size(); ++i) {
    index_of[bundle.ground_truths[i].image_id] = i;
  }
  fs::create_directories(out_dir);
  AttributionManifest manifest;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const Detection& det = detections[i];
    const auto it = index_of.find(det.image_id);
    if (it == index_of.end()) {
      throw IntegrityError("detection " + std::to_string(i) +
                           " references image id " +
                           std::to_string(det.image_id) +
                           " absent from the bundle");
    }
    if (det.category_id < 1 || det.category_id > kNumClasses) {
      throw IntegrityError("detection " + std::to_string(i) +
                           " has category id " +
                           std::to_string(det.category_id) +
                           " outside 1.." + std::to_string(kNumClasses));
    }
    const Grid grid =
        grad_cam(params, bundle.images[it->second], det.category_id - 1);
    char name[32];
    std::snprintf(name, sizeof name, "grid_%06zu.npy", i);
    write_grid(grid, (fs::path(out_dir) / name).string());
    if (write_pgm) {
      std::snprintf(name, sizeof name, "heatmap_%06zu.pgm", i);
      write_heatmap_pgm(grid, (fs::path(out_dir) / name).string());
    }
    std::snprintf(name, sizeof name, "grid_%06zu.npy", i);
    manifest.entries.push_back(
        AttributionEntry{i, det.image_id, det.category_id, name});
  }
  write_attribution_manifest(manifest,
                             (fs::path(out_dir) / "attributions.json").string());
  std::cout << "explained " << detections.size() << " detections -> "
            << out_dir << "\n";
}

std::string render_ap_report(const ApReport& report, const ApConfig& config,
                             const std::string& format) {
  if (format == "json") {
    ordered_json j;
    j["mean_ap"] = report.mean_ap;
    j["mean_ap_x100"] = report.mean_ap * 100.0;
    j["classes_evaluated"] = report.classes_evaluated;
    j["iou_thresholds"] = config.iou_thresholds;
    j["per_class"] = ordered_json::array();
    for (std::size_t i = 0; i < report.class_ids.size(); ++i) {
      j["per_class"].push_back({{"category_id", report.class_ids[i]},
                                {"ap", report.class_ap[i]},
                                {"cap", report.cap[i]}});
    }
    return j.dump(2) + "\n";
  }
  if (format == "md") {
    std::string out = "| Class | AP ↑ |\n|---|---|\n";
    for (std::size_t i = 0; i < report.class_ids.size(); ++i) {
      out += "| " + std::to_string(report.class_ids[i]) + " | " +
             fixed(report.class_ap[i] * 100.0, 1) + " |\n";
    }
    out += "| **mAP** | **" + fixed(report.mean_ap * 100.0, 1) + "** |\n";
    return out;
  }
  if (format == "csv") {
    std::string out = "category_id,ap\n";
    for (std::size_t i = 0; i < report.class_ids.size(); ++i) {
      out += std::to_string(report.class_ids[i]) + "," +
             shortest(report.class_ap[i]) + "\n";
    }
    out += "all," + shortest(report.mean_ap) + "\n";
    return out;
  }
  throw ValidationError("unknown report format: " + format +
                        " (expected json, md, or csv)");
}

void cmd_eval_ap(const std::string& annotations_path,
                 const std::string& detections_path, const ApConfig& config,
                 const std::string& format,
                 const std::optional<std::string>& out_path) {
  const AnnotationSet annotations = read_annotations(annotations_path);
  const std::vector<Detection> detections = read_detections(detections_path);
  const ApReport report =
      mean_ap(detections, annotations.ground_truths(), config);
  emit(render_ap_report(report, config, format), out_path);
}

std::string render_xai_report(const XaiEvalResult& result,
                              const XaiEvalConfig& config,
                              const std::string& format) {
  if (format == "json") {
    ordered_json j;
    j["al"] = summary_to_json(result.al);
    j["tki"] = summary_to_json(result.tki);
    j["matched"] = result.matched;
    j["evaluated"] = result.evaluated;
    j["skipped_no_relevance"] = result.skipped_no_relevance;
    j["match_iou"] = config.match_iou;
    j["score_threshold"] = config.score_threshold;
    j["k"] = config.k;
    j["per_class"] = ordered_json::object();
    for (const auto& [class_id, summary] : result.per_class) {
      j["per_class"][std::to_string(class_id)] = {
          {"al", summary_to_json(summary.al)},
          {"tki", summary_to_json(summary.tki)},
          {"evaluated", summary.evaluated},
          {"skipped_no_relevance", summary.skipped_no_relevance}};
    }
    return j.dump(2) + "\n";
  }
  if (format == "md") {
    std::string out =
        "| Class | AL ↑ | TKI ↑ | Evaluated | Skipped |\n|---|---|---|---|---|\n";
    for (const auto& [class_id, s] : result.per_class) {
      out += "| " + std::to_string(class_id) + " | " + fixed(s.al.mean, 3) +
             " ± " + fixed(s.al.variance, 3) + " | " + fixed(s.tki.mean, 3) +
             " ± " + fixed(s.tki.variance, 3) + " | " +
             std::to_string(s.evaluated) + " | " +
             std::to_string(s.skipped_no_relevance) + " |\n";
    }
    out += "| **all** | **" + fixed(result.al.mean, 3) + " ± " +
           fixed(result.al.variance, 3) + "** | **" +
           fixed(result.tki.mean, 3) + " ± " + fixed(result.tki.variance, 3) +
           "** | " + std::to_string(result.evaluated) + " | " +
           std::to_string(result.skipped_no_relevance) + " |\n";
    return out;
  }
  if (format == "csv") {
    std::string out =
        "class,al_mean,al_variance,tki_mean,tki_variance,evaluated,"
        "skipped_no_relevance\n";
    for (const auto& [class_id, s] : result.per_class) {
      out += std::to_string(class_id) + "," + shortest(s.al.mean) + "," +
             shortest(s.al.variance) + "," + shortest(s.tki.mean) + "," +
             shortest(s.tki.variance) + "," + std::to_string(s.evaluated) +
             "," + std::to_string(s.skipped_no_relevance) + "\n";
    }
    out += "all," + shortest(result.al.mean) + "," +
           shortest(result.al.variance) + "," + shortest(result.tki.mean) +
           "," + shortest(result.tki.variance) + "," +
           std::to_string(result.evaluated) + "," +
           std::to_string(result.skipped_no_relevance) + "\n";
    return out;
  }
  throw ValidationError("unknown report format: " + format +
                        " (expected json, md, or csv)");
}

void cmd_eval_xai(const std::string& annotations_path,
                  const std::string& detections_path,
                  const std::string& manifest_path,
                  const XaiEvalConfig& config, const std::string& format,
                  const std::optional<std::string>& out_path) {
  const AnnotationSet annotations = read_annotations(annotations_path);
  const std::vector<Detection> detections = read_detections(detections_path);
  const AttributionManifest manifest =
      read_attribution_manifest(manifest_path);
  const fs::path base = fs::path(manifest_path).parent_path();

  std::vector<ExplainedDetection> explained;
  for (const AttributionEntry& entry : manifest.entries) {
    if (entry.detection_index >= detections.size()) {
      throw IntegrityError("attribution entry references detection " +
                           std::to_string(entry.detection_index) +
                           " but the detections file has only " +
                           std::to_string(detections.size()));
    }
    const Detection& det = detections[entry.detection_index];
    if (det.image_id != entry.image_id ||
        det.category_id != entry.category_id) {
      throw IntegrityError(
          "attribution entry " + std::to_string(entry.detection_index) +
          " disagrees with the detections file about image or category");
    }
    explained.push_back(ExplainedDetection{
        det, read_grid((base / entry.grid_path).string())});
  }
  const XaiEvalResult result =
      evaluate_explanations(explained, annotations.ground_truths(), config);
  emit(render_xai_report(result, config, format), out_path);
}

void cmd_experiment(ExperimentSpec spec,
                    const std::vector<std::uint64_t>& seed_override,
                    const std::optional<std::string>& out_override) {
  if (!seed_override.empty()) spec.seeds = seed_override;
  if (out_override) spec.out_dir = *out_override;
  const Report report = run_experiment(spec);
  std::cout << render_report(report, "md");
  std::cerr << "[experiment] report written under " << spec.out_dir << "\n";
}

void cmd_report(const std::string& report_path, const std::string& format,
                const std::optional<std::string>& out_path) {
  emit(render_report(load_report(report_path), format), out_path);
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{
      "Evaluation toolkit for explainable object detection: COCO-style AP, "
      "attribution-localization metrics, a micro detector with GradCAM, and "
      "a synthetic domain-shift benchmark."};
  app.set_version_flag("--version", std::string("xdeval ") + kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "json";
  double score_threshold = 0.5;
  double iou = 0.5;
  std::size_t k = 1000;

  const auto load_spec = [&]() {
    return config_path.empty() ? default_experiment_spec()
                               : read_experiment_spec(config_path);
  };

  // synth
  CLI::App* synth = app.add_subcommand(
      "synth", "Generate the three synthetic domains and write bundles");
  synth->add_option("--config", config_path, "Experiment spec JSON");
  synth->add_option("--seed", seed, "Dataset seed")->capture_default_str();
  synth->add_option("--out", out, "Output directory")->required();
  synth->callback([&]() { cmd_synth(load_spec(), seed, out); });

  // pretrain
  CLI::App* pre = app.add_subcommand(
      "pretrain", "Pretrain on the source domain and save the backbone");
  pre->add_option("--config", config_path, "Experiment spec JSON");
  pre->add_option("--seed", seed, "Run seed")->capture_default_str();
  pre->add_option("--out", out, "Backbone checkpoint path")->required();
  pre->callback([&]() { cmd_pretrain(load_spec(), seed, out); });

  // train
  std::string train_dir, val_dir, regime_name = "fine_tune_all";
  std::string backbone_path;
  CLI::App* tr = app.add_subcommand(
      "train", "Train a detector on bundle directories and save it");
  tr->add_option("train_bundle", train_dir, "Training bundle directory")
      ->required();
  tr->add_option("val_bundle", val_dir, "Validation bundle directory")
      ->required();
  tr->add_option("--config", config_path, "Experiment spec JSON");
  tr->add_option("--seed", seed, "Run seed")->capture_default_str();
  tr->add_option("--regime", regime_name,
                 "freeze_backbone | no_pretrain | fine_tune_all")
      ->capture_default_str();
  tr->add_option("--backbone", backbone_path,
                 "Pretrained backbone checkpoint");
  tr->add_option("--out", out, "Model checkpoint path")->required();
  tr->callback([&]() {
    cmd_train(train_dir, val_dir, load_spec(), seed,
              transfer_regime_from_name(regime_name),
              backbone_path.empty()
                  ? std::nullopt
                  : std::optional<std::string>(backbone_path),
              out);
  });

  // predict
  std::string model_path, bundle_dir;
  CLI::App* pred = app.add_subcommand(
      "predict", "Run the detector over a bundle and write detections");
  pred->add_option("model", model_path, "Model checkpoint")->required();
  pred->add_option("bundle", bundle_dir, "Bundle directory")->required();
  pred->add_option("--score-threshold", score_threshold,
                   "Drop detections scoring below this")
      ->capture_default_str();
  pred->add_option("--out", out, "Detections JSON path")->required();
  pred->callback(
      [&]() { cmd_predict(model_path, bundle_dir, score_threshold, out); });

  // explain
  std::string detections_path;
  bool write_pgm = false;
  CLI::App* exp = app.add_subcommand(
      "explain", "Write GradCAM grids and a manifest for detections");
  exp->add_option("model", model_path, "Model checkpoint")->required();
  exp->add_option("bundle", bundle_dir, "Bundle directory")->required();
  exp->add_option("detections", detections_path, "Detections JSON")
      ->required();
  exp->add_option("--out", out, "Output directory")->required();
  exp->add_flag("--pgm", write_pgm, "Also export PGM heatmaps");
  exp->callback([&]() {
    cmd_explain(model_path, bundle_dir, detections_path, out, write_pgm);
  });

  // eval-ap
  std::string annotations_path;
  std::vector<double> iou_list;
  CLI::App* eap = app.add_subcommand(
      "eval-ap", "COCO-style average precision of detections vs annotations");
  eap->add_option("annotations", annotations_path, "Annotation JSON")
      ->required();
  eap->add_option("detections", detections_path, "Detections JSON")
      ->required();
  eap->add_option("--iou", iou_list,
                  "IoU threshold(s); default 0.50:0.05:0.95");
  eap->add_option("--format", format, "json | md | csv")
      ->capture_default_str();
  eap->add_option("--out", out, "Also write the rendering here");
  eap->callback([&]() {
    ApConfig config;
    if (!iou_list.empty()) config.iou_thresholds = iou_list;
    cmd_eval_ap(annotations_path, detections_path, config, format,
                out.empty() ? std::nullopt : std::optional<std::string>(out));
  });

  // eval-xai
  std::string manifest_path;
  CLI::App* exai = app.add_subcommand(
      "eval-xai", "Attribution localization and top-k intersection metrics");
  exai->add_option("annotations", annotations_path, "Annotation JSON")
      ->required();
  exai->add_option("detections", detections_path, "Detections JSON")
      ->required();
  exai->add_option("manifest", manifest_path, "Attribution manifest JSON")
      ->required();
  exai->add_option("--iou", iou, "Detection-to-GT match IoU")
      ->capture_default_str();
  exai->add_option("--score-threshold", score_threshold,
                   "Only explain detections scoring at least this")
      ->capture_default_str();
  exai->add_option("--k", k, "Top-k pixel count")->capture_default_str();
  exai->add_option("--format", format, "json | md | csv")
      ->capture_default_str();
  exai->add_option("--out", out, "Also write the rendering here");
  exai->callback([&]() {
    XaiEvalConfig config;
    config.match_iou = iou;
    config.score_threshold = score_threshold;
    config.k = k;
    cmd_eval_xai(annotations_path, detections_path, manifest_path, config,
                 format,
                 out.empty() ? std::nullopt : std::optional<std::string>(out));
  });

  // experiment
  std::vector<std::uint64_t> seeds;
  CLI::App* expr = app.add_subcommand(
      "experiment", "Run the full multi-seed benchmark and write reports");
  expr->add_option("--config", config_path, "Experiment spec JSON");
  expr->add_option("--seed", seeds, "Override the spec's seed list");
  expr->add_option("--out", out, "Override the spec's output directory");
  expr->callback([&]() {
    cmd_experiment(load_spec(), seeds,
                   out.empty() ? std::nullopt
                               : std::optional<std::string>(out));
  });

  // report
  std::string report_path;
  CLI::App* rep = app.add_subcommand(
      "report", "Re-render a stored report.json as json, md, or csv");
  rep->add_option("report_json", report_path, "Path to report.json")
      ->required();
  rep->add_option("--format", format, "json | md | csv")
      ->capture_default_str();
  rep->add_option("--out", out, "Also write the rendering here");
  rep->callback([&]() {
    cmd_report(report_path, format,
               out.empty() ? std::nullopt : std::optional<std::string>(out));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the message
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const UndefinedMetric& e) {
    std::cerr << "undefined metric: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace xdeval::cli

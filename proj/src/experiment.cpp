#include "xdeval/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "domain_json.hpp"
#include "json_util.hpp"
#include "xdeval/errors.hpp"
#include "xdeval/version.hpp"

namespace xdeval {

namespace {

namespace fs = std::filesystem;
using jsonio::dump_to_file;
using jsonio::ordered_json;
using jsonio::parse_file;

const char* target_mode_name(TargetMode mode) {
  return mode == TargetMode::kMatchedBox ? "matched_box"
                                         : "union_of_class_boxes";
}

TargetMode target_mode_from_name(const std::string& name) {
  if (name == "matched_box") return TargetMode::kMatchedBox;
  if (name == "union_of_class_boxes") return TargetMode::kUnionOfClassBoxes;
  throw ValidationError("unknown target mode: " + name);
}

ordered_json train_config_to_json(const TrainConfig& config) {
  ordered_json j;
  j["epochs"] = config.epochs;
  j["batch_size"] = config.batch_size;
  j["augmentation"] = config.augmentation;
  j["lr"] = config.lr;
  return j;
}

TrainConfig train_config_from_json(const ordered_json& j,
                                   const TrainConfig& defaults,
                                   const std::string& context) {
  if (!j.is_object()) {
    throw IntegrityError(context + ": training config must be an object");
  }
  TrainConfig config = defaults;
  try {
    config.epochs = j.value("epochs", config.epochs);
    config.batch_size = j.value("batch_size", config.batch_size);
    config.augmentation = j.value("augmentation", config.augmentation);
    config.lr = j.value("lr", config.lr);
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(context + ": " + e.what());
  }
  config.validate();
  return config;
}

ordered_json spec_to_json(const ExperimentSpec& spec) {
  ordered_json j;
  j["source"] = jsonio::domain_to_json(spec.source);
  j["auxiliary"] = jsonio::domain_to_json(spec.auxiliary);
  j["target"] = jsonio::domain_to_json(spec.target);
  j["images_per_domain"] = spec.images_per_domain;
  j["split"] = {{"train", spec.split_ratios.train},
                {"val", spec.split_ratios.val},
                {"test", spec.split_ratios.test}};
  j["pretrain"] = train_config_to_json(spec.pretrain_config);
  j["train"] = train_config_to_json(spec.train_config);
  j["ap"] = {{"iou_thresholds", spec.ap_config.iou_thresholds},
             {"recall_samples", spec.ap_config.recall_samples},
             {"max_detections_per_image",
              spec.ap_config.max_detections_per_image}};
  j["xai"] = {{"match_iou", spec.xai_config.match_iou},
              {"score_threshold", spec.xai_config.score_threshold},
              {"k", spec.xai_config.k},
              {"target_mode", target_mode_name(spec.xai_config.target_mode)}};
  j["seeds"] = spec.seeds;
  j["out_dir"] = spec.out_dir;
  return j;
}

ExperimentSpec spec_from_json(const ordered_json& j,
                              const std::string& context) {
  if (!j.is_object()) {
    throw IntegrityError(context + ": experiment spec must be an object");
  }
  // Absent fields inherit the documented defaults, so a spec file only
  // needs to name what it overrides.
  ExperimentSpec spec = default_experiment_spec();
  try {
    if (j.contains("source")) {
      spec.source = jsonio::domain_from_json(j["source"], context);
    }
    if (j.contains("auxiliary")) {
      spec.auxiliary = jsonio::domain_from_json(j["auxiliary"], context);
    }
    if (j.contains("target")) {
      spec.target = jsonio::domain_from_json(j["target"], context);
    }
    spec.images_per_domain =
        j.value("images_per_domain", spec.images_per_domain);
    if (j.contains("split")) {
      const ordered_json& s = j["split"];
      spec.split_ratios.train = s.value("train", spec.split_ratios.train);
      spec.split_ratios.val = s.value("val", spec.split_ratios.val);
      spec.split_ratios.test = s.value("test", spec.split_ratios.test);
    }
    if (j.contains("pretrain")) {
      spec.pretrain_config = train_config_from_json(
          j["pretrain"], spec.pretrain_config, context);
    }
    if (j.contains("train")) {
      spec.train_config =
          train_config_from_json(j["train"], spec.train_config, context);
    }
    if (j.contains("ap")) {
      const ordered_json& a = j["ap"];
      if (a.contains("iou_thresholds")) {
        spec.ap_config.iou_thresholds =
            a["iou_thresholds"].get<std::vector<double>>();
      }
      spec.ap_config.recall_samples =
          a.value("recall_samples", spec.ap_config.recall_samples);
      spec.ap_config.max_detections_per_image = a.value(
          "max_detections_per_image", spec.ap_config.max_detections_per_image);
    }
    if (j.contains("xai")) {
      const ordered_json& x = j["xai"];
      spec.xai_config.match_iou =
          x.value("match_iou", spec.xai_config.match_iou);
      spec.xai_config.score_threshold =
          x.value("score_threshold", spec.xai_config.score_threshold);
      spec.xai_config.k = x.value("k", spec.xai_config.k);
      if (x.contains("target_mode")) {
        spec.xai_config.target_mode =
            target_mode_from_name(x["target_mode"].get<std::string>());
      }
    }
    if (j.contains("seeds")) {
      spec.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    }
    spec.out_dir = j.value("out_dir", spec.out_dir);
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(context + ": " + e.what());
  }
  spec.validate();
  return spec;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t hash = 1469598103934665603ull;
  for (const char c : text) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 1099511628211ull;
  }
  return hash;
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

std::size_t lower_median(std::vector<std::size_t> values) {
  std::sort(values.begin(), values.end());
  return values[(values.size() - 1) / 2];
}

DatasetBundle concat_bundles(std::vector<const DatasetBundle*> parts) {
  DatasetBundle out;
  out.domain = parts.front()->domain;
  out.seed = parts.front()->seed;
  for (const DatasetBundle* part : parts) {
    out.images.insert(out.images.end(), part->images.begin(),
                      part->images.end());
    out.ground_truths.insert(out.ground_truths.end(),
                             part->ground_truths.begin(),
                             part->ground_truths.end());
  }
  return out;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Shortest decimal text that round-trips the exact double.
std::string shortest(double v) { return ordered_json(v).dump(); }

ordered_json metrics_to_json(const RunMetrics& m) {
  ordered_json j;
  j["ap"] = m.ap;
  j["xai_defined"] = m.xai_defined;
  if (m.xai_defined) {
    j["al_mean"] = m.al.mean;
    j["al_variance"] = m.al.variance;
    j["tki_mean"] = m.tki.mean;
    j["tki_variance"] = m.tki.variance;
  } else {
    j["al_mean"] = nullptr;
    j["al_variance"] = nullptr;
    j["tki_mean"] = nullptr;
    j["tki_variance"] = nullptr;
  }
  j["detections"] = m.detections;
  j["matched"] = m.matched;
  j["evaluated"] = m.evaluated;
  j["skipped_no_relevance"] = m.skipped_no_relevance;
  return j;
}

ordered_json report_to_json(const Report& report) {
  ordered_json j;
  j["toolkit_version"] = report.toolkit_version;
  j["config_hash"] = report.config_hash;
  j["seeds"] = report.seeds;
  j["rows"] = ordered_json::array();
  for (const ReportRow& row : report.rows) {
    ordered_json r;
    r["section"] = row.section;
    r["label"] = row.label;
    r["ap"] = row.ap;
    r["xai_defined"] = row.xai_defined;
    if (row.xai_defined) {
      r["al_mean"] = row.al_mean;
      r["al_variance"] = row.al_variance;
      r["tki_mean"] = row.tki_mean;
      r["tki_variance"] = row.tki_variance;
    } else {
      r["al_mean"] = nullptr;
      r["al_variance"] = nullptr;
      r["tki_mean"] = nullptr;
      r["tki_variance"] = nullptr;
    }
    r["detections"] = row.detections;
    r["matched"] = row.matched;
    r["evaluated"] = row.evaluated;
    r["skipped_no_relevance"] = row.skipped_no_relevance;
    j["rows"].push_back(std::move(r));
  }
  return j;
}

std::string render_markdown(const Report& report) {
  std::string out;
  out += "# Benchmark report\n\n";
  out += "- Toolkit version: " + report.toolkit_version + "\n";
  out += "- Config hash: " + report.config_hash + "\n";
  out += "- Seeds: ";
  for (std::size_t i = 0; i < report.seeds.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(report.seeds[i]);
  }
  out += " (metrics are medians across seeds)\n";

  const auto emit_section = [&](const std::string& section,
                                const std::string& title) {
    out += "\n## " + title + "\n\n";
    out +=
        "| Run | AP ↑ | AL ↑ | TKI ↑ | Detections | Matched | Evaluated | "
        "Skipped |\n";
    out += "|---|---|---|---|---|---|---|---|\n";
    for (const ReportRow& row : report.rows) {
      if (row.section != section) continue;
      out += "| " + row.label + " | " + fixed(row.ap * 100.0, 1) + " | ";
      if (row.xai_defined) {
        out += fixed(row.al_mean, 3) + " ± " + fixed(row.al_variance, 3) +
               " | " + fixed(row.tki_mean, 3) + " ± " +
               fixed(row.tki_variance, 3);
      } else {
        out += "- | -";
      }
      out += " | " + std::to_string(row.detections) + " | " +
             std::to_string(row.matched) + " | " +
             std::to_string(row.evaluated) + " | " +
             std::to_string(row.skipped_no_relevance) + " |\n";
    }
  };
  emit_section(kRegimeSection, "Transfer regimes");
  emit_section(kCompositionSection, "Training-data compositions");

  out +=
      "\nAP is shown ×100; AL and TKI are mean ± population variance over "
      "explained detections on the target test split.\n\n";
  out +=
      "Literature reference for a full-scale detector (Liu et al., "
      "\"Explainable AI in Grassland Monitoring\", Tab. 2, fine-tuning row): "
      "AP 66.4, AL 0.828 ± 0.05, TKI 0.899 ± 0.08 — shown for context only, "
      "not an expected value.\n";
  return out;
}

std::string render_csv(const Report& report) {
  std::string out =
      "section,label,ap,al_mean,al_variance,tki_mean,tki_variance,"
      "detections,matched,evaluated,skipped_no_relevance\n";
  for (const ReportRow& row : report.rows) {
    out += row.section + "," + row.label + "," + shortest(row.ap) + ",";
    if (row.xai_defined) {
      out += shortest(row.al_mean) + "," + shortest(row.al_variance) + "," +
             shortest(row.tki_mean) + "," + shortest(row.tki_variance);
    } else {
      out += ",,,";
    }
    out += "," + std::to_string(row.detections) + "," +
           std::to_string(row.matched) + "," + std::to_string(row.evaluated) +
           "," + std::to_string(row.skipped_no_relevance) + "\n";
  }
  return out;
}

}  // namespace

void ExperimentSpec::validate() const {
  source.validate();
  auxiliary.validate();
  target.validate();
  split_ratios.validate();
  pretrain_config.validate();
  train_config.validate();
  ap_config.validate();
  xai_config.validate();
  if (seeds.empty()) {
    throw ValidationError("experiment spec needs at least one seed");
  }
  if (images_per_domain < 5) {
    throw ValidationError("images_per_domain must be at least 5");
  }
  if (out_dir.empty()) {
    throw ValidationError("experiment spec needs an output directory");
  }
}

ExperimentSpec default_experiment_spec() {
  ExperimentSpec spec;
  spec.images_per_domain = 200;
  spec.pretrain_config.epochs = 12;
  spec.pretrain_config.batch_size = 16;
  spec.train_config.epochs = 18;
  spec.train_config.batch_size = 16;
  // Rank every raw detection for AP; explain everything the matcher can use.
  spec.xai_config.score_threshold = 0.0;
  return spec;
}

ExperimentSpec read_experiment_spec(const std::string& path) {
  return spec_from_json(parse_file(path), path);
}

void write_experiment_spec(const ExperimentSpec& spec,
                           const std::string& path) {
  dump_to_file(spec_to_json(spec), path);
}

std::string config_hash(const ExperimentSpec& spec) {
  // The output directory does not influence results, so it is excluded.
  ordered_json j = spec_to_json(spec);
  j.erase("out_dir");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(j.dump())));
  return buf;
}

RunMetrics evaluate_model(const ModelParams& params,
                          const DatasetBundle& test_set,
                          const ExperimentSpec& spec) {
  const std::vector<Detection> dets = predict_bundle(params, test_set, 0.0);
  const std::vector<GroundTruth>& gts = test_set.ground_truths;

  RunMetrics metrics;
  metrics.detections = dets.size();
  metrics.ap = mean_ap(dets, gts, spec.ap_config).mean_ap;

  std::map<std::int64_t, std::size_t> index_of;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    index_of[gts[i].image_id] = i;
  }
  std::vector<ExplainedDetection> explained;
  for (const Detection& det : dets) {
    if (det.score < spec.xai_config.score_threshold) continue;
    const Tensor& image = test_set.images[index_of.at(det.image_id)];
    explained.push_back(
        ExplainedDetection{det, grad_cam(params, image, det.category_id - 1)});
  }
  try {
    const XaiEvalResult xai =
        evaluate_explanations(explained, gts, spec.xai_config);
    metrics.xai_defined = true;
    metrics.al = xai.al;
    metrics.tki = xai.tki;
    metrics.matched = xai.matched;
    metrics.evaluated = xai.evaluated;
    metrics.skipped_no_relevance = xai.skipped_no_relevance;
  } catch (const NothingToExplain&) {
    metrics.xai_defined = false;
  }
  return metrics;
}

SeedResults run_seed(const ExperimentSpec& spec, std::uint64_t seed) {
  spec.validate();

  const auto make_split = [&](const DomainSpec& domain, std::uint64_t gen_tag,
                              std::uint64_t split_tag) {
    const DatasetBundle bundle =
        generate(domain, spec.images_per_domain, derive_seed(seed, gen_tag));
    return split(bundle, spec.split_ratios, derive_seed(seed, split_tag));
  };
  const SplitResult source = make_split(spec.source, 11, 21);
  const SplitResult auxiliary = make_split(spec.auxiliary, 12, 22);
  const SplitResult target = make_split(spec.target, 13, 23);

  std::cerr << "[experiment] seed " << seed << ": pretraining on "
            << spec.source.name << "\n";
  TrainConfig pretrain_config = spec.pretrain_config;
  pretrain_config.seed = seed;
  const BackboneWeights backbone =
      pretrain(source.train, source.val, pretrain_config);

  const auto train_eval = [&](TransferRegime regime,
                              const DatasetBundle& train_set,
                              const char* what) {
    std::cerr << "[experiment] seed " << seed << ": " << what << "\n";
    TrainConfig config = spec.train_config;
    config.seed = seed;
    config.regime = regime;
    const TrainResult trained =
        train(train_set, target.val, config,
              regime == TransferRegime::kNoPretrain ? nullptr : &backbone);
    return evaluate_model(trained.params, target.test, spec);
  };

  const RunMetrics freeze = train_eval(TransferRegime::kFreezeBackbone,
                                       target.train, "freeze_backbone");
  const RunMetrics scratch =
      train_eval(TransferRegime::kNoPretrain, target.train, "no_pretrain");
  const RunMetrics fine_tune = train_eval(TransferRegime::kFineTuneAll,
                                          target.train, "fine_tune_all");
  const DatasetBundle target_aux =
      concat_bundles({&target.train, &auxiliary.train});
  const RunMetrics fine_tune_aux = train_eval(
      TransferRegime::kFineTuneAll, target_aux, "target_plus_auxiliary");
  const DatasetBundle target_all =
      concat_bundles({&target.train, &auxiliary.train, &source.train});
  const RunMetrics fine_tune_all = train_eval(TransferRegime::kFineTuneAll,
                                              target_all, "all_training_sets");

  SeedResults results;
  results.seed = seed;
  const std::string regime_prefix = std::string(kRegimeSection) + "/";
  const std::string comp_prefix = std::string(kCompositionSection) + "/";
  results.runs.emplace_back(regime_prefix + kRegimeLabels[0], freeze);
  results.runs.emplace_back(regime_prefix + kRegimeLabels[1], scratch);
  results.runs.emplace_back(regime_prefix + kRegimeLabels[2], fine_tune);
  // The fine-tuned target-only model is shared by both tables.
  results.runs.emplace_back(comp_prefix + kCompositionLabels[0], fine_tune);
  results.runs.emplace_back(comp_prefix + kCompositionLabels[1],
                            fine_tune_aux);
  results.runs.emplace_back(comp_prefix + kCompositionLabels[2],
                            fine_tune_all);
  return results;
}

Report aggregate_report(const ExperimentSpec& spec,
                        const std::vector<SeedResults>& results) {
  if (results.empty()) {
    throw ValidationError("cannot aggregate an empty result set");
  }
  Report report;
  report.toolkit_version = kVersion;
  report.config_hash = config_hash(spec);
  for (const SeedResults& r : results) report.seeds.push_back(r.seed);

  const auto collect = [&](const std::string& key) {
    std::vector<const RunMetrics*> metrics;
    for (const SeedResults& r : results) {
      for (const auto& [label, m] : r.runs) {
        if (label == key) metrics.push_back(&m);
      }
    }
    if (metrics.size() != results.size()) {
      throw IntegrityError("seed results are missing run " + key);
    }
    return metrics;
  };

  const auto add_row = [&](const std::string& section,
                           const std::string& label) {
    const auto metrics = collect(section + "/" + label);
    ReportRow row;
    row.section = section;
    row.label = label;

    std::vector<double> aps;
    std::vector<double> al_means, al_vars, tki_means, tki_vars;
    std::vector<std::size_t> dets, matched, evaluated, skipped;
    for (const RunMetrics* m : metrics) {
      aps.push_back(m->ap);
      dets.push_back(m->detections);
      matched.push_back(m->matched);
      evaluated.push_back(m->evaluated);
      skipped.push_back(m->skipped_no_relevance);
      if (m->xai_defined) {
        al_means.push_back(m->al.mean);
        al_vars.push_back(m->al.variance);
        tki_means.push_back(m->tki.mean);
        tki_vars.push_back(m->tki.variance);
      }
    }
    row.ap = median(aps);
    row.xai_defined = !al_means.empty();
    if (row.xai_defined) {
      row.al_mean = median(al_means);
      row.al_variance = median(al_vars);
      row.tki_mean = median(tki_means);
      row.tki_variance = median(tki_vars);
    }
    row.detections = lower_median(dets);
    row.matched = lower_median(matched);
    row.evaluated = lower_median(evaluated);
    row.skipped_no_relevance = lower_median(skipped);
    report.rows.push_back(std::move(row));
  };

  for (const char* label : kRegimeLabels) add_row(kRegimeSection, label);
  for (const char* label : kCompositionLabels) {
    add_row(kCompositionSection, label);
  }
  return report;
}

Report run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  fs::create_directories(fs::path(spec.out_dir) / "raw");
  write_experiment_spec(spec, (fs::path(spec.out_dir) / "spec.json").string());

  std::vector<SeedResults> results;
  for (const std::uint64_t seed : spec.seeds) {
    SeedResults r = run_seed(spec, seed);
    ordered_json j;
    j["seed"] = r.seed;
    j["runs"] = ordered_json::object();
    for (const auto& [label, m] : r.runs) {
      j["runs"][label] = metrics_to_json(m);
    }
    dump_to_file(j, (fs::path(spec.out_dir) / "raw" /
                     ("seed_" + std::to_string(seed) + ".json"))
                        .string());
    results.push_back(std::move(r));
  }

  const Report report = aggregate_report(spec, results);
  const fs::path base(spec.out_dir);
  dump_to_file(report_to_json(report), (base / "report.json").string());
  std::ofstream md((base / "report.md").string(),
                   std::ios::binary | std::ios::trunc);
  md << render_markdown(report);
  std::ofstream csv((base / "report.csv").string(),
                    std::ios::binary | std::ios::trunc);
  csv << render_csv(report);
  if (!md || !csv) {
    throw FormatError("failed writing report files under " + spec.out_dir);
  }
  return report;
}

Report load_report(const std::string& path) {
  const ordered_json j = parse_file(path);
  if (!j.is_object() || !j.contains("rows") || !j["rows"].is_array()) {
    throw IntegrityError(path + ": not a report file");
  }
  Report report;
  try {
    report.toolkit_version = j.value("toolkit_version", std::string());
    report.config_hash = j.value("config_hash", std::string());
    if (j.contains("seeds")) {
      report.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    }
    for (const ordered_json& r : j["rows"]) {
      ReportRow row;
      row.section = r.at("section").get<std::string>();
      row.label = r.at("label").get<std::string>();
      row.ap = r.at("ap").get<double>();
      row.xai_defined = r.value("xai_defined", false);
      if (row.xai_defined) {
        row.al_mean = r.at("al_mean").get<double>();
        row.al_variance = r.at("al_variance").get<double>();
        row.tki_mean = r.at("tki_mean").get<double>();
        row.tki_variance = r.at("tki_variance").get<double>();
      }
      row.detections = r.value("detections", std::size_t{0});
      row.matched = r.value("matched", std::size_t{0});
      row.evaluated = r.value("evaluated", std::size_t{0});
      row.skipped_no_relevance =
          r.value("skipped_no_relevance", std::size_t{0});
      report.rows.push_back(std::move(row));
    }
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(path + ": " + e.what());
  }
  return report;
}

std::string render_report(const Report& report, const std::string& format) {
  if (format == "json") return report_to_json(report).dump(2) + "\n";
  if (format == "md") return render_markdown(report);
  if (format == "csv") return render_csv(report);
  throw ValidationError("unknown report format: " + format +
                        " (expected json, md, or csv)");
}

}  // namespace xdeval

#include "boxdistill/experiment.hpp"

#include <chrono>
#include <fstream>
#include <iostream>

#include "boxdistill/checkpoint.hpp"
#include "boxdistill/error.hpp"
#include "boxdistill/json_io.hpp"
#include "boxdistill/service.hpp"
#include "boxdistill/version.hpp"

namespace boxdistill {

namespace fs = std::filesystem;

fs::path checkpoint_path(const fs::path& out, const std::string& stage,
                         bool best) {
  return out / "checkpoints" / (stage + (best ? "_best" : "") + ".ckpt");
}
fs::path cache_path(const fs::path& out) {
  return out / "cache" / "pseudo_labels.plc";
}
fs::path stage_report_path(const fs::path& out, const std::string& stage) {
  return out / "reports" / ("stage_" + stage + ".json");
}
fs::path metrics_summary_path(const fs::path& out, bool table) {
  return out / "metrics" / (table ? "summary.txt" : "summary.json");
}

std::pair<DomainSplits, DomainSplits> prepare_data(const ExperimentConfig& c) {
  if (c.data.kind == "synthetic") {
    return generate_synthetic_pair(c.data.synthetic, c.data.n_train,
                                   c.data.n_test, c.data.image_size);
  }
  DomainSplits source, target;
  source.train = load_dataset(c.data.source_train_dir, c.data.class_count,
                              Domain::source, Split::train);
  source.test = load_dataset(c.data.source_test_dir, c.data.class_count,
                             Domain::source, Split::test);
  target.train = load_dataset(c.data.target_train_dir, c.data.class_count,
                              Domain::target, Split::train);
  target.test = load_dataset(c.data.target_test_dir, c.data.class_count,
                             Domain::target, Split::test);
  return {std::move(source), std::move(target)};
}

namespace {

std::string now_utc_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_json_file(const fs::path& file, const nlohmann::json& j) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream os(file);
  if (!os) throw DataError("cannot write " + file.string());
  os << j.dump(2) << "\n";
}

// Saves the final and best-loss checkpoints, recording their paths in the
// report.
void write_stage_artifacts(const fs::path& out, TrainOutput& trained) {
  const std::string& stage = trained.report.stage;
  const fs::path ckpt = checkpoint_path(out, stage, false);
  save_checkpoint(trained.model, ckpt);
  trained.report.checkpoint_path = ckpt.string();

  if (!trained.best_parameters.empty()) {
    SegmentationModel best = build_model(trained.model.spec());
    best.set_parameters_flat(trained.best_parameters);
    const fs::path best_ckpt = checkpoint_path(out, stage, true);
    save_checkpoint(best, best_ckpt);
    trained.report.best_checkpoint_path = best_ckpt.string();
  }
}

void finalize_stage(const fs::path& out, StageOutcome& outcome,
                    const Dataset& target_test, const SegmentationModel& model,
                    const std::string& label) {
  outcome.target_metrics = evaluate(model, target_test);
  outcome.report.metrics = outcome.target_metrics.to_json();
  outcome.report.metrics["label"] = label;
  write_json_file(stage_report_path(out, outcome.report.stage),
                  outcome.report.to_json());
}

}  // namespace

void write_manifest(const ExperimentConfig& resolved, const fs::path& out,
                    const std::string& command) {
  nlohmann::json manifest;
  const nlohmann::json cfg = resolved.to_json();
  manifest["config"] = cfg;
  manifest["config_hash"] = stable_hash(cfg);
  manifest["seeds"] = {{"master", resolved.seeds.master},
                       {"data", resolved.data.synthetic.seed},
                       {"source_init", resolved.source_model.init_seed},
                       {"target_init", resolved.target_model.init_seed},
                       {"student_init", resolved.student_model.init_seed},
                       {"opt_source", resolved.opt_source.seed},
                       {"opt_stage1", resolved.opt_stage1.seed},
                       {"opt_stage2", resolved.opt_stage2.seed}};
  manifest["artifact_version"] = kVersion;
  manifest["checkpoint_format"] = kCheckpointFormat;
  manifest["cache_format"] = kCacheFormat;
  manifest["command"] = command;
  manifest["created_at_utc"] = now_utc_iso8601();
  write_json_file(out / "manifest.json", manifest);
}

ExperimentResult run_experiment(const ExperimentConfig& raw) {
  const auto errors = raw.validate();
  if (!errors.empty()) {
    std::string msg = "invalid config:";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw ConfigError(msg);
  }
  const ExperimentConfig cfg = raw.resolved();
  const fs::path out(cfg.output_dir);
  fs::create_directories(out);
  write_manifest(cfg, out, "run");

  ExperimentResult result;
  result.output_dir = out;

  const auto [source, target] = prepare_data(cfg);

  // --- Stage 0: source training -------------------------------------------
  std::optional<SegmentationModel> source_model;
  if (cfg.stages.source) {
    StageOutcome outcome;
    const fs::path ckpt = checkpoint_path(out, "source", false);
    if (fs::exists(ckpt)) {
      source_model = load_checkpoint(ckpt);
      if (!(source_model->spec() == cfg.source_model))
        throw ConfigError(
            "existing source checkpoint does not match configured spec; "
            "remove " +
            ckpt.string() + " or fix the config");
      outcome.resumed = true;
      outcome.report.stage = "source";
      outcome.report.checkpoint_path = ckpt.string();
      std::cout << "[source] resumed from " << ckpt << "\n";
    } else {
      std::cout << "[source] training (" << cfg.opt_source.epochs
                << " epochs)...\n";
      TrainOutput trained =
          train_source(source.train, cfg.source_model, cfg.opt_source);
      write_stage_artifacts(out, trained);
      outcome.report = std::move(trained.report);
      source_model = std::move(trained.model);
    }
    finalize_stage(out, outcome, target.test, *source_model, "source");
    result.source_on_source = evaluate(*source_model, source.test);
    result.source = std::move(outcome);
    std::cout << "[source] target-test mean DSC "
              << result.source->target_metrics.mean_dsc << "\n";
  } else if (cfg.stages.stage1 || cfg.stages.stage2) {
    const fs::path ckpt = checkpoint_path(out, "source", false);
    if (fs::exists(ckpt)) source_model = load_checkpoint(ckpt);
  }

  if (!cfg.stages.stage1 && !cfg.stages.stage2) return result;

  // --- Pseudo-label cache ---------------------------------------------------
  std::optional<PseudoLabelCache> cache;
  const fs::path cache_file = cache_path(out);
  if (cfg.stages.stage1) {
    if (fs::exists(cache_file)) {
      cache = PseudoLabelCache::load(cache_file);
      if (!cache->covers(target.train)) cache.reset();
    }
    if (!cache) {
      std::unique_ptr<BlackBoxPredictor> predictor;
      if (!cfg.blackbox_endpoint.empty()) {
        const auto colon = cfg.blackbox_endpoint.rfind(':');
        if (colon == std::string::npos)
          throw ConfigError("blackbox_endpoint must be host:port");
        predictor =
            remote_predictor(cfg.blackbox_endpoint.substr(0, colon),
                             std::stoi(cfg.blackbox_endpoint.substr(colon + 1)));
      } else {
        if (!source_model)
          throw ConfigError(
              "stage1 needs a source model: enable stages.source, provide a "
              "source checkpoint, or set blackbox_endpoint");
        predictor = wrap_as_blackbox(*source_model);
      }
      std::cout << "[stage1] precomputing pseudo-labels ("
                << target.train.size() << " queries)...\n";
      cache = precompute_pseudo_labels(*predictor, target.train);
      cache->save(cache_file);
    }
  }

  // --- Stage I ---------------------------------------------------------------
  std::optional<SegmentationModel> stage1_model;
  if (cfg.stages.stage1) {
    StageOutcome outcome;
    const fs::path ckpt = checkpoint_path(out, "stage1", false);
    if (fs::exists(ckpt)) {
      stage1_model = load_checkpoint(ckpt);
      if (!(stage1_model->spec() == cfg.target_model))
        throw ConfigError(
            "existing stage1 checkpoint does not match configured spec");
      outcome.resumed = true;
      outcome.report.stage = "stage1";
      outcome.report.checkpoint_path = ckpt.string();
      std::cout << "[stage1] resumed from " << ckpt << "\n";
    } else {
      std::cout << "[stage1] distilling from black-box labels ("
                << cfg.opt_stage1.epochs << " epochs)...\n";
      TrainOutput trained =
          train_stage1(*cache, target.train, cfg.target_model, cfg.opt_stage1);
      write_stage_artifacts(out, trained);
      outcome.report = std::move(trained.report);
      stage1_model = std::move(trained.model);
    }
    finalize_stage(out, outcome, target.test, *stage1_model, "stage1");
    result.stage1 = std::move(outcome);
    std::cout << "[stage1] target-test mean DSC "
              << result.stage1->target_metrics.mean_dsc << "\n";
  } else if (cfg.stages.stage2) {
    const fs::path ckpt = checkpoint_path(out, "stage1", false);
    if (!fs::exists(ckpt))
      throw ConfigError("stage2 requires a stage1 checkpoint at " +
                        ckpt.string());
    stage1_model = load_checkpoint(ckpt);
  }

  // --- Stage II ---------------------------------------------------------------
  if (cfg.stages.stage2) {
    StageOutcome outcome;
    const std::string label =
        cfg.stage2.use_strong_aug ? "stage2+aug" : "stage2-noaug";
    const fs::path ckpt = checkpoint_path(out, "stage2", false);
    std::optional<SegmentationModel> student;
    if (fs::exists(ckpt)) {
      student = load_checkpoint(ckpt);
      outcome.resumed = true;
      outcome.report.stage = "stage2";
      outcome.report.checkpoint_path = ckpt.string();
      std::cout << "[stage2] resumed from " << ckpt << "\n";
    } else {
      std::cout << "[stage2] two-view distillation ("
                << cfg.opt_stage2.epochs << " epochs, "
                << (cfg.stage2.use_strong_aug ? "with" : "without")
                << " strong augmentation)...\n";
      TrainOutput trained = train_stage2(
          *stage1_model, target.train, cfg.student_model, cfg.weak, cfg.strong,
          cfg.opt_stage2, cfg.stage2.use_strong_aug);
      write_stage_artifacts(out, trained);
      outcome.report = std::move(trained.report);
      student = std::move(trained.model);
    }
    finalize_stage(out, outcome, target.test, *student, label);
    result.stage2 = std::move(outcome);
    std::cout << "[stage2] target-test mean DSC "
              << result.stage2->target_metrics.mean_dsc << "\n";
  }

  // --- Metric summary ---------------------------------------------------------
  nlohmann::json summary;
  summary["rows"] = nlohmann::json::array();
  std::string table;
  auto add_row = [&](const StageOutcome& o, const std::string& label) {
    nlohmann::json row;
    row["label"] = label;
    row["metrics"] = o.target_metrics.to_json();
    summary["rows"].push_back(row);
    if (table.empty()) table = o.target_metrics.table_header() + "\n";
    table += o.target_metrics.table_row(label) + "\n";
  };
  if (result.source) add_row(*result.source, "source");
  if (result.stage1) add_row(*result.stage1, "stage1");
  if (result.stage2)
    add_row(*result.stage2,
            cfg.stage2.use_strong_aug ? "stage2+aug" : "stage2-noaug");
  write_json_file(metrics_summary_path(out, false), summary);
  {
    const fs::path tf = metrics_summary_path(out, true);
    fs::create_directories(tf.parent_path());
    std::ofstream os(tf);
    os << table;
  }
  return result;
}

}  // namespace boxdistill

// boxdistill command-line entry point.
//
// Subcommands: gen-data, train-source, precompute-labels, train-stage1,
// train-stage2, run-all, serve, evaluate, report. Exit codes: 0 success,
// 2 configuration error (including usage), 3 data error, 4 runtime error.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "boxdistill/checkpoint.hpp"
#include "boxdistill/config.hpp"
#include "boxdistill/dataset.hpp"
#include "boxdistill/error.hpp"
#include "boxdistill/experiment.hpp"
#include "boxdistill/json_io.hpp"
#include "boxdistill/metrics.hpp"
#include "boxdistill/report.hpp"
#include "boxdistill/service.hpp"
#include "boxdistill/version.hpp"

namespace fs = std::filesystem;
using namespace boxdistill;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string output_dir;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
  auto* opt = cmd->add_option("-c,--config", args.config_path,
                              "experiment config (json)");
  if (config_required) opt->required();
  cmd->add_option("-o,--output-dir", args.output_dir,
                  "output directory (overrides config)");
  cmd->add_option("--set", args.overrides,
                  "config override, dotted key=value (repeatable)");
}

ExperimentConfig load_with_overrides(const CommonArgs& args) {
  nlohmann::json j;
  if (!args.config_path.empty()) {
    std::ifstream is(args.config_path);
    if (!is) throw ConfigError("cannot open config: " + args.config_path);
    j = nlohmann::json::parse(is, nullptr, false);
    if (j.is_discarded())
      throw ConfigError("config is not valid json: " + args.config_path);
  }
  apply_overrides(j, args.overrides);
  ExperimentConfig cfg = ExperimentConfig::from_json(j);
  if (!args.output_dir.empty()) {
    cfg.output_dir = args.output_dir;
  } else if (const char* root = std::getenv("BOXDISTILL_OUTPUT_ROOT")) {
    // Environment default root: config output_dir is joined under it.
    cfg.output_dir = (fs::path(root) / cfg.output_dir).string();
  }
  return cfg;
}

void require_valid(const ExperimentConfig& cfg) {
  const auto errors = cfg.validate();
  if (errors.empty()) return;
  std::string msg = "invalid config:";
  for (const auto& e : errors) msg += "\n  - " + e;
  throw ConfigError(msg);
}

int cmd_gen_data(const CommonArgs& args) {
  ExperimentConfig cfg = load_with_overrides(args);
  require_valid(cfg);
  if (cfg.data.kind != "synthetic")
    throw ConfigError("gen-data requires data.kind = synthetic");
  const ExperimentConfig resolved = cfg.resolved();
  const auto [source, target] = prepare_data(resolved);
  const fs::path data_dir = fs::path(resolved.output_dir) / "data";
  save_dataset(data_dir / "source_train", source.train);
  save_dataset(data_dir / "source_test", source.test);
  save_dataset(data_dir / "target_train", target.train);
  save_dataset(data_dir / "target_test", target.test);
  write_manifest(resolved, resolved.output_dir, "gen-data");
  std::cout << "wrote " << source.train.size() << "+" << source.test.size()
            << " source and " << target.train.size() << "+"
            << target.test.size() << " target samples under " << data_dir
            << "\n";
  return 0;
}

int run_stages(const CommonArgs& args, bool source, bool stage1, bool stage2,
               const char* command) {
  ExperimentConfig cfg = load_with_overrides(args);
  cfg.stages.source = source;
  cfg.stages.stage1 = stage1;
  cfg.stages.stage2 = stage2;
  require_valid(cfg);
  write_manifest(cfg.resolved(), cfg.resolved().output_dir, command);
  run_experiment(cfg);
  return 0;
}

int cmd_precompute(const CommonArgs& args, const std::string& endpoint) {
  ExperimentConfig cfg = load_with_overrides(args);
  if (!endpoint.empty()) cfg.blackbox_endpoint = endpoint;
  require_valid(cfg);
  const ExperimentConfig resolved = cfg.resolved();
  const auto [source, target] = prepare_data(resolved);

  std::unique_ptr<BlackBoxPredictor> predictor;
  if (!resolved.blackbox_endpoint.empty()) {
    const auto colon = resolved.blackbox_endpoint.rfind(':');
    if (colon == std::string::npos)
      throw ConfigError("blackbox_endpoint must be host:port");
    predictor = remote_predictor(
        resolved.blackbox_endpoint.substr(0, colon),
        std::stoi(resolved.blackbox_endpoint.substr(colon + 1)));
  } else {
    const fs::path ckpt =
        checkpoint_path(resolved.output_dir, "source", false);
    if (!fs::exists(ckpt))
      throw ConfigError("no source checkpoint at " + ckpt.string() +
                        "; run train-source first or pass --endpoint");
    predictor = wrap_as_blackbox(load_checkpoint(ckpt));
  }
  PseudoLabelCache cache = precompute_pseudo_labels(*predictor, target.train);
  const fs::path out = cache_path(resolved.output_dir);
  cache.save(out);
  std::cout << "cached " << cache.size() << " pseudo-label maps at " << out
            << " (" << predictor->query_count() << " queries)\n";
  return 0;
}

int cmd_serve(const std::string& checkpoint, const std::string& bind) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos)
    throw ConfigError("--bind must be host:port");
  const std::string host = bind.substr(0, colon);
  const int port = std::stoi(bind.substr(colon + 1));
  SegmentationModel model = load_checkpoint(checkpoint);
  auto predictor = wrap_as_blackbox(model);
  PredictorService service(*predictor, host, port);
  std::cout << "serving " << checkpoint << " on " << host << ":"
            << service.port() << " (classes=" << predictor->num_classes()
            << ", in_channels=" << predictor->in_channels()
            << "); Ctrl-C to stop\n";
  service.wait();
  return 0;
}

int cmd_evaluate(const std::string& checkpoint, const std::string& data_dir,
                 int classes, const std::string& out_path) {
  SegmentationModel model = load_checkpoint(checkpoint);
  const int k = classes > 0 ? classes : model.spec().out_classes;
  const Dataset test = load_dataset(data_dir, k, Domain::target, Split::test);
  if (!test.labeled())
    throw DataError("evaluate: dataset at " + data_dir + " has no masks");
  const MetricReport report = evaluate(model, test);

  const fs::path out =
      out_path.empty() ? fs::path(data_dir) / "metrics.json" : fs::path(out_path);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  std::ofstream os(out);
  os << report.to_json().dump(2) << "\n";
  std::cout << report.table_header() << "\n"
            << report.table_row("checkpoint") << "\n"
            << "metric report written to " << out << "\n";
  return 0;
}

int cmd_report(const CommonArgs& args, const std::string& dir) {
  fs::path root;
  if (!dir.empty()) {
    root = dir;
  } else if (!args.output_dir.empty()) {
    root = args.output_dir;
  } else if (!args.config_path.empty()) {
    root = load_with_overrides(args).resolved().output_dir;
  } else {
    throw ConfigError("report needs --dir, --output-dir or --config");
  }
  const ReportSummary summary = generate_report(root);
  for (const auto& w : summary.warnings)
    std::cerr << "warning: " << w << "\n";
  std::cout << "report for " << summary.runs_found << " run(s) written to "
            << summary.report_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage black-box distillation toolkit for segmentation "
               "domain adaptation"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonArgs gen_args, src_args, pre_args, s1_args, s2_args, all_args,
      rep_args;
  std::string endpoint, serve_ckpt, serve_bind = "127.0.0.1:8080";
  std::string eval_ckpt, eval_data, eval_out, report_dir;
  int eval_classes = 0;

  add_common(app.add_subcommand("gen-data",
                                "materialize the synthetic benchmark to disk"),
             gen_args);
  add_common(app.add_subcommand("train-source", "stage 0: train the source "
                                                "model on labeled source data"),
             src_args);
  auto* pre = app.add_subcommand(
      "precompute-labels", "query the black-box once per target-train sample");
  add_common(pre, pre_args);
  pre->add_option("--endpoint", endpoint, "remote predictor host:port");
  add_common(app.add_subcommand(
                 "train-stage1",
                 "stage I: distill a target model from cached soft labels"),
             s1_args);
  add_common(app.add_subcommand("train-stage2",
                                "stage II: two-view distillation with a "
                                "fresh student"),
             s2_args);
  add_common(app.add_subcommand("run-all", "run stages 0 -> I -> II"),
             all_args);

  auto* serve = app.add_subcommand("serve", "serve a checkpoint as a "
                                            "probability-map API");
  serve->add_option("--checkpoint", serve_ckpt, "model checkpoint")->required();
  serve->add_option("--bind", serve_bind, "host:port (default 127.0.0.1:8080)");

  auto* eval = app.add_subcommand("evaluate", "DSC/ASD of a checkpoint on a "
                                              "labeled dataset directory");
  eval->add_option("--checkpoint", eval_ckpt, "model checkpoint")->required();
  eval->add_option("--data", eval_data, "dataset directory (images/+masks/)")
      ->required();
  eval->add_option("--classes", eval_classes, "class count (default: model)");
  eval->add_option("--out", eval_out, "metric report path");

  auto* rep = app.add_subcommand("report", "loss curves, ablation bars and "
                                           "prediction overlays");
  add_common(rep, rep_args, /*config_required=*/false);
  rep->add_option("--dir", report_dir, "run directory or root of run dirs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand("gen-data")) return cmd_gen_data(gen_args);
    if (app.got_subcommand("train-source"))
      return run_stages(src_args, true, false, false, "train-source");
    if (app.got_subcommand("precompute-labels"))
      return cmd_precompute(pre_args, endpoint);
    if (app.got_subcommand("train-stage1"))
      return run_stages(s1_args, false, true, false, "train-stage1");
    if (app.got_subcommand("train-stage2"))
      return run_stages(s2_args, false, false, true, "train-stage2");
    if (app.got_subcommand("run-all"))
      return run_stages(all_args, true, true, true, "run-all");
    if (app.got_subcommand("serve")) return cmd_serve(serve_ckpt, serve_bind);
    if (app.got_subcommand("evaluate"))
      return cmd_evaluate(eval_ckpt, eval_data, eval_classes, eval_out);
    if (app.got_subcommand("report")) return cmd_report(rep_args, report_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}

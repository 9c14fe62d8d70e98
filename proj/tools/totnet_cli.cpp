// Command-line front end. Talks to the library only through the C interface.
#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "totnet/totnet.h"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitRuntime = 3;

int exit_code_for(totnet_status s) {
  switch (s) {
    case TOTNET_OK: return 0;
    case TOTNET_ERR_CONFIG:
    case TOTNET_ERR_DATA:
    case TOTNET_ERR_IO:
    case TOTNET_ERR_CHECKPOINT: return kExitData;
    default: return kExitRuntime;
  }
}

struct Failure {
  totnet_status status;
};

void check(totnet_status s) {
  if (s != TOTNET_OK) throw Failure{s};
}

struct OwnedString {
  char* p = nullptr;
  ~OwnedString() { totnet_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

struct ConfigDeleter {
  void operator()(totnet_config* c) const { totnet_config_destroy(c); }
};
struct ModelDeleter {
  void operator()(totnet_model* m) const { totnet_model_destroy(m); }
};
using ConfigPtr = std::unique_ptr<totnet_config, ConfigDeleter>;
using ModelPtr = std::unique_ptr<totnet_model, ModelDeleter>;

ConfigPtr load_config(const std::string& path) {
  totnet_config* c = nullptr;
  check(path.empty() ? totnet_config_create(&c) : totnet_config_load(path.c_str(), &c));
  return ConfigPtr(c);
}

void apply_sets(totnet_config* c, const std::vector<std::string>& sets) {
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("--set", "expected key=value, got '" + kv + "'");
    check(totnet_config_set(c, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
  }
}

ModelPtr load_model(const std::string& checkpoint) {
  totnet_model* m = nullptr;
  check(totnet_model_load(checkpoint.c_str(), &m));
  return ModelPtr(m);
}

void print_progress(const char* record, void*) {
  std::fprintf(stderr, "%s\n", record);
}

template <typename T>
CLI::Option* flag_opt(CLI::App* cmd, const std::string& name, T& target, const std::string& help,
                      const std::string& env) {
  return cmd->add_option(name, target, help)->envname("TOTNET_" + env)->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Occlusion-robust ball tracking: synthesis, training, evaluation, inference, benchmarking"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(totnet_version()));

  // synth
  std::string synth_spec, synth_out;
  std::optional<std::uint64_t> synth_seed;
  auto* synth = app.add_subcommand("synth", "Generate the synthetic occlusion benchmark");
  flag_opt(synth, "--spec", synth_spec, "Benchmark spec JSON (default: built-in spec)", "SYNTH_SPEC");
  flag_opt(synth, "--out", synth_out, "Output dataset directory", "SYNTH_OUT")->required();
  synth->add_option("--seed", synth_seed, "Seed overriding the spec")->envname("TOTNET_SYNTH_SEED");

  // train
  std::string train_config, train_data, train_out;
  std::optional<std::string> train_ablation;
  std::vector<std::string> train_sets;
  bool train_resume = false, train_quiet = false;
  auto* train = app.add_subcommand("train", "Train a model on a dataset's train/val splits");
  flag_opt(train, "--config", train_config, "Config JSON (default: built-in defaults)", "TRAIN_CONFIG");
  flag_opt(train, "--data", train_data, "Dataset directory containing manifest.json", "TRAIN_DATA")->required();
  flag_opt(train, "--out", train_out, "Run directory for checkpoints and metrics", "TRAIN_OUT")->required();
  train->add_option("--ablation", train_ablation, "Toggles to enable, subset of wbce,aug,of (\"\" = baseline)")
      ->envname("TOTNET_TRAIN_ABLATION");
  train->add_option("--set", train_sets, "Config override key=json, repeatable")->envname("TOTNET_TRAIN_SET");
  train->add_flag("--resume", train_resume, "Continue from <out>/last.ckpt")->envname("TOTNET_TRAIN_RESUME");
  train->add_flag("--quiet", train_quiet, "Do not echo metrics records")->envname("TOTNET_TRAIN_QUIET");

  // eval
  std::string eval_ckpt, eval_data, eval_split = "test", eval_report, eval_records;
  auto* evalc = app.add_subcommand("eval", "Per-visibility RMSE and accuracy on a split");
  flag_opt(evalc, "--checkpoint", eval_ckpt, "Checkpoint file", "EVAL_CHECKPOINT")->required();
  flag_opt(evalc, "--data", eval_data, "Dataset directory containing manifest.json", "EVAL_DATA")->required();
  flag_opt(evalc, "--split", eval_split, "train, val or test", "EVAL_SPLIT")
      ->check(CLI::IsMember({"train", "val", "test"}));
  flag_opt(evalc, "--report", eval_report, "Write the text table here", "EVAL_REPORT");
  flag_opt(evalc, "--records", eval_records, "Write one JSON record per sample here", "EVAL_RECORDS");

  // infer
  std::string infer_ckpt, infer_clip, infer_out;
  double infer_tau = -1.0;
  bool infer_overlay = false;
  auto* infer = app.add_subcommand("infer", "Track the ball through a clip");
  flag_opt(infer, "--checkpoint", infer_ckpt, "Checkpoint file", "INFER_CHECKPOINT")->required();
  flag_opt(infer, "--clip", infer_clip, "Frame directory or video file", "INFER_CLIP")->required();
  flag_opt(infer, "--out", infer_out, "Output directory", "INFER_OUT")->required();
  flag_opt(infer, "--tau", infer_tau, "Confidence threshold in [0, 1]; negative uses the model's", "INFER_TAU")
      ->check(CLI::Range(-1.0, 1.0));
  infer->add_flag("--overlay", infer_overlay, "Also write overlay images")->envname("TOTNET_INFER_OVERLAY");

  // bench
  std::string bench_ckpt, bench_config;
  int bench_windows = 20;
  auto* bench = app.add_subcommand("bench", "Parameter count and inference throughput");
  auto* bench_ck_opt = flag_opt(bench, "--checkpoint", bench_ckpt, "Checkpoint file", "BENCH_CHECKPOINT");
  auto* bench_cfg_opt = flag_opt(bench, "--config", bench_config, "Config JSON (random weights)", "BENCH_CONFIG");
  bench_ck_opt->excludes(bench_cfg_opt);
  flag_opt(bench, "--windows", bench_windows, "Number of timed windows", "BENCH_WINDOWS")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*synth) {
      OwnedString summary;
      const std::uint64_t seed = synth_seed.value_or(0);
      check(totnet_synth_generate(synth_spec.empty() ? nullptr : synth_spec.c_str(), synth_out.c_str(),
                                  synth_seed ? &seed : nullptr, &summary.p));
      std::printf("%s\n", summary.str().c_str());
    } else if (*train) {
      ConfigPtr cfg = load_config(train_config);
      if (train_ablation) check(totnet_config_apply_ablation(cfg.get(), train_ablation->c_str()));
      apply_sets(cfg.get(), train_sets);
      OwnedString summary;
      check(totnet_train(cfg.get(), train_data.c_str(), train_out.c_str(), train_resume ? 1 : 0,
                         train_quiet ? nullptr : print_progress, nullptr, &summary.p));
      std::printf("%s\n", summary.str().c_str());
    } else if (*evalc) {
      ModelPtr model = load_model(eval_ckpt);
      OwnedString table, summary;
      check(totnet_eval(model.get(), eval_data.c_str(), eval_split.c_str(),
                        eval_report.empty() ? nullptr : eval_report.c_str(),
                        eval_records.empty() ? nullptr : eval_records.c_str(), &table.p, &summary.p));
      std::printf("%s", table.str().c_str());
    } else if (*infer) {
      ModelPtr model = load_model(infer_ckpt);
      OwnedString summary;
      check(totnet_infer(model.get(), infer_clip.c_str(), infer_out.c_str(), infer_tau, infer_overlay ? 1 : 0,
                         &summary.p));
      std::printf("%s\n", summary.str().c_str());
    } else if (*bench) {
      ModelPtr model;
      if (!bench_ckpt.empty()) {
        model = load_model(bench_ckpt);
      } else {
        ConfigPtr cfg = load_config(bench_config);
        totnet_model* m = nullptr;
        check(totnet_model_create(cfg.get(), &m));
        model.reset(m);
      }
      OwnedString report;
      check(totnet_bench(model.get(), bench_windows, &report.p));
      std::printf("%s\n", report.str().c_str());
    }
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s: %s\n", totnet_status_string(f.status), totnet_last_error());
    return exit_code_for(f.status);
  } catch (const CLI::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return 0;
}

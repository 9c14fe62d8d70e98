#include "totnet/totnet.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <string>

#include "core/annotation_io.hpp"
#include "core/config.hpp"
#include "core/errors.hpp"
#include "eval/benchmark.hpp"
#include "eval/evaluate.hpp"
#include "eval/overlay.hpp"
#include "eval/report.hpp"
#include "ingest/ingest.hpp"
#include "model/inference.hpp"
#include "synth/scene.hpp"
#include "train/checkpoint.hpp"
#include "train/trainer.hpp"

struct totnet_config {
  totnet::PipelineConfig config;
};

struct totnet_model {
  totnet::PipelineConfig config;
  totnet::TotNet net{nullptr};
};

namespace {

namespace fs = std::filesystem;
using namespace totnet;

thread_local std::string g_last_error;

totnet_status fail(totnet_status s, const std::string& message) {
  g_last_error = message;
  return s;
}

totnet_status status_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Config:
    case ErrorKind::Validation: return TOTNET_ERR_CONFIG;
    case ErrorKind::Annotation:
    case ErrorKind::Ingest: return TOTNET_ERR_DATA;
    case ErrorKind::Io: return TOTNET_ERR_IO;
    case ErrorKind::Checkpoint: return TOTNET_ERR_CHECKPOINT;
    case ErrorKind::Training: return TOTNET_ERR_TRAINING;
    case ErrorKind::Contract: return TOTNET_ERR_INVALID_ARGUMENT;
  }
  return TOTNET_ERR_INTERNAL;
}

template <typename F>
totnet_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return TOTNET_OK;
  } catch (const Error& e) {
    return fail(status_for(e), e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(TOTNET_ERR_CONFIG, e.what());
  } catch (const c10::Error& e) {
    return fail(TOTNET_ERR_INTERNAL, e.what_without_backtrace());
  } catch (const std::exception& e) {
    return fail(TOTNET_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(TOTNET_ERR_INTERNAL, "unknown error");
  }
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void give(char** out, const std::string& s) {
  if (out) *out = dup(s);
}

void need(const void* p, const char* name) {
  if (!p) throw ContractViolation(std::string(name) + " must not be null");
}

std::vector<ClipPtr> load_split(const fs::path& data_dir, Split split, const PipelineConfig& config) {
  if (!fs::exists(data_dir)) throw IngestError("data directory not found: " + data_dir.string());
  return load_clips(select_split(read_manifest_index(data_dir), split), config);
}

}  // namespace

extern "C" {

const char* totnet_version(void) { return "0.1.0"; }

const char* totnet_last_error(void) { return g_last_error.c_str(); }

const char* totnet_status_string(totnet_status status) {
  switch (status) {
    case TOTNET_OK: return "ok";
    case TOTNET_ERR_INVALID_ARGUMENT: return "invalid argument";
    case TOTNET_ERR_CONFIG: return "configuration error";
    case TOTNET_ERR_DATA: return "data error";
    case TOTNET_ERR_IO: return "i/o error";
    case TOTNET_ERR_CHECKPOINT: return "checkpoint error";
    case TOTNET_ERR_TRAINING: return "training error";
    case TOTNET_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void totnet_string_free(char* s) { std::free(s); }

totnet_status totnet_config_create(totnet_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new totnet_config{};
  });
}

totnet_status totnet_config_load(const char* path, totnet_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new totnet_config{load_config(path)};
  });
}

totnet_status totnet_config_save(const totnet_config* config, const char* path) {
  return guarded([&] {
    need(config, "config");
    need(path, "path");
    save_config(config->config, path);
  });
}

totnet_status totnet_config_set(totnet_config* config, const char* key, const char* json_value) {
  return guarded([&] {
    need(config, "config");
    need(key, "key");
    need(json_value, "json_value");
    PipelineConfig updated = config->config;
    set_config_value(updated, key, json_value);
    config->config = updated;
  });
}

totnet_status totnet_config_apply_ablation(totnet_config* config, const char* toggles) {
  return guarded([&] {
    need(config, "config");
    need(toggles, "toggles");
    apply_ablation(config->config, toggles);
  });
}

totnet_status totnet_config_to_json(const totnet_config* config, char** out_json) {
  return guarded([&] {
    need(config, "config");
    need(out_json, "out_json");
    *out_json = dup(dump_config(config->config));
  });
}

void totnet_config_destroy(totnet_config* config) { delete config; }

totnet_status totnet_synth_generate(const char* spec_path, const char* out_dir, const uint64_t* seed,
                                    char** out_summary_json) {
  return guarded([&] {
    need(out_dir, "out_dir");
    synth::BenchmarkSpec spec;
    if (spec_path) {
      std::ifstream f(spec_path);
      if (!f) throw IoError(std::string("cannot read spec ") + spec_path);
      const std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
      if (text.find_first_not_of(" \t\r\n") != std::string::npos) {
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
          throw ConfigError("<spec>", std::string(spec_path) + ": " + e.what());
        }
        spec = synth::benchmark_from_json(j);
      }
    }
    if (seed) spec.seed = *seed;
    const auto report = synth::gen_dataset(synth::benchmark_family(spec), out_dir);
    nlohmann::json s = {{"clips", report.manifests.size()},
                        {"frames", report.frames},
                        {"occlusion_fraction", report.occlusion_fraction()},
                        {"seed", spec.seed}};
    for (Visibility v : kAllVisibilities)
      s["histogram"][std::string(to_string(v))] = report.histogram[static_cast<std::size_t>(to_code(v))];
    give(out_summary_json, s.dump());
  });
}

totnet_status totnet_train(const totnet_config* config, const char* data_dir, const char* out_dir, int resume,
                           totnet_progress_fn progress, void* user_data, char** out_summary_json) {
  return guarded([&] {
    need(config, "config");
    need(data_dir, "data_dir");
    need(out_dir, "out_dir");
    const PipelineConfig& cfg = config->config;
    cfg.validate();
    const auto train_clips = load_split(data_dir, Split::Train, cfg);
    const auto val_clips = load_split(data_dir, Split::Val, cfg);
    if (train_clips.empty()) throw IngestError(std::string(data_dir) + " has no train split");
    TrainOptions opts;
    opts.out_dir = out_dir;
    opts.resume = resume != 0;
    if (progress) opts.on_record = [&](const nlohmann::json& rec) { progress(rec.dump().c_str(), user_data); };
    const TrainResult r = train(cfg, train_clips, val_clips, opts);
    nlohmann::json s = {{"best_checkpoint", r.best_checkpoint.string()},
                        {"last_checkpoint", r.last_checkpoint.string()},
                        {"metrics_log", r.metrics_log.string()},
                        {"state", to_json(r.state)},
                        {"epoch_losses", r.epoch_losses},
                        {"warnings", r.warnings},
                        {"augment_counters",
                         {{"occlusion_noops", r.counters.occlusion_noops},
                          {"decoys_dropped", r.counters.decoys_dropped},
                          {"crops_skipped", r.counters.crops_skipped}}}};
    give(out_summary_json, s.dump());
  });
}

totnet_status totnet_model_load(const char* checkpoint_path, totnet_model** out) {
  return guarded([&] {
    need(checkpoint_path, "checkpoint_path");
    need(out, "out");
    const CheckpointData d = load_checkpoint(checkpoint_path);
    auto m = std::make_unique<totnet_model>();
    m->config = d.config;
    m->net = model_from_checkpoint(d);
    m->net->eval();
    *out = m.release();
  });
}

totnet_status totnet_model_create(const totnet_config* config, totnet_model** out) {
  return guarded([&] {
    need(config, "config");
    need(out, "out");
    config->config.validate();
    auto m = std::make_unique<totnet_model>();
    m->config = config->config;
    torch::manual_seed(m->config.seed);
    m->net = build_model(m->config);
    m->net->eval();
    *out = m.release();
  });
}

totnet_status totnet_model_info(const totnet_model* model, char** out_json) {
  return guarded([&] {
    need(model, "model");
    need(out_json, "out_json");
    const auto n = count_parameters(*model->net);
    nlohmann::json j = {{"parameters", n},
                        {"params_millions", format_millions(n)},
                        {"config", nlohmann::json::parse(dump_config(model->config))}};
    *out_json = dup(j.dump());
  });
}

void totnet_model_destroy(totnet_model* model) { delete model; }

totnet_status totnet_eval(totnet_model* model, const char* data_dir, const char* split, const char* report_path,
                          const char* records_path, char** out_table, char** out_summary_json) {
  return guarded([&] {
    need(model, "model");
    need(data_dir, "data_dir");
    need(split, "split");
    const PipelineConfig& cfg = model->config;
    const std::string name = split;
    if (name != "train" && name != "val" && name != "test")
      throw ContractViolation("split must be train, val or test, got '" + name + "'");
    const auto clips = load_split(data_dir, split_from_string(name), cfg);
    if (clips.empty()) throw IngestError(std::string(data_dir) + " has no '" + split + "' split");
    const auto flow = make_flow_provider(cfg, clips);
    const auto records = eval::evaluate_clips(model->net, cfg, clips, flow.get(), cfg.eval_stride);
    if (records.empty()) throw IngestError("no evaluation windows in split '" + std::string(split) + "'");
    const eval::Summary summary = eval::aggregate(records);
    const std::string table = eval::format_table(summary);
    if (report_path) eval::write_text(report_path, table);
    if (records_path) eval::write_records(records_path, records);
    give(out_table, table);
    give(out_summary_json, eval::to_json(summary).dump());
  });
}

totnet_status totnet_infer(totnet_model* model, const char* clip, const char* out_dir, double tau, int overlay,
                           char** out_summary_json) {
  return guarded([&] {
    need(model, "model");
    need(clip, "clip");
    need(out_dir, "out_dir");
    const PipelineConfig& cfg = model->config;
    if (tau > 1.0) throw ContractViolation("tau must not exceed 1");
    const double threshold = tau < 0.0 ? cfg.confidence_threshold : tau;
    const std::vector<ByteImage> originals = read_all_frames(clip);
    std::vector<ByteImage> frames;
    frames.reserve(originals.size());
    for (const auto& f : originals) frames.push_back(resize_image(f, cfg.resolution()));
    std::unique_ptr<FlowProvider> flow;
    if (cfg.use_flow) {
      if (cfg.flow_source == FlowSource::Oracle)
        throw ValidationError("oracle flow needs scene data, which a raw clip does not carry");
      flow = std::make_unique<BlockMatchingFlow>();
    }
    const auto dets = track_frames(model->net, cfg, frames, flow.get(), threshold);

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError(std::string("cannot create ") + out_dir + ": " + ec.message());
    const Resolution orig = originals.front().resolution();
    const double sx = static_cast<double>(orig.width) / cfg.width, sy = static_cast<double>(orig.height) / cfg.height;
    std::string csv = "frame,x,y,confidence,no_ball\n";
    std::vector<std::optional<heatmap::Detection>> scaled;
    long no_ball = 0;
    for (std::size_t i = 0; i < dets.size(); ++i) {
      if (dets[i]) {
        heatmap::Detection d{dets[i]->x * sx, dets[i]->y * sy, dets[i]->confidence};
        csv += std::to_string(i) + "," + format_real(d.x) + "," + format_real(d.y) + "," + format_real(d.confidence) +
               ",0\n";
        scaled.push_back(d);
      } else {
        csv += std::to_string(i) + ",-1,-1,0,1\n";
        scaled.push_back(std::nullopt);
        ++no_ball;
      }
    }
    eval::write_text(fs::path(out_dir) / "trajectory.csv", csv);
    std::size_t overlays = 0;
    if (overlay) overlays = eval::render_overlays(originals, scaled, {}, fs::path(out_dir) / "overlay");
    nlohmann::json s = {{"frames", dets.size()},
                        {"no_ball", no_ball},
                        {"tau", threshold},
                        {"trajectory", (fs::path(out_dir) / "trajectory.csv").string()},
                        {"overlays", overlays}};
    give(out_summary_json, s.dump());
  });
}

totnet_status totnet_bench(totnet_model* model, int n_windows, char** out_json) {
  return guarded([&] {
    need(model, "model");
    const auto r = eval::benchmark_throughput(model->net, model->config, n_windows);
    nlohmann::json j = {{"parameters", r.parameters},
                        {"params_millions", r.params_millions},
                        {"windows", r.windows},
                        {"seconds", r.seconds},
                        {"windows_per_second", r.windows_per_second},
                        {"frames_per_second", r.frames_per_second},
                        {"resolution", {model->config.height, model->config.width}},
                        {"window_length", model->config.window_length}};
    give(out_json, j.dump());
  });
}

}  // extern "C"

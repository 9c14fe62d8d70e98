#include "core/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "core/errors.hpp"

namespace totnet {

using nlohmann::json;

namespace {

template <typename Enum>
struct EnumName {
  Enum value;
  const char* name;
};

constexpr EnumName<ActivationMode> kActivationNames[] = {
    {ActivationMode::SoftmaxAxial, "softmax_axial"}, {ActivationMode::SigmoidAxial, "sigmoid_axial"}};
constexpr EnumName<Supervision> kSupervisionNames[] = {
    {Supervision::TargetFrame, "target_frame"}, {Supervision::AllFrames, "all_frames"}};
constexpr EnumName<FlowSource> kFlowNames[] = {
    {FlowSource::BlockMatching, "block_matching"}, {FlowSource::Oracle, "oracle"}};
constexpr EnumName<Interpolation> kInterpNames[] = {
    {Interpolation::Nearest, "nearest"}, {Interpolation::Bilinear, "bilinear"}};

template <typename Enum, std::size_t N>
const char* enum_name(const EnumName<Enum> (&table)[N], Enum v) {
  for (const auto& e : table)
    if (e.value == v) return e.name;
  return "?";
}

template <typename Enum, std::size_t N>
Enum enum_value(const EnumName<Enum> (&table)[N], const std::string& s, const std::string& key) {
  for (const auto& e : table)
    if (s == e.name) return e.value;
  std::string allowed;
  for (const auto& e : table) allowed += std::string(allowed.empty() ? "" : ", ") + e.name;
  throw ConfigError(key, "unknown value '" + s + "' (expected one of: " + allowed + ")");
}

json plan_to_json(const StagePlan& p) {
  return {{"channels", p.channels},
          {"spatial_kernels", p.spatial_kernels},
          {"temporal_kernels", p.temporal_kernels},
          {"temporal_pool", p.temporal_pool},
          {"spatial_pool", p.spatial_pool},
          {"bottleneck_channels", p.bottleneck_channels},
          {"bottleneck_layers", p.bottleneck_layers},
          {"bottleneck_kernel", p.bottleneck_kernel},
          {"head_temporal_kernel", p.head_temporal_kernel}};
}

json to_json(const PipelineConfig& c) {
  const auto& o = c.optimizer;
  const auto& a = c.augment;
  return {
      {"window_length", c.window_length},
      {"height", c.height},
      {"width", c.width},
      {"target_index", c.target_index},
      {"sigma", c.sigma},
      {"loss_weights", c.loss_weights.w},
      {"activation_mode", enum_name(kActivationNames, c.activation_mode)},
      {"confidence_threshold", c.confidence_threshold},
      {"bce_epsilon", c.bce_epsilon},
      {"use_weighted_bce", c.use_weighted_bce},
      {"use_occlusion_aug", c.use_occlusion_aug},
      {"use_flow", c.use_flow},
      {"flow_source", enum_name(kFlowNames, c.flow_source)},
      {"flow_scale", c.flow_scale},
      {"exclude_out_of_frame", c.exclude_out_of_frame},
      {"supervision", enum_name(kSupervisionNames, c.supervision)},
      {"train_stride", c.train_stride},
      {"eval_stride", c.eval_stride},
      {"seed", c.seed},
      {"num_threads", c.num_threads},
      {"optimizer",
       {{"lr", o.lr},
        {"weight_decay", o.weight_decay},
        {"beta1", o.beta1},
        {"beta2", o.beta2},
        {"eps", o.eps},
        {"batch_size", o.batch_size},
        {"epochs", o.epochs},
        {"grad_clip", o.grad_clip},
        {"schedule", o.schedule},
        {"patience", o.patience}}},
      {"augment",
       {{"ball_radius", a.ball_radius},
        {"occlusion_prob", a.occlusion_prob},
        {"mask_scale_min", a.mask_scale_min},
        {"mask_scale_max", a.mask_scale_max},
        {"ring_margin", a.ring_margin},
        {"decoy_prob", a.decoy_prob},
        {"decoy_count_min", a.decoy_count_min},
        {"decoy_count_max", a.decoy_count_max},
        {"hflip_prob", a.hflip_prob},
        {"vflip_prob", a.vflip_prob},
        {"crop_prob", a.crop_prob},
        {"crop_min_scale", a.crop_min_scale},
        {"jitter_prob", a.jitter_prob},
        {"brightness", a.brightness},
        {"contrast", a.contrast},
        {"saturation", a.saturation},
        {"interpolation", enum_name(kInterpNames, a.interpolation)}}},
      {"model", plan_to_json(c.model)},
  };
}

bool same_kind(const json& def, const json& in) {
  if (def.is_boolean()) return in.is_boolean();
  if (def.is_number_integer()) return in.is_number_integer();
  if (def.is_number()) return in.is_number();
  if (def.is_string()) return in.is_string();
  if (def.is_array()) return in.is_array();
  if (def.is_object()) return in.is_object();
  return false;
}

// Overlays `in` onto `base`, rejecting keys the schema does not know.
void merge_checked(json& base, const json& in, const std::string& prefix) {
  for (auto it = in.begin(); it != in.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError(key, "unknown key");
    json& slot = base[it.key()];
    if (!same_kind(slot, it.value())) {
      throw ConfigError(key, "expected " + std::string(slot.type_name()) + ", got " +
                                 std::string(it.value().type_name()));
    }
    if (slot.is_object()) {
      merge_checked(slot, it.value(), key);
    } else if (slot.is_array()) {
      for (const auto& e : it.value())
        if (!e.is_number()) throw ConfigError(key, "array entries must be numbers");
      slot = it.value();
    } else {
      slot = it.value();
    }
  }
}

template <typename T>
T get(const json& j, const char* key, const std::string& path) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(path.empty() ? key : path + "." + key, e.what());
  }
}

std::vector<int> get_ints(const json& j, const char* key, const std::string& path) {
  for (const auto& e : j.at(key))
    if (!e.is_number_integer()) throw ConfigError(path + "." + key, "array entries must be integers");
  return get<std::vector<int>>(j, key, path);
}

PipelineConfig from_json(const json& j) {
  PipelineConfig c;
  c.window_length = get<int>(j, "window_length", "");
  c.height = get<int>(j, "height", "");
  c.width = get<int>(j, "width", "");
  c.target_index = get<int>(j, "target_index", "");
  c.sigma = get<double>(j, "sigma", "");
  const auto w = get<std::vector<double>>(j, "loss_weights", "");
  if (w.size() != 4) throw ConfigError("loss_weights", "expected 4 entries, got " + std::to_string(w.size()));
  std::copy(w.begin(), w.end(), c.loss_weights.w.begin());
  c.activation_mode = enum_value(kActivationNames, get<std::string>(j, "activation_mode", ""), "activation_mode");
  c.confidence_threshold = get<double>(j, "confidence_threshold", "");
  c.bce_epsilon = get<double>(j, "bce_epsilon", "");
  c.use_weighted_bce = get<bool>(j, "use_weighted_bce", "");
  c.use_occlusion_aug = get<bool>(j, "use_occlusion_aug", "");
  c.use_flow = get<bool>(j, "use_flow", "");
  c.flow_source = enum_value(kFlowNames, get<std::string>(j, "flow_source", ""), "flow_source");
  c.flow_scale = get<double>(j, "flow_scale", "");
  c.exclude_out_of_frame = get<bool>(j, "exclude_out_of_frame", "");
  c.supervision = enum_value(kSupervisionNames, get<std::string>(j, "supervision", ""), "supervision");
  c.train_stride = get<int>(j, "train_stride", "");
  c.eval_stride = get<int>(j, "eval_stride", "");
  c.seed = get<std::uint64_t>(j, "seed", "");
  c.num_threads = get<int>(j, "num_threads", "");

  const json& o = j.at("optimizer");
  c.optimizer.lr = get<double>(o, "lr", "optimizer");
  c.optimizer.weight_decay = get<double>(o, "weight_decay", "optimizer");
  c.optimizer.beta1 = get<double>(o, "beta1", "optimizer");
  c.optimizer.beta2 = get<double>(o, "beta2", "optimizer");
  c.optimizer.eps = get<double>(o, "eps", "optimizer");
  c.optimizer.batch_size = get<int>(o, "batch_size", "optimizer");
  c.optimizer.epochs = get<int>(o, "epochs", "optimizer");
  c.optimizer.grad_clip = get<double>(o, "grad_clip", "optimizer");
  c.optimizer.schedule = get<std::string>(o, "schedule", "optimizer");
  c.optimizer.patience = get<int>(o, "patience", "optimizer");

  const json& a = j.at("augment");
  auto& A = c.augment;
  A.ball_radius = get<double>(a, "ball_radius", "augment");
  A.occlusion_prob = get<double>(a, "occlusion_prob", "augment");
  A.mask_scale_min = get<double>(a, "mask_scale_min", "augment");
  A.mask_scale_max = get<double>(a, "mask_scale_max", "augment");
  A.ring_margin = get<int>(a, "ring_margin", "augment");
  A.decoy_prob = get<double>(a, "decoy_prob", "augment");
  A.decoy_count_min = get<int>(a, "decoy_count_min", "augment");
  A.decoy_count_max = get<int>(a, "decoy_count_max", "augment");
  A.hflip_prob = get<double>(a, "hflip_prob", "augment");
  A.vflip_prob = get<double>(a, "vflip_prob", "augment");
  A.crop_prob = get<double>(a, "crop_prob", "augment");
  A.crop_min_scale = get<double>(a, "crop_min_scale", "augment");
  A.jitter_prob = get<double>(a, "jitter_prob", "augment");
  A.brightness = get<double>(a, "brightness", "augment");
  A.contrast = get<double>(a, "contrast", "augment");
  A.saturation = get<double>(a, "saturation", "augment");
  A.interpolation = enum_value(kInterpNames, get<std::string>(a, "interpolation", "augment"), "augment.interpolation");

  const json& m = j.at("model");
  auto& P = c.model;
  P.channels = get_ints(m, "channels", "model");
  P.spatial_kernels = get_ints(m, "spatial_kernels", "model");
  P.temporal_kernels = get_ints(m, "temporal_kernels", "model");
  P.temporal_pool = get_ints(m, "temporal_pool", "model");
  P.spatial_pool = get_ints(m, "spatial_pool", "model");
  P.bottleneck_channels = get<int>(m, "bottleneck_channels", "model");
  P.bottleneck_layers = get<int>(m, "bottleneck_layers", "model");
  P.bottleneck_kernel = get<int>(m, "bottleneck_kernel", "model");
  P.head_temporal_kernel = get<int>(m, "head_temporal_kernel", "model");
  return c;
}

json parse_json(const std::string& text) {
  if (std::all_of(text.begin(), text.end(), [](unsigned char ch) { return std::isspace(ch); })) {
    return json::object();
  }
  try {
    json j = json::parse(text);
    if (!j.is_object()) throw ConfigError("<root>", "document must be an object");
    return j;
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("parse error: ") + e.what());
  }
}

// target_index and eval_stride follow window_length unless given explicitly.
void resolve_derived(json& merged, const json& in) {
  const int t = merged.at("window_length").get<int>();
  if (!in.contains("target_index")) merged["target_index"] = t / 2;
  if (!in.contains("eval_stride")) merged["eval_stride"] = t;
}

}  // namespace

void LossWeights::validate() const {
  bool any = false;
  for (double v : w) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("loss_weights entries must be finite and >= 0");
    any = any || v > 0.0;
  }
  if (!any) throw ValidationError("loss_weights must not be all zero");
}

std::vector<int> StagePlan::temporal_extents(int window_length) const {
  std::vector<int> out;
  int t = window_length;
  for (int p : temporal_pool) {
    t = p > 0 ? t / p : t;
    out.push_back(t);
  }
  return out;
}

void StagePlan::validate(int window_length) const {
  const std::size_t n = channels.size();
  if (n == 0) throw ValidationError("model.channels must have at least one stage");
  if (spatial_kernels.size() != n || temporal_kernels.size() != n || temporal_pool.size() != n ||
      spatial_pool.size() != n) {
    throw ValidationError("model: per-stage lists must all have " + std::to_string(n) + " entries");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (channels[i] <= 0) throw ValidationError("model.channels must be positive");
    if (spatial_kernels[i] <= 0 || spatial_kernels[i] % 2 == 0)
      throw ValidationError("model.spatial_kernels must be positive and odd");
    if (temporal_kernels[i] <= 0 || temporal_kernels[i] % 2 == 0)
      throw ValidationError("model.temporal_kernels must be positive and odd");
    if (temporal_pool[i] <= 0 || spatial_pool[i] <= 0) throw ValidationError("model pooling factors must be positive");
    if (i > 0 && spatial_kernels[i] > spatial_kernels[i - 1])
      throw ValidationError("model.spatial_kernels must be non-increasing with depth");
    if (i > 0 && temporal_kernels[i] > temporal_kernels[i - 1])
      throw ValidationError("model.temporal_kernels must be non-increasing with depth");
  }
  const auto extents = temporal_extents(window_length);
  if (extents.back() != 1) {
    throw ValidationError("model.temporal_pool reduces window_length " + std::to_string(window_length) + " to " +
                          std::to_string(extents.back()) + ", expected exactly 1 at the bottleneck");
  }
  if (std::find(extents.begin(), extents.end(), 0) != extents.end())
    throw ValidationError("model.temporal_pool collapses the temporal extent to 0");
  if (bottleneck_channels <= 0 || bottleneck_layers < 1) throw ValidationError("model bottleneck must be non-empty");
  if (bottleneck_kernel <= 0 || bottleneck_kernel % 2 == 0 || head_temporal_kernel <= 0 || head_temporal_kernel % 2 == 0)
    throw ValidationError("model kernel sizes must be positive and odd");
}

void PipelineConfig::validate() const {
  if (window_length < 1) throw ValidationError("window_length must be >= 1");
  if (height < 1 || width < 1) throw ValidationError("height and width must be positive");
  if (target_index < 0 || target_index >= window_length)
    throw ValidationError("target_index must lie in [0, window_length)");
  if (!(sigma > 0.0)) throw ValidationError("sigma must be > 0");
  if (!(confidence_threshold > 0.0 && confidence_threshold < 1.0))
    throw ValidationError("confidence_threshold must lie in (0, 1)");
  if (!(bce_epsilon > 0.0 && bce_epsilon < 0.5)) throw ValidationError("bce_epsilon must lie in (0, 0.5)");
  loss_weights.validate();
  if (activation_mode == ActivationMode::SoftmaxAxial && loss_weights.w[0] != 0.0)
    throw ValidationError("softmax_axial cannot fit the all-zero out-of-frame target; loss_weights[0] must be 0");
  if (train_stride < 1 || eval_stride < 1) throw ValidationError("strides must be >= 1");
  if (use_flow && window_length < 2) throw ValidationError("use_flow needs window_length >= 2");
  const auto& o = optimizer;
  if (!(o.lr >= 0.0) || !(o.weight_decay >= 0.0)) throw ValidationError("optimizer.lr and weight_decay must be >= 0");
  if (!(o.beta1 >= 0.0 && o.beta1 < 1.0 && o.beta2 >= 0.0 && o.beta2 < 1.0))
    throw ValidationError("optimizer betas must lie in [0, 1)");
  if (o.batch_size < 1) throw ValidationError("optimizer.batch_size must be >= 1");
  if (o.epochs < 0) throw ValidationError("optimizer.epochs must be >= 0");
  if (o.schedule != "cosine" && o.schedule != "constant")
    throw ValidationError("optimizer.schedule must be 'cosine' or 'constant'");
  const auto& a = augment;
  for (double p : {a.occlusion_prob, a.decoy_prob, a.hflip_prob, a.vflip_prob, a.crop_prob, a.jitter_prob})
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("augment probabilities must lie in [0, 1]");
  if (!(a.ball_radius >= 1.0)) throw ValidationError("augment.ball_radius must be >= 1");
  if (!(a.mask_scale_min > 0.0 && a.mask_scale_min <= a.mask_scale_max))
    throw ValidationError("augment mask scale range is empty");
  if (a.ring_margin < 1) throw ValidationError("augment.ring_margin must be >= 1");
  if (a.decoy_count_min < 0 || a.decoy_count_min > a.decoy_count_max)
    throw ValidationError("augment decoy count range is empty");
  if (!(a.crop_min_scale > 0.0 && a.crop_min_scale <= 1.0)) throw ValidationError("augment.crop_min_scale must lie in (0, 1]");
  model.validate(window_length);
}

PipelineConfig parse_config(const std::string& text) {
  const json in = parse_json(text);
  json merged = to_json(PipelineConfig{});
  merge_checked(merged, in, "");
  resolve_derived(merged, in);
  PipelineConfig c = from_json(merged);
  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const PipelineConfig& config) { return to_json(config).dump(2); }

void save_config(const PipelineConfig& config, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write config file " + path.string());
  f << dump_config(config) << '\n';
  if (!f) throw IoError("failed writing config file " + path.string());
}

void set_config_value(PipelineConfig& config, const std::string& key, const std::string& json_value) {
  json value;
  try {
    value = json::parse(json_value);
  } catch (const json::parse_error&) {
    value = json_value;  // bare strings such as softmax_axial
  }
  json patch = json::object();
  json* cursor = &patch;
  std::string rest = key;
  for (std::size_t dot; (dot = rest.find('.')) != std::string::npos;) {
    cursor = &(*cursor)[rest.substr(0, dot)];
    rest = rest.substr(dot + 1);
  }
  (*cursor)[rest] = value;

  json merged = to_json(config);
  merge_checked(merged, patch, "");
  if (key == "window_length") {
    merged["target_index"] = merged["window_length"].get<int>() / 2;
    merged["eval_stride"] = merged["window_length"];
  }
  PipelineConfig next = from_json(merged);
  next.validate();
  config = std::move(next);
}

void apply_ablation(PipelineConfig& config, const std::string& spec) {
  PipelineConfig c = config;  // left untouched on error
  c.use_weighted_bce = false;
  c.use_occlusion_aug = false;
  c.use_flow = false;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ',');) {
    item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char ch) { return std::isspace(ch); }),
               item.end());
    if (item.empty()) continue;
    if (item == "wbce") c.use_weighted_bce = true;
    else if (item == "aug") c.use_occlusion_aug = true;
    else if (item == "of") c.use_flow = true;
    else throw ConfigError("ablation", "unknown toggle '" + item + "' (expected wbce, aug, of)");
  }
  config = std::move(c);
}

std::string_view to_string(ActivationMode m) noexcept { return enum_name(kActivationNames, m); }

}  // namespace totnet

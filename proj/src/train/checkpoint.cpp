#include "train/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>

#include <zlib.h>

#include "core/errors.hpp"

namespace totnet {

namespace fs = std::filesystem;

namespace {

class Writer {
 public:
  template <typename T>
  void put(const T& v) {
    const auto* p = reinterpret_cast<const char*>(&v);
    buf_.append(p, sizeof(T));
  }
  void put_bytes(const void* p, std::size_t n) { buf_.append(static_cast<const char*>(p), n); }
  void put_string(const std::string& s) {
    put(static_cast<std::uint32_t>(s.size()));
    buf_ += s;
  }
  std::string& str() { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  Reader(const std::string& data, std::string section) : data_(data), section_(std::move(section)) {}
  template <typename T>
  T get() {
    T v;
    std::memcpy(&v, take(sizeof(T)), sizeof(T));
    return v;
  }
  const char* take(std::size_t n) {
    if (n > data_.size() - pos_) throw CheckpointError(section_, "truncated data");
    const char* p = data_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::string get_string() {
    const auto n = get<std::uint32_t>();
    return std::string(take(n), n);
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  const std::string& data_;
  std::string section_;
  std::size_t pos_ = 0;
};

std::uint32_t crc(const std::string& s) {
  return static_cast<std::uint32_t>(::crc32(0L, reinterpret_cast<const Bytef*>(s.data()), static_cast<uInt>(s.size())));
}

std::string encode_tensors(const NamedTensors& tensors) {
  Writer w;
  w.put(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    const torch::Tensor c = t.detach().to(torch::kCPU).contiguous();
    w.put_string(name);
    w.put(static_cast<std::int8_t>(c.scalar_type()));
    w.put(static_cast<std::uint32_t>(c.dim()));
    for (int64_t d : c.sizes()) w.put(static_cast<std::int64_t>(d));
    const std::uint64_t bytes = static_cast<std::uint64_t>(c.numel()) * c.element_size();
    w.put(bytes);
    w.put_bytes(c.data_ptr(), bytes);
  }
  return std::move(w.str());
}

NamedTensors decode_tensors(const std::string& payload, const std::string& section) {
  Reader r(payload, section);
  NamedTensors out;
  const auto n = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string name = r.get_string();
    const auto type = static_cast<torch::ScalarType>(r.get<std::int8_t>());
    if (type != torch::kFloat && type != torch::kDouble && type != torch::kLong)
      throw CheckpointError(section, "unsupported dtype for '" + name + "'");
    const auto dims = r.get<std::uint32_t>();
    if (dims > 8) throw CheckpointError(section, "bad rank for '" + name + "'");
    std::vector<int64_t> sizes;
    for (std::uint32_t d = 0; d < dims; ++d) sizes.push_back(r.get<std::int64_t>());
    const auto bytes = r.get<std::uint64_t>();
    torch::Tensor t = torch::empty(sizes, torch::TensorOptions().dtype(type));
    if (bytes != static_cast<std::uint64_t>(t.numel()) * t.element_size())
      throw CheckpointError(section, "size mismatch for '" + name + "'");
    std::memcpy(t.data_ptr(), r.take(bytes), bytes);
    out.emplace_back(std::move(name), std::move(t));
  }
  if (!r.done()) throw CheckpointError(section, "trailing bytes");
  return out;
}

NamedTensors clone_all(const std::vector<std::pair<std::string, torch::Tensor>>& in) {
  NamedTensors out;
  for (const auto& [n, t] : in) out.emplace_back(n, t.detach().clone());
  return out;
}

NamedTensors named(const torch::OrderedDict<std::string, torch::Tensor>& dict) {
  NamedTensors out;
  for (const auto& item : dict) out.emplace_back(item.key(), item.value());
  return out;
}

void copy_into(const torch::OrderedDict<std::string, torch::Tensor>& dst, const NamedTensors& src,
               const std::string& section) {
  if (dst.size() != src.size())
    throw CheckpointError(section, "expected " + std::to_string(dst.size()) + " tensors, found " +
                                       std::to_string(src.size()));
  std::map<std::string, const torch::Tensor*> by_name;
  for (const auto& [n, t] : src) by_name[n] = &t;
  torch::NoGradGuard no_grad;
  for (const auto& item : dst) {
    auto it = by_name.find(item.key());
    if (it == by_name.end()) throw CheckpointError(section, "missing tensor '" + item.key() + "'");
    torch::Tensor target = item.value();
    if (!target.sizes().equals(it->second->sizes()))
      throw CheckpointError(section, "shape mismatch for '" + item.key() + "'");
    target.copy_(*it->second);
  }
}

}  // namespace

nlohmann::json to_json(const TrainingState& s) {
  return {{"epoch", s.epoch},
          {"global_step", s.global_step},
          {"best_metric", s.best_metric},
          {"best_loss", s.best_loss},
          {"best_epoch", s.best_epoch},
          {"epochs_without_improvement", s.epochs_without_improvement},
          {"stopped_early", s.stopped_early}};
}

TrainingState training_state_from_json(const nlohmann::json& j) {
  TrainingState s;
  s.epoch = j.at("epoch").get<int>();
  s.global_step = j.at("global_step").get<std::int64_t>();
  s.best_metric = j.at("best_metric").get<double>();
  s.best_loss = j.at("best_loss").get<double>();
  s.best_epoch = j.at("best_epoch").get<int>();
  s.epochs_without_improvement = j.at("epochs_without_improvement").get<int>();
  s.stopped_early = j.at("stopped_early").get<bool>();
  return s;
}

CheckpointData capture(const TotNet& model, const PipelineConfig& config, const AdamW* optimizer,
                       const TrainingState& state) {
  CheckpointData d;
  d.config = config;
  d.weights = clone_all(named(model->named_parameters()));
  d.buffers = clone_all(named(model->named_buffers()));
  if (optimizer) {
    d.optimizer_moments = clone_all(optimizer->state());
    d.optimizer_steps = optimizer->steps();
  }
  d.state = state;
  return d;
}

void save_checkpoint(const CheckpointData& data, const fs::path& path) {
  std::vector<std::pair<std::string, std::string>> sections;
  sections.emplace_back("config", dump_config(data.config));
  sections.emplace_back("weights", encode_tensors(data.weights));
  sections.emplace_back("buffers", encode_tensors(data.buffers));
  {
    Writer w;
    w.put(static_cast<std::int64_t>(data.optimizer_steps));
    w.str() += encode_tensors(data.optimizer_moments);
    sections.emplace_back("optimizer", std::move(w.str()));
  }
  sections.emplace_back("state", to_json(data.state).dump());

  Writer out;
  out.put_bytes(kCheckpointMagic, sizeof kCheckpointMagic);
  out.put(kCheckpointVersion);
  out.put(static_cast<std::uint32_t>(sections.size()));
  for (const auto& [name, payload] : sections) {
    out.put_string(name);
    out.put(static_cast<std::uint64_t>(payload.size()));
    out.put(crc(payload));
    out.put_bytes(payload.data(), payload.size());
  }

  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write checkpoint " + tmp.string());
    f.write(out.str().data(), static_cast<std::streamsize>(out.str().size()));
    if (!f) throw IoError("failed writing checkpoint " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into place at " + path.string() + ": " + ec.message());
}

CheckpointData load_checkpoint(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError("header", "cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  Reader r(bytes, "header");
  if (std::memcmp(r.take(sizeof kCheckpointMagic), kCheckpointMagic, sizeof kCheckpointMagic) != 0)
    throw CheckpointError("header", path.string() + " is not a checkpoint");
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw CheckpointError("header", "format version " + std::to_string(version) + " unsupported (expected " +
                                        std::to_string(kCheckpointVersion) + ")");
  const auto count = r.get<std::uint32_t>();
  std::map<std::string, std::string> sections;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.get_string();
    const auto size = r.get<std::uint64_t>();
    const auto expected_crc = r.get<std::uint32_t>();
    std::string payload(r.take(size), size);
    if (crc(payload) != expected_crc) throw CheckpointError(name, "checksum mismatch");
    sections[name] = std::move(payload);
  }
  auto section = [&](const std::string& name) -> const std::string& {
    auto it = sections.find(name);
    if (it == sections.end()) throw CheckpointError(name, "section missing");
    return it->second;
  };

  CheckpointData d;
  try {
    d.config = parse_config(section("config"));
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError("config", e.what());
  }
  d.weights = decode_tensors(section("weights"), "weights");
  d.buffers = decode_tensors(section("buffers"), "buffers");
  {
    const std::string& opt = section("optimizer");
    Reader o(opt, "optimizer");
    d.optimizer_steps = o.get<std::int64_t>();
    d.optimizer_moments = decode_tensors(opt.substr(sizeof(std::int64_t)), "optimizer");
  }
  try {
    d.state = training_state_from_json(nlohmann::json::parse(section("state")));
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError("state", e.what());
  }
  return d;
}

void restore_model(TotNet& model, const CheckpointData& data) {
  copy_into(model->named_parameters(), data.weights, "weights");
  copy_into(model->named_buffers(), data.buffers, "buffers");
}

TotNet model_from_checkpoint(const CheckpointData& data) {
  TotNet model = build_model(data.config);
  restore_model(model, data);
  return model;
}

}  // namespace totnet

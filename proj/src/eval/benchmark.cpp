#include "eval/benchmark.hpp"

#include <chrono>
#include <optional>

#include "core/errors.hpp"

namespace totnet::eval {

Throughput benchmark_throughput(TotNet& model, const PipelineConfig& config, int n_windows) {
  if (n_windows <= 0) throw ContractViolation("benchmark needs at least one window");
  torch::NoGradGuard no_grad;
  model->eval();
  torch::manual_seed(config.seed);
  const int64_t t = config.window_length;
  auto make = [&] {
    std::pair<torch::Tensor, std::optional<torch::Tensor>> in{torch::rand({1, t, 3, config.height, config.width}),
                                                              std::nullopt};
    if (model->uses_flow()) in.second = torch::randn({1, t - 1, 2, config.height, config.width});
    return in;
  };
  const auto warm = make();
  model->forward(warm.first, warm.second);

  std::vector<std::pair<torch::Tensor, std::optional<torch::Tensor>>> inputs;
  for (int i = 0; i < n_windows; ++i) inputs.push_back(make());
  const auto start = std::chrono::steady_clock::now();
  for (const auto& in : inputs) model->forward(in.first, in.second);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  Throughput r;
  r.parameters = count_parameters(*model);
  r.params_millions = static_cast<double>(r.parameters) / 1e6;
  r.windows = n_windows;
  r.seconds = secs;
  r.windows_per_second = secs > 0 ? n_windows / secs : 0.0;
  // Each window yields predictions for all of its frames.
  r.frames_per_second = r.windows_per_second * static_cast<double>(t);
  return r;
}

}  // namespace totnet::eval

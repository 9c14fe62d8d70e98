#pragma once

#include <cstdint>

#include "core/config.hpp"
#include "model/network.hpp"

namespace totnet::eval {

struct Throughput {
  double params_millions = 0.0;
  std::int64_t parameters = 0;
  int windows = 0;
  double seconds = 0.0;
  double windows_per_second = 0.0;
  double frames_per_second = 0.0;
};

/// Times inference on `n_windows` seeded random windows, one at a time, after one warm-up pass.
/// Flow, when the model uses it, is random too: only the network is timed.
Throughput benchmark_throughput(TotNet& model, const PipelineConfig& config, int n_windows);

}  // namespace totnet::eval

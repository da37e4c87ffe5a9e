#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "kdelinalg/kde.hpp"
#include "kdelinalg/kernels.hpp"

namespace kdelinalg {

enum class Command { Mvp, Matmul, Quadform, Topeig, Sum, Estimator, Gen, Adversary };

std::string_view to_string(Command c);
Command parse_command(std::string_view name);

struct ExperimentConfig {
  Command command = Command::Mvp;
  KernelSpec kernel;
  double eps = 0.1;
  KdeBackend backend = KdeBackend::Sampling;
  std::uint64_t seed = 0;
  std::size_t trials = 1;
  std::optional<std::string> input_path;
  std::optional<std::string> gen_spec;
  bool oracle = false;
  bool strict = false;
  std::optional<std::string> output_path;

  // Command-specific knobs.
  std::string vector = "random";  // mvp, quadform: random | ones | e1
  std::size_t cols = 4;           // matmul
  double q = 0.0;                 // estimator; 0 selects min(4/(eps^2 sqrt n), 1)
  bool median = false;            // sum: median of ceil(ln n) runs per trial
  std::string mode = "stagnation";  // adversary: stagnation | iteration-lb | signed
  std::size_t n = 10000;          // adversary
  std::optional<double> delta;    // adversary
  std::optional<std::string> points_path;  // gen: CSV destination

  void validate() const;
};

struct RunResult {
  nlohmann::json report;
  bool all_passed = true;  // false when some trial failed its contract
};

RunResult run(const ExperimentConfig& config);

// Report without wall-time fields, for determinism comparisons.
nlohmann::json strip_timings(nlohmann::json report);

}  // namespace kdelinalg

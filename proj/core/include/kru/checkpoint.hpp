#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kru/cells.hpp"
#include "kru/training.hpp"

namespace kru {

struct OptimizerSnapshot {
  OptimizerConfig config;
  std::uint64_t steps = 0;
  std::vector<Matrix> first;
  std::vector<Matrix> second;
};

OptimizerSnapshot snapshot(const Optimizer& opt);
/// Optimizer over `params` with its accumulators and step count restored.
Optimizer restore(const OptimizerSnapshot& s, const CellParameters& params);

/// Everything needed to evaluate or resume a run.
///
/// On disk: a JSON manifest plus a sibling `.bin` payload of little-endian float64 values, the
/// parameters in declaration order (complex entries as re, im pairs) followed by optimizer
/// accumulators.
struct Checkpoint {
  std::string config_hash;
  std::string task;
  std::string metric;
  std::uint64_t step = 0;
  std::uint64_t epoch = 0;
  /// RNG state: the run seed plus the number of updates drawn from the data streams.
  std::uint64_t seed = 0;
  std::uint64_t counter = 0;
  double learning_rate = 0.0;
  std::vector<double> metric_history;
  std::optional<double> best_metric;
  std::uint64_t best_step = 0;
  CellParameters params;
  std::optional<OptimizerSnapshot> optimizer;
};

/// Writes `<stem>.json` and `<stem>.bin` atomically; `manifest` is the .json path.
void save_checkpoint(const std::filesystem::path& manifest, const Checkpoint& ckpt);
/// Throws DataError on missing files, malformed manifests or payload size mismatches.
Checkpoint load_checkpoint(const std::filesystem::path& manifest);

/// Parameter payload bytes exactly as stored in a checkpoint.
std::string parameter_payload(const CellParameters& p);

/// Writes through a temporary file in the same directory and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);

}  // namespace kru

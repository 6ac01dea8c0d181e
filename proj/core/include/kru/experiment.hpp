#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "kru/cells.hpp"
#include "kru/config.hpp"
#include "kru/diagnostics.hpp"
#include "kru/tasks.hpp"

namespace kru {

enum class Split : std::uint8_t { train, valid, test };

/// Materialized data for one task: batches by global update index and split evaluation.
class TaskData {
 public:
  explicit TaskData(const RunConfig& cfg);
  ~TaskData();
  TaskData(TaskData&&) noexcept;
  TaskData& operator=(TaskData&&) noexcept;

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t updates_per_epoch() const;
  /// Training batch for global update u (epoch u / updates_per_epoch()).
  TaskBatch train_batch(std::size_t u) const;
  /// charlm carries hidden state from one window to the next within an epoch.
  bool carries_state() const;
  bool has_split(Split s) const;
  /// Validation or test metric of `p` (cross entropy, MSE, accuracy or BPC by task).
  double evaluate(const CellParameters& p, Split s, const KronOptions& kron = {}) const;
  /// A small fixed batch from the validation split, for diagnostics.
  TaskBatch probe_batch(std::size_t rows) const;
  /// Extra run metadata (pixel permutation, vocabulary size, ...), as a JSON object string.
  std::string metadata_json() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct CurveRow {
  std::size_t step = 0;
  double train_loss = 0.0;
  std::optional<double> valid_metric;
  double lr = 0.0;
  double penalty = 0.0;
  double wallclock_s = 0.0;
};

std::string curve_csv(const std::vector<CurveRow>& rows);

struct TrainOptions {
  /// Write curve, checkpoints and summary under cfg.out_dir.
  bool write_artifacts = true;
  /// Checkpoint manifest to resume from; its config hash must match.
  std::optional<std::filesystem::path> resume;
  bool evaluate_test = true;
  /// Progress lines; null silences them.
  std::ostream* log = nullptr;
};

struct TrainOutcome {
  CellParameters final_params;
  CellParameters best_params;
  std::string config_hash;
  std::vector<CurveRow> curve;
  std::vector<double> valid_history;
  double best_valid = 0.0;
  std::size_t best_step = 0;
  double final_valid = 0.0;
  std::optional<double> test_metric;
  std::size_t updates = 0;
  bool stopped_early = false;
  double wallclock_s = 0.0;
  /// Summary document as written to summary.json.
  std::string summary_json;
};

/// Runs one training job. Throws ConfigError, DataError or DivergenceError (after writing a
/// divergence.json dump when artifacts are enabled).
TrainOutcome train(const RunConfig& cfg, const TrainOptions& opts = {});

/// Parameter counts split as in the run summary.
struct ParamCounts {
  std::size_t total = 0;
  std::size_t recurrent = 0;
  std::size_t recurrent_trainable = 0;
};
ParamCounts count_parameters(const CellParameters& p);

/// Validation and (when available) test metrics of a checkpoint, as a JSON string. Fails on a
/// config hash mismatch before evaluating anything.
std::string evaluate_checkpoint(const std::filesystem::path& manifest, const RunConfig& cfg);

struct BenchOptions {
  std::vector<std::size_t> sizes = {256, 512, 1024, 2048};
  std::vector<std::string> modes = {"dense", "kron"};
  std::size_t batch = 32;
  std::size_t reps = 21;
  Field field = Field::complex;
  /// Each repetition loops the kernel until at least this long has elapsed.
  double min_rep_seconds = 1e-2;
  std::uint64_t seed = 1;
};

struct BenchRow {
  std::size_t n = 0;
  std::string mode;
  double median_s = 0.0;
  double mad_s = 0.0;
  std::size_t reps = 0;
};

/// Timings of Y = X W^T for X of shape batch x N, dense W or all-2x2 Kronecker W.
std::vector<BenchRow> run_bench(const BenchOptions& opts);
std::string bench_csv(const std::vector<BenchRow>& rows);
/// time(2N) / time(N) of consecutive sizes for one mode.
std::vector<double> doubling_ratios(const std::vector<BenchRow>& rows, const std::string& mode);

/// Spectral report plus parameter counts of a model, as JSON.
std::string diagnostics_json(const CellParameters& p);

/// One training job per lambda with a shared seed. Per-run failures are recorded in the row.
std::vector<SweepRow> amplitude_sweep(const RunConfig& base, const std::vector<double>& lambdas,
                                      std::ostream* log = nullptr);

}  // namespace kru

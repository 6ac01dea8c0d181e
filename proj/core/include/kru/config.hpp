#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kru/cells.hpp"
#include "kru/tasks.hpp"
#include "kru/training.hpp"

namespace kru {

/// Schema or consistency problem in a run configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class TaskKind : std::uint8_t { copy, adding, mnist, mnist_permuted, charlm };
const char* to_string(TaskKind k);
TaskKind task_kind_from_string(const std::string& s);

struct TaskConfig {
  TaskKind kind = TaskKind::copy;
  /// Sequence length parameter of the synthetic tasks.
  std::size_t T = 100;
  std::size_t train_size = 100000;
  std::size_t valid_size = 1000;
  std::size_t test_size = 10000;
  /// MNIST: IDX files. The last `mnist_valid` training images are held out for validation.
  std::filesystem::path mnist_images;
  std::filesystem::path mnist_labels;
  std::filesystem::path mnist_test_images;
  std::filesystem::path mnist_test_labels;
  std::size_t mnist_valid = 5000;
  /// Use only the first `mnist_limit` training images (0 keeps all), before the split.
  std::size_t mnist_limit = 0;
  /// Pixel permutation seed for mnist-permuted; defaults to the run seed.
  std::optional<std::uint64_t> permutation_seed;
  std::filesystem::path corpus_train;
  std::filesystem::path corpus_valid;
  std::filesystem::path corpus_test;
};

struct ModelConfig {
  CellKind kind = CellKind::kru;
  Field field = Field::complex;
  std::size_t hidden = 128;
  /// Derived from the task when absent; a mismatch with the task is a config error.
  std::optional<std::size_t> input_dim;
  std::optional<std::size_t> output_dim;
  /// Empty means auto-2x2.
  std::vector<FactorShape> factor_shapes;
  Activation activation = Activation::modrelu;
  bool frozen_recurrent = false;
  /// Apply the soft unitary penalty to LSTM variants too.
  bool penalize_lstm = false;
};

struct ScheduleConfig {
  /// Update budget; 0 means use `epochs`.
  std::size_t updates = 0;
  std::size_t epochs = 0;
  std::size_t batch_size = 20;
  /// Truncated BPTT window; 0 is the full sequence.
  std::size_t bptt_window = 0;
  double lr_decay_factor = 0.3;
  /// Multiply the learning rate by lr_decay_factor whenever validation fails to improve.
  bool plateau = false;
  std::optional<double> gradient_clip;
  double unitary_amplitude = 0.0;
  std::size_t log_every = 100;
  /// Validation cadence in updates; 0 validates once per epoch.
  std::size_t eval_every = 0;
  /// Checkpoint cadence in updates; 0 checkpoints at every validation.
  std::size_t checkpoint_every = 0;
  /// Rows per forward pass during evaluation.
  std::size_t eval_batch = 500;
  /// Stop once the validation metric reaches this value (direction follows the task metric).
  std::optional<double> stop_at;
};

struct RunConfig {
  TaskConfig task;
  ModelConfig model;
  OptimizerConfig optimizer;
  ScheduleConfig schedule;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::filesystem::path out_dir = "runs/default";
};

/// Parses a JSON document. Unknown keys, wrong types and inconsistent combinations raise
/// ConfigError naming the offending key. Relative paths resolve against `base_dir`.
RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
/// Normalized JSON form (every key present).
std::string run_config_to_json(const RunConfig& cfg);

/// Input and output widths implied by the task (charlm needs the corpus for its vocabulary).
std::size_t task_input_dim(const RunConfig& cfg, std::size_t vocab = 0);
std::size_t task_output_dim(const RunConfig& cfg, std::size_t vocab = 0);
LossKind task_loss(TaskKind k);
/// True when a larger validation metric is better (accuracy); losses and BPC are minimized.
bool higher_is_better(TaskKind k);
const char* metric_name(TaskKind k);

/// Cell shape for the run given the resolved input/output widths.
CellShape cell_shape(const RunConfig& cfg, std::size_t input_dim, std::size_t output_dim);

/// FNV-1a (64-bit) over the canonical model and task identity, as 16 hex digits.
std::string config_hash(const RunConfig& cfg, std::size_t input_dim, std::size_t output_dim);
std::uint64_t fnv1a64(const std::string& bytes);

/// Name of the environment variable that overrides the output directory.
inline constexpr const char* kOutDirEnv = "KRU_OUT_DIR";

}  // namespace kru

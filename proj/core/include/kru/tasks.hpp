#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kru/linalg.hpp"

namespace kru {

/// Input or file problems: bad magic numbers, truncated files, unreadable corpora.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class LossKind : std::uint8_t { cross_entropy, mse };

/// One minibatch of a sequence task. All tensors are row-major [batch][step][...].
struct TaskBatch {
  std::size_t batch = 0;
  std::size_t steps = 0;
  std::size_t input_dim = 0;
  LossKind loss = LossKind::cross_entropy;
  /// Number of classes (cross entropy) or regression width (mse).
  std::size_t output_dim = 0;
  std::vector<double> inputs;
  /// batch * steps class indices; -1 where no class target exists.
  std::vector<int> class_targets;
  /// batch * steps * output_dim regression targets.
  std::vector<double> real_targets;
  /// batch * steps; nonzero where the loss is evaluated.
  std::vector<std::uint8_t> loss_mask;

  double input(std::size_t b, std::size_t t, std::size_t d) const {
    return inputs[(b * steps + t) * input_dim + d];
  }
  bool masked(std::size_t b, std::size_t t) const { return loss_mask[b * steps + t] != 0; }
  int class_target(std::size_t b, std::size_t t) const { return class_targets[b * steps + t]; }

  /// Inputs at step t as a real batch x input_dim matrix.
  Matrix input_at(std::size_t t) const;
  /// Steps [t0, t1) as a standalone batch.
  TaskBatch slice(std::size_t t0, std::size_t t1) const;
  std::size_t loss_count() const;
  /// Throws DimensionError when tensor sizes or class indices are inconsistent.
  void validate() const;
};

/// Snapshot of a batch as JSON, for fixtures and debugging.
std::string batch_to_json(const TaskBatch& batch);

inline constexpr std::size_t kCopyClasses = 10;
inline constexpr int kCopyBlank = 0;
inline constexpr int kCopyDelimiter = 9;
inline constexpr std::size_t kCopySymbols = 10;

/// Copy memory: length T + 20, 10 symbols from {1..8}, T - 1 blanks, the delimiter, 10 blanks.
/// Targets are T + 10 blanks followed by the 10 symbols; every step carries loss.
/// Sample i of a batch is generated from (seed, first_index + i) alone.
TaskBatch gen_copy_batch(std::size_t T, std::size_t batch, std::uint64_t seed,
                         std::uint64_t first_index = 0);
/// Expected cross entropy (nats) of the best input-ignoring predictor: 10 ln 8 / (T + 20).
double copy_memoryless_baseline(std::size_t T);

/// Adding problem: D = 2 inputs (value ~ U[0,1], marker). One marker in [0, T/2), one in
/// [T/2, T); the target is the sum of the two marked values, scored at the final step only.
TaskBatch gen_adding_batch(std::size_t T, std::size_t batch, std::uint64_t seed,
                           std::uint64_t first_index = 0);

/// Raw IDX images and labels.
struct ImageDataset {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;
  std::vector<std::uint8_t> labels;
  /// Pixel order shown to the network; empty means identity.
  std::vector<std::uint32_t> permutation;

  std::size_t sequence_length() const { return rows * cols; }
  /// Pixel intensity in [0, 1] of image i at sequence position t (after permutation).
  double pixel(std::size_t i, std::size_t t) const;
  /// Images [begin, end) as a new dataset sharing the permutation.
  ImageDataset subset(std::size_t begin, std::size_t end) const;
};

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

ImageDataset load_mnist_idx(const std::filesystem::path& images, const std::filesystem::path& labels);
void write_mnist_idx(const ImageDataset& data, const std::filesystem::path& images,
                     const std::filesystem::path& labels);

struct MnistSplit {
  ImageDataset train;
  ImageDataset valid;
};

/// The last `valid_count` images become the validation split.
MnistSplit split_train_valid(const ImageDataset& data, std::size_t valid_count = 5000);

/// One fixed bijection of 0..n-1; std::nullopt gives the identity (unpermuted task).
std::vector<std::uint32_t> pixel_permutation(std::size_t n, std::optional<std::uint64_t> seed);
ImageDataset permute_pixels(ImageDataset data, std::optional<std::uint64_t> seed);

/// Images at `indices` as a batch of length-784 scalar sequences, class scored at the last step.
TaskBatch mnist_batch(const ImageDataset& data, const std::vector<std::size_t>& indices);

/// Byte-level corpus with a vocabulary built from the training split plus one unknown bucket.
struct CorpusSplit {
  std::vector<int> vocab;              // byte -> index, -1 when unseen
  std::vector<unsigned char> symbols;  // index -> byte
  std::vector<int> train;
  std::vector<int> valid;
  std::vector<int> test;

  /// Known symbols plus the unknown bucket.
  std::size_t vocab_size() const { return symbols.size() + 1; }
  int unk() const { return static_cast<int>(symbols.size()); }
  std::vector<int> encode(const std::string& text) const;
};

CorpusSplit build_corpus(const std::string& train, const std::string& valid, const std::string& test);
CorpusSplit load_char_corpus(const std::filesystem::path& train, const std::filesystem::path& valid,
                             const std::filesystem::path& test);

/// Contiguous per-lane batching of one stream, so hidden state can carry across windows.
///
/// The stream is cut into `lanes` contiguous pieces of near-equal length; window k holds steps
/// [k * window, (k + 1) * window) of every lane. Each character is an input exactly once per
/// pass; its target is the next character of the stream (the last character has none).
class CharWindows {
 public:
  CharWindows(const std::vector<int>& stream, std::size_t vocab_size, std::size_t lanes,
              std::size_t window);

  std::size_t num_windows() const { return num_windows_; }
  TaskBatch window(std::size_t k) const;

 private:
  const std::vector<int>* stream_;
  std::size_t vocab_size_;
  std::size_t lanes_;
  std::size_t window_;
  std::vector<std::size_t> lane_begin_;
  std::vector<std::size_t> lane_len_;
  std::size_t num_windows_ = 0;
};

/// Bits per character from a mean cross entropy in nats.
double bits_per_char(double nats);

}  // namespace kru

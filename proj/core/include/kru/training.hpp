#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kru/cells.hpp"
#include "kru/tasks.hpp"

namespace kru {

/// Raised when the loss stops being finite.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LossAndGrad {
  double loss = 0.0;
  Matrix grad;
};

/// Softmax cross entropy in nats over a 1 x C row of real logits; grad = softmax - onehot.
LossAndGrad cross_entropy(const Matrix& logits, int target);
/// Mean squared error over equal-shape real matrices and its gradient 2 (pred - target) / n.
LossAndGrad mse(const Matrix& pred, const Matrix& target);

struct BpttOptions {
  /// Truncation window in steps; 0 backpropagates through the whole sequence.
  std::size_t window = 0;
  /// Soft unitary amplitude lambda.
  double unitary_amplitude = 0.0;
  /// LSTM variants take no penalty unless this is set.
  bool penalize_lstm = false;
  bool record_grad_flow = false;
  KronOptions kron;
};

struct BpttResult {
  /// task_loss + penalty.
  double loss = 0.0;
  /// Mean over masked (row, step) pairs.
  double task_loss = 0.0;
  double penalty = 0.0;
  CellParameters grads;
  CellState final_state;
  /// ||dL/dh_t||_F over the batch rows, t = 0..T-1.
  std::vector<double> grad_flow;
  std::size_t loss_count = 0;
  std::size_t correct = 0;
};

/// Whether the soft unitary penalty applies to this cell under opts.
bool penalty_applies(const CellParameters& p, const BpttOptions& opts);
/// lambda-weighted penalty over every recurrent matrix the penalty applies to.
double unitary_penalty(const CellParameters& p, const BpttOptions& opts);

/// Forward over the batch, reverse accumulation of every parameter gradient.
///
/// The task loss is averaged over unmasked (row, step) pairs. With a window, hidden state is
/// carried across windows while gradient flow is cut at their boundaries.
BpttResult bptt_loss_and_grads(const CellParameters& p, const TaskBatch& batch,
                               const BpttOptions& opts = {}, const CellState* initial = nullptr);

struct EvalStats {
  double loss_sum = 0.0;
  std::size_t count = 0;
  std::size_t correct = 0;
  CellState final_state;
  double mean_loss() const { return count == 0 ? 0.0 : loss_sum / static_cast<double>(count); }
  double accuracy() const {
    return count == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(count);
  }
};

/// Forward-only pass accumulating loss and argmax accuracy on masked steps.
EvalStats evaluate_batch(const CellParameters& p, const TaskBatch& batch,
                         const CellState* initial = nullptr, const KronOptions& kron = {});

enum class OptimizerKind : std::uint8_t { rmsprop, adam };
const char* to_string(OptimizerKind k);
OptimizerKind optimizer_kind_from_string(const std::string& s);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::rmsprop;
  double learning_rate = 1e-3;
  /// RMSprop decay rho.
  double decay = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// RMSprop / Adam over every non-frozen tensor of a CellParameters.
///
/// Real and imaginary parts are independent real parameters: each keeps its own accumulator,
/// stored in the matching component of a complex buffer.
class Optimizer {
 public:
  Optimizer(const OptimizerConfig& cfg, const CellParameters& params);

  void step(CellParameters& params, const CellParameters& grads);

  double learning_rate() const { return cfg_.learning_rate; }
  void set_learning_rate(double lr) { cfg_.learning_rate = lr; }
  std::uint64_t steps() const { return steps_; }
  const OptimizerConfig& config() const { return cfg_; }

  /// First and second moment buffers in parameter declaration order (first is empty for RMSprop).
  std::vector<Matrix>& first_moments() { return first_; }
  std::vector<Matrix>& second_moments() { return second_; }
  const std::vector<Matrix>& first_moments() const { return first_; }
  const std::vector<Matrix>& second_moments() const { return second_; }
  void set_steps(std::uint64_t s) { steps_ = s; }

 private:
  OptimizerConfig cfg_;
  std::uint64_t steps_ = 0;
  std::vector<Matrix> first_;
  std::vector<Matrix> second_;
};

/// v <- rho v + (1 - rho) g^2; theta <- theta - lr g / (sqrt(v) + eps), elementwise.
void rmsprop_update(double& theta, double& v, double g, const OptimizerConfig& cfg);
/// Bias-corrected Adam on one scalar; `step` counts from 1.
void adam_update(double& theta, double& m, double& v, double g, std::uint64_t step,
                 const OptimizerConfig& cfg);

/// lr * gamma when the latest metric fails to improve on the best before it, else lr.
double plateau_decay(std::span<const double> history, double lr, double gamma = 0.3,
                     bool higher_is_better = false);

/// Global L2 norm over trainable gradient tensors.
double gradient_norm(const CellParameters& grads);
/// Rescales trainable gradients to norm `threshold` when above it; returns the factor applied.
double clip_gradients(CellParameters& grads, double threshold);

}  // namespace kru

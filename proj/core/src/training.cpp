#include "kru/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kru {

LossAndGrad cross_entropy(const Matrix& logits, int target) {
  const std::size_t c = logits.size();
  if (target < 0 || static_cast<std::size_t>(target) >= c) {
    throw DimensionError("cross_entropy: target " + std::to_string(target) + " outside " +
                         std::to_string(c) + " classes");
  }
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < c; ++i) mx = std::max(mx, logits[i].real());
  double sum = 0.0;
  for (std::size_t i = 0; i < c; ++i) sum += std::exp(logits[i].real() - mx);
  const double lse = mx + std::log(sum);
  LossAndGrad out;
  out.loss = lse - logits[static_cast<std::size_t>(target)].real();
  out.grad = Matrix(logits.rows(), logits.cols(), Field::real);
  for (std::size_t i = 0; i < c; ++i) out.grad[i] = std::exp(logits[i].real() - lse);
  out.grad[static_cast<std::size_t>(target)] -= 1.0;
  return out;
}

LossAndGrad mse(const Matrix& pred, const Matrix& target) {
  require_same_shape(pred, target, "mse");
  LossAndGrad out;
  out.grad = Matrix(pred.rows(), pred.cols(), Field::real);
  const double n = static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i].real() - target[i].real();
    out.loss += d * d / n;
    out.grad[i] = 2.0 * d / n;
  }
  return out;
}

bool penalty_applies(const CellParameters& p, const BpttOptions& opts) {
  if (opts.unitary_amplitude == 0.0) return false;
  return !is_lstm(p.kind) || opts.penalize_lstm;
}

namespace {

double recurrent_penalty(const Recurrent& w, double amplitude) {
  if (const auto* dense = std::get_if<Matrix>(&w)) return soft_unitary_penalty(*dense, amplitude);
  return soft_unitary_penalty(std::get<KroneckerMatrix>(w), amplitude);
}

void add_recurrent_penalty_grad(const Recurrent& w, double amplitude, Recurrent& grad) {
  if (const auto* dense = std::get_if<Matrix>(&w)) {
    axpy_inplace(1.0, soft_unitary_grad(*dense, amplitude), std::get<Matrix>(grad));
    return;
  }
  const auto g = soft_unitary_grad(std::get<KroneckerMatrix>(w), amplitude);
  auto& gk = std::get<KroneckerMatrix>(grad);
  for (std::size_t f = 0; f < g.size(); ++f) axpy_inplace(1.0, g[f], gk.factor(f));
}

// Per-step loss on masked rows; fills grad_y (scaled by `scale`) and returns the summed loss.
double step_loss(const TaskBatch& batch, std::size_t t, const Matrix& y, double scale,
                 Matrix* grad_y, std::size_t* correct) {
  double total = 0.0;
  const std::size_t m = y.cols();
  for (std::size_t b = 0; b < batch.batch; ++b) {
    if (!batch.masked(b, t)) continue;
    Matrix row(1, m, Field::real, std::vector<Complex>(y.row(b), y.row(b) + m));
    LossAndGrad lg;
    if (batch.loss == LossKind::cross_entropy) {
      const int target = batch.class_target(b, t);
      lg = cross_entropy(row, target);
      if (correct != nullptr) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < m; ++i) {
          if (row[i].real() > row[best].real()) best = i;
        }
        if (static_cast<int>(best) == target) ++*correct;
      }
    } else {
      Matrix target(1, m, Field::real);
      for (std::size_t i = 0; i < m; ++i) {
        target[i] = batch.real_targets[(b * batch.steps + t) * batch.output_dim + i];
      }
      lg = mse(row, target);
    }
    total += lg.loss;
    if (grad_y != nullptr) {
      for (std::size_t i = 0; i < m; ++i) (*grad_y)(b, i) = scale * lg.grad[i].real();
    }
  }
  return total;
}

bool step_has_loss(const TaskBatch& batch, std::size_t t) {
  for (std::size_t b = 0; b < batch.batch; ++b) {
    if (batch.masked(b, t)) return true;
  }
  return false;
}

void check_batch(const CellParameters& p, const TaskBatch& batch) {
  batch.validate();
  if (batch.input_dim != p.input_dim) {
    throw DimensionError("batch input dim " + std::to_string(batch.input_dim) +
                         " does not match model input dim " + std::to_string(p.input_dim));
  }
  if (batch.output_dim != p.output_dim) {
    throw DimensionError("batch output dim " + std::to_string(batch.output_dim) +
                         " does not match model output dim " + std::to_string(p.output_dim));
  }
}

}  // namespace

double unitary_penalty(const CellParameters& p, const BpttOptions& opts) {
  if (!penalty_applies(p, opts)) return 0.0;
  if (!is_lstm(p.kind)) return recurrent_penalty(p.W, opts.unitary_amplitude);
  double total = 0.0;
  for (const auto& g : p.gates) total += recurrent_penalty(g.W, opts.unitary_amplitude);
  return total;
}

BpttResult bptt_loss_and_grads(const CellParameters& p, const TaskBatch& batch,
                               const BpttOptions& opts, const CellState* initial) {
  check_batch(p, batch);
  BpttResult res;
  res.grads = zeros_like(p);
  res.loss_count = batch.loss_count();
  const double scale = res.loss_count == 0 ? 0.0 : 1.0 / static_cast<double>(res.loss_count);
  if (opts.record_grad_flow) res.grad_flow.assign(batch.steps, 0.0);

  CellState state = initial != nullptr ? *initial : zero_state(p, batch.batch);
  const std::size_t window = opts.window == 0 ? batch.steps : opts.window;
  double loss_sum = 0.0;

  std::vector<StepCache> caches;
  std::vector<Matrix> grad_y;
  for (std::size_t w0 = 0; w0 < batch.steps; w0 += window) {
    const std::size_t w1 = std::min(batch.steps, w0 + window);
    const std::size_t len = w1 - w0;
    caches.assign(len, StepCache{});
    grad_y.assign(len, Matrix{});
    for (std::size_t k = 0; k < len; ++k) {
      const std::size_t t = w0 + k;
      state = cell_forward(p, state, batch.input_at(t), &caches[k], opts.kron);
      if (!step_has_loss(batch, t)) continue;
      const Matrix y = output_head(p, state.h);
      grad_y[k] = Matrix(batch.batch, p.output_dim, Field::real);
      loss_sum += step_loss(batch, t, y, scale, &grad_y[k], &res.correct);
    }

    CellState grad_state;
    grad_state.h = Matrix(batch.batch, p.hidden_dim, p.field);
    if (is_lstm(p.kind)) grad_state.c = Matrix(batch.batch, p.hidden_dim, Field::real);
    for (std::size_t k = len; k-- > 0;) {
      if (!grad_y[k].empty()) {
        axpy_inplace(1.0, output_head_backward(p, caches[k].h, grad_y[k], res.grads), grad_state.h);
      }
      if (opts.record_grad_flow) res.grad_flow[w0 + k] = frobenius_norm(grad_state.h);
      grad_state = cell_backward(p, caches[k], grad_state, res.grads, opts.kron);
    }
  }

  res.task_loss = loss_sum * scale;
  res.penalty = unitary_penalty(p, opts);
  res.loss = res.task_loss + res.penalty;
  if (!std::isfinite(res.loss)) {
    throw DivergenceError("non-finite loss (task " + std::to_string(res.task_loss) + ", penalty " +
                          std::to_string(res.penalty) + ")");
  }
  if (penalty_applies(p, opts)) {
    if (!is_lstm(p.kind)) {
      add_recurrent_penalty_grad(p.W, opts.unitary_amplitude, res.grads.W);
    } else {
      for (std::size_t g = 0; g < 4; ++g) {
        add_recurrent_penalty_grad(p.gates[g].W, opts.unitary_amplitude, res.grads.gates[g].W);
      }
    }
  }
  res.final_state = std::move(state);
  return res;
}

EvalStats evaluate_batch(const CellParameters& p, const TaskBatch& batch, const CellState* initial,
                         const KronOptions& kron) {
  check_batch(p, batch);
  EvalStats stats;
  CellState state = initial != nullptr ? *initial : zero_state(p, batch.batch);
  for (std::size_t t = 0; t < batch.steps; ++t) {
    state = cell_forward(p, state, batch.input_at(t), nullptr, kron);
    if (!step_has_loss(batch, t)) continue;
    const Matrix y = output_head(p, state.h);
    stats.loss_sum += step_loss(batch, t, y, 0.0, nullptr, &stats.correct);
  }
  stats.count = batch.loss_count();
  stats.final_state = std::move(state);
  return stats;
}

const char* to_string(OptimizerKind k) { return k == OptimizerKind::adam ? "adam" : "rmsprop"; }

OptimizerKind optimizer_kind_from_string(const std::string& s) {
  if (s == "rmsprop") return OptimizerKind::rmsprop;
  if (s == "adam") return OptimizerKind::adam;
  throw std::invalid_argument("unknown optimizer '" + s + "' (expected rmsprop or adam)");
}

void rmsprop_update(double& theta, double& v, double g, const OptimizerConfig& cfg) {
  v = cfg.decay * v + (1.0 - cfg.decay) * g * g;
  theta -= cfg.learning_rate * g / (std::sqrt(v) + cfg.epsilon);
}

void adam_update(double& theta, double& m, double& v, double g, std::uint64_t step,
                 const OptimizerConfig& cfg) {
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
  v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
  const double t = static_cast<double>(step);
  const double m_hat = m / (1.0 - std::pow(cfg.beta1, t));
  const double v_hat = v / (1.0 - std::pow(cfg.beta2, t));
  theta -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
}

Optimizer::Optimizer(const OptimizerConfig& cfg, const CellParameters& params) : cfg_(cfg) {
  for (const auto& v : parameters(params)) {
    second_.emplace_back(v.value->rows(), v.value->cols(), v.value->field());
    if (cfg_.kind == OptimizerKind::adam) {
      first_.emplace_back(v.value->rows(), v.value->cols(), v.value->field());
    }
  }
}

void Optimizer::step(CellParameters& params, const CellParameters& grads) {
  auto pv = parameters(params);
  const auto gv = parameters(grads);
  if (pv.size() != gv.size() || pv.size() != second_.size()) {
    throw DimensionError("optimizer: parameter list does not match its state");
  }
  ++steps_;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    if (pv[i].frozen) continue;
    Matrix& theta = *pv[i].value;
    const Matrix& g = *gv[i].value;
    require_same_shape(theta, g, "optimizer step");
    const bool cplx = !theta.is_real();
    auto* th = reinterpret_cast<double*>(theta.data().data());
    const auto* gr = reinterpret_cast<const double*>(g.data().data());
    auto* v = reinterpret_cast<double*>(second_[i].data().data());
    const std::size_t n = theta.size();
    const std::size_t stride = cplx ? 1 : 2;
    if (cfg_.kind == OptimizerKind::rmsprop) {
      for (std::size_t k = 0; k < 2 * n; k += stride) rmsprop_update(th[k], v[k], gr[k], cfg_);
    } else {
      auto* m = reinterpret_cast<double*>(first_[i].data().data());
      for (std::size_t k = 0; k < 2 * n; k += stride) adam_update(th[k], m[k], v[k], gr[k], steps_, cfg_);
    }
  }
}

double plateau_decay(std::span<const double> history, double lr, double gamma, bool higher_is_better) {
  if (history.size() < 2) return lr;
  const double latest = history.back();
  double best = history.front();
  for (std::size_t i = 1; i + 1 < history.size(); ++i) {
    best = higher_is_better ? std::max(best, history[i]) : std::min(best, history[i]);
  }
  const bool improved = higher_is_better ? latest > best : latest < best;
  return improved ? lr : lr * gamma;
}

double gradient_norm(const CellParameters& grads) {
  double sq = 0.0;
  for (const auto& v : parameters(grads)) {
    if (!v.frozen) sq += frobenius_norm_sq(*v.value);
  }
  return std::sqrt(sq);
}

double clip_gradients(CellParameters& grads, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("clip threshold must be > 0");
  const double norm = gradient_norm(grads);
  if (norm <= threshold) return 1.0;
  const double factor = threshold / norm;
  for (auto& v : parameters(grads)) {
    if (v.frozen) continue;
    for (auto& x : v.value->data()) x *= factor;
  }
  return factor;
}

}  // namespace kru

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "kru/kron.hpp"
#include "kru/linalg.hpp"

namespace kru {

enum class CellKind : std::uint8_t { rnn, kru, lstm, kru_lstm };
enum class Activation : std::uint8_t { tanh, modrelu, identity };

const char* to_string(CellKind k);
CellKind cell_kind_from_string(const std::string& s);
const char* to_string(Activation a);
Activation activation_from_string(const std::string& s);

inline bool is_lstm(CellKind k) { return k == CellKind::lstm || k == CellKind::kru_lstm; }
inline bool is_kronecker(CellKind k) { return k == CellKind::kru || k == CellKind::kru_lstm; }

/// A recurrent matrix: dense N x N or Kronecker-factored.
using Recurrent = std::variant<Matrix, KroneckerMatrix>;

/// One LSTM gate: recurrent W_g, input U_g and bias b_g.
struct GateParams {
  Recurrent W;
  Matrix U;
  Matrix b;
};

enum Gate : std::size_t { kForget = 0, kInput = 1, kOutput = 2, kCandidate = 3 };

/// Full parameter set of one recurrent cell and its output head.
///
/// Shapes: U is N x D, b is 1 x N, modrelu_bias is 1 x N (real), V is M x N for real
/// cells and M x 2N (real, acting on [Re h, Im h]) for complex cells, c is 1 x M (real).
/// LSTM variants leave W/U/b/modrelu_bias empty and use `gates` instead.
struct CellParameters {
  CellKind kind = CellKind::rnn;
  Field field = Field::real;
  Activation activation = Activation::tanh;
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  std::size_t output_dim = 0;

  Recurrent W;
  Matrix U;
  Matrix b;
  Matrix modrelu_bias;
  std::array<GateParams, 4> gates;

  Matrix V;
  Matrix c;

  bool frozen_recurrent = false;
};

/// Named handle on one parameter tensor, in declaration order.
struct ParamView {
  std::string name;
  Matrix* value;
  bool recurrent;
  bool frozen;
};

struct ConstParamView {
  std::string name;
  const Matrix* value;
  bool recurrent;
  bool frozen;
};

std::vector<ParamView> parameters(CellParameters& p);
std::vector<ConstParamView> parameters(const CellParameters& p);

/// Same structure, every tensor zero. Used as a gradient accumulator.
CellParameters zeros_like(const CellParameters& p);

/// c * entries summed over parameter tensors (c = 2 for complex tensors).
std::size_t total_parameter_count(const CellParameters& p);
/// Parameters of the recurrent matrices only; trainable_only drops frozen ones.
std::size_t recurrent_parameter_count(const CellParameters& p, bool trainable_only = false);

/// Validates tensor shapes against (D, N, M); throws DimensionError naming the culprit.
void validate(const CellParameters& p);

struct CellShape {
  CellKind kind = CellKind::kru;
  Field field = Field::complex;
  std::size_t input_dim = 1;
  std::size_t hidden_dim = 2;
  std::size_t output_dim = 1;
  /// Kronecker factor shapes for kru / kru_lstm; empty means auto 2x2.
  std::vector<FactorShape> factor_shapes;
  Activation activation = Activation::tanh;
  bool frozen_recurrent = false;
};

/// Activation matching the field: tanh for real cells, modReLU for complex ones.
Activation default_activation(Field field);

/// Initial parameters. U, V ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)); dense recurrent matrices are
/// orthogonal (unitary); KRU factors are Haar-random unitary; KRU-LSTM factors are
/// I + 0.01 * Gaussian. Biases and modReLU biases start at zero.
CellParameters init_parameters(const CellShape& shape, std::uint64_t seed);

/// Hidden (and, for LSTM variants, cell) state for a batch of rows: B x N.
struct CellState {
  Matrix h;
  Matrix c;
};

CellState zero_state(const CellParameters& p, std::size_t batch);

/// Per entry: z * (|z| + beta) / |z| when |z| + beta > 0, else 0. beta is 1 x N, broadcast over rows.
Matrix modrelu(const Matrix& z, const Matrix& beta);

/// Everything cell_backward needs from one forward step.
struct StepCache {
  Matrix h_prev;
  Matrix c_prev;
  Matrix x;
  /// Pre-activations (RNN/KRU) or activated gates f, i, o, c-hat (LSTM variants).
  std::array<Matrix, 4> act;
  Matrix h;
  Matrix c;
  Matrix tanh_c;
  std::array<KronForwardCache, 4> kron;
};

/// One recurrence step for every row of x (B x D). Fills cache when non-null.
CellState cell_forward(const CellParameters& p, const CellState& prev, const Matrix& x,
                       StepCache* cache = nullptr, const KronOptions& opts = {});

/// Reverse of cell_forward. grad_state holds dL/dh_t (and dL/dc_t); parameter gradients are
/// accumulated into grads and dL/dh_{t-1} (dL/dc_{t-1}) is returned.
CellState cell_backward(const CellParameters& p, const StepCache& cache, const CellState& grad_state,
                        CellParameters& grads, const KronOptions& opts = {});

/// h_t for RNN / KRU cells.
Matrix rnn_step(const CellParameters& p, const Matrix& h_prev, const Matrix& x);
/// (h_t, c_t) for LSTM / KRU-LSTM cells.
CellState lstm_step(const CellParameters& p, const CellState& prev, const Matrix& x);

/// y = V h + c per row; complex h enters as [Re h, Im h].
Matrix output_head(const CellParameters& p, const Matrix& h);
/// Accumulates dV, dc into grads and returns dL/dh.
Matrix output_head_backward(const CellParameters& p, const Matrix& h, const Matrix& grad_y,
                            CellParameters& grads);

}  // namespace kru

#include "kru/cells.hpp"

#include <cmath>
#include <stdexcept>

#include "kru/rng.hpp"

namespace kru {

const char* to_string(CellKind k) {
  switch (k) {
    case CellKind::rnn: return "rnn";
    case CellKind::kru: return "kru";
    case CellKind::lstm: return "lstm";
    case CellKind::kru_lstm: return "kru-lstm";
  }
  return "?";
}

CellKind cell_kind_from_string(const std::string& s) {
  if (s == "rnn") return CellKind::rnn;
  if (s == "kru") return CellKind::kru;
  if (s == "lstm") return CellKind::lstm;
  if (s == "kru-lstm" || s == "kru_lstm") return CellKind::kru_lstm;
  throw std::invalid_argument("unknown model '" + s + "' (expected rnn, kru, lstm or kru-lstm)");
}

const char* to_string(Activation a) {
  switch (a) {
    case Activation::tanh: return "tanh";
    case Activation::modrelu: return "modrelu";
    case Activation::identity: return "identity";
  }
  return "?";
}

Activation activation_from_string(const std::string& s) {
  if (s == "tanh") return Activation::tanh;
  if (s == "modrelu") return Activation::modrelu;
  if (s == "identity" || s == "linear") return Activation::identity;
  throw std::invalid_argument("unknown activation '" + s + "'");
}

Activation default_activation(Field field) {
  return field == Field::complex ? Activation::modrelu : Activation::tanh;
}

namespace {

const char* kGateNames[4] = {"f", "i", "o", "c"};

void push_recurrent(std::vector<ParamView>& out, const std::string& name, Recurrent& w,
                    bool frozen) {
  if (auto* dense = std::get_if<Matrix>(&w)) {
    out.push_back({name, dense, true, frozen});
    return;
  }
  auto& kron = std::get<KroneckerMatrix>(w);
  const bool fz = frozen || kron.frozen();
  for (std::size_t f = 0; f < kron.num_factors(); ++f) {
    out.push_back({name + ".factor" + std::to_string(f), &kron.factor(f), true, fz});
  }
}

std::size_t recurrent_out_dim(const Recurrent& w) {
  if (const auto* dense = std::get_if<Matrix>(&w)) return dense->rows();
  return std::get<KroneckerMatrix>(w).out_dim();
}

std::size_t recurrent_in_dim(const Recurrent& w) {
  if (const auto* dense = std::get_if<Matrix>(&w)) return dense->cols();
  return std::get<KroneckerMatrix>(w).in_dim();
}

Matrix recurrent_forward(const Recurrent& w, const Matrix& h, KronForwardCache* cache,
                         const KronOptions& opts) {
  if (const auto* dense = std::get_if<Matrix>(&w)) return matmul(Op::none, h, Op::trans, *dense);
  const auto& kron = std::get<KroneckerMatrix>(w);
  if (cache == nullptr) return kron_apply(h, kron, opts);
  auto [y, c] = kron_forward(h, kron, opts);
  *cache = std::move(c);
  return std::move(y);
}

// z = h W^T: dW += dZ^T conj(h), dh = dZ conj(W).
Matrix recurrent_backward(const Recurrent& w, const Matrix& h, const KronForwardCache& cache,
                          const Matrix& grad_z, Recurrent& grad_w, const KronOptions& opts) {
  if (const auto* dense = std::get_if<Matrix>(&w)) {
    matmul_accumulate(Op::trans, grad_z, Op::conj, h, std::get<Matrix>(grad_w));
    return matmul(Op::none, grad_z, Op::conj, *dense);
  }
  const auto& kron = std::get<KroneckerMatrix>(w);
  auto g = kron_backward(h, kron, cache, grad_z, opts);
  auto& gk = std::get<KroneckerMatrix>(grad_w);
  for (std::size_t f = 0; f < g.factor_grads.size(); ++f) {
    axpy_inplace(1.0, g.factor_grads[f], gk.factor(f));
  }
  return std::move(g.input_grad);
}

void add_row_bias(Matrix& z, const Matrix& b) {
  if (!b.is_real()) z.set_field(Field::complex);
  for (std::size_t r = 0; r < z.rows(); ++r) {
    Complex* row = z.row(r);
    for (std::size_t j = 0; j < z.cols(); ++j) row[j] += b[j];
  }
}

void accumulate_col_sums(const Matrix& g, Matrix& gb) {
  for (std::size_t r = 0; r < g.rows(); ++r) {
    const Complex* row = g.row(r);
    for (std::size_t j = 0; j < g.cols(); ++j) gb[j] += row[j];
  }
  if (gb.is_real()) gb.set_field(Field::real);
}

// Affine pre-activation W h + U x + b for a batch of rows.
Matrix affine(const Recurrent& w, const Matrix& u, const Matrix& b, const Matrix& h,
              const Matrix& x, KronForwardCache* cache, const KronOptions& opts) {
  Matrix z = recurrent_forward(w, h, cache, opts);
  if (promote(u.field(), x.field()) == Field::complex) z.set_field(Field::complex);
  matmul_accumulate(Op::none, x, Op::trans, u, z);
  add_row_bias(z, b);
  return z;
}

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

void check_lstm_field(const CellParameters& p) {
  if (p.field != Field::real) {
    throw std::invalid_argument(std::string(to_string(p.kind)) + " cells are real-valued only");
  }
}

Matrix uniform_matrix(Rng& rng, std::size_t rows, std::size_t cols, Field field, double bound) {
  Matrix m(rows, cols, field);
  for (auto& v : m.data()) {
    const double re = rng.uniform(-bound, bound);
    const double im = field == Field::complex ? rng.uniform(-bound, bound) : 0.0;
    v = Complex(re, im);
  }
  return m;
}

Recurrent init_recurrent(const CellShape& s, Rng& rng, bool near_identity) {
  if (!is_kronecker(s.kind)) return random_unitary(s.hidden_dim, rng.next_u64(), s.field);
  const auto shapes = s.factor_shapes.empty() ? auto_2x2_shapes(s.hidden_dim) : s.factor_shapes;
  if (!near_identity) {
    KroneckerMatrix w = random_unitary_factors(shapes, rng.next_u64(), s.field);
    w.set_frozen(s.frozen_recurrent);
    return w;
  }
  KroneckerMatrix w = KroneckerMatrix::identity(shapes, s.field);
  for (auto& f : w.factors()) {
    for (auto& v : f.data()) {
      v += Complex(0.01 * rng.normal(), s.field == Field::complex ? 0.01 * rng.normal() : 0.0);
    }
  }
  w.set_frozen(s.frozen_recurrent);
  return w;
}

}  // namespace

std::vector<ParamView> parameters(CellParameters& p) {
  std::vector<ParamView> out;
  const bool fz = p.frozen_recurrent;
  if (is_lstm(p.kind)) {
    for (std::size_t g = 0; g < 4; ++g) {
      const std::string suffix = std::string("_") + kGateNames[g];
      push_recurrent(out, "W" + suffix, p.gates[g].W, fz);
      out.push_back({"U" + suffix, &p.gates[g].U, false, false});
      out.push_back({"b" + suffix, &p.gates[g].b, false, false});
    }
  } else {
    push_recurrent(out, "W", p.W, fz);
    out.push_back({"U", &p.U, false, false});
    out.push_back({"b", &p.b, false, false});
    out.push_back({"modrelu_bias", &p.modrelu_bias, false, false});
  }
  out.push_back({"V", &p.V, false, false});
  out.push_back({"c", &p.c, false, false});
  return out;
}

std::vector<ConstParamView> parameters(const CellParameters& p) {
  auto views = parameters(const_cast<CellParameters&>(p));
  std::vector<ConstParamView> out;
  out.reserve(views.size());
  for (auto& v : views) out.push_back({std::move(v.name), v.value, v.recurrent, v.frozen});
  return out;
}

CellParameters zeros_like(const CellParameters& p) {
  CellParameters z = p;
  for (auto& v : parameters(z)) v.value->set_zero();
  return z;
}

std::size_t total_parameter_count(const CellParameters& p) {
  std::size_t total = 0;
  for (const auto& v : parameters(p)) total += (v.value->is_real() ? 1 : 2) * v.value->size();
  return total;
}

std::size_t recurrent_parameter_count(const CellParameters& p, bool trainable_only) {
  std::size_t total = 0;
  for (const auto& v : parameters(p)) {
    if (!v.recurrent || (trainable_only && v.frozen)) continue;
    total += (v.value->is_real() ? 1 : 2) * v.value->size();
  }
  return total;
}

void validate(const CellParameters& p) {
  const std::size_t n = p.hidden_dim, d = p.input_dim, m = p.output_dim;
  auto expect = [](const Matrix& t, std::size_t r, std::size_t c, const std::string& name) {
    if (t.rows() != r || t.cols() != c) {
      throw DimensionError("parameter " + name + " has shape " + t.shape_string() + ", expected " +
                           std::to_string(r) + "x" + std::to_string(c));
    }
  };
  auto expect_recurrent = [&](const Recurrent& w, const std::string& name) {
    if (recurrent_out_dim(w) != n || recurrent_in_dim(w) != n) {
      throw DimensionError("recurrent matrix " + name + " must be " + std::to_string(n) + "x" +
                           std::to_string(n));
    }
    if (is_kronecker(p.kind) != std::holds_alternative<KroneckerMatrix>(w)) {
      throw DimensionError("recurrent matrix " + name + " has the wrong representation for " +
                           std::string(to_string(p.kind)));
    }
  };
  if (is_lstm(p.kind)) {
    check_lstm_field(p);
    for (std::size_t g = 0; g < 4; ++g) {
      const std::string suffix = std::string("_") + kGateNames[g];
      expect_recurrent(p.gates[g].W, "W" + suffix);
      expect(p.gates[g].U, n, d, "U" + suffix);
      expect(p.gates[g].b, 1, n, "b" + suffix);
    }
  } else {
    expect_recurrent(p.W, "W");
    expect(p.U, n, d, "U");
    expect(p.b, 1, n, "b");
    expect(p.modrelu_bias, 1, n, "modrelu_bias");
  }
  expect(p.V, m, p.field == Field::complex ? 2 * n : n, "V");
  expect(p.c, 1, m, "c");
}

CellParameters init_parameters(const CellShape& s, std::uint64_t seed) {
  CellParameters p;
  p.kind = s.kind;
  p.field = s.field;
  p.activation = s.activation;
  p.input_dim = s.input_dim;
  p.hidden_dim = s.hidden_dim;
  p.output_dim = s.output_dim;
  p.frozen_recurrent = s.frozen_recurrent;
  if (is_lstm(s.kind) && s.field != Field::real) {
    throw std::invalid_argument(std::string(to_string(s.kind)) + " cells are real-valued only");
  }
  Rng rng(seed, Stream::init);
  const double u_bound = 1.0 / std::sqrt(static_cast<double>(s.input_dim));
  const std::size_t head_in = s.field == Field::complex ? 2 * s.hidden_dim : s.hidden_dim;
  if (is_lstm(s.kind)) {
    for (auto& g : p.gates) {
      g.W = init_recurrent(s, rng, s.kind == CellKind::kru_lstm);
      g.U = uniform_matrix(rng, s.hidden_dim, s.input_dim, s.field, u_bound);
      g.b = Matrix(1, s.hidden_dim, s.field);
    }
  } else {
    p.W = init_recurrent(s, rng, false);
    p.U = uniform_matrix(rng, s.hidden_dim, s.input_dim, s.field, u_bound);
    p.b = Matrix(1, s.hidden_dim, s.field);
    p.modrelu_bias = Matrix(1, s.hidden_dim, Field::real);
  }
  p.V = uniform_matrix(rng, s.output_dim, head_in, Field::real,
                       1.0 / std::sqrt(static_cast<double>(head_in)));
  p.c = Matrix(1, s.output_dim, Field::real);
  validate(p);
  return p;
}

CellState zero_state(const CellParameters& p, std::size_t batch) {
  CellState s;
  s.h = Matrix(batch, p.hidden_dim, p.field);
  if (is_lstm(p.kind)) s.c = Matrix(batch, p.hidden_dim, Field::real);
  return s;
}

Matrix modrelu(const Matrix& z, const Matrix& beta) {
  if (beta.size() != z.cols()) {
    throw DimensionError("modrelu: bias " + beta.shape_string() + " vs input " + z.shape_string());
  }
  Matrix out(z.rows(), z.cols(), z.field());
  for (std::size_t r = 0; r < z.rows(); ++r) {
    const Complex* zr = z.row(r);
    Complex* o = out.row(r);
    for (std::size_t j = 0; j < z.cols(); ++j) {
      const double mag = std::sqrt(std::norm(zr[j]));
      const double shifted = mag + beta[j].real();
      o[j] = (mag > 0.0 && shifted > 0.0) ? zr[j] * (shifted / mag) : Complex{};
    }
  }
  return out;
}

namespace {

Matrix activate(Activation a, const Matrix& z, const Matrix& beta) {
  switch (a) {
    case Activation::identity: return z;
    case Activation::modrelu: return modrelu(z, beta);
    case Activation::tanh: {
      if (!z.is_real()) throw std::invalid_argument("tanh activation needs a real field");
      Matrix h(z.rows(), z.cols(), Field::real);
      for (std::size_t i = 0; i < z.size(); ++i) h[i] = std::tanh(z[i].real());
      return h;
    }
  }
  return z;
}

// dL/dz from dL/dh; accumulates the modReLU bias gradient.
Matrix activate_backward(Activation a, const Matrix& z, const Matrix& h, const Matrix& beta,
                         const Matrix& grad_h, Matrix* grad_beta) {
  Matrix gz(z.rows(), z.cols(), promote(z.field(), grad_h.field()));
  switch (a) {
    case Activation::identity:
      return grad_h;
    case Activation::tanh:
      for (std::size_t i = 0; i < z.size(); ++i) {
        const double hv = h[i].real();
        gz[i] = grad_h[i].real() * (1.0 - hv * hv);
      }
      gz.set_field(Field::real);
      return gz;
    case Activation::modrelu:
      for (std::size_t r = 0; r < z.rows(); ++r) {
        for (std::size_t j = 0; j < z.cols(); ++j) {
          const Complex zv = z(r, j);
          const double mag = std::sqrt(std::norm(zv));
          const double b = beta[j].real();
          if (!(mag > 0.0) || mag + b <= 0.0) continue;
          const Complex u = zv / mag;
          const Complex gh = grad_h(r, j);
          const double along = (std::conj(u) * gh).real();
          gz(r, j) = gh + (b / mag) * (gh - along * u);
          if (grad_beta != nullptr) (*grad_beta)[j] += along;
        }
      }
      if (z.is_real()) gz.set_field(Field::real);
      return gz;
  }
  return gz;
}

}  // namespace

CellState cell_forward(const CellParameters& p, const CellState& prev, const Matrix& x,
                       StepCache* cache, const KronOptions& opts) {
  if (x.cols() != p.input_dim) {
    throw DimensionError("cell input " + x.shape_string() + " expected " +
                         std::to_string(p.input_dim) + " columns");
  }
  if (prev.h.cols() != p.hidden_dim || prev.h.rows() != x.rows()) {
    throw DimensionError("hidden state " + prev.h.shape_string() + " does not match batch " +
                         std::to_string(x.rows()) + " x hidden " + std::to_string(p.hidden_dim));
  }
  CellState next;
  if (!is_lstm(p.kind)) {
    Matrix z = affine(p.W, p.U, p.b, prev.h, x, cache ? &cache->kron[0] : nullptr, opts);
    next.h = activate(p.activation, z, p.modrelu_bias);
    if (cache != nullptr) {
      cache->h_prev = prev.h;
      cache->x = x;
      cache->act[0] = std::move(z);
      cache->h = next.h;
    }
    return next;
  }

  check_lstm_field(p);
  if (prev.c.rows() != x.rows() || prev.c.cols() != p.hidden_dim) {
    throw DimensionError("cell state " + prev.c.shape_string() + " does not match hidden size");
  }
  std::array<Matrix, 4> gates;
  for (std::size_t g = 0; g < 4; ++g) {
    gates[g] = affine(p.gates[g].W, p.gates[g].U, p.gates[g].b, prev.h, x,
                      cache ? &cache->kron[g] : nullptr, opts);
    for (auto& v : gates[g].data()) {
      v = g == kCandidate ? std::tanh(v.real()) : sigmoid(v.real());
    }
  }
  const std::size_t n = prev.c.size();
  next.c = Matrix(prev.c.rows(), prev.c.cols(), Field::real);
  next.h = Matrix(prev.c.rows(), prev.c.cols(), Field::real);
  Matrix tanh_c(prev.c.rows(), prev.c.cols(), Field::real);
  for (std::size_t i = 0; i < n; ++i) {
    const double cv = prev.c[i].real() * gates[kForget][i].real() +
                      gates[kCandidate][i].real() * gates[kInput][i].real();
    const double tc = std::tanh(cv);
    next.c[i] = cv;
    tanh_c[i] = tc;
    next.h[i] = tc * gates[kOutput][i].real();
  }
  if (cache != nullptr) {
    cache->h_prev = prev.h;
    cache->c_prev = prev.c;
    cache->x = x;
    cache->act = std::move(gates);
    cache->h = next.h;
    cache->c = next.c;
    cache->tanh_c = std::move(tanh_c);
  }
  return next;
}

CellState cell_backward(const CellParameters& p, const StepCache& cache, const CellState& grad_state,
                        CellParameters& grads, const KronOptions& opts) {
  if (grad_state.h.rows() != cache.h.rows() || grad_state.h.cols() != cache.h.cols()) {
    throw DimensionError("cell_backward: upstream gradient " + grad_state.h.shape_string() +
                         " does not match cached state " + cache.h.shape_string());
  }
  CellState out;
  if (!is_lstm(p.kind)) {
    const Matrix& z = cache.act[0];
    if (z.rows() != cache.h.rows()) throw DimensionError("cell_backward: inconsistent cache");
    Matrix gz = activate_backward(p.activation, z, cache.h, p.modrelu_bias, grad_state.h,
                                  &grads.modrelu_bias);
    if (p.field == Field::real) gz.set_field(Field::real);
    accumulate_col_sums(gz, grads.b);
    matmul_accumulate(Op::trans, gz, Op::conj, cache.x, grads.U);
    out.h = recurrent_backward(p.W, cache.h_prev, cache.kron[0], gz, grads.W, opts);
    if (p.field == Field::real) out.h.set_field(Field::real);
    return out;
  }

  const std::size_t n = cache.c.size();
  const bool has_gc = !grad_state.c.empty();
  std::array<Matrix, 4> ga;
  for (auto& g : ga) g = Matrix(cache.c.rows(), cache.c.cols(), Field::real);
  out.c = Matrix(cache.c.rows(), cache.c.cols(), Field::real);
  for (std::size_t i = 0; i < n; ++i) {
    const double f = cache.act[kForget][i].real();
    const double in = cache.act[kInput][i].real();
    const double o = cache.act[kOutput][i].real();
    const double cand = cache.act[kCandidate][i].real();
    const double tc = cache.tanh_c[i].real();
    const double gh = grad_state.h[i].real();
    const double gc = (has_gc ? grad_state.c[i].real() : 0.0) + gh * o * (1.0 - tc * tc);
    ga[kOutput][i] = gh * tc * o * (1.0 - o);
    ga[kForget][i] = gc * cache.c_prev[i].real() * f * (1.0 - f);
    ga[kInput][i] = gc * cand * in * (1.0 - in);
    ga[kCandidate][i] = gc * in * (1.0 - cand * cand);
    out.c[i] = gc * f;
  }
  out.h = Matrix(cache.c.rows(), cache.c.cols(), Field::real);
  for (std::size_t g = 0; g < 4; ++g) {
    accumulate_col_sums(ga[g], grads.gates[g].b);
    matmul_accumulate(Op::trans, ga[g], Op::conj, cache.x, grads.gates[g].U);
    Matrix gh = recurrent_backward(p.gates[g].W, cache.h_prev, cache.kron[g], ga[g],
                                   grads.gates[g].W, opts);
    axpy_inplace(1.0, gh, out.h);
  }
  out.h.set_field(Field::real);
  return out;
}

Matrix rnn_step(const CellParameters& p, const Matrix& h_prev, const Matrix& x) {
  if (is_lstm(p.kind)) throw std::invalid_argument("rnn_step called on an LSTM cell");
  CellState prev{h_prev, {}};
  return cell_forward(p, prev, x).h;
}

CellState lstm_step(const CellParameters& p, const CellState& prev, const Matrix& x) {
  if (!is_lstm(p.kind)) throw std::invalid_argument("lstm_step called on a non-LSTM cell");
  return cell_forward(p, prev, x);
}

Matrix output_head(const CellParameters& p, const Matrix& h) {
  if (h.cols() != p.hidden_dim) {
    throw DimensionError("output head: hidden " + h.shape_string() + " expected " +
                         std::to_string(p.hidden_dim) + " columns");
  }
  Matrix y = p.field == Field::complex ? matmul(Op::none, split_real_imag(h), Op::trans, p.V)
                                       : matmul(Op::none, h, Op::trans, p.V);
  add_row_bias(y, p.c);
  return y;
}

Matrix output_head_backward(const CellParameters& p, const Matrix& h, const Matrix& grad_y,
                            CellParameters& grads) {
  if (grad_y.cols() != p.output_dim || grad_y.rows() != h.rows()) {
    throw DimensionError("output head backward: gradient " + grad_y.shape_string() +
                         " does not match outputs");
  }
  accumulate_col_sums(grad_y, grads.c);
  if (p.field != Field::complex) {
    matmul_accumulate(Op::trans, grad_y, Op::none, h, grads.V);
    return matmul(grad_y, p.V);
  }
  const Matrix hs = split_real_imag(h);
  matmul_accumulate(Op::trans, grad_y, Op::none, hs, grads.V);
  const Matrix gs = matmul(grad_y, p.V);
  const std::size_t n = p.hidden_dim;
  Matrix gh(h.rows(), n, Field::complex);
  for (std::size_t r = 0; r < h.rows(); ++r) {
    for (std::size_t j = 0; j < n; ++j) gh(r, j) = Complex(gs(r, j).real(), gs(r, n + j).real());
  }
  return gh;
}

}  // namespace kru

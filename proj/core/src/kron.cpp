#include "kru/kron.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "kru/rng.hpp"

namespace kru {

KroneckerMatrix::KroneckerMatrix(std::vector<Matrix> factors) : factors_(std::move(factors)) {
  if (factors_.empty()) throw DimensionError("KroneckerMatrix needs at least one factor");
  field_ = factors_.front().field();
  out_dim_ = 1;
  in_dim_ = 1;
  for (const auto& f : factors_) {
    if (f.rows() == 0 || f.cols() == 0) throw DimensionError("Kronecker factor with empty shape");
    if (f.field() != field_) throw DimensionError("Kronecker factors must share one field");
    out_dim_ *= f.rows();
    in_dim_ *= f.cols();
  }
}

KroneckerMatrix KroneckerMatrix::identity(const std::vector<FactorShape>& shapes, Field field) {
  std::vector<Matrix> factors;
  for (const auto& s : shapes) {
    Matrix m(s.p, s.q, field);
    for (std::size_t i = 0; i < std::min(s.p, s.q); ++i) m(i, i) = 1.0;
    factors.push_back(std::move(m));
  }
  return KroneckerMatrix(std::move(factors));
}

std::vector<FactorShape> KroneckerMatrix::shapes() const {
  std::vector<FactorShape> s;
  s.reserve(factors_.size());
  for (const auto& f : factors_) s.push_back({f.rows(), f.cols()});
  return s;
}

bool KroneckerMatrix::all_square() const {
  return std::all_of(factors_.begin(), factors_.end(),
                     [](const Matrix& f) { return f.rows() == f.cols(); });
}

Matrix kron_expand(const KroneckerMatrix& w, std::size_t max_entries) {
  if (w.out_dim() * w.in_dim() > max_entries) {
    throw DimensionError("kron_expand: " + std::to_string(w.out_dim()) + "x" +
                         std::to_string(w.in_dim()) + " exceeds the expansion guard of " +
                         std::to_string(max_entries) + " entries");
  }
  Matrix acc = Matrix::ones(1, 1, w.field());
  for (const auto& f : w.factors()) {
    Matrix next(acc.rows() * f.rows(), acc.cols() * f.cols(), w.field());
    for (std::size_t i = 0; i < acc.rows(); ++i) {
      for (std::size_t j = 0; j < acc.cols(); ++j) {
        const Complex a = acc(i, j);
        for (std::size_t p = 0; p < f.rows(); ++p) {
          for (std::size_t q = 0; q < f.cols(); ++q) {
            next(i * f.rows() + p, j * f.cols() + q) = a * f(p, q);
          }
        }
      }
    }
    acc = std::move(next);
  }
  return acc;
}

namespace {

// Layout of one stage, per row of the batch: `pre` leading blocks (already-mapped output
// indices), then the factor's own index, then `stride` trailing input indices.
struct Stage {
  std::size_t pre;
  std::size_t p;
  std::size_t q;
  std::size_t stride;
  std::size_t in_cols() const { return pre * q * stride; }
  std::size_t out_cols() const { return pre * p * stride; }
};

std::vector<Stage> plan_stages(const KroneckerMatrix& w) {
  std::vector<Stage> stages;
  const auto shapes = w.shapes();
  std::size_t pre = 1;
  std::size_t stride = w.in_dim();
  for (const auto& s : shapes) {
    stride /= s.q;
    stages.push_back({pre, s.p, s.q, stride});
    pre *= s.p;
  }
  return stages;
}

// o[0..n) += w * x[0..n), complex arrays viewed as interleaved doubles.
inline void madd(double* o, const double* x, double wr, double wi, std::size_t n, bool real) {
  if (real) {
    for (std::size_t i = 0; i < n; ++i) o[2 * i] += wr * x[2 * i];
    return;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[2 * i], xi = x[2 * i + 1];
    o[2 * i] += wr * xr - wi * xi;
    o[2 * i + 1] += wr * xi + wi * xr;
  }
}

// Returns sum_i a[i] * conj(b[i]).
inline Complex dot_conj(const double* a, const double* b, std::size_t n, bool real) {
  double re = 0.0, im = 0.0;
  if (real) {
    for (std::size_t i = 0; i < n; ++i) re += a[2 * i] * b[2 * i];
    return {re, 0.0};
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[2 * i], ai = a[2 * i + 1], br = b[2 * i], bi = b[2 * i + 1];
    re += ar * br + ai * bi;
    im += ai * br - ar * bi;
  }
  return {re, im};
}

inline const double* as_doubles(const Complex* p) { return reinterpret_cast<const double*>(p); }
inline double* as_doubles(Complex* p) { return reinterpret_cast<double*>(p); }

// Fused kernels for the common 2x2 factor: one pass over (block, s) with the factor in registers.
template <bool Real>
inline void cmul_add(double& orr, double& oi, double wr, double wi, double xr, double xi) {
  orr += wr * xr;
  if constexpr (!Real) {
    orr -= wi * xi;
    oi += wr * xi + wi * xr;
  }
}

template <bool Real>
void stage_forward_2x2(const Stage& st, const Matrix& w, const Complex* in, Complex* out, std::size_t rows) {
  const double w00r = w(0, 0).real(), w00i = w(0, 0).imag(), w01r = w(0, 1).real(), w01i = w(0, 1).imag();
  const double w10r = w(1, 0).real(), w10i = w(1, 0).imag(), w11r = w(1, 1).real(), w11i = w(1, 1).imag();
  const std::size_t blocks = rows * st.pre, n = st.stride;
  for (std::size_t b = 0; b < blocks; ++b) {
    const double* z0 = as_doubles(in + 2 * b * n);
    const double* z1 = z0 + 2 * n;
    double* o0 = as_doubles(out + 2 * b * n);
    double* o1 = o0 + 2 * n;
    for (std::size_t s = 0; s < n; ++s) {
      const double ar = z0[2 * s], ai = z0[2 * s + 1], br = z1[2 * s], bi = z1[2 * s + 1];
      double r0 = 0.0, i0 = 0.0, r1 = 0.0, i1 = 0.0;
      cmul_add<Real>(r0, i0, w00r, w00i, ar, ai);
      cmul_add<Real>(r0, i0, w01r, w01i, br, bi);
      cmul_add<Real>(r1, i1, w10r, w10i, ar, ai);
      cmul_add<Real>(r1, i1, w11r, w11i, br, bi);
      o0[2 * s] = r0;
      o0[2 * s + 1] = i0;
      o1[2 * s] = r1;
      o1[2 * s + 1] = i1;
    }
  }
}

template <bool Real>
void stage_backward_2x2(const Stage& st, const Matrix& w, const Complex* in, const Complex* grad_out,
                        Complex* grad_in, Matrix& grad_w, std::size_t rows) {
  // grad_in = W^H-weighted sums use conj(W).
  const double c00r = w(0, 0).real(), c00i = -w(0, 0).imag(), c01r = w(0, 1).real(), c01i = -w(0, 1).imag();
  const double c10r = w(1, 0).real(), c10i = -w(1, 0).imag(), c11r = w(1, 1).real(), c11i = -w(1, 1).imag();
  double g00r = 0, g00i = 0, g01r = 0, g01i = 0, g10r = 0, g10i = 0, g11r = 0, g11i = 0;
  const std::size_t blocks = rows * st.pre, n = st.stride;
  for (std::size_t b = 0; b < blocks; ++b) {
    const double* z0 = as_doubles(in + 2 * b * n);
    const double* z1 = z0 + 2 * n;
    const double* d0 = as_doubles(grad_out + 2 * b * n);
    const double* d1 = d0 + 2 * n;
    double* e0 = as_doubles(grad_in + 2 * b * n);
    double* e1 = e0 + 2 * n;
    for (std::size_t s = 0; s < n; ++s) {
      const double ar = z0[2 * s], ai = z0[2 * s + 1], br = z1[2 * s], bi = z1[2 * s + 1];
      const double gr = d0[2 * s], gi = d0[2 * s + 1], hr = d1[2 * s], hi = d1[2 * s + 1];
      // grad_w(p, q) += g_p * conj(z_q)
      cmul_add<Real>(g00r, g00i, gr, gi, ar, -ai);
      cmul_add<Real>(g01r, g01i, gr, gi, br, -bi);
      cmul_add<Real>(g10r, g10i, hr, hi, ar, -ai);
      cmul_add<Real>(g11r, g11i, hr, hi, br, -bi);
      double r0 = 0.0, i0 = 0.0, r1 = 0.0, i1 = 0.0;
      cmul_add<Real>(r0, i0, c00r, c00i, gr, gi);
      cmul_add<Real>(r0, i0, c10r, c10i, hr, hi);
      cmul_add<Real>(r1, i1, c01r, c01i, gr, gi);
      cmul_add<Real>(r1, i1, c11r, c11i, hr, hi);
      e0[2 * s] = r0;
      e0[2 * s + 1] = i0;
      e1[2 * s] = r1;
      e1[2 * s + 1] = i1;
    }
  }
  grad_w(0, 0) += Complex(g00r, g00i);
  grad_w(0, 1) += Complex(g01r, g01i);
  grad_w(1, 0) += Complex(g10r, g10i);
  grad_w(1, 1) += Complex(g11r, g11i);
}

// Applies one factor to `rows` batch rows: out(b, p, s) = sum_q W(p, q) in(b, q, s).
void stage_forward(const Stage& st, const Matrix& w, const Complex* in, Complex* out,
                   std::size_t rows, bool real) {
  if (st.p == 2 && st.q == 2) {
    real ? stage_forward_2x2<true>(st, w, in, out, rows) : stage_forward_2x2<false>(st, w, in, out, rows);
    return;
  }
  const std::size_t blocks = rows * st.pre;
  const std::size_t lin = st.q * st.stride;
  const std::size_t lout = st.p * st.stride;
  if (st.stride == 1) {
    for (std::size_t b = 0; b < blocks; ++b) {
      const Complex* zi = in + b * lin;
      Complex* zo = out + b * lout;
      for (std::size_t p = 0; p < st.p; ++p) {
        const Complex* wrow = w.row(p);
        Complex acc{};
        for (std::size_t q = 0; q < st.q; ++q) acc += wrow[q] * zi[q];
        zo[p] = acc;
      }
    }
    return;
  }
  for (std::size_t b = 0; b < blocks; ++b) {
    const Complex* zi = in + b * lin;
    Complex* zo = out + b * lout;
    std::fill(zo, zo + lout, Complex{});
    for (std::size_t p = 0; p < st.p; ++p) {
      double* o = as_doubles(zo + p * st.stride);
      const Complex* wrow = w.row(p);
      for (std::size_t q = 0; q < st.q; ++q) {
        madd(o, as_doubles(zi + q * st.stride), wrow[q].real(), wrow[q].imag(), st.stride, real);
      }
    }
  }
}

// Reverse of stage_forward for `rows` batch rows. Accumulates into grad_w and overwrites grad_in.
void stage_backward(const Stage& st, const Matrix& w, const Complex* in, const Complex* grad_out,
                    Complex* grad_in, Matrix& grad_w, std::size_t rows, bool real) {
  if (st.p == 2 && st.q == 2) {
    real ? stage_backward_2x2<true>(st, w, in, grad_out, grad_in, grad_w, rows)
         : stage_backward_2x2<false>(st, w, in, grad_out, grad_in, grad_w, rows);
    return;
  }
  const std::size_t blocks = rows * st.pre;
  const std::size_t lin = st.q * st.stride;
  const std::size_t lout = st.p * st.stride;
  for (std::size_t b = 0; b < blocks; ++b) {
    const Complex* zi = in + b * lin;
    const Complex* go = grad_out + b * lout;
    Complex* gi = grad_in + b * lin;
    for (std::size_t p = 0; p < st.p; ++p) {
      const double* g = as_doubles(go + p * st.stride);
      Complex* gw = grad_w.row(p);
      for (std::size_t q = 0; q < st.q; ++q) {
        gw[q] += dot_conj(g, as_doubles(zi + q * st.stride), st.stride, real);
      }
    }
    std::fill(gi, gi + lin, Complex{});
    for (std::size_t q = 0; q < st.q; ++q) {
      double* o = as_doubles(gi + q * st.stride);
      for (std::size_t p = 0; p < st.p; ++p) {
        const Complex wc = std::conj(w(p, q));
        madd(o, as_doubles(go + p * st.stride), wc.real(), wc.imag(), st.stride, real);
      }
    }
  }
}

void check_input(const Matrix& x, const KroneckerMatrix& w, const char* what) {
  if (w.num_factors() == 0) throw DimensionError(std::string(what) + ": empty Kronecker matrix");
  if (x.cols() != w.in_dim()) {
    throw DimensionError(std::string(what) + ": input " + x.shape_string() +
                         " does not match Kronecker input dim " + std::to_string(w.in_dim()));
  }
}

// Runs fn(row_begin, row_end, worker) over contiguous row chunks.
template <typename Fn>
void for_row_chunks(std::size_t rows, unsigned threads, Fn&& fn) {
  const unsigned workers =
      static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(threads, rows)));
  if (workers <= 1) {
    fn(std::size_t{0}, rows, 0u);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (rows + workers - 1) / workers;
  for (unsigned t = 0; t < workers; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(rows, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end, t] { fn(begin, end, t); });
  }
}

}  // namespace

std::pair<Matrix, KronForwardCache> kron_forward(const Matrix& x, const KroneckerMatrix& w,
                                                 const KronOptions& opts) {
  check_input(x, w, "kron_forward");
  const Field field = promote(x.field(), w.field());
  const bool real = field == Field::real;
  const auto stages = plan_stages(w);
  const std::size_t m = x.rows();

  KronForwardCache cache;
  cache.stages.reserve(stages.size());
  for (const auto& st : stages) cache.stages.emplace_back(m, st.out_cols(), field);

  for_row_chunks(m, opts.threads, [&](std::size_t r0, std::size_t r1, unsigned) {
    const Complex* in = x.row(r0);
    for (std::size_t f = 0; f < stages.size(); ++f) {
      Complex* out = cache.stages[f].row(r0);
      stage_forward(stages[f], w.factor(f), in, out, r1 - r0, real);
      in = out;
    }
  });
  Matrix y = cache.stages.back();
  return {std::move(y), std::move(cache)};
}

Matrix kron_apply(const Matrix& x, const KroneckerMatrix& w, const KronOptions& opts) {
  check_input(x, w, "kron_apply");
  Matrix y(x.rows(), w.out_dim(), promote(x.field(), w.field()));
  kron_apply_into(x, w, y, opts);
  return y;
}

void kron_apply_into(const Matrix& x, const KroneckerMatrix& w, Matrix& y, const KronOptions& opts) {
  check_input(x, w, "kron_apply_into");
  if (y.rows() != x.rows() || y.cols() != w.out_dim()) {
    throw DimensionError("kron_apply_into: output is " + y.shape_string() + ", expected " +
                         std::to_string(x.rows()) + "x" + std::to_string(w.out_dim()));
  }
  const Field field = promote(x.field(), w.field());
  const bool real = field == Field::real;
  y.set_field(field);
  const auto stages = plan_stages(w);
  const std::size_t m = x.rows();
  std::size_t widest = 0;
  for (const auto& st : stages) widest = std::max(widest, st.out_cols());

  // A few rows at a time go through every stage while their buffers stay in cache; the second
  // buffer starts half a page after the first so loads and stores do not alias modulo 4 KiB.
  const std::size_t block = std::max<std::size_t>(1, 2048 / widest);
  constexpr std::size_t pad = 128;
  for_row_chunks(m, opts.threads, [&](std::size_t r0, std::size_t r1, unsigned) {
    std::vector<Complex> scratch(2 * block * widest + pad);
    Complex* const bufs[2] = {scratch.data(), scratch.data() + block * widest + pad};
    for (std::size_t b0 = r0; b0 < r1; b0 += block) {
      const std::size_t rows = std::min(block, r1 - b0);
      const Complex* in = x.row(b0);
      for (std::size_t f = 0; f < stages.size(); ++f) {
        Complex* out = f + 1 == stages.size() ? y.row(b0) : bufs[f % 2];
        stage_forward(stages[f], w.factor(f), in, out, rows, real);
        in = out;
      }
    }
  });
}

KronGradients kron_backward(const Matrix& x, const KroneckerMatrix& w, const KronForwardCache& cache,
                            const Matrix& grad_out, const KronOptions& opts) {
  check_input(x, w, "kron_backward");
  const auto stages = plan_stages(w);
  const std::size_t m = x.rows();
  if (cache.stages.size() != stages.size()) {
    throw DimensionError("kron_backward: cache holds " + std::to_string(cache.stages.size()) +
                         " stages, matrix has " + std::to_string(stages.size()) + " factors");
  }
  for (std::size_t f = 0; f < stages.size(); ++f) {
    if (cache.stages[f].rows() != m || cache.stages[f].cols() != stages[f].out_cols()) {
      throw DimensionError("kron_backward: cache stage " + std::to_string(f) + " has shape " +
                           cache.stages[f].shape_string() + ", inconsistent with input/factors");
    }
  }
  if (grad_out.rows() != m || grad_out.cols() != w.out_dim()) {
    throw DimensionError("kron_backward: upstream gradient " + grad_out.shape_string() +
                         " expected " + std::to_string(m) + "x" + std::to_string(w.out_dim()));
  }
  const Field field = promote(promote(x.field(), w.field()), grad_out.field());
  const bool real = field == Field::real;

  std::size_t widest = x.cols();
  for (const auto& st : stages) widest = std::max({widest, st.in_cols(), st.out_cols()});

  KronGradients out;
  out.input_grad = Matrix(m, x.cols(), field);

  const unsigned workers =
      static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(opts.threads, m)));
  // Per-worker factor gradients, reduced in worker order afterwards.
  std::vector<std::vector<Matrix>> local(workers);
  for (auto& gw : local) {
    for (const auto& f : w.factors()) gw.emplace_back(f.rows(), f.cols(), field);
  }
  std::vector<Complex> ping(m * widest), pong(m * widest);

  for_row_chunks(m, workers, [&](std::size_t r0, std::size_t r1, unsigned t) {
    const std::size_t rows = r1 - r0;
    const Complex* g = grad_out.row(r0);
    for (std::size_t k = stages.size(); k-- > 0;) {
      const Stage& st = stages[k];
      const Complex* in = (k == 0) ? x.row(r0) : cache.stages[k - 1].row(r0);
      Complex* gin = (k == 0) ? out.input_grad.row(r0)
                              : ((k % 2 == 0) ? ping : pong).data() + r0 * st.in_cols();
      stage_backward(st, w.factor(k), in, g, gin, local[t][k], rows, real);
      g = gin;
    }
  });

  out.factor_grads = std::move(local[0]);
  for (unsigned t = 1; t < workers; ++t) {
    for (std::size_t f = 0; f < out.factor_grads.size(); ++f) {
      axpy_inplace(1.0, local[t][f], out.factor_grads[f]);
    }
  }
  if (field == Field::real) {
    for (auto& g : out.factor_grads) g.set_field(Field::real);
  }
  return out;
}

KroneckerMatrix kron_transpose(const KroneckerMatrix& w) {
  std::vector<Matrix> f;
  for (const auto& m : w.factors()) f.push_back(transpose(m));
  KroneckerMatrix t(std::move(f));
  t.set_frozen(w.frozen());
  return t;
}

KroneckerMatrix kron_hermitian(const KroneckerMatrix& w) {
  std::vector<Matrix> f;
  for (const auto& m : w.factors()) f.push_back(hermitian(m));
  KroneckerMatrix t(std::move(f));
  t.set_frozen(w.frozen());
  return t;
}

namespace {

Matrix gram_minus_identity(const Matrix& w) {
  Matrix g = matmul(Op::herm, w, Op::none, w);
  for (std::size_t i = 0; i < g.rows(); ++i) g(i, i) -= 1.0;
  return g;
}

void require_square(const Matrix& m, std::size_t f) {
  if (m.rows() != m.cols()) {
    throw DimensionError("soft unitary penalty needs square factors; factor " + std::to_string(f) +
                         " is " + m.shape_string());
  }
}

}  // namespace

double soft_unitary_penalty(const Matrix& w, double amplitude) {
  require_square(w, 0);
  return amplitude * frobenius_norm_sq(gram_minus_identity(w));
}

Matrix soft_unitary_grad(const Matrix& w, double amplitude) {
  require_square(w, 0);
  Matrix g = matmul(w, gram_minus_identity(w));
  return scale(g, 4.0 * amplitude);
}

double soft_unitary_penalty(const KroneckerMatrix& w, double amplitude) {
  double total = 0.0;
  for (std::size_t f = 0; f < w.num_factors(); ++f) {
    require_square(w.factor(f), f);
    total += frobenius_norm_sq(gram_minus_identity(w.factor(f)));
  }
  return amplitude * total;
}

std::vector<Matrix> soft_unitary_grad(const KroneckerMatrix& w, double amplitude) {
  std::vector<Matrix> grads;
  for (std::size_t f = 0; f < w.num_factors(); ++f) {
    require_square(w.factor(f), f);
    grads.push_back(soft_unitary_grad(w.factor(f), amplitude));
  }
  return grads;
}

namespace {

// Gram-Schmidt on the columns of a Gaussian matrix, run twice for orthogonality to
// machine precision. R then has a positive real diagonal, which makes Q Haar-distributed.
// Gram-Schmidt with reorthogonalization over rows (contiguous in storage). Orthonormal rows of a
// Gaussian matrix give a Haar-distributed unitary just as orthonormal columns do.
Matrix orthonormalize_rows(Matrix g) {
  const std::size_t n = g.rows();
  for (std::size_t j = 0; j < n; ++j) {
    Complex* gj = g.row(j);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < j; ++k) {
        const Complex* gk = g.row(k);
        Complex proj{};
        for (std::size_t i = 0; i < n; ++i) proj += std::conj(gk[i]) * gj[i];
        for (std::size_t i = 0; i < n; ++i) gj[i] -= proj * gk[i];
      }
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) norm += std::norm(gj[i]);
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < n; ++i) gj[i] /= norm;
  }
  return g;
}

Matrix random_unitary_from(Rng& rng, std::size_t n, Field field) {
  Matrix g(n, n, field);
  const double s = field == Field::complex ? std::sqrt(0.5) : 1.0;
  for (auto& v : g.data()) {
    const double re = rng.normal();
    const double im = field == Field::complex ? rng.normal() : 0.0;
    v = Complex(s * re, s * im);
  }
  return orthonormalize_rows(std::move(g));
}

}  // namespace

Matrix random_unitary(std::size_t n, std::uint64_t seed, Field field) {
  Rng rng(seed, Stream::init);
  return random_unitary_from(rng, n, field);
}

KroneckerMatrix random_unitary_factors(const std::vector<FactorShape>& shapes, std::uint64_t seed,
                                       Field field) {
  if (shapes.empty()) throw DimensionError("random_unitary_factors: no shapes given");
  Rng rng(seed, Stream::init);
  std::vector<Matrix> factors;
  for (std::size_t f = 0; f < shapes.size(); ++f) {
    if (shapes[f].p != shapes[f].q) {
      throw DimensionError("random_unitary_factors: factor " + std::to_string(f) + " is " +
                           std::to_string(shapes[f].p) + "x" + std::to_string(shapes[f].q) +
                           ", unitary factors must be square");
    }
    factors.push_back(random_unitary_from(rng, shapes[f].p, field));
  }
  return KroneckerMatrix(std::move(factors));
}

std::size_t parameter_count(const KroneckerMatrix& w) {
  std::size_t total = 0;
  for (const auto& f : w.factors()) total += f.rows() * f.cols();
  return (w.field() == Field::complex ? 2 : 1) * total;
}

std::vector<FactorShape> auto_2x2_shapes(std::size_t n) {
  if (n < 2 || (n & (n - 1)) != 0) {
    throw DimensionError("auto-2x2 factorization needs a power-of-two size >= 2, got " +
                         std::to_string(n));
  }
  std::vector<FactorShape> shapes;
  for (std::size_t k = n; k > 1; k >>= 1) shapes.push_back({2, 2});
  return shapes;
}

}  // namespace kru

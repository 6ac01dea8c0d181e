#include "kru/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "kru/rng.hpp"

namespace kru {

namespace {

Matrix random_unit_row(std::size_t n, Field field, std::uint64_t seed) {
  Rng rng(seed, Stream::probe);
  Matrix v(1, n, field);
  for (auto& x : v.data()) x = Complex(rng.normal(), field == Field::complex ? rng.normal() : 0.0);
  const double norm = frobenius_norm(v);
  for (auto& x : v.data()) x /= norm;
  return v;
}

// `apply(v)` returns the row form of W v, `apply_h(a)` the row form of W^H a.
template <typename Apply, typename ApplyH>
PowerIterationResult power_on_gram(std::size_t n, Field field, Apply apply, ApplyH apply_h,
                                   int max_iters, double tol, std::uint64_t seed) {
  Matrix v = random_unit_row(n, field, seed);
  PowerIterationResult res;
  double prev = -1.0;
  for (int it = 1; it <= max_iters; ++it) {
    const Matrix a = apply(v);
    const double sigma = frobenius_norm(a);
    res.estimate = sigma;
    res.iterations = it;
    if (std::abs(sigma - prev) < tol * std::max(1.0, sigma)) {
      res.converged = true;
      break;
    }
    prev = sigma;
    Matrix u = apply_h(a);
    const double un = frobenius_norm(u);
    if (un == 0.0) {
      res.converged = true;
      break;
    }
    for (auto& x : u.data()) x /= un;
    v = std::move(u);
  }
  return res;
}

}  // namespace

PowerIterationResult spectral_norm(const KroneckerMatrix& w, int max_iters, double tol,
                                   std::uint64_t seed) {
  if (w.out_dim() != w.in_dim()) throw DimensionError("spectral_norm: operator must be square");
  const KroneckerMatrix wh = kron_hermitian(w);
  // Row form: (W v)^T = v^T W^T and (W^H a)^T = a^T conj(W) = a^T (W^H)^T.
  return power_on_gram(
      w.in_dim(), w.field(), [&](const Matrix& v) { return kron_apply(v, w); },
      [&](const Matrix& a) { return kron_apply(a, wh); }, max_iters, tol, seed);
}

PowerIterationResult spectral_norm(const Matrix& w, int max_iters, double tol, std::uint64_t seed) {
  if (w.rows() != w.cols()) throw DimensionError("spectral_norm: operator must be square");
  return power_on_gram(
      w.cols(), w.field(), [&](const Matrix& v) { return matmul(Op::none, v, Op::trans, w); },
      [&](const Matrix& a) { return matmul(Op::none, a, Op::conj, w); }, max_iters, tol, seed);
}

std::vector<double> singular_values(const Matrix& a) {
  // Work on the orientation with at least as many rows as columns.
  Matrix m = a.rows() >= a.cols() ? a : hermitian(a);
  const std::size_t rows = m.rows(), cols = m.cols();
  std::vector<std::vector<Complex>> col(cols, std::vector<Complex>(rows));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) col[j][i] = m(i, j);
  }
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < cols; ++p) {
      for (std::size_t q = p + 1; q < cols; ++q) {
        double alpha = 0.0, beta = 0.0;
        Complex gamma{};
        for (std::size_t i = 0; i < rows; ++i) {
          alpha += std::norm(col[p][i]);
          beta += std::norm(col[q][i]);
          gamma += std::conj(col[p][i]) * col[q][i];
        }
        const double g = std::abs(gamma);
        if (g == 0.0 || g <= 1e-15 * std::sqrt(alpha * beta)) continue;
        off = std::max(off, g / std::sqrt(alpha * beta));
        // Rotate column q's phase so the pair's inner product is real, then a real rotation.
        const Complex phase = std::conj(gamma) / g;
        for (auto& x : col[q]) x *= phase;
        const double zeta = (beta - alpha) / (2.0 * g);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < rows; ++i) {
          const Complex xp = col[p][i], xq = col[q][i];
          col[p][i] = c * xp - s * xq;
          col[q][i] = s * xp + c * xq;
        }
      }
    }
    if (off < 1e-15) break;
  }
  std::vector<double> sv(cols);
  for (std::size_t j = 0; j < cols; ++j) {
    double s = 0.0;
    for (const auto& x : col[j]) s += std::norm(x);
    sv[j] = std::sqrt(s);
  }
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

std::vector<Complex> eigenvalues(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("eigenvalues: matrix must be square");
  const auto n = static_cast<Eigen::Index>(a.rows());
  Eigen::MatrixXcd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      m(i, j) = a(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(m, false);
  std::vector<Complex> out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
  return out;
}

double spectral_norm_factorwise(const KroneckerMatrix& w) {
  double prod = 1.0;
  for (const auto& f : w.factors()) prod *= singular_values(f).front();
  return prod;
}

double unitarity_residual(const Matrix& w) {
  if (w.rows() != w.cols()) throw DimensionError("unitarity_residual: matrix must be square");
  Matrix g = matmul(Op::herm, w, Op::none, w);
  for (std::size_t i = 0; i < g.rows(); ++i) g(i, i) -= 1.0;
  return frobenius_norm(g);
}

double unitarity_residual(const KroneckerMatrix& w) {
  if (!w.all_square()) throw DimensionError("unitarity_residual: factors must be square");
  // D_k = (G_0 (x) .. (x) G_{k-1}) - I with G_f = I + E_f. Tracks a = ||D_k||_F^2 and
  // b = tr(D_k) so that no step subtracts nearly equal quantities.
  double a = 0.0, b = 0.0, dim = 1.0;
  for (const auto& f : w.factors()) {
    Matrix e = matmul(Op::herm, f, Op::none, f);
    for (std::size_t i = 0; i < e.rows(); ++i) e(i, i) -= 1.0;
    const double n = static_cast<double>(f.rows());
    const double e2 = frobenius_norm_sq(e);
    double tr = 0.0;
    for (std::size_t i = 0; i < e.rows(); ++i) tr += e(i, i).real();
    const double g2 = n + 2.0 * tr + e2;
    const double ge = tr + e2;
    a = a * g2 + dim * e2 + 2.0 * b * ge;
    b = b * (n + tr) + dim * tr;
    dim *= n;
  }
  return std::sqrt(std::max(0.0, a));
}

namespace {

template <typename Apply>
double growth_rate(std::size_t n, Field field, Apply apply, int iters) {
  Matrix v = random_unit_row(n, field, 11);
  double log_sum = 0.0;
  int counted = 0;
  for (int it = 0; it < iters; ++it) {
    Matrix u = apply(v);
    const double g = frobenius_norm(u);
    if (g == 0.0) return 0.0;
    if (it >= iters / 2) {
      log_sum += std::log(g);
      ++counted;
    }
    for (auto& x : u.data()) x /= g;
    v = std::move(u);
  }
  return std::exp(log_sum / counted);
}

double dense_radius(const Matrix& w) {
  double r = 0.0;
  for (const auto& ev : eigenvalues(w)) r = std::max(r, std::abs(ev));
  return r;
}

}  // namespace

double spectral_radius_estimate(const Matrix& w) {
  if (w.rows() != w.cols()) throw DimensionError("spectral radius needs a square matrix");
  if (w.rows() <= kDenseDiagLimit) return dense_radius(w);
  const double est = growth_rate(
      w.rows(), w.field(), [&](const Matrix& v) { return matmul(Op::none, v, Op::trans, w); }, 400);
  return std::min(est, spectral_norm(w).estimate);
}

double spectral_radius_estimate(const KroneckerMatrix& w) {
  if (!w.all_square()) throw DimensionError("spectral radius needs square factors");
  // Eigenvalues of a Kronecker product are products of factor eigenvalues.
  double prod = 1.0;
  for (const auto& f : w.factors()) {
    if (f.rows() > kDenseDiagLimit) {
      prod *= spectral_radius_estimate(f);
    } else {
      prod *= dense_radius(f);
    }
  }
  return prod;
}

SpectralReport spectral_report(const Recurrent& w) {
  SpectralReport r;
  if (const auto* dense = std::get_if<Matrix>(&w)) {
    r.spectral_norm = spectral_norm(*dense).estimate;
    r.spectral_radius_lower_bound = std::min(spectral_radius_estimate(*dense), r.spectral_norm);
    r.unitarity_residual = unitarity_residual(*dense);
    if (dense->rows() <= kDenseDiagLimit) {
      const auto sv = singular_values(*dense);
      r.condition_number = sv.back() > 0.0 ? sv.front() / sv.back()
                                           : std::numeric_limits<double>::infinity();
      r.note = "condition number is sigma_max / sigma_min of the dense matrix";
    } else {
      r.note = "condition number omitted: dense N = " + std::to_string(dense->rows()) +
               " exceeds the limit of " + std::to_string(kDenseDiagLimit);
    }
    return r;
  }
  const auto& kron = std::get<KroneckerMatrix>(w);
  r.spectral_norm = spectral_norm(kron).estimate;
  r.spectral_radius_lower_bound = std::min(spectral_radius_estimate(kron), r.spectral_norm);
  r.unitarity_residual = unitarity_residual(kron);
  double cond = 1.0;
  for (const auto& f : kron.factors()) {
    const auto sv = singular_values(f);
    cond *= sv.back() > 0.0 ? sv.front() / sv.back() : std::numeric_limits<double>::infinity();
  }
  r.condition_number = cond;
  r.note = "condition number is sigma_max / sigma_min, the product of the factors' ratios";
  return r;
}

SpectralReport spectral_report(const CellParameters& p) {
  return spectral_report(is_lstm(p.kind) ? p.gates[kForget].W : p.W);
}

GradientFlowTrace gradient_flow_trace(const CellParameters& p, const TaskBatch& batch,
                                      const BpttOptions& opts) {
  BpttOptions o = opts;
  o.record_grad_flow = true;
  auto res = bptt_loss_and_grads(p, batch, o);
  return {std::move(res.grad_flow)};
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "lambda,residual,spectral_norm,valid_metric\n";
  os << std::setprecision(10);
  for (const auto& r : rows) {
    os << r.lambda << ',' << r.residual << ',' << r.spectral_norm << ',' << r.valid_metric << '\n';
  }
  return os.str();
}

std::string trace_json(const GradientFlowTrace& trace) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t t = 0; t < trace.norms.size(); ++t) j[std::to_string(t)] = trace.norms[t];
  return j.dump();
}

}  // namespace kru

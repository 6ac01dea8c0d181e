#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kru/cells.hpp"
#include "kru/kron.hpp"
#include "kru/tasks.hpp"
#include "kru/training.hpp"

namespace kru {

struct PowerIterationResult {
  double estimate = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Largest singular value by power iteration on W^H W. The Kronecker overload applies W and
/// W^H through the strided kernels and never expands the matrix.
PowerIterationResult spectral_norm(const KroneckerMatrix& w, int max_iters = 5000, double tol = 1e-13,
                                   std::uint64_t seed = 7);
PowerIterationResult spectral_norm(const Matrix& w, int max_iters = 5000, double tol = 1e-13,
                                   std::uint64_t seed = 7);
/// prod_f ||W_f||_2, exact for Kronecker products.
double spectral_norm_factorwise(const KroneckerMatrix& w);

/// Singular values (descending) by one-sided Jacobi. Dense reference, meant for small matrices.
std::vector<double> singular_values(const Matrix& a);
/// Eigenvalues of a square dense matrix.
std::vector<Complex> eigenvalues(const Matrix& a);

/// ||W^H W - I||_F evaluated factor-wise, using (W_0 (x) W_1)^H (W_0 (x) W_1) = G_0 (x) G_1.
double unitarity_residual(const KroneckerMatrix& w);
double unitarity_residual(const Matrix& w);

/// Largest-eigenvalue magnitude. Exact (dense eigensolve) up to kDenseDiagLimit, otherwise the
/// geometric growth rate of power iteration on W, capped by the spectral norm.
double spectral_radius_estimate(const KroneckerMatrix& w);
double spectral_radius_estimate(const Matrix& w);

inline constexpr std::size_t kDenseDiagLimit = 128;

struct SpectralReport {
  double spectral_norm = 0.0;
  double spectral_radius_lower_bound = 0.0;
  double unitarity_residual = 0.0;
  /// sigma_max / sigma_min; empty when the guard skips it.
  std::optional<double> condition_number;
  std::string note;
};

SpectralReport spectral_report(const Recurrent& w);
/// Report for the (first) recurrent matrix of a cell.
SpectralReport spectral_report(const CellParameters& p);

/// ||dL/dh_t||_2 for t = 0..T-1 over one forward/backward pass.
struct GradientFlowTrace {
  std::vector<double> norms;
};

GradientFlowTrace gradient_flow_trace(const CellParameters& p, const TaskBatch& batch,
                                      const BpttOptions& opts = {});

/// One row of an amplitude sweep.
struct SweepRow {
  double lambda = 0.0;
  double residual = 0.0;
  double spectral_norm = 0.0;
  double valid_metric = 0.0;
  std::string error;
};

/// CSV with header lambda,residual,spectral_norm,valid_metric.
std::string sweep_csv(const std::vector<SweepRow>& rows);
/// JSON object {"0": norm_0, "1": norm_1, ...} keyed by step.
std::string trace_json(const GradientFlowTrace& trace);

}  // namespace kru

#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "kru/linalg.hpp"

namespace kru {

/// Shape of one Kronecker factor: p outputs by q inputs.
struct FactorShape {
  std::size_t p = 1;
  std::size_t q = 1;
  friend bool operator==(const FactorShape&, const FactorShape&) = default;
};

/// W = W_0 (x) W_1 (x) ... (x) W_{F-1}, kept in factored form.
///
/// Factor 0 is the most significant index: entry ((p_0..p_{F-1}), (q_0..q_{F-1})) of the
/// expanded matrix equals prod_f W_f(p_f, q_f), with indices flattened row-major.
class KroneckerMatrix {
 public:
  KroneckerMatrix() = default;
  explicit KroneckerMatrix(std::vector<Matrix> factors);

  static KroneckerMatrix identity(const std::vector<FactorShape>& shapes, Field field);

  std::size_t num_factors() const noexcept { return factors_.size(); }
  const std::vector<Matrix>& factors() const noexcept { return factors_; }
  /// Mutable access for optimizers; callers must not change factor shapes or fields.
  std::vector<Matrix>& factors() noexcept { return factors_; }
  const Matrix& factor(std::size_t f) const { return factors_.at(f); }
  Matrix& factor(std::size_t f) { return factors_.at(f); }

  std::vector<FactorShape> shapes() const;
  std::size_t out_dim() const noexcept { return out_dim_; }
  std::size_t in_dim() const noexcept { return in_dim_; }
  Field field() const noexcept { return field_; }
  bool all_square() const;

  /// Frozen matrices still produce gradients; trainers discard them.
  bool frozen() const noexcept { return frozen_; }
  void set_frozen(bool frozen) noexcept { frozen_ = frozen; }

 private:
  std::vector<Matrix> factors_;
  std::size_t out_dim_ = 0;
  std::size_t in_dim_ = 0;
  Field field_ = Field::complex;
  bool frozen_ = false;
};

/// Intermediate outputs of a forward pass. stages[f] is M x (P_0..P_f * Q_{f+1}..Q_{F-1}).
struct KronForwardCache {
  std::vector<Matrix> stages;
};

struct KronGradients {
  std::vector<Matrix> factor_grads;
  Matrix input_grad;
};

struct KronOptions {
  /// Worker threads over the batch rows; 1 runs inline.
  unsigned threads = 1;
};

/// Default size guard for kron_expand (entries).
inline constexpr std::size_t kKronExpandLimit = std::size_t{1} << 26;

/// Fully materialized N x K matrix. Used as the reference for the strided kernels.
Matrix kron_expand(const KroneckerMatrix& w, std::size_t max_entries = kKronExpandLimit);

/// Y = X W^T for X of shape M x K, caching every intermediate stage for kron_backward.
std::pair<Matrix, KronForwardCache> kron_forward(const Matrix& x, const KroneckerMatrix& w,
                                                 const KronOptions& opts = {});

/// Y = X W^T without keeping intermediates (two ping-pong buffers).
Matrix kron_apply(const Matrix& x, const KroneckerMatrix& w, const KronOptions& opts = {});

/// kron_apply into an existing M x N matrix, overwriting it. Throws DimensionError on shape mismatch.
void kron_apply_into(const Matrix& x, const KroneckerMatrix& w, Matrix& y, const KronOptions& opts = {});

/// Reverse pass of kron_forward for upstream gradient gY (M x N).
///
/// Complex values use the split-real convention: a gradient entry is
/// dL/dRe + i dL/dIm, so for y = w z the factor gradient is gy * conj(z).
KronGradients kron_backward(const Matrix& x, const KroneckerMatrix& w, const KronForwardCache& cache,
                            const Matrix& grad_out, const KronOptions& opts = {});

KroneckerMatrix kron_transpose(const KroneckerMatrix& w);
KroneckerMatrix kron_hermitian(const KroneckerMatrix& w);

/// amplitude * sum_f ||W_f^H W_f - I||_F^2. Requires square factors.
double soft_unitary_penalty(const KroneckerMatrix& w, double amplitude);
/// Per-factor gradient of soft_unitary_penalty: 4 * amplitude * W_f (W_f^H W_f - I).
std::vector<Matrix> soft_unitary_grad(const KroneckerMatrix& w, double amplitude);
double soft_unitary_penalty(const Matrix& w, double amplitude);
Matrix soft_unitary_grad(const Matrix& w, double amplitude);

/// Haar-random unitary (orthogonal for Field::real) factors, deterministic in seed.
KroneckerMatrix random_unitary_factors(const std::vector<FactorShape>& shapes, std::uint64_t seed,
                                       Field field = Field::complex);
/// Haar-random n x n unitary/orthogonal matrix.
Matrix random_unitary(std::size_t n, std::uint64_t seed, Field field = Field::complex);

/// c * sum_f P_f Q_f with c = 2 for complex factors, 1 for real.
std::size_t parameter_count(const KroneckerMatrix& w);

/// log2(n) factors of shape 2x2; n must be a power of two >= 2.
std::vector<FactorShape> auto_2x2_shapes(std::size_t n);

}  // namespace kru

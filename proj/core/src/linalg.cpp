#include "kru/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kru {

const char* to_string(Field f) { return f == Field::real ? "real" : "complex"; }

Field field_from_string(const std::string& s) {
  if (s == "real") return Field::real;
  if (s == "complex") return Field::complex;
  throw std::invalid_argument("unknown field '" + s + "' (expected real or complex)");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, Field field)
    : rows_(rows), cols_(cols), field_(field), data_(rows * cols) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, Field field, std::vector<Complex> data)
    : rows_(rows), cols_(cols), field_(field), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("matrix data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_string());
  }
  if (field_ == Field::real) {
    for (auto& v : data_) v.imag(0.0);
  }
}

Matrix Matrix::zeros(std::size_t rows, std::size_t cols, Field field) {
  return Matrix(rows, cols, field);
}

Matrix Matrix::ones(std::size_t rows, std::size_t cols, Field field) {
  Matrix m(rows, cols, field);
  m.fill(1.0);
  return m;
}

Matrix Matrix::identity(std::size_t n, Field field) {
  Matrix m(n, n, field);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<Complex>> rows, Field field) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<Complex> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("from_rows: ragged row lengths");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix(r, c, field, std::move(data));
}

void Matrix::reshape(std::size_t rows, std::size_t cols) {
  if (rows * cols != data_.size()) {
    throw DimensionError("cannot reshape " + shape_string() + " to " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
  rows_ = rows;
  cols_ = cols;
}

void Matrix::set_field(Field field) {
  field_ = field;
  if (field_ == Field::real) {
    for (auto& v : data_) v.imag(0.0);
  }
}

void Matrix::fill(Complex value) {
  if (field_ == Field::real) value.imag(0.0);
  std::fill(data_.begin(), data_.end(), value);
}

std::string Matrix::shape_string() const {
  std::ostringstream os;
  os << rows_ << "x" << cols_ << " (" << to_string(field_) << ")";
  return os.str();
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": shape mismatch " + a.shape_string() + " vs " +
                         b.shape_string());
  }
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows(), a.field());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const Complex* src = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = src[j];
  }
  return t;
}

Matrix conj(const Matrix& a) {
  Matrix c = a;
  if (!a.is_real()) {
    for (auto& v : c.data()) v = std::conj(v);
  }
  return c;
}

Matrix hermitian(const Matrix& a) {
  Matrix t(a.cols(), a.rows(), a.field());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const Complex* src = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = std::conj(src[j]);
  }
  return t;
}

Matrix apply_op(Op op, const Matrix& a) {
  switch (op) {
    case Op::none: return a;
    case Op::trans: return transpose(a);
    case Op::conj: return conj(a);
    case Op::herm: return hermitian(a);
  }
  return a;
}

namespace {

std::size_t op_rows(Op op, const Matrix& m) {
  return (op == Op::trans || op == Op::herm) ? m.cols() : m.rows();
}
std::size_t op_cols(Op op, const Matrix& m) {
  return (op == Op::trans || op == Op::herm) ? m.rows() : m.cols();
}

// out(i, :) += a(i, k) * b(k, :) with plain row-major operands.
void gemm_nn(const Matrix& a, const Matrix& b, Matrix& out) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (a.is_real() && b.is_real()) {
    const auto* bd = reinterpret_cast<const double*>(b.data().data());
    auto* od = reinterpret_cast<double*>(out.data().data());
    for (std::size_t i = 0; i < m; ++i) {
      double* orow = od + 2 * i * n;
      const Complex* arow = a.row(i);
      for (std::size_t p = 0; p < k; ++p) {
        const double av = arow[p].real();
        if (av == 0.0) continue;
        const double* brow = bd + 2 * p * n;
        for (std::size_t j = 0; j < n; ++j) orow[2 * j] += av * brow[2 * j];
      }
    }
    return;
  }
  for (std::size_t i = 0; i < m; ++i) {
    Complex* orow = out.row(i);
    const Complex* arow = a.row(i);
    for (std::size_t p = 0; p < k; ++p) {
      const double ar = arow[p].real(), ai = arow[p].imag();
      if (ar == 0.0 && ai == 0.0) continue;
      const Complex* brow = b.row(p);
      for (std::size_t j = 0; j < n; ++j) {
        const double br = brow[j].real(), bi = brow[j].imag();
        orow[j] += Complex(ar * br - ai * bi, ar * bi + ai * br);
      }
    }
  }
}

// out(i, j) += sum_p a(i, p) * op(b)(j, p), op = identity or conj. Rows of both operands are
// contiguous. The inner dimension is tiled so a panel of a stays in cache while every row of b
// passes over it, and four rows of a share each load of b.
void gemm_nt(const Matrix& a, const Matrix& b, bool conj_b, Matrix& out) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  constexpr std::size_t panel = 256;
  const double sign = conj_b ? -1.0 : 1.0;
  const bool real = a.is_real() && b.is_real();
  for (std::size_t p0 = 0; p0 < k; p0 += panel) {
    const std::size_t len = std::min(k, p0 + panel) - p0;
    for (std::size_t j = 0; j < n; ++j) {
      const Complex* bj = b.row(j) + p0;
      std::size_t i = 0;
      for (; i + 4 <= m; i += 4) {
        const Complex* a0 = a.row(i) + p0;
        const Complex* a1 = a.row(i + 1) + p0;
        const Complex* a2 = a.row(i + 2) + p0;
        const Complex* a3 = a.row(i + 3) + p0;
        if (real) {
          double r0 = 0.0, r1 = 0.0, r2 = 0.0, r3 = 0.0;
          for (std::size_t p = 0; p < len; ++p) {
            const double br = bj[p].real();
            r0 += a0[p].real() * br;
            r1 += a1[p].real() * br;
            r2 += a2[p].real() * br;
            r3 += a3[p].real() * br;
          }
          out(i, j) += r0;
          out(i + 1, j) += r1;
          out(i + 2, j) += r2;
          out(i + 3, j) += r3;
          continue;
        }
        double r0 = 0.0, i0 = 0.0, r1 = 0.0, i1 = 0.0, r2 = 0.0, i2 = 0.0, r3 = 0.0, i3 = 0.0;
        for (std::size_t p = 0; p < len; ++p) {
          const double br = bj[p].real(), bi = sign * bj[p].imag();
          r0 += a0[p].real() * br - a0[p].imag() * bi;
          i0 += a0[p].real() * bi + a0[p].imag() * br;
          r1 += a1[p].real() * br - a1[p].imag() * bi;
          i1 += a1[p].real() * bi + a1[p].imag() * br;
          r2 += a2[p].real() * br - a2[p].imag() * bi;
          i2 += a2[p].real() * bi + a2[p].imag() * br;
          r3 += a3[p].real() * br - a3[p].imag() * bi;
          i3 += a3[p].real() * bi + a3[p].imag() * br;
        }
        out(i, j) += Complex(r0, i0);
        out(i + 1, j) += Complex(r1, i1);
        out(i + 2, j) += Complex(r2, i2);
        out(i + 3, j) += Complex(r3, i3);
      }
      for (; i < m; ++i) {
        const Complex* ai = a.row(i) + p0;
        double re = 0.0, im = 0.0;
        for (std::size_t p = 0; p < len; ++p) {
          const double br = bj[p].real(), bi = sign * bj[p].imag();
          re += ai[p].real() * br - ai[p].imag() * bi;
          im += ai[p].real() * bi + ai[p].imag() * br;
        }
        out(i, j) += Complex(re, im);
      }
    }
  }
}

}  // namespace

void matmul_accumulate(Op op_a, const Matrix& a, Op op_b, const Matrix& b, Matrix& out) {
  const std::size_t ak = op_cols(op_a, a), bk = op_rows(op_b, b);
  if (ak != bk) {
    throw DimensionError("matmul: inner dimensions differ, lhs " + a.shape_string() + " rhs " +
                         b.shape_string());
  }
  if (out.rows() != op_rows(op_a, a) || out.cols() != op_cols(op_b, b)) {
    throw DimensionError("matmul: output " + out.shape_string() + " does not fit product of " +
                         a.shape_string() + " and " + b.shape_string());
  }
  if (promote(a.field(), b.field()) == Field::complex) out.set_field(Field::complex);
  if (op_a == Op::none && op_b == Op::none) {
    gemm_nn(a, b, out);
  } else if (op_a == Op::none && (op_b == Op::trans || op_b == Op::herm)) {
    gemm_nt(a, b, op_b == Op::herm, out);
  } else if (op_a == Op::none) {
    gemm_nn(a, apply_op(op_b, b), out);
  } else if (op_b == Op::none) {
    gemm_nn(apply_op(op_a, a), b, out);
  } else {
    gemm_nn(apply_op(op_a, a), apply_op(op_b, b), out);
  }
}

Matrix matmul(Op op_a, const Matrix& a, Op op_b, const Matrix& b) {
  if (op_cols(op_a, a) != op_rows(op_b, b)) {
    throw DimensionError("matmul: inner dimensions differ, lhs " + a.shape_string() + " rhs " +
                         b.shape_string());
  }
  Matrix out(op_rows(op_a, a), op_cols(op_b, b), promote(a.field(), b.field()));
  matmul_accumulate(op_a, a, op_b, b, out);
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) { return matmul(Op::none, a, Op::none, b); }

double frobenius_norm_sq(const Matrix& a) {
  double s = 0.0;
  for (const auto& v : a.data()) s += std::norm(v);
  return s;
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (const auto& v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

Matrix add(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "add");
  Matrix out(a.rows(), a.cols(), promote(a.field(), b.field()));
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

Matrix sub(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "sub");
  Matrix out(a.rows(), a.cols(), promote(a.field(), b.field()));
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Matrix neg(const Matrix& a) { return scale(a, -1.0); }

Matrix scale(const Matrix& a, Complex alpha) {
  const Field f = alpha.imag() == 0.0 ? a.field() : Field::complex;
  Matrix out(a.rows(), a.cols(), f);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = alpha * a[i];
  return out;
}

Matrix axpy(Complex alpha, const Matrix& x, const Matrix& y) {
  Matrix out = y;
  axpy_inplace(alpha, x, out);
  return out;
}

void axpy_inplace(Complex alpha, const Matrix& x, Matrix& y) {
  require_same_shape(x, y, "axpy");
  const Field f = promote(promote(x.field(), y.field()),
                          alpha.imag() == 0.0 ? Field::real : Field::complex);
  if (f == Field::complex) y.set_field(Field::complex);
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

Matrix elementwise_mul(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "elementwise_mul");
  Matrix out(a.rows(), a.cols(), promote(a.field(), b.field()));
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

Matrix split_real_imag(const Matrix& a) {
  Matrix out(a.rows(), 2 * a.cols(), Field::real);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const Complex* src = a.row(i);
    Complex* dst = out.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) {
      dst[j] = src[j].real();
      dst[a.cols() + j] = src[j].imag();
    }
  }
  return out;
}

}  // namespace kru

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kru {

using Complex = std::complex<double>;

/// Scalar field a matrix lives over. Real matrices keep every imaginary part at exactly 0.
enum class Field : std::uint8_t { real, complex };

inline Field promote(Field a, Field b) {
  return (a == Field::complex || b == Field::complex) ? Field::complex : Field::real;
}

const char* to_string(Field f);
Field field_from_string(const std::string& s);

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense row-major matrix of interleaved (re, im) doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, Field field = Field::complex);
  Matrix(std::size_t rows, std::size_t cols, Field field, std::vector<Complex> data);

  static Matrix zeros(std::size_t rows, std::size_t cols, Field field = Field::complex);
  static Matrix ones(std::size_t rows, std::size_t cols, Field field = Field::complex);
  static Matrix identity(std::size_t n, Field field = Field::complex);
  /// Builds from nested rows; all rows must have equal length.
  static Matrix from_rows(std::initializer_list<std::initializer_list<Complex>> rows,
                          Field field = Field::complex);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  Field field() const noexcept { return field_; }
  bool is_real() const noexcept { return field_ == Field::real; }
  bool empty() const noexcept { return data_.empty(); }

  Complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  Complex& operator[](std::size_t i) { return data_[i]; }
  const Complex& operator[](std::size_t i) const { return data_[i]; }

  std::span<Complex> data() noexcept { return data_; }
  std::span<const Complex> data() const noexcept { return data_; }
  Complex* row(std::size_t r) { return data_.data() + r * cols_; }
  const Complex* row(std::size_t r) const { return data_.data() + r * cols_; }

  /// Reinterprets the storage with a new shape of equal element count.
  void reshape(std::size_t rows, std::size_t cols);
  /// Switching to real drops imaginary parts.
  void set_field(Field field);
  void fill(Complex value);
  void set_zero() { fill(Complex{}); }

  std::string shape_string() const;

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.field_ == b.field_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Field field_ = Field::complex;
  std::vector<Complex> data_;
};

/// How an operand enters a product: as is, transposed, conjugated, or conjugate-transposed.
enum class Op : std::uint8_t { none, trans, conj, herm };

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul(Op op_a, const Matrix& a, Op op_b, const Matrix& b);
/// out += op(a) * op(b); out must already have the product's shape.
void matmul_accumulate(Op op_a, const Matrix& a, Op op_b, const Matrix& b, Matrix& out);

Matrix hermitian(const Matrix& a);
Matrix transpose(const Matrix& a);
Matrix conj(const Matrix& a);
Matrix apply_op(Op op, const Matrix& a);

double frobenius_norm_sq(const Matrix& a);
inline double frobenius_norm(const Matrix& a) { return std::sqrt(frobenius_norm_sq(a)); }
/// Largest entry modulus.
double max_abs(const Matrix& a);

Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix neg(const Matrix& a);
Matrix scale(const Matrix& a, Complex alpha);
/// alpha * x + y
Matrix axpy(Complex alpha, const Matrix& x, const Matrix& y);
/// y += alpha * x, in place.
void axpy_inplace(Complex alpha, const Matrix& x, Matrix& y);
Matrix elementwise_mul(const Matrix& a, const Matrix& b);

/// Real matrix [Re(a), Im(a)] of shape rows x 2*cols.
Matrix split_real_imag(const Matrix& a);

void require_same_shape(const Matrix& a, const Matrix& b, const char* what);

}  // namespace kru

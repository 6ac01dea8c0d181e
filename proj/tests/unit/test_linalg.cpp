#include <gtest/gtest.h>

#include "gradcheck.hpp"
#include "kru/linalg.hpp"

using namespace kru;
using kru::testing::naive_matmul;
using kru::testing::random_matrix;
using kru::testing::rel_frobenius;

TEST(Linalg, IdentityTimesMatrix) {
  Rng rng(1);
  const Matrix m = random_matrix(3, 3, Field::complex, rng);
  EXPECT_EQ(matmul(Matrix::identity(3), m), m);
}

TEST(Linalg, ImaginaryUnitSquared) {
  const Matrix i = Matrix::from_rows({{Complex(0, 1)}});
  const Matrix r = matmul(i, i);
  EXPECT_EQ(r(0, 0), Complex(-1, 0));
}

TEST(Linalg, MatmulMatchesTripleLoop) {
  Rng rng(2);
  for (Field f : {Field::real, Field::complex}) {
    const Matrix a = random_matrix(4, 3, f, rng);
    const Matrix b = random_matrix(3, 5, f, rng);
    const Matrix got = matmul(a, b);
    const Matrix want = naive_matmul(a, b);
    for (std::size_t k = 0; k < want.size(); ++k) {
      EXPECT_LE(std::abs(got[k] - want[k]), 1e-13 * std::max(1.0, std::abs(want[k])));
    }
  }
}

TEST(Linalg, MatmulOpsMatchExplicitOperands) {
  Rng rng(3);
  const Matrix a = random_matrix(4, 3, Field::complex, rng);
  const Matrix b = random_matrix(5, 3, Field::complex, rng);
  EXPECT_LE(rel_frobenius(matmul(Op::none, a, Op::herm, b), naive_matmul(a, hermitian(b))), 1e-14);
  EXPECT_LE(rel_frobenius(matmul(Op::none, a, Op::trans, b), naive_matmul(a, transpose(b))), 1e-14);
  const Matrix c = random_matrix(4, 5, Field::complex, rng);
  EXPECT_LE(rel_frobenius(matmul(Op::herm, a, Op::none, c), naive_matmul(hermitian(a), c)), 1e-14);
  EXPECT_LE(rel_frobenius(matmul(Op::conj, c, Op::none, b), naive_matmul(conj(c), b)), 1e-14);
}

TEST(Linalg, MatmulAccumulateAdds) {
  Rng rng(4);
  const Matrix a = random_matrix(2, 3, Field::complex, rng);
  const Matrix b = random_matrix(3, 2, Field::complex, rng);
  Matrix out = Matrix::ones(2, 2);
  matmul_accumulate(Op::none, a, Op::none, b, out);
  EXPECT_LE(rel_frobenius(out, add(naive_matmul(a, b), Matrix::ones(2, 2))), 1e-14);
}

TEST(Linalg, DimensionMismatchNamesShapes) {
  const Matrix a(2, 3), b(2, 3);
  try {
    matmul(a, b);
    FAIL();
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("2x3"), std::string::npos) << msg;
  }
}

TEST(Linalg, MixedFieldsPromote) {
  const Matrix a = Matrix::from_rows({{2.0}}, Field::real);
  const Matrix b = Matrix::from_rows({{Complex(0, 1)}});
  const Matrix r = matmul(a, b);
  EXPECT_EQ(r.field(), Field::complex);
  EXPECT_EQ(r(0, 0), Complex(0, 2));
}

TEST(Linalg, Hermitian) {
  EXPECT_EQ(hermitian(Matrix::from_rows({{Complex(1, 2)}}))(0, 0), Complex(1, -2));
  Rng rng(5);
  const Matrix a = random_matrix(3, 4, Field::complex, rng);
  EXPECT_EQ(hermitian(hermitian(a)), a);
  const Matrix h = hermitian(a);
  ASSERT_EQ(h.rows(), 4u);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(h(j, i), std::conj(a(i, j)));
  }
  const Matrix r = random_matrix(3, 4, Field::real, rng);
  EXPECT_EQ(hermitian(r), transpose(r));
}

TEST(Linalg, FrobeniusNorm) {
  EXPECT_EQ(frobenius_norm_sq(Matrix::zeros(3, 3)), 0.0);
  EXPECT_DOUBLE_EQ(frobenius_norm_sq(Matrix::identity(7)), 7.0);
  Rng rng(6);
  const Matrix a = random_matrix(5, 5, Field::complex, rng);
  double want = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) want += std::norm(a(i, j));
  }
  EXPECT_NEAR(frobenius_norm_sq(a), want, 1e-13 * want);
}

TEST(Linalg, ElementwiseIdentities) {
  Rng rng(7);
  const Matrix a = random_matrix(3, 4, Field::complex, rng);
  EXPECT_EQ(elementwise_mul(a, Matrix::ones(3, 4)), a);
  EXPECT_EQ(add(a, neg(a)), Matrix::zeros(3, 4));
  EXPECT_EQ(scale(a, 2.0), add(a, a));
  EXPECT_LE(rel_frobenius(axpy(3.0, a, a), scale(a, 4.0)), 1e-15);
  EXPECT_THROW(add(a, Matrix(4, 3)), DimensionError);
}

TEST(Linalg, SetFieldRealDropsImaginary) {
  Matrix a = Matrix::from_rows({{Complex(1, 2), Complex(3, -4)}});
  a.set_field(Field::real);
  EXPECT_EQ(a(0, 0), Complex(1, 0));
  EXPECT_EQ(a(0, 1), Complex(3, 0));
}

TEST(Linalg, SplitRealImag) {
  const Matrix a = Matrix::from_rows({{Complex(1, 2), Complex(3, 4)}});
  const Matrix s = split_real_imag(a);
  EXPECT_EQ(s, Matrix::from_rows({{1.0, 3.0, 2.0, 4.0}}, Field::real));
}

TEST(LinalgProperty, Associativity) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed, Stream::probe);
    const std::size_t m = 1 + rng.below(6), k = 1 + rng.below(6), l = 1 + rng.below(6),
                      n = 1 + rng.below(6);
    const Matrix a = random_matrix(m, k, Field::complex, rng);
    const Matrix b = random_matrix(k, l, Field::complex, rng);
    const Matrix c = random_matrix(l, n, Field::complex, rng);
    const Matrix x = matmul(matmul(a, b), c), y = matmul(a, matmul(b, c));
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (std::abs(y[i]) >= 1e-8) EXPECT_LE(std::abs(x[i] - y[i]) / std::abs(y[i]), 1e-10);
    }
  }
}

TEST(LinalgProperty, HermitianOfProduct) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed, Stream::probe);
    const Matrix a = random_matrix(1 + rng.below(5), 4, Field::complex, rng);
    const Matrix b = random_matrix(4, 1 + rng.below(5), Field::complex, rng);
    EXPECT_LE(rel_frobenius(hermitian(matmul(a, b)), matmul(hermitian(b), hermitian(a))), 1e-13);
  }
}

TEST(LinalgProperty, RealModeAgreesWithComplexMode) {
  Rng rng(8);
  const Matrix a = random_matrix(6, 5, Field::real, rng);
  const Matrix b = random_matrix(5, 4, Field::real, rng);
  Matrix ac = a, bc = b;
  ac.set_field(Field::complex);
  bc.set_field(Field::complex);
  const Matrix r = matmul(a, b), c = matmul(ac, bc);
  EXPECT_EQ(r.field(), Field::real);
  for (std::size_t i = 0; i < r.size(); ++i) {
    EXPECT_LE(std::abs(r[i] - c[i]), 1e-13 * std::max(1.0, std::abs(c[i])));
  }
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "matrix.hpp"
#include "rng.hpp"
#include "scalar.hpp"

using namespace fermicas;

TEST_CASE("field arithmetic basics") {
  Scalar a(Rational(1, 2), Rational(1));   // 1/2 + i
  Scalar b(Rational(1, 2), Rational(-1));  // 1/2 - i
  CHECK((a * b) == Scalar(Rational(5, 4)));

  Rng rng(7);
  for (int t = 0; t < 50; ++t) {
    Scalar x = rng.small_scalar();
    CHECK(x * Scalar(1) == x);
    if (!x.is_zero()) CHECK((x / x).is_one());
  }

  Scalar z(Rational(3, 7), Rational(2));
  Scalar pure = z - z.conj();
  CHECK(pure == Scalar(Rational(0), Rational(4)));  // 4i
  CHECK(z.conj().conj() == z);

  CHECK_THROWS_AS(a / Scalar(0), ScalarError);
}

TEST_CASE("exactness: (a/b)*b = a") {
  Rng rng(11);
  for (int t = 0; t < 100; ++t) {
    Scalar a = rng.small_scalar(7, 5);
    Scalar b = rng.small_scalar(7, 5);
    if (b.is_zero()) continue;
    CHECK((a / b) * b == a);
  }
}

TEST_CASE("scalar text round-trip") {
  CHECK(Scalar::parse("3/2+1/2i") == Scalar(Rational(3, 2), Rational(1, 2)));
  CHECK(Scalar::parse("-1i") == -Scalar::i());
  CHECK(Scalar::parse("0") == Scalar(0));
  CHECK(Scalar::parse("i") == Scalar::i());
  CHECK(Scalar::parse("3/2-1/2i") == Scalar(Rational(3, 2), Rational(-1, 2)));
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    Scalar x = rng.small_scalar(9, 4);
    CHECK(Scalar::parse(x.str()) == x);
  }
  CHECK_THROWS_AS(Scalar::parse("3//2"), ScalarError);
  CHECK_THROWS_AS(Scalar::parse(""), ScalarError);
}

TEST_CASE("solve_linear identity and unipotent") {
  Matrix B(2, 3);
  Rng rng(5);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) B.at(i, j) = rng.small_scalar();
  CHECK(solve_linear(Matrix::identity(2), B) == B);

  Matrix U(2, 2);
  U.at(0, 0) = Scalar(1);
  U.at(0, 1) = Scalar(1);
  U.at(1, 1) = Scalar(1);
  Matrix Uinv = inverse(U);
  CHECK(Uinv.at(0, 0) == Scalar(1));
  CHECK(Uinv.at(0, 1) == Scalar(-1));
  CHECK(Uinv.at(1, 0) == Scalar(0));
  CHECK(Uinv.at(1, 1) == Scalar(1));
}

TEST_CASE("solve_linear random 5x5 verified by re-multiplication") {
  Rng rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix M(5, 5);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) M.at(i, j) = rng.small_scalar(3, 2);
    Matrix X;
    try {
      X = solve_linear(M, Matrix::identity(5));
    } catch (const MatrixError&) {
      continue;  // singular draw
    }
    CHECK(M * X == Matrix::identity(5));
    CHECK(X * M == Matrix::identity(5));
  }
}

TEST_CASE("solve_linear singular error carries rank") {
  Matrix M(2, 2);
  M.at(0, 0) = Scalar(1);
  M.at(1, 0) = Scalar(2);  // second column zero
  CHECK_THROWS_WITH_AS(solve_linear(M, Matrix::identity(2)),
                       doctest::Contains("rank 1"), MatrixError);
}

TEST_CASE("solve round-trip on random systems") {
  Rng rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix M(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) M.at(i, j) = rng.small_scalar(2, 2);
    Matrix X(4, 2);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 2; ++j) X.at(i, j) = rng.small_scalar(2, 2);
    try {
      CHECK(solve_linear(M, M * X) == X);
    } catch (const MatrixError&) {
    }
  }
}

TEST_CASE("psd_check verdicts") {
  CHECK(psd_check(Matrix::identity(3)).positive_semidefinite);

  Matrix D(2, 2);
  D.at(0, 0) = Scalar(1);
  D.at(1, 1) = Scalar(-1);
  PsdVerdict v = psd_check(D);
  CHECK_FALSE(v.positive_semidefinite);
  REQUIRE(v.witness.has_value());
  CHECK(sandwich(*v.witness, D, *v.witness).re() < 0);

  Matrix H(2, 2);
  H.at(0, 1) = Scalar::i();
  H.at(1, 0) = -Scalar::i();
  v = psd_check(H);  // eigenvalues +-1
  CHECK_FALSE(v.positive_semidefinite);
  REQUIRE(v.witness.has_value());
  CHECK(sandwich(*v.witness, H, *v.witness).re() < 0);

  Matrix N(2, 3);
  CHECK_THROWS_AS(psd_check(N), MatrixError);
}

TEST_CASE("psd_check(A^dagger A) always PSD; witnesses always certify") {
  Rng rng(2024);
  for (int trial = 0; trial < 25; ++trial) {
    int n = int(rng.uniform(1, 5));
    Matrix A(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A.at(i, j) = rng.small_scalar(3, 2);
    CHECK(psd_check(A.adjoint() * A).positive_semidefinite);

    Matrix H = A + A.adjoint();  // hermitian, often indefinite
    PsdVerdict v = psd_check(H);
    if (!v.positive_semidefinite) {
      REQUIRE(v.witness.has_value());
      Scalar q = sandwich(*v.witness, H, *v.witness);
      CHECK(q.im() == 0);
      CHECK(q.re() < 0);
    }
  }
}

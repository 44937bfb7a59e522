#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scalar.hpp"

namespace fermicas {

using Vec = std::vector<Scalar>;

struct MatrixError : std::runtime_error {
  explicit MatrixError(const std::string& what) : std::runtime_error(what) {}
};

/// Dense matrix over Gaussian rationals.
class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), a_(size_t(rows) * cols) {}

  static Matrix identity(int n);
  static Matrix zero(int rows, int cols) { return Matrix(rows, cols); }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  Scalar& at(int r, int c) { return a_[size_t(r) * cols_ + c]; }
  const Scalar& at(int r, int c) const { return a_[size_t(r) * cols_ + c]; }

  Matrix operator+(const Matrix& o) const;
  Matrix operator-(const Matrix& o) const;
  Matrix operator*(const Matrix& o) const;
  Matrix operator*(const Scalar& s) const;
  Vec operator*(const Vec& v) const;
  bool operator==(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_ && a_ == o.a_; }
  bool operator!=(const Matrix& o) const { return !(*this == o); }

  Matrix adjoint() const;    // conjugate transpose
  Matrix transpose() const;
  Matrix conjugate() const;
  bool is_zero() const;
  bool is_hermitian() const;

  std::string str() const;

 private:
  int rows_, cols_;
  std::vector<Scalar> a_;
};

/// Solves M*X = B exactly. Throws MatrixError naming the rank if M is singular.
Matrix solve_linear(const Matrix& M, const Matrix& B);
Matrix inverse(const Matrix& M);
int rank(const Matrix& M);
/// Basis of the right kernel {v : M v = 0}.
std::vector<Vec> kernel_basis(const Matrix& M);

struct PsdVerdict {
  bool positive_semidefinite = false;
  /// On failure, a vector v with Re(v^dagger M v) < 0 (exact witness).
  std::optional<Vec> witness;
  std::string detail;
};

/// Exact PSD test for a hermitian matrix via pivoted LDL^dagger elimination.
/// Throws MatrixError if M is not hermitian.
PsdVerdict psd_check(const Matrix& M);

/// v^dagger M w.
Scalar sandwich(const Vec& v, const Matrix& M, const Vec& w);

}  // namespace fermicas

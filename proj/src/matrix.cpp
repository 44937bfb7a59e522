#include "matrix.hpp"

#include <sstream>

namespace fermicas {

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m.at(i, i) = Scalar(1);
  return m;
}

Matrix Matrix::operator+(const Matrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw MatrixError("shape mismatch in +");
  Matrix r(rows_, cols_);
  for (size_t k = 0; k < a_.size(); ++k) r.a_[k] = a_[k] + o.a_[k];
  return r;
}

Matrix Matrix::operator-(const Matrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw MatrixError("shape mismatch in -");
  Matrix r(rows_, cols_);
  for (size_t k = 0; k < a_.size(); ++k) r.a_[k] = a_[k] - o.a_[k];
  return r;
}

Matrix Matrix::operator*(const Matrix& o) const {
  if (cols_ != o.rows_) throw MatrixError("shape mismatch in *");
  Matrix r(rows_, o.cols_);
  for (int i = 0; i < rows_; ++i)
    for (int k = 0; k < cols_; ++k) {
      const Scalar& aik = at(i, k);
      if (aik.is_zero()) continue;
      for (int j = 0; j < o.cols_; ++j) {
        const Scalar& bkj = o.at(k, j);
        if (!bkj.is_zero()) r.at(i, j) += aik * bkj;
      }
    }
  return r;
}

Matrix Matrix::operator*(const Scalar& s) const {
  Matrix r(rows_, cols_);
  for (size_t k = 0; k < a_.size(); ++k) r.a_[k] = a_[k] * s;
  return r;
}

Vec Matrix::operator*(const Vec& v) const {
  if (int(v.size()) != cols_) throw MatrixError("shape mismatch in M*v");
  Vec r(rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j)
      if (!at(i, j).is_zero() && !v[j].is_zero()) r[i] += at(i, j) * v[j];
  return r;
}

Matrix Matrix::adjoint() const {
  Matrix r(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) r.at(j, i) = at(i, j).conj();
  return r;
}

Matrix Matrix::transpose() const {
  Matrix r(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) r.at(j, i) = at(i, j);
  return r;
}

Matrix Matrix::conjugate() const {
  Matrix r(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) r.at(i, j) = at(i, j).conj();
  return r;
}

bool Matrix::is_zero() const {
  for (const auto& x : a_)
    if (!x.is_zero()) return false;
  return true;
}

bool Matrix::is_hermitian() const {
  if (rows_ != cols_) return false;
  for (int i = 0; i < rows_; ++i)
    for (int j = i; j < cols_; ++j)
      if (at(i, j) != at(j, i).conj()) return false;
  return true;
}

std::string Matrix::str() const {
  std::ostringstream os;
  for (int i = 0; i < rows_; ++i) {
    os << (i == 0 ? "[" : " ");
    for (int j = 0; j < cols_; ++j) os << at(i, j).str() << (j + 1 < cols_ ? ", " : "");
    os << (i + 1 < rows_ ? ";\n" : "]");
  }
  return os.str();
}

namespace {

// Row-reduces [M | B] in place, returns pivot columns of M.
std::vector<int> eliminate(Matrix& M, Matrix* B) {
  std::vector<int> pivots;
  int r = 0;
  for (int c = 0; c < M.cols() && r < M.rows(); ++c) {
    int p = -1;
    for (int i = r; i < M.rows(); ++i)
      if (!M.at(i, c).is_zero()) {
        p = i;
        break;
      }
    if (p < 0) continue;
    if (p != r) {
      for (int j = 0; j < M.cols(); ++j) std::swap(M.at(p, j), M.at(r, j));
      if (B)
        for (int j = 0; j < B->cols(); ++j) std::swap(B->at(p, j), B->at(r, j));
    }
    Scalar inv = Scalar(1) / M.at(r, c);
    for (int j = 0; j < M.cols(); ++j) M.at(r, j) *= inv;
    if (B)
      for (int j = 0; j < B->cols(); ++j) B->at(r, j) *= inv;
    for (int i = 0; i < M.rows(); ++i) {
      if (i == r || M.at(i, c).is_zero()) continue;
      Scalar f = M.at(i, c);
      for (int j = 0; j < M.cols(); ++j) M.at(i, j) -= f * M.at(r, j);
      if (B)
        for (int j = 0; j < B->cols(); ++j) B->at(i, j) -= f * B->at(r, j);
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

}  // namespace

Matrix solve_linear(const Matrix& M, const Matrix& B) {
  if (M.rows() != M.cols()) throw MatrixError("solve_linear needs a square matrix");
  if (M.rows() != B.rows()) throw MatrixError("shape mismatch in solve_linear");
  Matrix A = M;
  Matrix X = B;
  std::vector<int> pivots = eliminate(A, &X);
  if (int(pivots.size()) != M.rows())
    throw MatrixError("singular matrix in solve_linear (rank " + std::to_string(pivots.size()) +
                      " of " + std::to_string(M.rows()) + ")");
  return X;
}

Matrix inverse(const Matrix& M) { return solve_linear(M, Matrix::identity(M.rows())); }

int rank(const Matrix& M) {
  Matrix A = M;
  return int(eliminate(A, nullptr).size());
}

std::vector<Vec> kernel_basis(const Matrix& M) {
  Matrix A = M;
  std::vector<int> pivots = eliminate(A, nullptr);
  std::vector<bool> is_pivot(M.cols(), false);
  for (int c : pivots) is_pivot[c] = true;
  std::vector<Vec> basis;
  for (int free = 0; free < M.cols(); ++free) {
    if (is_pivot[free]) continue;
    Vec v(M.cols());
    v[free] = Scalar(1);
    for (size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -A.at(int(r), free);
    basis.push_back(std::move(v));
  }
  return basis;
}

Scalar sandwich(const Vec& v, const Matrix& M, const Vec& w) {
  Vec mw = M * w;
  Scalar s;
  for (size_t i = 0; i < v.size(); ++i) s += v[i].conj() * mw[i];
  return s;
}

PsdVerdict psd_check(const Matrix& M) {
  if (!M.is_hermitian()) throw MatrixError("psd_check requires a hermitian matrix");
  const int n = M.rows();
  Matrix A = M;
  // C maps current coordinates back to original ones: the active form is C^dagger M C
  // restricted to the still-active index set.
  Matrix C = Matrix::identity(n);
  std::vector<bool> active(n, true);

  auto witness_from = [&](const Vec& bad) {
    Vec w(n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) w[i] += C.at(i, k) * bad[k];
    return w;
  };

  for (int step = 0; step < n; ++step) {
    int pivot = -1;
    for (int i = 0; i < n; ++i) {
      if (!active[i]) continue;
      const Scalar& d = A.at(i, i);
      if (d.im() != 0) throw MatrixError("hermitian matrix with non-real diagonal");
      if (d.re() < 0) {
        Vec bad(n);
        bad[i] = Scalar(1);
        PsdVerdict v;
        v.positive_semidefinite = false;
        v.witness = witness_from(bad);
        v.detail = "negative diagonal pivot at index " + std::to_string(i);
        return v;
      }
      if (d.re() > 0 && pivot < 0) pivot = i;
    }
    if (pivot < 0) {
      // All active diagonals are zero; PSD forces the active block to vanish.
      for (int i = 0; i < n; ++i) {
        if (!active[i]) continue;
        for (int j = 0; j < n; ++j) {
          if (!active[j] || i == j) continue;
          const Scalar& c = A.at(i, j);
          if (c.is_zero()) continue;
          Vec bad(n);
          bad[i] = -c;     // v_i = -c, v_j = 1 gives v^dag A v = -2|c|^2 < 0
          bad[j] = Scalar(1);
          PsdVerdict v;
          v.positive_semidefinite = false;
          v.witness = witness_from(bad);
          v.detail = "zero diagonal with nonzero off-diagonal at (" + std::to_string(i) + "," +
                     std::to_string(j) + ")";
          return v;
        }
      }
      break;  // zero block: PSD
    }
    // Eliminate row/column `pivot` from the active block; update C accordingly.
    Scalar p = A.at(pivot, pivot);
    for (int j = 0; j < n; ++j) {
      if (!active[j] || j == pivot) continue;
      Scalar f = A.at(pivot, j) / p;  // column update uses v_j -> v_j - f * v_pivot
      if (f.is_zero()) continue;
      for (int i = 0; i < n; ++i) {
        if (!active[i]) continue;
        A.at(i, j) -= A.at(i, pivot) * f;
      }
      for (int i = 0; i < n; ++i) C.at(i, j) -= C.at(i, pivot) * f;
    }
    for (int i = 0; i < n; ++i) {
      if (!active[i] || i == pivot) continue;
      if (!A.at(i, pivot).is_zero()) {
        Scalar g = A.at(i, pivot) / p;
        for (int j = 0; j < n; ++j)
          if (active[j]) A.at(i, j) -= g * A.at(pivot, j);
      }
    }
    active[pivot] = false;
  }
  PsdVerdict v;
  v.positive_semidefinite = true;
  v.detail = "exact LDL^dagger decomposition with nonnegative pivots";
  return v;
}

}  // namespace fermicas

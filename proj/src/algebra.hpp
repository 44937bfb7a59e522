#pragma once

#include <optional>
#include <string>
#include <vector>

#include "grassmann.hpp"
#include "matrix.hpp"
#include "scalar.hpp"

namespace fermicas {

struct AlgebraError : std::runtime_error {
  explicit AlgebraError(const std::string& what) : std::runtime_error(what) {}
};

/// Finite-dimensional Z2-graded unital *-algebra given by structure constants.
class StructureConstantAlgebra {
 public:
  StructureConstantAlgebra() = default;
  /// mult[i][j] = coordinates of e_i e_j; star[i] = coordinates of (e_i)*.
  StructureConstantAlgebra(std::vector<int> degrees, Vec unit,
                           std::vector<std::vector<Vec>> mult, std::vector<Vec> star,
                           std::vector<std::string> labels = {});

  int dim() const { return int(degrees_.size()); }
  int degree(int i) const { return degrees_[i]; }
  const Vec& unit() const { return unit_; }
  const std::string& label(int i) const { return labels_[i]; }
  const Vec& basis_product(int i, int j) const { return mult_[i][j]; }
  const Vec& basis_star(int i) const { return star_[i]; }

  Vec multiply(const Vec& a, const Vec& b) const;
  /// Antilinear extension of the basis involution.
  Vec star(const Vec& a) const;
  Vec basis(int i) const;
  Vec zero() const { return Vec(dim()); }

  /// -1 when not homogeneous; otherwise the common degree (0 for the zero vector).
  int parity(const Vec& a) const;
  /// Even/odd parts of a vector.
  std::pair<Vec, Vec> split(const Vec& a) const;

  /// Eager structural validation: unit neutral and even, degree additivity,
  /// associativity (exhaustive for dim <= 32, sampled above), involution laws.
  /// Returns an explanation on failure.
  std::optional<std::string> validate(uint64_t seed = 1) const;

  bool operator==(const StructureConstantAlgebra& o) const;

 private:
  std::vector<int> degrees_;
  Vec unit_;
  std::vector<std::vector<Vec>> mult_;
  std::vector<Vec> star_;
  std::vector<std::string> labels_;
};

/// The Grassmann algebra Lambda^n as a structure-constant algebra
/// (basis indexed by subset masks in increasing order).
StructureConstantAlgebra grassmann_algebra(int n);

/// Graded 2x2 matrix algebra: diagonal even, off-diagonal odd; star = conjugate
/// transpose.
StructureConstantAlgebra graded_matrix_algebra_2x2();

/// Full matrix algebra M_k with the checkerboard grading dg(E_ij) = (i+j) mod 2.
StructureConstantAlgebra graded_matrix_algebra(int k);

/// Direct sum A (+) B with componentwise product, grading and involution.
StructureConstantAlgebra direct_sum(const StructureConstantAlgebra& A,
                                    const StructureConstantAlgebra& B);

/// Graded tensor product Lambda^n (x) A with Koszul signs:
///   (eta_I (x) a)(eta_J (x) b) = (-1)^{|J| dg(a)} (eta_I eta_J) (x) (ab)
///   (eta_I (x) a)* = (-1)^{|I| dg(a)} eta_I^* (x) a*.
/// Basis index = mask * dim(A) + k.
StructureConstantAlgebra graded_tensor(int n, const StructureConstantAlgebra& A);

inline int tensor_index(int dimA, uint32_t mask, int k) { return int(mask) * dimA + k; }

/// Linear map between two structure-constant algebras.
struct AlgebraMap {
  const StructureConstantAlgebra* src = nullptr;
  const StructureConstantAlgebra* dst = nullptr;
  Matrix matrix;  // dim(dst) x dim(src)

  Vec apply(const Vec& a) const { return matrix * a; }
};

struct HomVerdict {
  bool ok = true;
  std::string witness;
};

/// Checks unitality, multiplicativity, degree preservation and (optionally)
/// *-preservation of a linear map; exhaustive over basis pairs when
/// dim(src)^2 <= pair_budget, otherwise seeded sampling.
HomVerdict check_homomorphism(const AlgebraMap& f, bool check_star = true,
                              int pair_budget = 4096, uint64_t seed = 1);

/// JSON descriptor round-trip: {dimension, degrees, unit, mult_table, star_table,
/// labels?} with scalars in the textual syntax.
std::string algebra_to_json(const StructureConstantAlgebra& A);
StructureConstantAlgebra algebra_from_json(const std::string& text);

}  // namespace fermicas

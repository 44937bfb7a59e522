#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "grassmann.hpp"
#include "matrix.hpp"
#include "scalar.hpp"

namespace fermicas {

struct FunctionalError : std::runtime_error {
  explicit FunctionalError(const std::string& what) : std::runtime_error(what) {}
};

/// Finite configuration space: |points| lattice points carrying `rank`
/// internal components each, with an optional causal partial order.
class ConfigurationSpace {
 public:
  ConfigurationSpace() : points_(0), rank_(1) {}
  ConfigurationSpace(int points, int rank);

  int points() const { return points_; }
  int rank() const { return rank_; }
  int dim() const { return points_ * rank_; }
  int point_of(int index) const { return index / rank_; }
  int component_of(int index) const { return index % rank_; }
  int index_of(int point, int comp) const { return point * rank_ + comp; }

  bool has_order() const { return !leq_.empty(); }
  /// x precedes y (x is in the causal past of y, reflexive).
  bool leq(int x, int y) const;
  void set_order(std::vector<std::vector<bool>> leq);

  /// Optional (time, site) coordinates used by lattice models.
  void set_coords(std::vector<std::pair<int, int>> tx) { coords_ = std::move(tx); }
  bool has_coords() const { return !coords_.empty(); }
  int time_of(int point) const { return coords_[point].first; }
  int site_of(int point) const { return coords_[point].second; }

  /// Points in the causal past of any point in `region` (includes the region).
  std::set<int> past_of(const std::set<int>& region) const;
  /// Support of a coordinate vector: points with a nonzero component.
  std::set<int> support(const Vec& v) const;

 private:
  int points_, rank_;
  std::vector<std::vector<bool>> leq_;
  std::vector<std::pair<int, int>> coords_;
};

/// Fermionic functional of bounded degree: a finite sequence of alternating
/// multilinear forms, each stored by its values on ascending basis tuples
/// (subset bitmasks of basis indices).
class FermionicFunctional {
 public:
  FermionicFunctional() = default;
  FermionicFunctional(ConfigurationSpace space, int max_degree);

  const ConfigurationSpace& space() const { return space_; }
  int max_degree() const { return int(comp_.size()) - 1; }

  Scalar component(int n, uint32_t mask) const;
  void set_component(int n, uint32_t mask, const Scalar& v);
  const std::map<uint32_t, Scalar>& component_map(int n) const { return comp_[n]; }

  bool is_zero() const;

  static FermionicFunctional constant(const ConfigurationSpace& s, const Scalar& c);

  FermionicFunctional operator+(const FermionicFunctional& o) const;
  FermionicFunctional operator*(const Scalar& s) const;
  bool operator==(const FermionicFunctional& o) const;

  /// F(v_1 ^ ... ^ v_k); degrees above the stored maximum give 0.
  Scalar evaluate(const std::vector<Vec>& wedge) const;

  /// Evaluation of the degree-n component on n vectors (exact alternating
  /// expansion over ascending tuples).
  Scalar evaluate_component(int n, const std::vector<Vec>& args) const;

  std::string str() const;

 private:
  ConfigurationSpace space_;
  std::vector<std::map<uint32_t, Scalar>> comp_;  // comp_[n]: mask(|n|) -> value
};

/// Pointwise (wedge) product of functionals on the same space.
FermionicFunctional pointwise_product(const FermionicFunctional& F, const FermionicFunctional& G);

/// Support: points x such that some component takes a nonzero value on a basis
/// tuple with its first slot supported at x (equivalently, by antisymmetry,
/// with any slot at x).
std::set<int> support(const FermionicFunctional& F);

struct AdditivityVerdict {
  bool additive = true;
  std::string witness;  // human-readable counterexample when not additive
};

/// Exact check of the three-term additivity identity on tuples (v+w+z) with
/// disjointly supported w and z; exhaustive over basis-supported tuples when
/// feasible, else seeded sampling.
AdditivityVerdict additivity_check(const FermionicFunctional& F, int trials, uint64_t seed);

struct LeftDerivative {
  Scalar pairing;  // <hdir, F^(1)(h)>
  Vec gradient;    // F^(1)(h) as a coordinate vector: a -> F(e_a ^ h)
};

/// Left derivative at the wedge h in direction hdir: <hdir, F^(1)(h)> = F(hdir ^ h).
LeftDerivative left_derivative(const FermionicFunctional& F, const Vec& hdir,
                               const std::vector<Vec>& h);
/// Right derivative: gradient_a = F(h ^ e_a).
LeftDerivative right_derivative(const FermionicFunctional& F, const Vec& hdir,
                                const std::vector<Vec>& h);

/// One Grassmann-smeared section: v tensor eta with eta odd.
struct SmearedTerm {
  Vec section;
  GrassmannElement parameter;
};

/// Evaluates the G-extension F_G on exp(sum_i v^i eta_i):
///   sum_n sum_{i_1<...<i_n} F_n(v^{i_1},...,v^{i_n}) eta_{i_n}...eta_{i_1}.
GrassmannElement extend_and_evaluate(const FermionicFunctional& F,
                                     const std::vector<SmearedTerm>& assignment);

/// Functional with Grassmann-algebra values (the result of shifting by an
/// odd-parameter section).
class GrassmannValuedFunctional {
 public:
  GrassmannValuedFunctional() = default;
  GrassmannValuedFunctional(ConfigurationSpace space, int max_degree, int params);

  const ConfigurationSpace& space() const { return space_; }
  int max_degree() const { return int(comp_.size()) - 1; }
  int params() const { return params_; }

  GrassmannElement component(int n, uint32_t mask) const;
  void set_component(int n, uint32_t mask, const GrassmannElement& v);

  GrassmannElement evaluate_component(int n, const std::vector<Vec>& args) const;
  bool operator==(const GrassmannValuedFunctional& o) const;

  /// Grassmann-valued analogue of extend_and_evaluate; the parameters of the
  /// assignment and the values of the components live in the same algebra.
  GrassmannElement extend_and_evaluate(const std::vector<SmearedTerm>& assignment) const;

 private:
  ConfigurationSpace space_;
  int params_ = 0;
  std::vector<std::map<uint32_t, GrassmannElement>> comp_;
};

/// Shifted functional F^w for w = sum_j w^j theta_j (theta_j odd, living in a
/// parameter algebra of `params` generators):
///   F^w_n(v^1,...,v^n) = sum_k sum_{j_1<...<j_k}
///       F_{k+n}(v^1,...,v^n,w^{j_1},...,w^{j_k}) theta_{j_k}...theta_{j_1}.
GrassmannValuedFunctional shift(const FermionicFunctional& F, const std::vector<SmearedTerm>& w,
                                int params);

}  // namespace fermicas

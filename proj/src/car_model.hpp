#pragma once

#include <set>
#include <string>
#include <vector>

#include "functional.hpp"
#include "matrix.hpp"

namespace fermicas {

struct ModelError : std::runtime_error {
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

/// Finite causal Dirac model: lattice points with a causal order, a hermitian
/// invertible pairing Gamma, the Dirac operator D, its retarded inverse S_R
/// and a solution kernel S_minus. The test window (the finite stand-in for the
/// compactly supported sections V_c) marks the points on which the exact
/// inverse identities hold; boundary slices stay outside it.
class CausalDiracModel {
 public:
  ConfigurationSpace space;
  std::vector<char> is_test;  // per point
  Matrix Gamma, D, S_R, S_minus;
  std::string name;

  int dim() const { return space.dim(); }
  bool test_point(int p) const { return is_test[p] != 0; }
  std::vector<int> test_indices() const;

  /// <u, v> = u^dagger Gamma v.
  Scalar pairing(const Vec& u, const Vec& v) const;

  /// Commutator kernel S = S_R - Gamma^{-1} S_R^dagger Gamma.
  const Matrix& S() const;
  /// Gamma * iS (hermitian); its W-block is the CAR Gram matrix.
  const Matrix& gram() const;
  Matrix gram_window() const;

 private:
  mutable Matrix s_cache_, gram_cache_;
  mutable bool has_s_ = false, has_gram_ = false;
};

/// Staggered lattice model: T timesteps x L sites on a spatial ring, two
/// components per point (the two half-steps of a cell). The Dirac operator is
/// the hermitian hopping chain i(U - U^T) + m along staircase lines (one site
/// shift per timestep), Gamma pairs each half-step with its neighbours
/// (diagonal 1/2, off-diagonal 1 along the same staircases), and S_R comes
/// from exact forward substitution. Test window: timesteps 1..T-2.
CausalDiracModel builtin_lattice(int T, int L, const Rational& mass,
                                 const Rational& gamma_diag = Rational(1, 2));

/// Parses "lattice:T=3,L=2,m=1/2" (optional ",g=<p/q>" for the Gamma diagonal)
/// or a JSON descriptor.
CausalDiracModel model_from_spec(const std::string& spec);
CausalDiracModel model_from_json(const std::string& text);
std::string model_to_json(const CausalDiracModel& m);

struct ModelCheck {
  std::string name;
  bool pass = true;
  std::string witness;
};

/// Exact validation of all model axioms (finite-boundary forms):
///  - Gamma hermitian and invertible
///  - window hermiticity of Gamma D (defect confined outside the test window)
///  - retardation: S_R cell blocks vanish off the causal cone
///  - D S_R = 1 on interior rows / test columns, S_R D = 1 on test columns
///  - (Gamma^{-1} S_R^dagger Gamma) D = 1 on test columns, hence S D = 0 there
///  - S_minus annihilated by D on the window (both sides)
///  - Gamma iS hermitian; PSD and nonzero on the window
std::vector<ModelCheck> validate_model(const CausalDiracModel& m);
bool all_pass(const std::vector<ModelCheck>& checks);
std::string first_failure(const std::vector<ModelCheck>& checks);

struct CommutatorKernel {
  Matrix S;
  std::vector<ModelCheck> checks;
};
CommutatorKernel commutator_kernel(const CausalDiracModel& m);

struct CausalSplit {
  Vec f_prime;   // f - D h, supported away from the past of supp g
  Vec h;         // a * S_R f with a the indicator of a downward-closed set
  std::set<int> cutoff_region;
};

/// Splits f = f' + D h with supp f' disjoint from the causal past of supp g.
/// Throws when no downward-closed region separates the supports (the causal
/// order is too small / degenerate).
CausalSplit causal_split(const CausalDiracModel& m, const Vec& f, const Vec& g);

/// S_plus / S_minus / S_F derived from a model: S_F = i S_R - S_minus,
/// S_plus = iS - S_minus; satisfies D S_plus = D S_minus = 0 and
/// D S_F = i on the window, and -i(S_plus + S_minus) = S identically.
struct PropagatorPack {
  Matrix S_plus, S_minus, S_F, Gamma, D;
  std::vector<int> window;  // basis indices of the test window
};
PropagatorPack propagator_pack(const CausalDiracModel& m);

}  // namespace fermicas

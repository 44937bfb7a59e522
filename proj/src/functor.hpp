#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "algebra.hpp"
#include "grassmann.hpp"
#include "matrix.hpp"

namespace fermicas {

struct FunctorError : std::runtime_error {
  explicit FunctorError(const std::string& what) : std::runtime_error(what) {}
};

/// A covariant Grassmann multiplication functor consumed through a finite
/// interface: graded *-algebras per level n <= max_level, the natural
/// embedding of Lambda^n, and the algebra maps of Grassmann homomorphisms.
class GrassmannFunctor {
 public:
  virtual ~GrassmannFunctor() = default;
  virtual std::string name() const = 0;
  virtual int max_level() const = 0;
  virtual const StructureConstantAlgebra& level(int n) const = 0;
  /// iota_{Lambda^n}: the natural embedding of the Grassmann algebra.
  virtual Vec embed(int n, const GrassmannElement& g) const = 0;
  /// The algebra map of a homomorphism chi as a matrix dim(dst) x dim(src).
  virtual Matrix hom_matrix(const GrassmannHom& chi) const = 0;
};

/// Linear extension of the functor to formal combinations of homomorphisms.
Matrix combination_matrix(const GrassmannFunctor& F, int src_n, int dst_n,
                          const HomCombination& combo);

/// The model functor G |-> G (x) B for a graded *-algebra B.
class TensorFunctor : public GrassmannFunctor {
 public:
  TensorFunctor(StructureConstantAlgebra B, int max_level, std::string name = "tensor-model");
  std::string name() const override { return name_; }
  int max_level() const override { return max_; }
  const StructureConstantAlgebra& level(int n) const override;
  Vec embed(int n, const GrassmannElement& g) const override;
  Matrix hom_matrix(const GrassmannHom& chi) const override;
  const StructureConstantAlgebra& fiber() const { return B_; }

 private:
  StructureConstantAlgebra B_;
  int max_;
  std::string name_;
  std::vector<StructureConstantAlgebra> levels_;
};

/// The non-example G |-> G (x) G, chi |-> chi (x) chi: functorial and natural
/// but violates linearity over combinations of homomorphisms.
class SquareFunctor : public GrassmannFunctor {
 public:
  explicit SquareFunctor(int max_level);
  std::string name() const override { return "square-non-example"; }
  int max_level() const override { return max_; }
  const StructureConstantAlgebra& level(int n) const override;
  Vec embed(int n, const GrassmannElement& g) const override;
  Matrix hom_matrix(const GrassmannHom& chi) const override;

 private:
  int max_;
  std::vector<StructureConstantAlgebra> levels_;
};

/// Functor loaded from a JSON descriptor: algebra tables per level, the iota
/// matrices, and matrices for a generating set of monomial homomorphisms
/// (faces, cofaces, single-generator kills, triple expanders); everything else
/// is derived by composition and by linearity through hom combinations.
class JsonFunctor : public GrassmannFunctor {
 public:
  static JsonFunctor from_json(const std::string& text);
  /// Serializes any functor by sampling its generating maps.
  static std::string to_json(const GrassmannFunctor& F);

  std::string name() const override { return name_; }
  int max_level() const override { return max_; }
  const StructureConstantAlgebra& level(int n) const override;
  Vec embed(int n, const GrassmannElement& g) const override;
  Matrix hom_matrix(const GrassmannHom& chi) const override;

 private:
  Matrix monomial_matrix(const GrassmannHom& chi) const;
  std::string name_;
  int max_ = 0;
  std::vector<StructureConstantAlgebra> levels_;
  std::vector<Matrix> iota_;                    // dim(A_n) x 2^n
  std::map<std::pair<int, int>, Matrix> face_;  // (n, k): Lambda^n -> Lambda^{n-1}
  std::map<std::pair<int, int>, Matrix> coface_;  // (n, k): Lambda^n -> Lambda^{n+1}
  std::map<std::pair<int, int>, Matrix> kill_;    // (n, i): drop generator i
  std::map<std::pair<int, int>, Matrix> expand_;  // (n, k): eta_k -> eta_k eta_{k+1} eta_{k+2}
};

// --- reconstruction ---------------------------------------------------------

/// pi_K = G(P_K).
Matrix pi_matrix(const GrassmannFunctor& F, int n, uint32_t K);
/// rho_K = pi_K prod_{k in K} (id - pi_{K minus k}).
Matrix rho_matrix(const GrassmannFunctor& F, int n, uint32_t K);

/// Membership in the top component: pi_{full minus k}(a) = 0 for all k.
bool in_top_component(const GrassmannFunctor& F, int n, const Vec& a);

struct TopComponent {
  int level = 0;
  std::vector<Vec> basis;  // homogeneous basis of rho_full(A_n), in A_n coordinates
};
TopComponent top_component(const GrassmannFunctor& F, int n);

/// Product A^n x A^m -> A^{n+m}:
///   a . b = (-1)^{m dg(a)} G(chi^{n+m}_{m+1..m+n})(a) * G(chi^{n+m}_{1..m})(b).
Vec dot(const GrassmannFunctor& F, int n, const Vec& a, int m, const Vec& b);

/// iota_{k,n}(a) = eta_1...eta_{k-n} G(chi^k_{k-n+1..k})(a).
Vec iota_up(const GrassmannFunctor& F, int k, int n, const Vec& a);

/// Element of the reconstructed inductive-limit algebra.
struct LimitElement {
  int level = 0;
  Vec coords;  // in A_level, lying in the top component
};

LimitElement limit_normalize(const GrassmannFunctor& F, LimitElement a);
bool limit_equal(const GrassmannFunctor& F, const LimitElement& a, const LimitElement& b);
LimitElement limit_add(const GrassmannFunctor& F, const LimitElement& a, const LimitElement& b);
LimitElement limit_scale(const LimitElement& a, const Scalar& s);
LimitElement limit_product(const GrassmannFunctor& F, const LimitElement& a,
                           const LimitElement& b);
/// dg(iota_n(a)) = (dg a + n) mod 2; -1 when not homogeneous.
int limit_degree(const GrassmannFunctor& F, const LimitElement& a);
/// iota_n(a)* = (-1)^{n(n-1)/2 + n(dg a + n)} iota_n(a*).
LimitElement limit_star(const GrassmannFunctor& F, const LimitElement& a);
LimitElement limit_unit(const GrassmannFunctor& F);

/// Element of Lambda^n (x) (limit algebra): mask -> coefficient.
using SigmaImage = std::map<uint32_t, LimitElement>;

/// sigma_{Lambda^n}(a) = sum_J eta_J (x) iota_{|J|}(G(chi_n^J)(rho_J(a))).
SigmaImage sigma(const GrassmannFunctor& F, int n, const Vec& a);

SigmaImage sigma_product(const GrassmannFunctor& F, int n, const SigmaImage& x,
                         const SigmaImage& y);
SigmaImage sigma_star(const GrassmannFunctor& F, int n, const SigmaImage& x);
bool sigma_equal(const GrassmannFunctor& F, const SigmaImage& x, const SigmaImage& y);
/// G^A(chi) applied to a sigma image (chi acting on the Grassmann leg).
SigmaImage sigma_push(const GrassmannFunctor& F, const GrassmannHom& chi, const SigmaImage& x);

/// A natural cone sigma': G(Lambda^n) -> Lambda^n (x) target, given per level as
/// a matrix to coordinates indexed by mask * dim(target) + t.
struct PrimedCone {
  const StructureConstantAlgebra* target = nullptr;
  std::vector<Matrix> maps;  // maps[n]: (2^n * dimT) x dim(A_n)
};

/// The canonical cone of the reconstruction itself restricted to level
/// max_level... used for tau = identity tests.
PrimedCone inclusion_cone(const TensorFunctor& F);

struct TauResult {
  bool consistent = true;      // primed data supported on the top mask, levels agree
  bool homomorphism = true;    // product/degree/star/unit preserved
  bool natural = true;         // (id (x) tau) . sigma == sigma'
  bool determined = true;      // defining constraints pin tau on the whole basis
  std::string witness;
  /// tau on each level's top-component basis: tau[n][i] = image of the i-th
  /// top basis vector of A^n in the target algebra.
  std::vector<std::vector<Vec>> images;
};

/// Universal map tau: limit -> target with (id (x) tau) . sigma = sigma'.
TauResult universal_tau(const GrassmannFunctor& F, const PrimedCone& primed);

struct CheckItem {
  std::string name;
  bool pass = true;
  std::string witness;
};

/// Validates the functor axioms: per-level algebra laws, injective *-embedding,
/// functoriality, naturality of iota, graded centrality, and linearity over
/// combinations of homomorphisms (the linear-hull condition).
std::vector<CheckItem> validate_functor(const GrassmannFunctor& F, uint64_t seed, int trials);

/// Lemma-level identities of the rho system: orthogonality, completeness,
/// convolution; exhaustive over the basis of each level.
std::vector<CheckItem> check_rho_system(const GrassmannFunctor& F);

}  // namespace fermicas

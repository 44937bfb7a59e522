#pragma once

#include <array>
#include <map>
#include <vector>

#include "car_model.hpp"
#include "grassmann.hpp"

namespace fermicas {

struct WickError : std::runtime_error {
  explicit WickError(const std::string& what) : std::runtime_error(what) {}
};

/// Polynomial in the formal parameters hbar, lambda (coupling) and u (shift
/// flow), with exact coefficients.
class Poly {
 public:
  using Key = std::array<int, 3>;  // (hbar, lambda, u) exponents
  Poly() = default;
  Poly(const Scalar& c) { add({0, 0, 0}, c); }  // NOLINT

  static Poly hbar(int pow = 1) { return monomial({pow, 0, 0}); }
  static Poly lambda(int pow = 1) { return monomial({0, pow, 0}); }
  static Poly u(int pow = 1) { return monomial({0, 0, pow}); }
  static Poly monomial(Key k, const Scalar& c = Scalar(1));

  bool is_zero() const { return c_.empty(); }
  const std::map<Key, Scalar>& coeffs() const { return c_; }
  void add(const Key& k, const Scalar& v);

  Poly operator+(const Poly& o) const;
  Poly operator-(const Poly& o) const;
  Poly operator*(const Poly& o) const;
  Poly operator*(const Scalar& s) const;
  bool operator==(const Poly& o) const { return c_ == o.c_; }

  /// Drops lambda-degrees above the cap (formal power series truncation).
  Poly truncate_lambda(int max_pow) const;
  /// Substitutes numeric values: picks out coefficients.
  Poly set_hbar(const Scalar& value) const;
  Poly set_u(const Scalar& value) const;
  /// d/du acting on the u-exponents.
  Poly d_du() const;

  std::string str() const;

 private:
  std::map<Key, Scalar> c_;
};

/// Element of the exterior algebra on Grassmann parameters eta_1..eta_n and
/// field symbols psibar_a, psi_a (a < d), with Poly coefficients. All
/// generators carry one common odd degree.
class WickElement {
 public:
  WickElement() : params_(0), d_(0) {}
  WickElement(int params, int d);

  static WickElement unit(int params, int d) {
    WickElement e(params, d);
    e.terms_[0] = Poly(Scalar(1));
    return e;
  }
  static WickElement zero(int params, int d) { return WickElement(params, d); }

  int params() const { return params_; }
  int field_dim() const { return d_; }
  const std::map<uint64_t, Poly>& terms() const { return terms_; }
  void add_term(uint64_t mask, const Poly& p);
  Poly scalar_poly() const;  // coefficient of the empty monomial
  bool is_zero() const { return terms_.empty(); }
  /// True when every monomial has even total degree.
  bool is_even() const;
  bool has_fields() const;

  // generator bit positions
  uint64_t eta_bit(int i) const { return 1ull << i; }
  uint64_t psibar_bit(int a) const { return 1ull << (16 + a); }
  uint64_t psi_bit(int a) const { return 1ull << (40 + a); }

  static WickElement eta(int params, int d, int i);
  static WickElement psibar(int params, int d, int a);
  static WickElement psi(int params, int d, int a);

  WickElement operator+(const WickElement& o) const;
  WickElement operator-(const WickElement& o) const;
  WickElement operator*(const Poly& p) const;
  WickElement operator*(const Scalar& s) const;
  /// Wedge product (the pointwise product of extended functionals).
  WickElement operator*(const WickElement& o) const;
  bool operator==(const WickElement& o) const;
  bool operator!=(const WickElement& o) const { return !(*this == o); }

  WickElement truncate_lambda(int max_pow) const;
  WickElement set_hbar(const Scalar& value) const;
  WickElement set_u(const Scalar& value) const;
  WickElement d_du() const;

  /// Antilinear involution: eta* = eta, psi_a* = -psibar_a, psibar_a* = -psi_a,
  /// products reversed.
  WickElement star() const;

  std::string str() const;

 private:
  int params_, d_;
  std::map<uint64_t, Poly> terms_;
};

/// Graded left/right derivatives with respect to a single generator bit.
WickElement left_derivative(const WickElement& A, uint64_t bit);
WickElement right_derivative(const WickElement& A, uint64_t bit);

// --- fields and functionals ---------------------------------------------------

/// psi(s) = sum_a conj((Gamma s)_a) psi_a  (antilinear in s).
WickElement field_psi(const PropagatorPack& p, int params, const Vec& s);
/// psibar(s) = sum_a (Gamma s)_a psibar_a  (linear in s).
WickElement field_psibar(const PropagatorPack& p, int params, const Vec& s);
/// Doubled Dirac field D(s) = psi(s) - psibar(s).
WickElement doubled_field(const PropagatorPack& p, int params, const Vec& s);

/// One odd-parameter smeared section eta_i s^i.
struct ParamSection {
  int param = 0;  // Grassmann parameter index
  Vec section;
};

/// D_G(sum_i eta_i s^i) = sum_i eta_i D(s^i).
WickElement doubled_field(const PropagatorPack& p, int params,
                          const std::vector<ParamSection>& s);

/// <u, v>_G for parameter-smeared sections: sum_{jk} eta_j <u^j, v^k> eta'_k
/// with the first argument's parameters pulled left.
WickElement pairing_G(const PropagatorPack& p, int params, const std::vector<ParamSection>& u,
                      const std::vector<ParamSection>& v);

/// Extended Lagrangian L(f)_G = sum_{ab} (f Gamma D f)_{ab} psibar_a psi_b with a
/// diagonal rational cutoff weight f (empty = 1 everywhere).
WickElement lagrangian(const PropagatorPack& p, int params, const std::vector<Rational>& cutoff = {});
/// delta_h L = D_G(Dh) + <h, Dh>_G; requires cutoff = 1 on supp h (checked by
/// the lagrangian-shift route used in tests).
WickElement delta_L(const PropagatorPack& p, int params, const std::vector<ParamSection>& h);

/// Shift of the field symbols by an even parameter section (the functional
/// F^w): psi_a -> psi_a + w_a, psibar_a -> psibar_a + conj(w)_a, where w is a
/// sum of (u-scaled) odd-parameter sections.
WickElement shift_fields(const WickElement& A, const PropagatorPack& p,
                         const std::vector<ParamSection>& w, bool scale_by_u = false);

/// Euler derivative (epsilon A)(h) = d/du A^{u h}|_{u=0}.
WickElement euler_derivative(const WickElement& A, const PropagatorPack& p,
                             const std::vector<ParamSection>& h);

/// Evaluation of an extended functional on exp(sum eta_i h^i): substitute the
/// field symbols by their parameter values and keep the field-free part.
WickElement evaluate_on(const WickElement& A, const PropagatorPack& p,
                        const std::vector<ParamSection>& h);

// --- products -----------------------------------------------------------------

enum class ProductKind { Wedge, Star, StarF };

/// Star product / unrenormalized time-ordered product of eq-style double
/// contractions; Wedge ignores the pack.
WickElement product(ProductKind kind, const WickElement& A, const WickElement& B,
                    const PropagatorPack& p, int lambda_order = -1);

/// Terminating exponential with respect to the chosen product. Throws when the
/// argument has a non-nilpotent scalar part and no lambda truncation applies.
WickElement exponential(ProductKind kind, const WickElement& A, const PropagatorPack& p,
                        int lambda_order = -1);

/// S(A) = exp_starF(i lambda A), a formal power series in lambda (truncated).
WickElement smatrix(const WickElement& A, const PropagatorPack& p, int lambda_order);

/// Inverse with respect to the star product for elements 1 + O(lambda or
/// nilpotent); truncated at the given lambda order.
WickElement star_inverse(const WickElement& A, const PropagatorPack& p, int lambda_order);

/// T(exp_otimes(i lambda A) (x) H) = d/(i dmu) S(lambda A + mu H) at mu = 0.
WickElement time_ordered_insertion(const WickElement& A, const WickElement& H,
                                   const PropagatorPack& p, int lambda_order);

/// Retarded interacting field R(exp(A), H) = S(A)^{star -1} star T(e^{iA} (x) H).
WickElement retarded_field(const WickElement& A, const WickElement& H, const PropagatorPack& p,
                           int lambda_order);

struct WickCheck {
  std::string name;
  bool pass = true;
  std::string witness;
};

/// Off-shell field equation: R(e^A, [eps A(h) + D(Dh)]) = D(Dh).
WickCheck field_equation_check(const PropagatorPack& p, const WickElement& A,
                               const std::vector<ParamSection>& h, int lambda_order);

/// The Dynamics relation and its relatives: S(A^h + delta_h L) = S(A) star
/// S(delta_h L) = S(delta_h L) star S(A); the Schwinger-Dyson identity
/// T(e^{iA} (x) D(Dh)) = S(A) star D(Dh) + i (eps S(A))(h); F star D(Dh) =
/// F wedge D(Dh); and the u-flow identity d/du K(u) = (eps K(u))(h) + D(Dh).
std::vector<WickCheck> dynamics_equivalence_check(const PropagatorPack& p, const WickElement& A,
                                                  const std::vector<ParamSection>& h,
                                                  int lambda_order);

/// exp_starF(i D_G(Dh)) = exp_wedge(i D_G(Dh)) exp(-i <h, Dh>_G).
WickCheck f1_identity_check(const PropagatorPack& p, const std::vector<ParamSection>& h);

/// Causal factorization S(A1+A2+A3) = S(A1+A2) star S(A2)^{-1} star S(A2+A3)
/// for interactions with supp A1 outside the past of supp A3.
WickCheck causal_factorization_check(const PropagatorPack& p, const CausalDiracModel& m,
                                     const WickElement& A1, const WickElement& A2,
                                     const WickElement& A3, int lambda_order);

/// Interaction presets on a model: "mass" (bilinear), "quartic", "current"
/// (bilinear with hopping structure), each supported on the test window.
WickElement interaction_preset(const PropagatorPack& p, int params, const std::string& name);

}  // namespace fermicas

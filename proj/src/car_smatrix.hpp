#pragma once

#include "car_algebra.hpp"
#include "wick.hpp"

namespace fermicas {

/// Element of Lambda^n (x) CAR: parameter mask -> CAR coefficient.
class LambdaCar {
 public:
  LambdaCar() : car_(nullptr), params_(0) {}
  LambdaCar(const CarAlgebra& car, int params) : car_(&car), params_(params) {}

  static LambdaCar unit(const CarAlgebra& car, int params);

  int params() const { return params_; }
  bool is_zero() const { return terms_.empty(); }
  const std::map<uint32_t, CarElement>& terms() const { return terms_; }
  CarElement coefficient(uint32_t mask) const;
  void add_term(uint32_t mask, const CarElement& x);

  LambdaCar operator+(const LambdaCar& o) const;
  LambdaCar operator-(const LambdaCar& o) const;
  /// (eta_I (x) x)(eta_J (x) y) = (-1)^{|J| dg(x)} eta_I eta_J (x) xy.
  LambdaCar operator*(const LambdaCar& o) const;
  LambdaCar operator*(const Scalar& s) const;
  bool operator==(const LambdaCar& o) const { return terms_ == o.terms_; }
  bool operator!=(const LambdaCar& o) const { return !(*this == o); }

  /// (eta_I (x) x)* = (-1)^{|I| dg(x)} eta_I^* (x) x*.
  LambdaCar star() const;

  std::string str() const;

 private:
  const CarAlgebra* car_;
  int params_;
  std::map<uint32_t, CarElement> terms_;
};

/// Quantization of the time-ordered exponential: exp_starF(i D_G(f)) computed
/// in the Wick calculus and normally ordered into Lambda (x) CAR (hbar = 1).
LambdaCar toy_smatrix_linear(const CarAlgebra& car, int params,
                             const std::vector<ParamSection>& f);

/// S-matrix of an even Grassmann constant: S(c) = sum (ic)^k / k!.
LambdaCar smatrix_of_constant(const CarAlgebra& car, const GrassmannElement& c);

/// B_k(s^{i_1} ^ ... ^ s^{i_k}) extracted from the expansion
/// S(D_G(f)) = 1 + sum_k (i^k/k!) sum_{i_1<...<i_k} eta_{i_k}...eta_{i_1} B_k(...).
CarElement extract_bk(const LambdaCar& S, uint32_t param_mask);

/// B_1(s) = Psi(s)* + Psi(s), the quantized doubled field.
CarElement quantized_b1(const CarAlgebra& car, const Vec& s);
/// The antilinear part Psi(s) of B_1, extracted via Psi = (B_1(s) + i B_1(is))/2.
CarElement extract_psi(const CarAlgebra& car, const Vec& s);

/// Verifies S(D(f)) S(D(g)) = S(D(f+g)) S(E(f,g)) exactly in Lambda (x) CAR,
/// with E(f,g) = <g, S_R f>_G + <S_R f, g>_G.
ModelCheck weyl_relation_check(const CarAlgebra& car, const std::vector<ParamSection>& f,
                               const std::vector<ParamSection>& g);

/// The canonical anticommutation relations for the Psi extracted from B_1, on
/// all window basis pairs; also checks B_1 against the direct field operators.
std::vector<ModelCheck> car_theorem_check(const CarAlgebra& car);

/// B_1(D h) = 0 for all window basis sections h (the on-shell Dynamics).
ModelCheck dynamics_onshell_check(const CarAlgebra& car);

/// The involution axiom S(F)* = S(F*)^{-1} for F = D(eta s); note F* = -F for
/// odd-parameter smearings, so this is the exact unitarity statement the
/// algebra supports.
ModelCheck smatrix_unitary_check(const CarAlgebra& car, const Vec& s);

struct JordanWignerResult {
  bool applicable = false;  // window Gram diagonal?
  bool pass = false;
  int modes = 0;
  int words_checked = 0;
  std::string witness;
};

/// Cross-checks normal-form CAR arithmetic against the 2^k-dimensional matrix
/// representation built from Pauli-type strings scaled by the rational Gram
/// entries. Skipped (applicable = false) when the window Gram is not diagonal.
JordanWignerResult jordan_wigner_crosscheck(const CausalDiracModel& m, int max_modes,
                                            int words, uint64_t seed);

}  // namespace fermicas

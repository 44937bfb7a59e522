#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scalar.hpp"

namespace fermicas {

/// Generator index sets are bitmasks, so the generator count is capped.
constexpr int kMaxGenerators = 16;

struct GrassmannError : std::runtime_error {
  explicit GrassmannError(const std::string& what) : std::runtime_error(what) {}
};

int popcount(uint32_t m);
/// Number of pairs (i in I, j in J) with i > j; the reordering sign of
/// eta_I * eta_J is (-1)^inversions.
int inversions(uint32_t I, uint32_t J);

/// Element of the Grassmann algebra on n anticommuting generators,
/// stored as subset-indexed exact coefficients.
class GrassmannElement {
 public:
  GrassmannElement() : n_(0) {}
  explicit GrassmannElement(int n);

  static GrassmannElement unit(int n) { return basis(n, 0); }
  static GrassmannElement basis(int n, uint32_t mask);
  static GrassmannElement generator(int n, int i) { return basis(n, 1u << i); }

  int generators() const { return n_; }
  const std::map<uint32_t, Scalar>& coeffs() const { return c_; }
  Scalar coeff(uint32_t mask) const;
  void set_coeff(uint32_t mask, const Scalar& v);

  bool is_zero() const { return c_.empty(); }
  /// -1 if not homogeneous, else degree mod 2 (0 also for the zero element).
  int parity() const;
  bool is_homogeneous() const { return parity() >= 0 || is_zero(); }

  GrassmannElement operator-() const;
  GrassmannElement operator+(const GrassmannElement& o) const;
  GrassmannElement operator-(const GrassmannElement& o) const;
  GrassmannElement operator*(const GrassmannElement& o) const;
  GrassmannElement operator*(const Scalar& s) const;
  bool operator==(const GrassmannElement& o) const { return n_ == o.n_ && c_ == o.c_; }
  bool operator!=(const GrassmannElement& o) const { return !(*this == o); }

  /// Antilinear involution: eta_J -> (-1)^{|J|(|J|-1)/2} eta_J, coefficients conjugated.
  GrassmannElement star() const;

  /// Reinterprets the element over m >= n generators (same masks).
  GrassmannElement widen(int m) const;

  /// "3/2 * n[1,3] + -1i * n[]" (1-based generator lists).
  std::string str() const;
  static GrassmannElement parse(int n, const std::string& text);

 private:
  int n_;
  std::map<uint32_t, Scalar> c_;  // zero coefficients are never stored
};

/// Unital graded algebra homomorphism between Grassmann algebras, given by the
/// images of the generators (each image must be odd).
class GrassmannHom {
 public:
  GrassmannHom(int src_n, int dst_n, std::vector<GrassmannElement> images);

  static GrassmannHom identity(int n);
  /// P_K: eta_i -> eta_i for i in K, else 0.
  static GrassmannHom kill(int n, uint32_t keep);
  /// chi_lambda: eta_i -> lambda_i eta_i.
  static GrassmannHom scaling(int n, const std::vector<Scalar>& lambda);
  /// Ascending block embedding: Lambda^|J| -> Lambda^n, eta_i -> eta_{j_i}.
  static GrassmannHom block_up(int n, uint32_t J);
  /// Ascending block projection: Lambda^n -> Lambda^|J|, eta_{j_i} -> eta_i, others -> 0.
  static GrassmannHom block_down(int n, uint32_t J);
  static GrassmannHom permutation(int n, const std::vector<int>& perm);

  int src() const { return src_n_; }
  int dst() const { return dst_n_; }
  const std::vector<GrassmannElement>& images() const { return images_; }

  GrassmannElement apply(const GrassmannElement& a) const;
  GrassmannElement apply_basis(uint32_t mask) const;
  /// this . inner  (apply inner first).
  GrassmannHom compose(const GrassmannHom& inner) const;
  bool operator==(const GrassmannHom& o) const;

  /// True when every generator image is c * eta_B for a single subset B.
  bool is_monomial() const;

  std::string str() const;

 private:
  int src_n_, dst_n_;
  std::vector<GrassmannElement> images_;
};

/// Formal scalar combination of homomorphisms (the linear hull the functor
/// axioms extend to).
using HomCombination = std::vector<std::pair<Scalar, GrassmannHom>>;

GrassmannElement apply_combination(const HomCombination& combo, const GrassmannElement& a);

/// General linear map between Grassmann algebras via images of all basis elements.
class GrassmannLinearMap {
 public:
  GrassmannLinearMap(int src_n, int dst_n);

  static GrassmannLinearMap from_hom(const GrassmannHom& h);
  static GrassmannLinearMap from_combination(int src_n, int dst_n, const HomCombination& combo);

  int src() const { return src_n_; }
  int dst() const { return dst_n_; }
  GrassmannElement& image(uint32_t mask) { return images_[mask]; }
  const GrassmannElement& image(uint32_t mask) const { return images_[mask]; }
  void set_coefficient(uint32_t I, uint32_t J, const Scalar& c);  // c_{IJ}
  Scalar coefficient(uint32_t I, uint32_t J) const { return images_[I].coeff(J); }

  GrassmannElement apply(const GrassmannElement& a) const;
  bool operator==(const GrassmannLinearMap& o) const;

 private:
  int src_n_, dst_n_;
  std::vector<GrassmannElement> images_;  // indexed by source mask
};

struct MatrixUnit {
  GrassmannLinearMap map;            // eta_{I'} -> delta_{II'} theta_J
  HomCombination combination;        // realizes it as a hom combination
};

/// Admissibility of a coefficient position (I, J) for hom combinations:
/// |I|+|J| even, |J| >= |I|, and J = {} whenever I = {} (unital maps fix the
/// image of 1 up to scale).
bool matrix_unit_admissible(uint32_t I, uint32_t J);

/// Matrix unit E^{mn}_{JI} from Lambda^n to Lambda^m together with its
/// realization as a combination of homomorphisms. Throws on inadmissible (I, J).
MatrixUnit matrix_unit(int m, int n, uint32_t J, uint32_t I);

struct Decomposition {
  bool admissible = false;
  HomCombination combination;  // valid when admissible
  uint32_t bad_I = 0, bad_J = 0;
  std::string reason;
};

/// Writes an admissible linear map as a combination of homomorphisms
/// (sum of c_{IJ} E_{JI}); rejects inadmissible maps naming the offending (I, J).
Decomposition decompose_linear_map(const GrassmannLinearMap& L);

}  // namespace fermicas

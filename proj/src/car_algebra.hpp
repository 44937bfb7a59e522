#pragma once

#include <map>
#include <vector>

#include "car_model.hpp"

namespace fermicas {

struct CarError : std::runtime_error {
  explicit CarError(const std::string& what) : std::runtime_error(what) {}
};

/// One letter of a CAR word: Psi(e_index) or Psi(e_index)^*.
struct CarLetter {
  int index = 0;
  bool starred = false;
};
using CarWord = std::vector<CarLetter>;

/// The CAR algebra presented by the model's Gram matrix
///   { Psi(e_a), Psi(e_b)^* } = <e_a, iS e_b>,  { Psi, Psi } = 0,
/// (the pairing is antilinear in its first slot, matching the antilinearity
/// of Psi; on real smearings this is the familiar display),
/// with degenerate directions (Gram-kernel vectors, in particular D h for test
/// sections h) quotiented eagerly. Elements are kept in normal form: starred
/// generators left, ascending indices inside each block.
class CarAlgebra {
 public:
  explicit CarAlgebra(const CausalDiracModel& m);
  /// Presentation by an explicit hermitian Gram (no model attached).
  explicit CarAlgebra(Matrix gram);

  const CausalDiracModel* model() const { return model_; }
  int dim() const { return gram_.rows(); }
  /// Indices of the generators that survive the quotient.
  const std::vector<int>& pivots() const { return pivots_; }
  /// {Psi(e_p), Psi(e_q)^*} = gram(p, q).
  const Scalar& gram(int p, int q) const { return gram_.at(p, q); }
  /// Reduction of a coordinate vector modulo the Gram kernel, expressed on the
  /// pivot generators (null sections map to zero).
  Vec reduce(const Vec& f) const;

 private:
  void init();
  const CausalDiracModel* model_;
  Matrix gram_;
  std::vector<int> pivots_;
  Matrix reduction_;  // |pivots| x dim
};

/// Normal-form element of the CAR algebra.
class CarElement {
 public:
  CarElement() : car_(nullptr) {}
  explicit CarElement(const CarAlgebra& car) : car_(&car) {}

  static CarElement unit(const CarAlgebra& car);
  static CarElement zero(const CarAlgebra& car) { return CarElement(car); }
  /// Psi(f): antilinear in f; vanishes when f is a null section.
  static CarElement field(const CarAlgebra& car, const Vec& f);
  /// Psi(f)^*: linear in f.
  static CarElement field_star(const CarAlgebra& car, const Vec& f);

  const CarAlgebra* algebra() const { return car_; }
  bool is_zero() const { return terms_.empty(); }
  /// Scalar coefficient of the identity monomial.
  Scalar scalar_part() const;
  const std::map<std::pair<uint32_t, uint32_t>, Scalar>& terms() const { return terms_; }
  void add_term(uint32_t starred, uint32_t unstarred, const Scalar& c);

  /// -1 when mixed; else common (|A|+|B|) mod 2.
  int parity() const;

  CarElement operator+(const CarElement& o) const;
  CarElement operator-(const CarElement& o) const;
  CarElement operator*(const CarElement& o) const;
  CarElement operator*(const Scalar& s) const;
  bool operator==(const CarElement& o) const;
  bool operator!=(const CarElement& o) const { return !(*this == o); }

  /// Antilinear involution with (xy)* = y* x*, Psi(f)* = Psi^*(f).
  CarElement star() const;

  std::string str() const;

 private:
  const CarAlgebra* car_;
  std::map<std::pair<uint32_t, uint32_t>, Scalar> terms_;
};

/// Normalizes a scalar multiple of a word of generators; `right_fold` switches
/// the association order (used by the confluence property test).
CarElement car_normalize(const CarAlgebra& car, const CarWord& word,
                         const Scalar& coeff = Scalar(1), bool right_fold = false);

}  // namespace fermicas

#include "car_algebra.hpp"

#include <bit>

#include <sstream>

#include "grassmann.hpp"  // popcount / inversions

namespace fermicas {

CarAlgebra::CarAlgebra(const CausalDiracModel& m) : model_(&m), gram_(m.gram()) { init(); }

CarAlgebra::CarAlgebra(Matrix gram) : model_(nullptr), gram_(std::move(gram)) {
  if (!gram_.is_hermitian()) throw CarError("CAR presentation needs a hermitian Gram");
  init();
}

void CarAlgebra::init() {
  const int d = dim();
  // Row-reduce the Gram to find the kernel (null sections) and a reduction map
  // onto pivot generators: e_a = sum_p R(p, a) e_p modulo the kernel.
  Matrix A = gram_;
  std::vector<int> pivot_of_row;
  int r = 0;
  for (int c = 0; c < d && r < d; ++c) {
    int p = -1;
    for (int i = r; i < d; ++i)
      if (!A.at(i, c).is_zero()) {
        p = i;
        break;
      }
    if (p < 0) continue;
    if (p != r)
      for (int j = 0; j < d; ++j) std::swap(A.at(p, j), A.at(r, j));
    Scalar inv = Scalar(1) / A.at(r, c);
    for (int j = 0; j < d; ++j) A.at(r, j) *= inv;
    for (int i = 0; i < d; ++i) {
      if (i == r || A.at(i, c).is_zero()) continue;
      Scalar f = A.at(i, c);
      for (int j = 0; j < d; ++j) A.at(i, j) -= f * A.at(r, j);
    }
    pivot_of_row.push_back(c);
    ++r;
  }
  pivots_ = pivot_of_row;
  // Columns of the reduced matrix express every e_a through the pivots modulo
  // the kernel: Gram e_a = sum_rows A(r, a) Gram e_{pivot_r}.
  reduction_ = Matrix(int(pivots_.size()), d);
  for (size_t k = 0; k < pivots_.size(); ++k)
    for (int a = 0; a < d; ++a) reduction_.at(int(k), a) = A.at(int(k), a);
}

Vec CarAlgebra::reduce(const Vec& f) const {
  if (int(f.size()) != dim()) throw CarError("section dimension mismatch");
  return reduction_ * f;
}

CarElement CarElement::unit(const CarAlgebra& car) {
  CarElement e(car);
  e.terms_[{0, 0}] = Scalar(1);
  return e;
}

CarElement CarElement::field(const CarAlgebra& car, const Vec& f) {
  Vec red = car.reduce(f);
  CarElement e(car);
  for (size_t k = 0; k < red.size(); ++k)
    if (!red[k].is_zero()) e.add_term(0, 1u << car.pivots()[k], red[k].conj());
  return e;
}

CarElement CarElement::field_star(const CarAlgebra& car, const Vec& f) {
  Vec red = car.reduce(f);
  CarElement e(car);
  for (size_t k = 0; k < red.size(); ++k)
    if (!red[k].is_zero()) e.add_term(1u << car.pivots()[k], 0, red[k]);
  return e;
}

Scalar CarElement::scalar_part() const {
  auto it = terms_.find({0, 0});
  return it == terms_.end() ? Scalar(0) : it->second;
}

void CarElement::add_term(uint32_t starred, uint32_t unstarred, const Scalar& c) {
  if (c.is_zero()) return;
  auto key = std::make_pair(starred, unstarred);
  auto it = terms_.find(key);
  if (it == terms_.end()) {
    terms_[key] = c;
  } else {
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

int CarElement::parity() const {
  int p = -1;
  for (const auto& [key, c] : terms_) {
    int d = (popcount(key.first) + popcount(key.second)) & 1;
    if (p < 0)
      p = d;
    else if (p != d)
      return -1;
  }
  return p < 0 ? 0 : p;
}

CarElement CarElement::operator+(const CarElement& o) const {
  CarElement r = *this;
  if (!r.car_) r.car_ = o.car_;
  for (const auto& [key, c] : o.terms_) r.add_term(key.first, key.second, c);
  return r;
}

CarElement CarElement::operator-(const CarElement& o) const {
  CarElement r = *this;
  if (!r.car_) r.car_ = o.car_;
  for (const auto& [key, c] : o.terms_) r.add_term(key.first, key.second, -c);
  return r;
}

CarElement CarElement::operator*(const Scalar& s) const {
  CarElement r(*car_);
  if (s.is_zero()) return r;
  for (const auto& [key, c] : terms_) r.terms_[key] = c * s;
  return r;
}

namespace {

// Psi_b Psi^*_C = sum_{c in C} +-gram(b, c) Psi^*_{C minus c} + (-1)^{|C|} Psi^*_C Psi_b,
// with {Psi_p, Psi^*_q} = <e_p, iS e_q> = gram(p, q) (antilinear slot first).
// Accumulates coeff * Psi^*_{C'} Psi_{B'} summands into `out` via continuation.
void cross_letter(const CarAlgebra& car, int b, uint32_t C, const Scalar& coeff,
                  std::map<std::pair<uint32_t, uint32_t>, Scalar>& out) {
  // contraction terms
  int pos = 0;
  uint32_t rest = C;
  while (rest) {
    int c = std::countr_zero(rest);
    rest &= rest - 1;
    Scalar g = car.gram(b, c);
    if (!g.is_zero()) {
      Scalar term = coeff * g;
      if (pos & 1) term = -term;
      auto key = std::make_pair(C & ~(1u << c), 0u);
      auto it = out.find(key);
      if (it == out.end())
        out[key] = term;
      else {
        it->second += term;
        if (it->second.is_zero()) out.erase(it);
      }
    }
    ++pos;
  }
  // pass-through term
  Scalar pass = (popcount(C) & 1) ? -coeff : coeff;
  auto key = std::make_pair(C, 1u << b);
  auto it = out.find(key);
  if (it == out.end())
    out[key] = pass;
  else {
    it->second += pass;
    if (it->second.is_zero()) out.erase(it);
  }
}

// Psi_B Psi^*_C as a sum of normal-ordered Psi^*_{C'} Psi_{B'}.
std::map<std::pair<uint32_t, uint32_t>, Scalar> cross_block(const CarAlgebra& car, uint32_t B,
                                                            uint32_t C) {
  std::map<std::pair<uint32_t, uint32_t>, Scalar> acc;
  acc[{C, 0u}] = Scalar(1);
  if (B == 0) return acc;
  // process the letters of Psi_B from the right (largest index is adjacent to C)
  std::vector<int> letters;
  uint32_t rest = B;
  while (rest) {
    letters.push_back(std::countr_zero(rest));
    rest &= rest - 1;
  }
  for (auto it = letters.rbegin(); it != letters.rend(); ++it) {
    int b = *it;
    std::map<std::pair<uint32_t, uint32_t>, Scalar> next;
    for (const auto& [key, c] : acc) {
      auto [C1, B1] = key;
      // multiply Psi_b from the left: Psi_b Psi^*_{C1} Psi_{B1}
      std::map<std::pair<uint32_t, uint32_t>, Scalar> crossed;
      cross_letter(car, b, C1, c, crossed);
      for (const auto& [k2, c2] : crossed) {
        auto [C2, Bmid] = k2;
        // append the existing Psi_{B1} on the right of Psi_{Bmid}
        if (Bmid & B1) continue;  // repeated generator: zero
        Scalar sign((inversions(Bmid, B1) & 1) ? -1 : 1);
        uint32_t B2 = Bmid | B1;
        auto key2 = std::make_pair(C2, B2);
        Scalar add = c2 * sign;
        auto jt = next.find(key2);
        if (jt == next.end())
          next[key2] = add;
        else {
          jt->second += add;
          if (jt->second.is_zero()) next.erase(jt);
        }
      }
    }
    acc = std::move(next);
  }
  return acc;
}

}  // namespace

CarElement CarElement::operator*(const CarElement& o) const {
  if (!car_ || car_ != o.car_) throw CarError("CAR elements from different algebras");
  CarElement out(*car_);
  for (const auto& [ka, ca] : terms_) {
    auto [A, B] = ka;
    for (const auto& [kb, cb] : o.terms_) {
      auto [C, D] = kb;
      Scalar coeff = ca * cb;
      auto crossed = cross_block(*car_, B, C);
      for (const auto& [key, c] : crossed) {
        auto [C1, B1] = key;
        // assemble Psi^*_A Psi^*_{C1} Psi_{B1} Psi_D
        if ((A & C1) || (B1 & D)) continue;
        Scalar sign((inversions(A, C1) & 1) ? -1 : 1);
        if (inversions(B1, D) & 1) sign = -sign;
        out.add_term(A | C1, B1 | D, coeff * c * sign);
      }
    }
  }
  return out;
}

bool CarElement::operator==(const CarElement& o) const { return terms_ == o.terms_; }

CarElement CarElement::star() const {
  CarElement out(*car_);
  for (const auto& [key, c] : terms_) {
    auto [A, B] = key;
    int p = popcount(A), q = popcount(B);
    // (Psi^*_A Psi_B)* = Psi^*_{reverse B} Psi_{reverse A}: re-sorting each
    // descending block costs (-1)^{k(k-1)/2}.
    long flips = long(p) * (p - 1) / 2 + long(q) * (q - 1) / 2;
    Scalar v = c.conj();
    if (flips & 1) v = -v;
    out.add_term(B, A, v);
  }
  return out;
}

std::string CarElement::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [key, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << c.str();
    uint32_t A = key.first, B = key.second;
    for (int i = 0; i < 32; ++i)
      if ((A >> i) & 1) os << " P*[" << i << "]";
    for (int i = 0; i < 32; ++i)
      if ((B >> i) & 1) os << " P[" << i << "]";
  }
  return os.str();
}

CarElement car_normalize(const CarAlgebra& car, const CarWord& word, const Scalar& coeff,
                         bool right_fold) {
  std::vector<CarElement> letters;
  for (const auto& l : word) {
    Vec e(car.dim());
    e[l.index] = Scalar(1);
    letters.push_back(l.starred ? CarElement::field_star(car, e) : CarElement::field(car, e));
  }
  CarElement acc = CarElement::unit(car) * coeff;
  if (!right_fold) {
    for (const auto& l : letters) acc = acc * l;
  } else {
    CarElement tail = CarElement::unit(car);
    for (auto it = letters.rbegin(); it != letters.rend(); ++it) tail = *it * tail;
    acc = acc * tail;
  }
  return acc;
}

}  // namespace fermicas

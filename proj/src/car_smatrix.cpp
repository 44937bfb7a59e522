#include "car_smatrix.hpp"

#include <bit>
#include <sstream>

#include "rng.hpp"

namespace fermicas {

LambdaCar LambdaCar::unit(const CarAlgebra& car, int params) {
  LambdaCar r(car, params);
  r.terms_[0] = CarElement::unit(car);
  return r;
}

CarElement LambdaCar::coefficient(uint32_t mask) const {
  auto it = terms_.find(mask);
  if (it != terms_.end()) return it->second;
  return car_ ? CarElement::zero(*car_) : CarElement();
}

void LambdaCar::add_term(uint32_t mask, const CarElement& x) {
  if (x.is_zero()) return;
  auto it = terms_.find(mask);
  if (it == terms_.end()) {
    terms_[mask] = x;
  } else {
    CarElement sum = it->second + x;
    if (sum.is_zero())
      terms_.erase(it);
    else
      it->second = sum;
  }
}

LambdaCar LambdaCar::operator+(const LambdaCar& o) const {
  LambdaCar r = *this;
  if (!r.car_) {
    r.car_ = o.car_;
    r.params_ = o.params_;
  }
  for (const auto& [m, x] : o.terms_) r.add_term(m, x);
  return r;
}

LambdaCar LambdaCar::operator-(const LambdaCar& o) const {
  LambdaCar r = *this;
  for (const auto& [m, x] : o.terms_) r.add_term(m, x * Scalar(-1));
  return r;
}

LambdaCar LambdaCar::operator*(const LambdaCar& o) const {
  LambdaCar r(*car_, params_);
  for (const auto& [I, x] : terms_)
    for (const auto& [J, y] : o.terms_) {
      if (I & J) continue;
      // split x into homogeneous parts for the Koszul sign
      CarElement x_even(*car_), x_odd(*car_);
      for (const auto& [key, c] : x.terms()) {
        if ((popcount(key.first) + popcount(key.second)) & 1)
          x_odd.add_term(key.first, key.second, c);
        else
          x_even.add_term(key.first, key.second, c);
      }
      Scalar base((inversions(I, J) & 1) ? -1 : 1);
      if (!x_even.is_zero()) r.add_term(I | J, (x_even * y) * base);
      if (!x_odd.is_zero()) {
        Scalar sign = (popcount(J) & 1) ? -base : base;
        r.add_term(I | J, (x_odd * y) * sign);
      }
    }
  return r;
}

LambdaCar LambdaCar::operator*(const Scalar& s) const {
  LambdaCar r(*car_, params_);
  if (s.is_zero()) return r;
  for (const auto& [m, x] : terms_) r.add_term(m, x * s);
  return r;
}

LambdaCar LambdaCar::star() const {
  LambdaCar r(*car_, params_);
  for (const auto& [I, x] : terms_) {
    int kI = popcount(I);
    Scalar eta_sign(((kI * (kI - 1) / 2) & 1) ? -1 : 1);
    CarElement x_even(*car_), x_odd(*car_);
    for (const auto& [key, c] : x.terms()) {
      if ((popcount(key.first) + popcount(key.second)) & 1)
        x_odd.add_term(key.first, key.second, c);
      else
        x_even.add_term(key.first, key.second, c);
    }
    if (!x_even.is_zero()) r.add_term(I, x_even.star() * eta_sign);
    if (!x_odd.is_zero()) {
      Scalar sign = (kI & 1) ? -eta_sign : eta_sign;
      r.add_term(I, x_odd.star() * sign);
    }
  }
  return r;
}

std::string LambdaCar::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, x] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << "n[";
    bool f2 = true;
    for (int i = 0; i < 32; ++i)
      if ((m >> i) & 1) {
        if (!f2) os << ",";
        f2 = false;
        os << (i + 1);
      }
    os << "] (x) (" << x.str() << ")";
  }
  return os.str();
}

namespace {

// Normal-ordering map from Wick symbols into Lambda (x) CAR at hbar = 1:
// psi_a -> Psi(Gamma^{-1} e_a), psibar_a -> -Psi*(Gamma^{-1} e_a).
LambdaCar normal_order(const CarAlgebra& car, int params, const WickElement& W,
                       const Matrix& gamma_inv) {
  LambdaCar out(car, params);
  const int d = car.dim();
  std::vector<CarElement> psi_of(d, CarElement::zero(car)), psibar_of(d, CarElement::zero(car));
  for (int a = 0; a < d; ++a) {
    Vec ga(d);
    for (int i = 0; i < d; ++i) ga[i] = gamma_inv.at(i, a);
    psi_of[a] = CarElement::field(car, ga);
    psibar_of[a] = CarElement::field_star(car, ga) * Scalar(-1);
  }
  for (const auto& [mask, poly] : W.terms()) {
    Scalar coeff;
    for (const auto& [key, v] : poly.coeffs()) {
      if (key[1] != 0 || key[2] != 0)
        throw CarError("normal ordering expects no formal coupling parameters");
      coeff += v;  // hbar = 1
    }
    if (coeff.is_zero()) continue;
    uint32_t eta_mask = uint32_t(mask & 0xffffull);
    CarElement prod = CarElement::unit(car) * coeff;
    for (int a = 0; a < d; ++a)
      if ((mask >> (16 + a)) & 1) prod = prod * psibar_of[a];
    for (int a = 0; a < d; ++a)
      if ((mask >> (40 + a)) & 1) prod = prod * psi_of[a];
    out.add_term(eta_mask, prod);
  }
  return out;
}

}  // namespace

LambdaCar toy_smatrix_linear(const CarAlgebra& car, int params,
                             const std::vector<ParamSection>& f) {
  if (!car.model()) throw CarError("toy_smatrix_linear needs a model-backed CAR algebra");
  const CausalDiracModel& m = *car.model();
  for (const auto& t : f)
    if (t.param < 0 || t.param >= params) throw CarError("parameter index out of range");
  // The representation ordering: the CAR normal form has <Psi Psi*> = Gram and
  // <Psi* Psi> = 0, so the matching frequency split is S_plus = iS, S_minus = 0
  // (and S_F = i S_R). With this pack the normal-ordering map intertwines the
  // star products with the operator product at every order.
  PropagatorPack pack = propagator_pack(m);
  pack.S_minus = Matrix::zero(m.dim(), m.dim());
  pack.S_plus = m.S() * Scalar::i();
  pack.S_F = m.S_R * Scalar::i();
  WickElement D = doubled_field(pack, params, f);
  WickElement S = exponential(ProductKind::StarF, D * Scalar::i(), pack, -1);
  return normal_order(car, params, S, inverse(m.Gamma));
}

LambdaCar smatrix_of_constant(const CarAlgebra& car, const GrassmannElement& c) {
  if (!c.is_zero() && c.parity() != 0) throw CarError("S of a Grassmann constant needs an even argument");
  if (!c.coeff(0).is_zero()) throw CarError("S of a constant needs a nilpotent argument");
  int params = c.generators();
  GrassmannElement term = GrassmannElement::unit(params);
  GrassmannElement sum = term;
  Scalar kfact(1);
  for (int k = 1; k <= params; ++k) {
    kfact *= Scalar(k);
    term = term * c;
    if (term.is_zero()) break;
    GrassmannElement add = term * (Scalar::i() * Scalar(1));  // i^k accumulated below
    // accumulate i^k / k!
    Scalar ik(1);
    for (int j = 0; j < k; ++j) ik *= Scalar::i();
    sum = sum + term * (ik / kfact);
  }
  LambdaCar out(car, params);
  for (const auto& [mask, s] : sum.coeffs()) out.add_term(mask, CarElement::unit(car) * s);
  return out;
}

CarElement extract_bk(const LambdaCar& S, uint32_t param_mask) {
  int k = popcount(param_mask);
  CarElement coeff = S.coefficient(param_mask);
  // S = ... + (i^k / k!) eta_{i_k}...eta_{i_1} B_k = ... with
  // eta_{i_k}...eta_{i_1} = (-1)^{k(k-1)/2} eta_mask.
  Scalar factor(1);
  for (int j = 0; j < k; ++j) factor *= Scalar::i();
  Scalar kfact(1);
  for (int j = 2; j <= k; ++j) kfact *= Scalar(j);
  factor /= kfact;
  if ((k * (k - 1) / 2) & 1) factor = -factor;
  return coeff * (Scalar(1) / factor);
}

CarElement quantized_b1(const CarAlgebra& car, const Vec& s) {
  LambdaCar S = toy_smatrix_linear(car, 1, {{0, s}});
  return extract_bk(S, 0b1);
}

CarElement extract_psi(const CarAlgebra& car, const Vec& s) {
  Vec is(s.size());
  for (size_t i = 0; i < s.size(); ++i) is[i] = Scalar::i() * s[i];
  CarElement b1 = quantized_b1(car, s);
  CarElement b1i = quantized_b1(car, is);
  return (b1 + b1i * Scalar::i()) * Scalar(Rational(1, 2));
}

ModelCheck weyl_relation_check(const CarAlgebra& car, const std::vector<ParamSection>& f,
                               const std::vector<ParamSection>& g) {
  ModelCheck c{"weyl-relation", true, ""};
  const CausalDiracModel& m = *car.model();
  std::set<int> pf, pg;
  for (const auto& t : f) pf.insert(t.param);
  for (const auto& t : g) pg.insert(t.param);
  for (int p : pf)
    if (pg.count(p)) throw CarError("weyl check needs distinct parameters for f and g");
  int params = 0;
  for (int p : pf) params = std::max(params, p + 1);
  for (int p : pg) params = std::max(params, p + 1);

  LambdaCar Sf = toy_smatrix_linear(car, params, f);
  LambdaCar Sg = toy_smatrix_linear(car, params, g);
  std::vector<ParamSection> fg = f;
  fg.insert(fg.end(), g.begin(), g.end());
  LambdaCar Sfg = toy_smatrix_linear(car, params, fg);

  // E(f,g) = <g, S_R f>_G + <S_R f, g>_G with each pairing's first-argument
  // parameters pulled to the left.
  GrassmannElement E(params);
  for (const auto& a : g)
    for (const auto& b : f) {
      Vec srb = m.S_R * b.section;
      Scalar val = m.pairing(a.section, srb);
      GrassmannElement prod =
          GrassmannElement::generator(params, a.param) * GrassmannElement::generator(params, b.param);
      E = E + prod * val;
    }
  for (const auto& a : f)
    for (const auto& b : g) {
      Vec sra = m.S_R * a.section;
      Scalar val = m.pairing(sra, b.section);
      GrassmannElement prod =
          GrassmannElement::generator(params, a.param) * GrassmannElement::generator(params, b.param);
      E = E + prod * val;
    }
  LambdaCar SE = smatrix_of_constant(car, E);

  LambdaCar lhs = Sf * Sg;
  LambdaCar rhs = Sfg * SE;
  if (lhs != rhs) {
    c.pass = false;
    c.witness = "S(D(f)) S(D(g)) != S(D(f+g)) S(E(f,g))";
  }
  return c;
}

std::vector<ModelCheck> car_theorem_check(const CarAlgebra& car) {
  std::vector<ModelCheck> out;
  const CausalDiracModel& m = *car.model();
  auto W = m.test_indices();
  const int d = m.dim();

  std::vector<CarElement> psi, psi_star;
  {
    ModelCheck c{"b1-equals-field-plus-adjoint", true, ""};
    for (int w : W) {
      Vec e(d);
      e[w] = Scalar(1);
      CarElement b1 = quantized_b1(car, e);
      CarElement direct = CarElement::field(car, e) + CarElement::field_star(car, e);
      if (b1 != direct) {
        c.pass = false;
        c.witness = "B_1(e_" + std::to_string(w) + ") != Psi(e) + Psi*(e)";
        break;
      }
      CarElement p = extract_psi(car, e);
      psi.push_back(p);
      psi_star.push_back(b1 - p);
    }
    out.push_back(c);
  }
  if (!out.back().pass) return out;

  auto anti = [&](const CarElement& x, const CarElement& y) { return x * y + y * x; };
  {
    ModelCheck c{"car-annihilator-pairs", true, ""};
    for (size_t i = 0; i < psi.size() && c.pass; ++i)
      for (size_t j = 0; j < psi.size(); ++j)
        if (!anti(psi[i], psi[j]).is_zero()) {
          c.pass = false;
          c.witness = "{Psi(e_" + std::to_string(W[i]) + "), Psi(e_" + std::to_string(W[j]) +
                      ")} != 0";
          break;
        }
    out.push_back(c);
  }
  {
    ModelCheck c{"car-creator-pairs", true, ""};
    for (size_t i = 0; i < psi.size() && c.pass; ++i)
      for (size_t j = 0; j < psi.size(); ++j)
        if (!anti(psi_star[i], psi_star[j]).is_zero()) {
          c.pass = false;
          c.witness = "{Psi*(e_" + std::to_string(W[i]) + "), Psi*(e_" + std::to_string(W[j]) +
                      ")} != 0";
          break;
        }
    out.push_back(c);
  }
  {
    ModelCheck c{"car-mixed-pairs", true, ""};
    for (size_t i = 0; i < psi.size() && c.pass; ++i)
      for (size_t j = 0; j < psi.size(); ++j) {
        CarElement expect = CarElement::unit(car) * m.gram().at(W[i], W[j]);
        if (anti(psi[i], psi_star[j]) != expect) {
          c.pass = false;
          c.witness = "{Psi(e_" + std::to_string(W[i]) + "), Psi*(e_" + std::to_string(W[j]) +
                      ")} != <e_i, iS e_j> 1";
          break;
        }
      }
    out.push_back(c);
  }
  return out;
}

ModelCheck dynamics_onshell_check(const CarAlgebra& car) {
  ModelCheck c{"dynamics-on-shell", true, ""};
  const CausalDiracModel& m = *car.model();
  for (int w : m.test_indices()) {
    Vec h(m.dim());
    h[w] = Scalar(1);
    Vec Dh = m.D * h;
    CarElement b1 = quantized_b1(car, Dh);
    if (!b1.is_zero()) {
      c.pass = false;
      c.witness = "B_1(D e_" + std::to_string(w) + ") != 0";
      break;
    }
  }
  return c;
}

ModelCheck smatrix_unitary_check(const CarAlgebra& car, const Vec& s) {
  // The involution axiom S(F)* = S(F*)^{-1}: for F = D(eta s) one has
  // F* = -F (the Koszul sign of eta (x) selfadjoint-odd), so the axiom reads
  // S(D(eta s))* S(D(-eta s)) = 1.
  ModelCheck c{"smatrix-star-inverse", true, ""};
  LambdaCar S = toy_smatrix_linear(car, 1, {{0, s}});
  Vec minus_s(s.size());
  for (size_t i = 0; i < s.size(); ++i) minus_s[i] = -s[i];
  LambdaCar S_Fstar = toy_smatrix_linear(car, 1, {{0, minus_s}});
  if (S.star() * S_Fstar != LambdaCar::unit(car, 1) ||
      S_Fstar * S.star() != LambdaCar::unit(car, 1)) {
    c.pass = false;
    c.witness = "S(F)* != S(F*)^{-1} for F = D(eta s)";
  }
  return c;
}

namespace {

// 2^k complex-rational matrices for the scaled Jordan-Wigner letters.
struct JwRep {
  std::vector<Matrix> psi, psi_star;
  Matrix id;
};

JwRep jw_representation(const std::vector<Scalar>& gram_diag) {
  const int k = int(gram_diag.size());
  const int dim = 1 << k;
  JwRep rep;
  rep.id = Matrix::identity(dim);
  for (int j = 0; j < k; ++j) {
    Matrix lower(dim, dim), raise(dim, dim);
    for (int b = 0; b < dim; ++b) {
      // string sign from modes below j (occupied modes anticommute past)
      int below = popcount(uint32_t(b) & ((1u << j) - 1));
      Scalar sign((below & 1) ? -1 : 1);
      if (b & (1 << j)) {
        lower.at(b & ~(1 << j), b) = sign * gram_diag[j];  // scaled annihilator
      } else {
        raise.at(b | (1 << j), b) = sign;
      }
    }
    rep.psi.push_back(lower);
    rep.psi_star.push_back(raise);
  }
  return rep;
}

}  // namespace

JordanWignerResult jordan_wigner_crosscheck(const CausalDiracModel& m, int max_modes, int words,
                                            uint64_t seed) {
  JordanWignerResult res;
  Matrix G = m.gram_window();
  for (int i = 0; i < G.rows(); ++i)
    for (int j = 0; j < G.cols(); ++j)
      if (i != j && !G.at(i, j).is_zero()) {
        res.witness = "window Gram not diagonal in this basis; cross-check skipped";
        return res;
      }
  res.applicable = true;
  auto W = m.test_indices();
  std::vector<int> modes;
  std::vector<Scalar> diag;
  for (int i = 0; i < G.rows() && int(modes.size()) < max_modes; ++i)
    if (!G.at(i, i).is_zero()) {
      modes.push_back(W[i]);
      diag.push_back(G.at(i, i));
    }
  res.modes = int(modes.size());
  if (modes.empty()) {
    res.witness = "no nonzero modes in the window Gram";
    return res;
  }
  JwRep rep = jw_representation(diag);

  // Abstract CAR on the diagonal sub-Gram exercises the same rewriting engine.
  Matrix sub(int(modes.size()), int(modes.size()));
  for (size_t i = 0; i < modes.size(); ++i) sub.at(int(i), int(i)) = diag[i];
  CarAlgebra car(sub);

  auto rep_of_element = [&](const CarElement& x) {
    Matrix acc(rep.id.rows(), rep.id.cols());
    for (const auto& [key, c] : x.terms()) {
      Matrix term = rep.id;
      for (int j = 0; j < int(modes.size()); ++j)
        if ((key.first >> j) & 1) term = term * rep.psi_star[j];
      for (int j = 0; j < int(modes.size()); ++j)
        if ((key.second >> j) & 1) term = term * rep.psi[j];
      acc = acc + term * c;
    }
    return acc;
  };

  Rng rng(seed);
  res.pass = true;
  for (int t = 0; t < words; ++t) {
    int len = int(rng.uniform(1, 4));
    CarWord word;
    Matrix direct = rep.id;
    for (int l = 0; l < len; ++l) {
      int j = int(rng.uniform(0, int(modes.size()) - 1));
      bool starred = rng.coin();
      word.push_back({int(j), starred});
      direct = direct * (starred ? rep.psi_star[j] : rep.psi[j]);
    }
    CarElement normal = car_normalize(car, word, Scalar(1), rng.coin());
    Matrix via_normal = rep_of_element(normal);
    ++res.words_checked;
    if (via_normal != direct) {
      res.pass = false;
      res.witness = "word " + std::to_string(t) + " disagrees with the matrix representation";
      return res;
    }
  }
  return res;
}

}  // namespace fermicas

#include "functor.hpp"

#include <json.hpp>
#include <sstream>

#include "rng.hpp"

namespace fermicas {

using nlohmann::json;

Matrix combination_matrix(const GrassmannFunctor& F, int src_n, int dst_n,
                          const HomCombination& combo) {
  Matrix total(F.level(dst_n).dim(), F.level(src_n).dim());
  for (const auto& [c, h] : combo) {
    if (h.src() != src_n || h.dst() != dst_n) throw FunctorError("combination level mismatch");
    if (!c.is_zero()) total = total + F.hom_matrix(h) * c;
  }
  return total;
}

// --- TensorFunctor -----------------------------------------------------------

TensorFunctor::TensorFunctor(StructureConstantAlgebra B, int max_level, std::string name)
    : B_(std::move(B)), max_(max_level), name_(std::move(name)) {
  for (int n = 0; n <= max_; ++n) levels_.push_back(graded_tensor(n, B_));
}

const StructureConstantAlgebra& TensorFunctor::level(int n) const {
  if (n < 0 || n > max_) throw FunctorError("level out of range");
  return levels_[n];
}

Vec TensorFunctor::embed(int n, const GrassmannElement& g) const {
  const auto& L = level(n);
  Vec v(L.dim());
  for (const auto& [mask, s] : g.coeffs())
    for (int k = 0; k < B_.dim(); ++k)
      if (!B_.unit()[k].is_zero()) v[tensor_index(B_.dim(), mask, k)] += s * B_.unit()[k];
  return v;
}

Matrix TensorFunctor::hom_matrix(const GrassmannHom& chi) const {
  const auto& src = level(chi.src());
  const auto& dst = level(chi.dst());
  Matrix M(dst.dim(), src.dim());
  for (uint32_t I = 0; I < (1u << chi.src()); ++I) {
    GrassmannElement im = chi.apply_basis(I);
    for (int b = 0; b < B_.dim(); ++b) {
      int col = tensor_index(B_.dim(), I, b);
      for (const auto& [K, s] : im.coeffs()) M.at(tensor_index(B_.dim(), K, b), col) = s;
    }
  }
  return M;
}

// --- SquareFunctor -----------------------------------------------------------

SquareFunctor::SquareFunctor(int max_level) : max_(max_level) {
  for (int n = 0; n <= max_; ++n) levels_.push_back(graded_tensor(n, grassmann_algebra(n)));
}

const StructureConstantAlgebra& SquareFunctor::level(int n) const {
  if (n < 0 || n > max_) throw FunctorError("level out of range");
  return levels_[n];
}

Vec SquareFunctor::embed(int n, const GrassmannElement& g) const {
  const auto& L = level(n);
  Vec v(L.dim());
  for (const auto& [mask, s] : g.coeffs()) v[tensor_index(1 << n, mask, 0)] += s;
  return v;
}

Matrix SquareFunctor::hom_matrix(const GrassmannHom& chi) const {
  const int sn = chi.src(), dn = chi.dst();
  const auto& src = level(sn);
  const auto& dst = level(dn);
  Matrix M(dst.dim(), src.dim());
  std::vector<GrassmannElement> images;
  for (uint32_t I = 0; I < (1u << sn); ++I) images.push_back(chi.apply_basis(I));
  for (uint32_t I = 0; I < (1u << sn); ++I)
    for (uint32_t J = 0; J < (1u << sn); ++J) {
      int col = tensor_index(1 << sn, I, int(J));
      for (const auto& [K, cK] : images[I].coeffs())
        for (const auto& [L, cL] : images[J].coeffs())
          M.at(tensor_index(1 << dn, K, int(L)), col) += cK * cL;
    }
  return M;
}

// --- reconstruction ----------------------------------------------------------

Matrix pi_matrix(const GrassmannFunctor& F, int n, uint32_t K) {
  return F.hom_matrix(GrassmannHom::kill(n, K));
}

Matrix rho_matrix(const GrassmannFunctor& F, int n, uint32_t K) {
  const int d = F.level(n).dim();
  Matrix R = pi_matrix(F, n, K);
  for (int k = 0; k < n; ++k) {
    if (!((K >> k) & 1)) continue;
    R = R * (Matrix::identity(d) - pi_matrix(F, n, K & ~(1u << k)));
  }
  return R;
}

bool in_top_component(const GrassmannFunctor& F, int n, const Vec& a) {
  uint32_t full = (n == 0) ? 0 : ((1u << n) - 1);
  for (int k = 0; k < n; ++k) {
    Vec image = pi_matrix(F, n, full & ~(1u << k)) * a;
    for (const auto& s : image)
      if (!s.is_zero()) return false;
  }
  return true;
}

namespace {

bool is_zero_vec(const Vec& v) {
  for (const auto& s : v)
    if (!s.is_zero()) return false;
  return true;
}

// Incremental column-space tracker over the exact field.
class SpanTracker {
 public:
  explicit SpanTracker(int dim) : dim_(dim) {}
  // Returns true (and absorbs the vector) when v enlarges the span.
  bool add(Vec v) {
    reduce(v);
    for (int i = 0; i < dim_; ++i)
      if (!v[i].is_zero()) {
        Scalar inv = Scalar(1) / v[i];
        for (auto& s : v) s *= inv;
        rows_.emplace(i, std::move(v));
        return true;
      }
    return false;
  }
  bool contains(Vec v) const {
    reduce(v);
    return is_zero_vec(v);
  }

 private:
  void reduce(Vec& v) const {
    for (const auto& [pivot, row] : rows_) {
      if (v[pivot].is_zero()) continue;
      Scalar f = v[pivot];
      for (int i = 0; i < dim_; ++i) v[i] -= f * row[i];
    }
  }
  int dim_;
  std::map<int, Vec> rows_;
};

// Expresses target in the span of the given columns; nullopt when impossible.
std::optional<Vec> solve_in_span(const std::vector<Vec>& columns, const Vec& target) {
  if (columns.empty()) return is_zero_vec(target) ? std::optional<Vec>(Vec{}) : std::nullopt;
  const int rows = int(columns.front().size());
  const int cols = int(columns.size());
  Matrix A(rows, cols + 1);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) A.at(i, j) = columns[j][i];
  for (int i = 0; i < rows; ++i) A.at(i, cols) = target[i];
  // Row-reduce and read a particular solution.
  std::vector<int> pivot_col;
  int r = 0;
  for (int c = 0; c <= cols && r < rows; ++c) {
    int p = -1;
    for (int i = r; i < rows; ++i)
      if (!A.at(i, c).is_zero()) {
        p = i;
        break;
      }
    if (p < 0) continue;
    if (c == cols) return std::nullopt;  // pivot in the augmented column
    if (p != r)
      for (int j = 0; j <= cols; ++j) std::swap(A.at(p, j), A.at(r, j));
    Scalar inv = Scalar(1) / A.at(r, c);
    for (int j = 0; j <= cols; ++j) A.at(r, j) *= inv;
    for (int i = 0; i < rows; ++i) {
      if (i == r || A.at(i, c).is_zero()) continue;
      Scalar f = A.at(i, c);
      for (int j = 0; j <= cols; ++j) A.at(i, j) -= f * A.at(r, j);
    }
    pivot_col.push_back(c);
    ++r;
  }
  Vec x(cols);
  for (size_t k = 0; k < pivot_col.size(); ++k) x[pivot_col[k]] = A.at(int(k), cols);
  return x;
}

}  // namespace

TopComponent top_component(const GrassmannFunctor& F, int n) {
  TopComponent top;
  top.level = n;
  uint32_t full = (n == 0) ? 0 : ((1u << n) - 1);
  Matrix R = rho_matrix(F, n, full);
  SpanTracker span(F.level(n).dim());
  for (int j = 0; j < F.level(n).dim(); ++j) {
    Vec col(F.level(n).dim());
    for (int i = 0; i < F.level(n).dim(); ++i) col[i] = R.at(i, j);
    if (is_zero_vec(col)) continue;
    if (span.add(col)) top.basis.push_back(col);
  }
  return top;
}

Vec dot(const GrassmannFunctor& F, int n, const Vec& a, int m, const Vec& b) {
  if (n + m > F.max_level())
    throw FunctorError("product exceeds max level " + std::to_string(F.max_level()) +
                       "; raise n_max");
  if (!in_top_component(F, n, a) || !in_top_component(F, m, b))
    throw FunctorError("dot arguments must lie in their top components");
  const auto& L = F.level(n + m);
  uint32_t upper = ((1u << n) - 1) << m;  // generators m+1..m+n (0-based: m..m+n-1)
  uint32_t lower = (1u << m) - 1;
  Matrix up_a = F.hom_matrix(GrassmannHom::block_up(n + m, upper));
  Matrix up_b = F.hom_matrix(GrassmannHom::block_up(n + m, lower));
  auto [a_even, a_odd] = F.level(n).split(a);
  Vec result(L.dim());
  Vec ub = up_b * b;
  if (!is_zero_vec(a_even)) {
    Vec prod = L.multiply(up_a * a_even, ub);
    for (int i = 0; i < L.dim(); ++i) result[i] += prod[i];
  }
  if (!is_zero_vec(a_odd)) {
    Vec prod = L.multiply(up_a * a_odd, ub);
    Scalar sign((m & 1) ? -1 : 1);
    for (int i = 0; i < L.dim(); ++i) result[i] += sign * prod[i];
  }
  return result;
}

Vec iota_up(const GrassmannFunctor& F, int k, int n, const Vec& a) {
  if (k < n) throw FunctorError("iota_{k,n} needs k >= n");
  if (k > F.max_level()) throw FunctorError("iota target level exceeds max level");
  uint32_t block = n == 0 ? 0 : ((1u << n) - 1) << (k - n);
  Vec moved = F.hom_matrix(GrassmannHom::block_up(k, block)) * a;
  if (k == n) return moved;
  uint32_t prefix = (1u << (k - n)) - 1;
  Vec eta = F.embed(k, GrassmannElement::basis(k, prefix));
  return F.level(k).multiply(eta, moved);
}

LimitElement limit_normalize(const GrassmannFunctor& F, LimitElement a) {
  for (int m = 0; m < a.level; ++m) {
    TopComponent tm = top_component(F, m);
    if (tm.basis.empty()) continue;
    std::vector<Vec> cols;
    for (const auto& x : tm.basis) cols.push_back(iota_up(F, a.level, m, x));
    auto sol = solve_in_span(cols, a.coords);
    if (!sol) continue;
    Vec coords(F.level(m).dim());
    for (size_t j = 0; j < sol->size(); ++j)
      for (int i = 0; i < F.level(m).dim(); ++i) coords[i] += (*sol)[j] * tm.basis[j][i];
    return LimitElement{m, coords};
  }
  return a;
}

bool limit_equal(const GrassmannFunctor& F, const LimitElement& a, const LimitElement& b) {
  int k = std::max(a.level, b.level);
  Vec ua = iota_up(F, k, a.level, a.coords);
  Vec ub = iota_up(F, k, b.level, b.coords);
  return ua == ub;
}

LimitElement limit_add(const GrassmannFunctor& F, const LimitElement& a, const LimitElement& b) {
  int k = std::max(a.level, b.level);
  Vec ua = iota_up(F, k, a.level, a.coords);
  Vec ub = iota_up(F, k, b.level, b.coords);
  for (size_t i = 0; i < ua.size(); ++i) ua[i] += ub[i];
  return limit_normalize(F, LimitElement{k, ua});
}

LimitElement limit_scale(const LimitElement& a, const Scalar& s) {
  LimitElement r = a;
  for (auto& c : r.coords) c *= s;
  return r;
}

LimitElement limit_product(const GrassmannFunctor& F, const LimitElement& a,
                           const LimitElement& b) {
  Vec prod = dot(F, a.level, a.coords, b.level, b.coords);
  return limit_normalize(F, LimitElement{a.level + b.level, prod});
}

int limit_degree(const GrassmannFunctor& F, const LimitElement& a) {
  int p = F.level(a.level).parity(a.coords);
  if (p < 0) return -1;
  return (p + a.level) & 1;
}

LimitElement limit_star(const GrassmannFunctor& F, const LimitElement& a) {
  const auto& L = F.level(a.level);
  auto [even, odd] = L.split(a.coords);
  Vec out(L.dim());
  const int n = a.level;
  auto accumulate = [&](const Vec& part, int dg) {
    if (is_zero_vec(part)) return;
    Vec st = L.star(part);
    long exponent = long(n) * (n - 1) / 2 + long(n) * (dg + n);
    Scalar sign((exponent & 1) ? -1 : 1);
    for (int i = 0; i < L.dim(); ++i) out[i] += sign * st[i];
  };
  accumulate(even, 0);
  accumulate(odd, 1);
  return LimitElement{n, out};
}

LimitElement limit_unit(const GrassmannFunctor& F) {
  return LimitElement{0, F.level(0).unit()};
}

SigmaImage sigma(const GrassmannFunctor& F, int n, const Vec& a) {
  SigmaImage out;
  for (uint32_t J = 0; J < (1u << n); ++J) {
    Vec rho_part = rho_matrix(F, n, J) * a;
    if (is_zero_vec(rho_part)) continue;
    Vec down = F.hom_matrix(GrassmannHom::block_down(n, J)) * rho_part;
    if (is_zero_vec(down)) continue;
    out[J] = LimitElement{popcount(J), down};
  }
  return out;
}

SigmaImage sigma_product(const GrassmannFunctor& F, int n, const SigmaImage& x,
                         const SigmaImage& y) {
  SigmaImage out;
  for (const auto& [J, u] : x)
    for (const auto& [K, v] : y) {
      if (J & K) continue;
      // (eta_J (x) u)(eta_K (x) v) = (-1)^{|K| dg(u)} eta_J eta_K (x) u v,
      // with dg(u) the degree in the limit algebra: (fiber parity + level) mod 2.
      auto [u_even, u_odd] = F.level(u.level).split(u.coords);
      for (int fiber_dg = 0; fiber_dg <= 1; ++fiber_dg) {
        const Vec& part = fiber_dg ? u_odd : u_even;
        if (is_zero_vec(part)) continue;
        int dg = (fiber_dg + u.level) & 1;
        LimitElement prod = limit_product(F, LimitElement{u.level, part}, v);
        Scalar sign(((popcount(K) * dg) & 1) ? -1 : 1);
        if (inversions(J, K) & 1) sign = -sign;
        prod = limit_scale(prod, sign);
        uint32_t mask = J | K;
        auto it = out.find(mask);
        if (it == out.end())
          out[mask] = prod;
        else
          it->second = limit_add(F, it->second, prod);
      }
    }
  for (auto it = out.begin(); it != out.end();)
    it = is_zero_vec(it->second.coords) ? out.erase(it) : std::next(it);
  return out;
}

SigmaImage sigma_star(const GrassmannFunctor& F, int n, const SigmaImage& x) {
  SigmaImage out;
  for (const auto& [J, u] : x) {
    auto [u_even, u_odd] = F.level(u.level).split(u.coords);
    int kJ = popcount(J);
    for (int dg_coeff = 0; dg_coeff <= 1; ++dg_coeff) {
      const Vec& part = dg_coeff ? u_odd : u_even;
      if (is_zero_vec(part)) continue;
      int dg = limit_degree(F, LimitElement{u.level, part});
      LimitElement st = limit_star(F, LimitElement{u.level, part});
      long exponent = long(kJ) * dg + long(kJ) * (kJ - 1) / 2;
      st = limit_scale(st, Scalar((exponent & 1) ? -1 : 1));
      auto it = out.find(J);
      if (it == out.end())
        out[J] = st;
      else
        it->second = limit_add(F, it->second, st);
    }
  }
  for (auto it = out.begin(); it != out.end();)
    it = is_zero_vec(it->second.coords) ? out.erase(it) : std::next(it);
  return out;
}

bool sigma_equal(const GrassmannFunctor& F, const SigmaImage& x, const SigmaImage& y) {
  for (const auto& [J, u] : x) {
    auto it = y.find(J);
    if (it == y.end()) {
      if (!is_zero_vec(u.coords)) return false;
    } else if (!limit_equal(F, u, it->second)) {
      return false;
    }
  }
  for (const auto& [J, v] : y)
    if (x.find(J) == x.end() && !is_zero_vec(v.coords)) return false;
  return true;
}

SigmaImage sigma_push(const GrassmannFunctor& F, const GrassmannHom& chi, const SigmaImage& x) {
  SigmaImage out;
  for (const auto& [J, u] : x) {
    GrassmannElement image = chi.apply_basis(J);
    for (const auto& [K, c] : image.coeffs()) {
      LimitElement scaled = limit_scale(u, c);
      auto it = out.find(K);
      if (it == out.end())
        out[K] = scaled;
      else
        it->second = limit_add(F, it->second, scaled);
    }
  }
  for (auto it = out.begin(); it != out.end();)
    it = is_zero_vec(it->second.coords) ? out.erase(it) : std::next(it);
  return out;
}

PrimedCone inclusion_cone(const TensorFunctor& F) {
  PrimedCone cone;
  cone.target = &F.fiber();
  for (int n = 0; n <= F.max_level(); ++n) {
    // A_n = Lambda^n (x) B shares the (mask, fiber) index layout with the cone's
    // codomain, so the canonical inclusion is the identity matrix.
    cone.maps.push_back(Matrix::identity(F.level(n).dim()));
  }
  return cone;
}

namespace {

// tau applied to a limit element known to lie in the span of a level's top
// component.
std::optional<Vec> tau_apply(const GrassmannFunctor& F,
                             const std::vector<TopComponent>& tops,
                             const std::vector<std::vector<Vec>>& images, int target_dim,
                             const LimitElement& el) {
  const auto& top = tops[el.level];
  auto sol = solve_in_span(top.basis, el.coords);
  if (!sol) return std::nullopt;
  Vec out(target_dim);
  for (size_t j = 0; j < sol->size(); ++j) {
    if ((*sol)[j].is_zero()) continue;
    for (int t = 0; t < target_dim; ++t) out[t] += (*sol)[j] * images[el.level][j][t];
  }
  return out;
}

}  // namespace

TauResult universal_tau(const GrassmannFunctor& F, const PrimedCone& primed) {
  TauResult res;
  const auto& T = *primed.target;
  const int dT = T.dim();
  const int maxl = F.max_level();
  if (int(primed.maps.size()) != maxl + 1) throw FunctorError("primed cone level count mismatch");

  std::vector<TopComponent> tops;
  for (int n = 0; n <= maxl; ++n) tops.push_back(top_component(F, n));

  // Define tau on each level's top basis from eta_{1..n} (x) tau(a) = sigma'(a_0).
  res.images.assign(maxl + 1, {});
  for (int n = 0; n <= maxl; ++n) {
    uint32_t full = (n == 0) ? 0 : ((1u << n) - 1);
    for (const auto& x : tops[n].basis) {
      Vec sp = primed.maps[n] * x;
      Vec value(dT);
      for (uint32_t J = 0; J < (1u << n); ++J)
        for (int t = 0; t < dT; ++t) {
          const Scalar& c = sp[int(J) * dT + t];
          if (c.is_zero()) continue;
          if (J != full) {
            res.consistent = false;
            res.witness = "sigma' of a top-component element at level " + std::to_string(n) +
                          " has support off the top Grassmann mask";
            return res;
          }
          value[t] = c;
        }
      res.images[n].push_back(value);
    }
  }

  // Consistency across the inductive system: tau(iota_{k,n}(x)) == tau(x).
  for (int n = 0; n <= maxl; ++n) {
    for (size_t j = 0; j < tops[n].basis.size(); ++j) {
      for (int k = n; k <= maxl; ++k) {
        LimitElement lifted{k, iota_up(F, k, n, tops[n].basis[j])};
        auto via_k = tau_apply(F, tops, res.images, dT, lifted);
        if (!via_k) {
          res.consistent = false;
          res.witness = "iota_{" + std::to_string(k) + "," + std::to_string(n) +
                        "} image leaves the top component";
          return res;
        }
        if (*via_k != res.images[n][j]) {
          res.consistent = false;
          res.witness = "tau disagrees across levels " + std::to_string(n) + " -> " +
                        std::to_string(k);
          return res;
        }
      }
    }
  }
  res.determined = true;  // every reconstructed basis vector received a defining value

  // Unit, products, degree and star.
  auto tau_of = [&](const LimitElement& el) { return tau_apply(F, tops, res.images, dT, el); };
  {
    auto u = tau_of(limit_unit(F));
    if (!u || *u != T.unit()) {
      res.homomorphism = false;
      res.witness = "tau does not preserve the unit";
    }
  }
  for (int n = 0; n <= maxl && res.homomorphism; ++n)
    for (int m = 0; n + m <= maxl && res.homomorphism; ++m)
      for (size_t i = 0; i < tops[n].basis.size(); ++i)
        for (size_t j = 0; j < tops[m].basis.size(); ++j) {
          LimitElement a{n, tops[n].basis[i]}, b{m, tops[m].basis[j]};
          LimitElement ab{n + m, dot(F, n, a.coords, m, b.coords)};
          auto lhs = tau_of(ab);
          Vec rhs = T.multiply(res.images[n][i], res.images[m][j]);
          if (!lhs || *lhs != rhs) {
            res.homomorphism = false;
            res.witness = "tau not multiplicative at levels (" + std::to_string(n) + "," +
                          std::to_string(m) + ") basis (" + std::to_string(i) + "," +
                          std::to_string(j) + ")";
          }
          if (!res.homomorphism) break;
        }
  for (int n = 0; n <= maxl && res.homomorphism; ++n)
    for (size_t i = 0; i < tops[n].basis.size(); ++i) {
      LimitElement a{n, tops[n].basis[i]};
      int dg = limit_degree(F, a);
      if (dg >= 0 && !is_zero_vec(res.images[n][i]) && T.parity(res.images[n][i]) != dg) {
        res.homomorphism = false;
        res.witness = "tau does not preserve the grading at level " + std::to_string(n);
        break;
      }
      auto lhs = tau_of(limit_star(F, a));
      if (!lhs || *lhs != T.star(res.images[n][i])) {
        res.homomorphism = false;
        res.witness = "tau does not intertwine the involutions at level " + std::to_string(n);
        break;
      }
    }

  // Naturality: (id (x) tau) . sigma == sigma' on every level basis vector.
  for (int n = 0; n <= maxl && res.natural; ++n) {
    const auto& L = F.level(n);
    for (int i = 0; i < L.dim(); ++i) {
      SigmaImage si = sigma(F, n, L.basis(i));
      Vec expect = primed.maps[n] * L.basis(i);
      Vec got(expect.size());
      for (const auto& [J, u] : si) {
        auto tu = tau_of(u);
        if (!tu) {
          res.natural = false;
          res.witness = "sigma image not expressible at level " + std::to_string(n);
          break;
        }
        for (int t = 0; t < dT; ++t) got[int(J) * dT + t] = (*tu)[t];
      }
      if (!res.natural) break;
      if (got != expect) {
        res.natural = false;
        res.witness = "naturality square fails at level " + std::to_string(n) + " basis " +
                      std::to_string(i);
        break;
      }
    }
  }
  return res;
}

// --- validation --------------------------------------------------------------

namespace {

GrassmannElement random_odd_element(Rng& rng, int n) {
  GrassmannElement e(n);
  for (uint32_t m = 0; m < (1u << n); ++m)
    if ((popcount(m) & 1) && rng.coin()) e.set_coeff(m, rng.small_scalar(2, 2, false));
  return e;
}

GrassmannHom random_hom(Rng& rng, int src, int dst) {
  std::vector<GrassmannElement> im;
  for (int i = 0; i < src; ++i) im.push_back(random_odd_element(rng, dst));
  return GrassmannHom(src, dst, std::move(im));
}

}  // namespace

std::vector<CheckItem> validate_functor(const GrassmannFunctor& F, uint64_t seed, int trials) {
  std::vector<CheckItem> out;
  const int maxl = F.max_level();
  Rng rng(seed);

  {
    CheckItem c{"levels-are-graded-star-algebras", true, ""};
    for (int n = 0; n <= maxl && c.pass; ++n) {
      auto bad = F.level(n).validate(seed + n);
      if (bad) {
        c.pass = false;
        c.witness = "level " + std::to_string(n) + ": " + *bad;
      }
    }
    out.push_back(c);
  }
  {
    CheckItem c{"iota-is-injective-star-embedding", true, ""};
    for (int n = 0; n <= maxl && c.pass; ++n) {
      const auto& L = F.level(n);
      Matrix E(L.dim(), 1 << n);
      for (uint32_t I = 0; I < (1u << n); ++I) {
        Vec col = F.embed(n, GrassmannElement::basis(n, I));
        for (int i = 0; i < L.dim(); ++i) E.at(i, int(I)) = col[i];
      }
      if (rank(E) != (1 << n)) {
        c.pass = false;
        c.witness = "iota not injective at level " + std::to_string(n);
        break;
      }
      if (F.embed(n, GrassmannElement::unit(n)) != L.unit()) {
        c.pass = false;
        c.witness = "iota(1) != 1 at level " + std::to_string(n);
        break;
      }
      for (uint32_t I = 0; I < (1u << n) && c.pass; ++I)
        for (uint32_t J = 0; J < (1u << n); ++J) {
          GrassmannElement gi = GrassmannElement::basis(n, I), gj = GrassmannElement::basis(n, J);
          if (F.embed(n, gi * gj) != L.multiply(F.embed(n, gi), F.embed(n, gj))) {
            c.pass = false;
            c.witness = "iota not multiplicative at level " + std::to_string(n);
            break;
          }
        }
      for (uint32_t I = 0; I < (1u << n) && c.pass; ++I) {
        GrassmannElement gi = GrassmannElement::basis(n, I);
        if (F.embed(n, gi.star()) != L.star(F.embed(n, gi))) {
          c.pass = false;
          c.witness = "iota not star-preserving at level " + std::to_string(n);
        }
      }
    }
    out.push_back(c);
  }
  {
    CheckItem c{"graded-centrality", true, ""};
    for (int n = 0; n <= maxl && c.pass; ++n) {
      const auto& L = F.level(n);
      for (uint32_t I = 0; I < (1u << n) && c.pass; ++I) {
        Vec eta = F.embed(n, GrassmannElement::basis(n, I));
        int dg_eta = popcount(I) & 1;
        for (int j = 0; j < L.dim(); ++j) {
          Vec lhs = L.multiply(eta, L.basis(j));
          Vec rhs = L.multiply(L.basis(j), eta);
          Scalar sign((dg_eta * L.degree(j)) & 1 ? -1 : 1);
          for (auto& s : rhs) s *= sign;
          if (lhs != rhs) {
            c.pass = false;
            c.witness = "eta_I a != (-1)^{dg dg} a eta_I at level " + std::to_string(n) +
                        ", I mask " + std::to_string(I) + ", basis " + std::to_string(j);
            break;
          }
        }
      }
    }
    out.push_back(c);
  }
  {
    CheckItem c{"functoriality", true, ""};
    // identity
    for (int n = 0; n <= maxl && c.pass; ++n)
      if (F.hom_matrix(GrassmannHom::identity(n)) != Matrix::identity(F.level(n).dim())) {
        c.pass = false;
        c.witness = "G(id) != id at level " + std::to_string(n);
      }
    for (int t = 0; t < trials && c.pass; ++t) {
      int a = int(rng.uniform(0, maxl));
      int b = int(rng.uniform(0, maxl));
      int cdim = int(rng.uniform(0, maxl));
      auto chi = random_hom(rng, a, b);
      auto psi = random_hom(rng, b, cdim);
      if (F.hom_matrix(psi.compose(chi)) != F.hom_matrix(psi) * F.hom_matrix(chi)) {
        c.pass = false;
        c.witness = "G(psi.chi) != G(psi)G(chi) on seeded pair " + std::to_string(t);
      }
    }
    out.push_back(c);
  }
  {
    CheckItem c{"naturality-of-iota", true, ""};
    for (int t = 0; t < trials && c.pass; ++t) {
      int a = int(rng.uniform(0, maxl));
      int b = int(rng.uniform(0, maxl));
      auto chi = random_hom(rng, a, b);
      GrassmannElement g(a);
      for (uint32_t m = 0; m < (1u << a); ++m)
        if (rng.coin()) g.set_coeff(m, rng.small_scalar());
      if (F.hom_matrix(chi) * F.embed(a, g) != F.embed(b, chi.apply(g))) {
        c.pass = false;
        c.witness = "iota naturality fails on seeded hom " + std::to_string(t);
      }
    }
    out.push_back(c);
  }
  {
    CheckItem c{"linearity-over-hom-combinations", true, ""};
    // The two-generator detector relation: chi_u + chi_v - chi_{u+v} - chi_0 = 0.
    for (int t = 0; t < trials && c.pass; ++t) {
      int dst = std::max(1, int(rng.uniform(1, maxl)));
      GrassmannElement u = random_odd_element(rng, dst);
      GrassmannElement v = random_odd_element(rng, dst);
      GrassmannElement sum = u + v;
      GrassmannElement zero(dst);
      Matrix M = F.hom_matrix(GrassmannHom(1, dst, {u})) + F.hom_matrix(GrassmannHom(1, dst, {v})) -
                 F.hom_matrix(GrassmannHom(1, dst, {sum})) - F.hom_matrix(GrassmannHom(1, dst, {zero}));
      if (!M.is_zero()) {
        c.pass = false;
        c.witness = "sum_i lambda_i G(chi_i) != 0 for the vanishing combination chi_u + chi_v - "
                    "chi_{u+v} - chi_0 (u=" +
                    u.str() + ", v=" + v.str() + ")";
      }
    }
    // Lemma-style relations: a hom equals its matrix-unit decomposition.
    for (int t = 0; t < trials && c.pass; ++t) {
      int a = int(rng.uniform(0, std::min(2, maxl)));
      int b = int(rng.uniform(0, maxl));
      auto chi = random_hom(rng, a, b);
      auto dec = decompose_linear_map(GrassmannLinearMap::from_hom(chi));
      if (!dec.admissible) continue;
      if (F.hom_matrix(chi) != combination_matrix(F, a, b, dec.combination)) {
        c.pass = false;
        c.witness = "G(chi) differs from the linear extension of its hom decomposition";
      }
    }
    out.push_back(c);
  }
  return out;
}

std::vector<CheckItem> check_rho_system(const GrassmannFunctor& F) {
  std::vector<CheckItem> out;
  const int maxl = F.max_level();
  for (int n = 0; n <= maxl; ++n) {
    const auto& L = F.level(n);
    const int d = L.dim();
    std::vector<Matrix> pi(1u << n), rho(1u << n);
    for (uint32_t K = 0; K < (1u << n); ++K) {
      pi[K] = pi_matrix(F, n, K);
      rho[K] = rho_matrix(F, n, K);
    }
    CheckItem c1{"pi-intersection-level-" + std::to_string(n), true, ""};
    for (uint32_t K = 0; K < (1u << n) && c1.pass; ++K)
      for (uint32_t J = 0; J < (1u << n); ++J)
        if (pi[K] * pi[J] != pi[K & J]) {
          c1.pass = false;
          c1.witness = "pi_K pi_J != pi_{K cap J} at K=" + std::to_string(K) +
                       " J=" + std::to_string(J);
          break;
        }
    out.push_back(c1);

    CheckItem c2{"rho-orthogonality-level-" + std::to_string(n), true, ""};
    for (uint32_t K = 0; K < (1u << n) && c2.pass; ++K)
      for (uint32_t J = 0; J < (1u << n); ++J) {
        Matrix prod = rho[K] * rho[J];
        Matrix expect = (K == J) ? rho[K] : Matrix::zero(d, d);
        if (prod != expect) {
          c2.pass = false;
          c2.witness = "rho_K rho_J != delta rho_K at K=" + std::to_string(K) +
                       " J=" + std::to_string(J);
          break;
        }
      }
    out.push_back(c2);

    CheckItem c3{"rho-completeness-level-" + std::to_string(n), true, ""};
    Matrix sum = Matrix::zero(d, d);
    for (uint32_t K = 0; K < (1u << n); ++K) sum = sum + rho[K];
    if (sum != Matrix::identity(d)) {
      c3.pass = false;
      c3.witness = "sum_K rho_K != id";
    }
    out.push_back(c3);

    CheckItem c4{"rho-convolution-level-" + std::to_string(n), true, ""};
    std::vector<std::vector<Vec>> rho_basis(1u << n, std::vector<Vec>(d));
    for (uint32_t K = 0; K < (1u << n); ++K)
      for (int i = 0; i < d; ++i) rho_basis[K][i] = rho[K] * L.basis(i);
    for (uint32_t K = 0; K < (1u << n) && c4.pass; ++K)
      for (int i = 0; i < d && c4.pass; ++i)
        for (int j = 0; j < d; ++j) {
          Vec lhs = rho[K] * L.multiply(L.basis(i), L.basis(j));
          Vec rhs(d);
          for (uint32_t J = K;; J = (J - 1) & K) {
            Vec term = L.multiply(rho_basis[J][i], rho_basis[K & ~J][j]);
            for (int t = 0; t < d; ++t) rhs[t] += term[t];
            if (J == 0) break;
          }
          if (lhs != rhs) {
            c4.pass = false;
            c4.witness = "rho_K(ab) != sum_J rho_J(a) rho_{K-J}(b) at K=" + std::to_string(K) +
                         " a=" + std::to_string(i) + " b=" + std::to_string(j);
            break;
          }
        }
    out.push_back(c4);
  }
  return out;
}

// --- JsonFunctor ---------------------------------------------------------

namespace {

json matrix_to_json(const Matrix& M) {
  json rows = json::array();
  for (int i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < M.cols(); ++j) row.push_back(M.at(i, j).str());
    rows.push_back(row);
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  int rows = int(j.size());
  int cols = rows ? int(j.at(0).size()) : 0;
  Matrix M(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int c = 0; c < cols; ++c) M.at(i, c) = Scalar::parse(j.at(i).at(c).get<std::string>());
  return M;
}

GrassmannHom face_hom(int n, int k) {
  std::vector<GrassmannElement> im(n, GrassmannElement(n - 1));
  for (int i = 0; i < n; ++i) {
    if (i < k) im[i] = GrassmannElement::generator(n - 1, i);
    if (i > k) im[i] = GrassmannElement::generator(n - 1, i - 1);
  }
  return GrassmannHom(n, n - 1, std::move(im));
}

GrassmannHom coface_hom(int n, int k) {
  std::vector<GrassmannElement> im;
  for (int i = 0; i < n; ++i)
    im.push_back(GrassmannElement::generator(n + 1, i < k ? i : i + 1));
  return GrassmannHom(n, n + 1, std::move(im));
}

GrassmannHom expand_hom(int n, int k) {
  std::vector<GrassmannElement> im;
  for (int i = 0; i < n; ++i) {
    if (i < k)
      im.push_back(GrassmannElement::generator(n + 2, i));
    else if (i == k)
      im.push_back(GrassmannElement::basis(n + 2, 0b111u << k));
    else
      im.push_back(GrassmannElement::generator(n + 2, i + 2));
  }
  return GrassmannHom(n, n + 2, std::move(im));
}

}  // namespace

JsonFunctor JsonFunctor::from_json(const std::string& text) {
  json j = json::parse(text);
  JsonFunctor F;
  F.name_ = j.value("name", "json-functor");
  F.max_ = j.at("max_level").get<int>();
  for (int n = 0; n <= F.max_; ++n) {
    F.levels_.push_back(algebra_from_json(j.at("levels").at(n).dump()));
    F.iota_.push_back(matrix_from_json(j.at("iota").at(n)));
  }
  for (const auto& item : j.at("maps")) {
    std::string kind = item.at("kind").get<std::string>();
    int n = item.at("n").get<int>();
    int k = item.at("k").get<int>();
    Matrix M = matrix_from_json(item.at("matrix"));
    if (kind == "face")
      F.face_[{n, k}] = M;
    else if (kind == "coface")
      F.coface_[{n, k}] = M;
    else if (kind == "kill")
      F.kill_[{n, k}] = M;
    else if (kind == "expand")
      F.expand_[{n, k}] = M;
    else
      throw FunctorError("unknown map kind in functor descriptor: " + kind);
  }
  return F;
}

std::string JsonFunctor::to_json(const GrassmannFunctor& F) {
  json j;
  j["name"] = F.name();
  j["max_level"] = F.max_level();
  j["levels"] = json::array();
  j["iota"] = json::array();
  for (int n = 0; n <= F.max_level(); ++n) {
    j["levels"].push_back(json::parse(algebra_to_json(F.level(n))));
    Matrix E(F.level(n).dim(), 1 << n);
    for (uint32_t I = 0; I < (1u << n); ++I) {
      Vec col = F.embed(n, GrassmannElement::basis(n, I));
      for (int i = 0; i < F.level(n).dim(); ++i) E.at(i, int(I)) = col[i];
    }
    j["iota"].push_back(matrix_to_json(E));
  }
  j["maps"] = json::array();
  auto push_map = [&](const char* kind, int n, int k, const GrassmannHom& h) {
    json item;
    item["kind"] = kind;
    item["n"] = n;
    item["k"] = k;
    item["matrix"] = matrix_to_json(F.hom_matrix(h));
    j["maps"].push_back(item);
  };
  for (int n = 1; n <= F.max_level(); ++n)
    for (int k = 0; k < n; ++k) push_map("face", n, k, face_hom(n, k));
  for (int n = 0; n < F.max_level(); ++n)
    for (int k = 0; k <= n; ++k) push_map("coface", n, k, coface_hom(n, k));
  for (int n = 1; n <= F.max_level(); ++n)
    for (int k = 0; k < n; ++k)
      push_map("kill", n, k, GrassmannHom::kill(n, ((1u << n) - 1) & ~(1u << k)));
  for (int n = 1; n + 2 <= F.max_level(); ++n)
    for (int k = 0; k < n; ++k) push_map("expand", n, k, expand_hom(n, k));
  return j.dump();
}

const StructureConstantAlgebra& JsonFunctor::level(int n) const {
  if (n < 0 || n > max_) throw FunctorError("level out of range");
  return levels_[n];
}

Vec JsonFunctor::embed(int n, const GrassmannElement& g) const {
  Vec v(levels_[n].dim());
  for (const auto& [mask, s] : g.coeffs())
    for (int i = 0; i < levels_[n].dim(); ++i) v[i] += s * iota_[n].at(i, int(mask));
  return v;
}

Matrix JsonFunctor::monomial_matrix(const GrassmannHom& chi) const {
  // Route a positive monomial hom (each image a single subset monomial with
  // coefficient 1, ascending blocks) through the stored generating maps.
  const int n = chi.src(), m = chi.dst();
  std::vector<int> active;
  std::vector<uint32_t> blocks;
  for (int i = 0; i < n; ++i) {
    const auto& im = chi.images()[i];
    if (im.is_zero()) continue;
    if (im.coeffs().size() != 1 || !(im.coeffs().begin()->second == Scalar(1)))
      throw FunctorError("not a positive monomial hom");
    active.push_back(i);
    blocks.push_back(im.coeffs().begin()->first);
  }
  Matrix M = Matrix::identity(levels_[n].dim());
  int cur = n;
  // 1. kill + squeeze out inactive generators (faces from highest to lowest)
  for (int i = n - 1; i >= 0; --i) {
    bool keep = false;
    for (int a : active) keep = keep || (a == i);
    if (keep) continue;
    auto it = face_.find({cur, i});
    if (it == face_.end()) throw FunctorError("missing face map in functor descriptor");
    M = it->second * M;
    --cur;
  }
  // cur == number of active generators; generator j now carries block blocks[j].
  // 2. expand each generator to its block size, from the last to the first.
  std::vector<int> sizes;
  for (uint32_t b : blocks) sizes.push_back(popcount(b));
  int pos_of_gen = 0;
  std::vector<int> positions(sizes.size());
  for (size_t g = 0; g < sizes.size(); ++g) {
    positions[g] = pos_of_gen;
    pos_of_gen += 1;  // before expansion each generator occupies one slot
  }
  for (int g = int(sizes.size()) - 1; g >= 0; --g) {
    int grow = (sizes[g] - 1) / 2;
    for (int step = 0; step < grow; ++step) {
      auto it = expand_.find({cur, positions[g]});
      if (it == expand_.end()) throw FunctorError("missing expand map in functor descriptor");
      M = it->second * M;
      cur += 2;
    }
  }
  // 3. pad with cofaces so the consecutive image blocks land on their targets.
  uint32_t union_mask = 0;
  for (uint32_t b : blocks) union_mask |= b;
  int have = cur;
  for (int t = 0; t < m; ++t) {
    if ((union_mask >> t) & 1) continue;
    auto it = coface_.find({have, t});
    if (it == coface_.end()) throw FunctorError("missing coface map in functor descriptor");
    M = it->second * M;
    ++have;
  }
  if (have != m) throw FunctorError("monomial hom routing level mismatch");
  return M;
}

Matrix JsonFunctor::hom_matrix(const GrassmannHom& chi) const {
  if (chi.dst() > max_ || chi.src() > max_) throw FunctorError("level out of range");
  bool positive_monomial = true;
  for (const auto& im : chi.images()) {
    if (im.is_zero()) continue;
    if (im.coeffs().size() != 1 || !(im.coeffs().begin()->second == Scalar(1)))
      positive_monomial = false;
  }
  if (positive_monomial) {
    // Blocks must also be ascending and disjoint for the direct routing.
    uint32_t prev_max = 0;
    bool ascending = true;
    uint32_t seen = 0;
    for (const auto& im : chi.images()) {
      if (im.is_zero()) continue;
      uint32_t b = im.coeffs().begin()->first;
      if (b & seen) ascending = false;
      if (b && prev_max && (b & ((prev_max << 1) - 1))) ascending = false;
      seen |= b;
      if (b) prev_max = 1u << (31 - std::countl_zero(b));
    }
    if (ascending) return monomial_matrix(chi);
  }
  auto dec = decompose_linear_map(GrassmannLinearMap::from_hom(chi));
  if (!dec.admissible) throw FunctorError("hom decomposition failed unexpectedly");
  Matrix total(levels_[chi.dst()].dim(), levels_[chi.src()].dim());
  for (const auto& [c, h] : dec.combination)
    if (!c.is_zero()) total = total + monomial_matrix(h) * c;
  return total;
}

}  // namespace fermicas

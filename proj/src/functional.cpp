#include "functional.hpp"

#include <sstream>

#include "rng.hpp"

namespace fermicas {

ConfigurationSpace::ConfigurationSpace(int points, int rank) : points_(points), rank_(rank) {
  if (points < 0 || rank < 1) throw FunctionalError("invalid configuration space");
  if (dim() > 24) throw FunctionalError("configuration dimension too large (max 24)");
}

bool ConfigurationSpace::leq(int x, int y) const {
  if (leq_.empty()) return x == y;
  return leq_[x][y];
}

void ConfigurationSpace::set_order(std::vector<std::vector<bool>> leq) {
  if (int(leq.size()) != points_) throw FunctionalError("order matrix size mismatch");
  for (int x = 0; x < points_; ++x) {
    if (!leq[x][x]) throw FunctionalError("causal order must be reflexive");
    for (int y = 0; y < points_; ++y) {
      if (leq[x][y] && leq[y][x] && x != y) throw FunctionalError("causal order must be antisymmetric");
      for (int z = 0; z < points_; ++z)
        if (leq[x][y] && leq[y][z] && !leq[x][z])
          throw FunctionalError("causal order must be transitive");
    }
  }
  leq_ = std::move(leq);
}

std::set<int> ConfigurationSpace::past_of(const std::set<int>& region) const {
  std::set<int> past;
  for (int x = 0; x < points_; ++x)
    for (int y : region)
      if (leq(x, y)) {
        past.insert(x);
        break;
      }
  return past;
}

std::set<int> ConfigurationSpace::support(const Vec& v) const {
  std::set<int> s;
  for (int a = 0; a < int(v.size()); ++a)
    if (!v[a].is_zero()) s.insert(point_of(a));
  return s;
}

namespace {

Scalar det(std::vector<Vec> m) {
  const int n = int(m.size());
  Scalar result(1);
  for (int c = 0; c < n; ++c) {
    int p = -1;
    for (int r = c; r < n; ++r)
      if (!m[r][c].is_zero()) {
        p = r;
        break;
      }
    if (p < 0) return Scalar(0);
    if (p != c) {
      std::swap(m[p], m[c]);
      result = -result;
    }
    result *= m[c][c];
    Scalar inv = Scalar(1) / m[c][c];
    for (int r = c + 1; r < n; ++r) {
      if (m[r][c].is_zero()) continue;
      Scalar f = m[r][c] * inv;
      for (int j = c; j < n; ++j) m[r][j] -= f * m[c][j];
    }
  }
  return result;
}

std::vector<int> mask_indices(uint32_t mask) {
  std::vector<int> idx;
  for (int b = 0; b < 32; ++b)
    if ((mask >> b) & 1) idx.push_back(b);
  return idx;
}

}  // namespace

FermionicFunctional::FermionicFunctional(ConfigurationSpace space, int max_degree)
    : space_(std::move(space)), comp_(max_degree + 1) {
  if (max_degree < 0 || max_degree > space_.dim())
    throw FunctionalError("max degree out of range");
}

Scalar FermionicFunctional::component(int n, uint32_t mask) const {
  if (n < 0 || n > max_degree()) return Scalar(0);
  auto it = comp_[n].find(mask);
  return it == comp_[n].end() ? Scalar(0) : it->second;
}

void FermionicFunctional::set_component(int n, uint32_t mask, const Scalar& v) {
  if (n < 0 || n > max_degree()) throw FunctionalError("component degree out of range");
  if (popcount(mask) != n) throw FunctionalError("mask size must equal the degree");
  if (mask >> space_.dim()) throw FunctionalError("mask exceeds space dimension");
  if (v.is_zero())
    comp_[n].erase(mask);
  else
    comp_[n][mask] = v;
}

bool FermionicFunctional::is_zero() const {
  for (const auto& c : comp_)
    if (!c.empty()) return false;
  return true;
}

FermionicFunctional FermionicFunctional::constant(const ConfigurationSpace& s, const Scalar& c) {
  FermionicFunctional f(s, 0);
  f.set_component(0, 0, c);
  return f;
}

FermionicFunctional FermionicFunctional::operator+(const FermionicFunctional& o) const {
  FermionicFunctional r(space_, std::max(max_degree(), o.max_degree()));
  for (int n = 0; n <= max_degree(); ++n)
    for (const auto& [m, v] : comp_[n]) r.set_component(n, m, r.component(n, m) + v);
  for (int n = 0; n <= o.max_degree(); ++n)
    for (const auto& [m, v] : o.comp_[n]) r.set_component(n, m, r.component(n, m) + v);
  return r;
}

FermionicFunctional FermionicFunctional::operator*(const Scalar& s) const {
  FermionicFunctional r(space_, max_degree());
  if (s.is_zero()) return r;
  for (int n = 0; n <= max_degree(); ++n)
    for (const auto& [m, v] : comp_[n]) r.set_component(n, m, v * s);
  return r;
}

bool FermionicFunctional::operator==(const FermionicFunctional& o) const {
  int N = std::max(max_degree(), o.max_degree());
  if (space_.dim() != o.space_.dim()) return false;
  for (int n = 0; n <= N; ++n) {
    std::map<uint32_t, Scalar> a = n <= max_degree() ? comp_[n] : std::map<uint32_t, Scalar>{};
    std::map<uint32_t, Scalar> b = n <= o.max_degree() ? o.comp_[n] : std::map<uint32_t, Scalar>{};
    if (a != b) return false;
  }
  return true;
}

Scalar FermionicFunctional::evaluate_component(int n, const std::vector<Vec>& args) const {
  if (int(args.size()) != n) throw FunctionalError("argument count mismatch");
  if (n < 0 || n > max_degree()) return Scalar(0);
  for (const auto& v : args)
    if (int(v.size()) != space_.dim()) throw FunctionalError("vector dimension mismatch");
  Scalar total(0);
  for (const auto& [mask, value] : comp_[n]) {
    std::vector<int> idx = mask_indices(mask);
    std::vector<Vec> m(n, Vec(n));
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) m[r][c] = args[r][idx[c]];
    Scalar d = det(std::move(m));
    if (!d.is_zero()) total += value * d;
  }
  return total;
}

Scalar FermionicFunctional::evaluate(const std::vector<Vec>& wedge) const {
  int k = int(wedge.size());
  if (k > max_degree()) return Scalar(0);
  return evaluate_component(k, wedge);
}

std::string FermionicFunctional::str() const {
  std::ostringstream os;
  os << "functional(dim=" << space_.dim() << ")";
  for (int n = 0; n <= max_degree(); ++n)
    for (const auto& [m, v] : comp_[n]) {
      os << " F" << n << "[";
      auto idx = mask_indices(m);
      for (size_t i = 0; i < idx.size(); ++i) os << (i ? "," : "") << idx[i];
      os << "]=" << v.str();
    }
  return os.str();
}

FermionicFunctional pointwise_product(const FermionicFunctional& F, const FermionicFunctional& G) {
  if (F.space().dim() != G.space().dim())
    throw FunctionalError("pointwise product needs a common configuration space");
  int N = std::min(F.max_degree() + G.max_degree(), F.space().dim());
  FermionicFunctional R(F.space(), N);
  for (int nf = 0; nf <= F.max_degree(); ++nf)
    for (const auto& [mf, vf] : F.component_map(nf))
      for (int ng = 0; ng <= G.max_degree(); ++ng)
        for (const auto& [mg, vg] : G.component_map(ng)) {
          if (mf & mg) continue;
          uint32_t t = mf | mg;
          Scalar term = vf * vg;
          if (inversions(mf, mg) & 1) term = -term;
          R.set_component(nf + ng, t, R.component(nf + ng, t) + term);
        }
  return R;
}

std::set<int> support(const FermionicFunctional& F) {
  std::set<int> s;
  for (int n = 0; n <= F.max_degree(); ++n)
    for (const auto& [mask, v] : F.component_map(n))
      for (int idx : mask_indices(mask)) s.insert(F.space().point_of(idx));
  return s;
}

namespace {

std::string tuple_str(const std::vector<int>& idx) {
  std::string s = "(";
  for (size_t i = 0; i < idx.size(); ++i) s += (i ? "," : "") + std::to_string(idx[i]);
  return s + ")";
}

}  // namespace

AdditivityVerdict additivity_check(const FermionicFunctional& F, int trials, uint64_t seed) {
  AdditivityVerdict verdict;
  const ConfigurationSpace& sp = F.space();
  const int d = sp.dim();

  // Exhaustive scan: a basis tuple touching two distinct points p != q yields a
  // candidate split W = {p}, Z = {q}; the three-term identity is then evaluated
  // exactly on that tuple (v slots elsewhere, w slots at p, z slots at q).
  for (int n = 1; n <= F.max_degree(); ++n) {
    for (const auto& [mask, value] : F.component_map(n)) {
      auto idx = mask_indices(mask);
      int p = sp.point_of(idx[0]);
      int q = -1;
      for (int i : idx)
        if (sp.point_of(i) != p) {
          q = sp.point_of(i);
          break;
        }
      if (q < 0) continue;
      std::vector<Vec> v(n, Vec(d)), w(n, Vec(d)), z(n, Vec(d));
      for (int slot = 0; slot < n; ++slot) {
        int pt = sp.point_of(idx[slot]);
        Vec basis(d);
        basis[idx[slot]] = Scalar(1);
        if (pt == p)
          w[slot] = basis;
        else if (pt == q)
          z[slot] = basis;
        else
          v[slot] = basis;
      }
      auto sum3 = [&](const std::vector<Vec>& a, const std::vector<Vec>& b,
                      const std::vector<Vec>& c) {
        std::vector<Vec> r(n, Vec(d));
        for (int s = 0; s < n; ++s)
          for (int i = 0; i < d; ++i) r[s][i] = a[s][i] + b[s][i] + c[s][i];
        return r;
      };
      std::vector<Vec> zero(n, Vec(d));
      Scalar lhs = F.evaluate_component(n, sum3(v, w, z));
      Scalar rhs = F.evaluate_component(n, sum3(v, w, zero)) - F.evaluate_component(n, v) +
                   F.evaluate_component(n, sum3(v, zero, z));
      if (lhs != rhs) {
        verdict.additive = false;
        verdict.witness = "degree " + std::to_string(n) + " tuple " + tuple_str(idx) +
                          " split at points {" + std::to_string(p) + "} vs {" + std::to_string(q) +
                          "}: lhs=" + lhs.str() + " rhs=" + rhs.str();
        return verdict;
      }
    }
  }

  // Seeded random tuples with random disjoint supports.
  Rng rng(seed);
  for (int t = 0; t < trials; ++t) {
    int n = int(rng.uniform(1, std::max(1, F.max_degree())));
    if (sp.points() < 2) break;
    int p = int(rng.uniform(0, sp.points() - 1));
    int q = int(rng.uniform(0, sp.points() - 1));
    if (p == q) continue;
    auto rand_vec = [&](std::optional<int> at_point) {
      Vec v(d);
      for (int i = 0; i < d; ++i) {
        if (at_point && sp.point_of(i) != *at_point) continue;
        if (rng.coin()) v[i] = rng.small_scalar(2, 2);
      }
      return v;
    };
    std::vector<Vec> v, w, z, vw, vz, vwz;
    for (int s = 0; s < n; ++s) {
      v.push_back(rand_vec(std::nullopt));
      w.push_back(rand_vec(p));
      z.push_back(rand_vec(q));
    }
    for (int s = 0; s < n; ++s) {
      Vec a(d), b(d), c(d);
      for (int i = 0; i < d; ++i) {
        a[i] = v[s][i] + w[s][i];
        b[i] = v[s][i] + z[s][i];
        c[i] = v[s][i] + w[s][i] + z[s][i];
      }
      vw.push_back(a);
      vz.push_back(b);
      vwz.push_back(c);
    }
    Scalar lhs = F.evaluate_component(n, vwz);
    Scalar rhs = F.evaluate_component(n, vw) - F.evaluate_component(n, v) +
                 F.evaluate_component(n, vz);
    if (lhs != rhs) {
      verdict.additive = false;
      verdict.witness = "random split at points {" + std::to_string(p) + "} vs {" +
                        std::to_string(q) + "} (seed " + std::to_string(seed) + ", trial " +
                        std::to_string(t) + ")";
      return verdict;
    }
  }
  return verdict;
}

LeftDerivative left_derivative(const FermionicFunctional& F, const Vec& hdir,
                               const std::vector<Vec>& h) {
  LeftDerivative out;
  std::vector<Vec> args;
  args.push_back(hdir);
  for (const auto& v : h) args.push_back(v);
  out.pairing = F.evaluate(args);
  out.gradient.assign(F.space().dim(), Scalar(0));
  for (int a = 0; a < F.space().dim(); ++a) {
    args[0] = Vec(F.space().dim());
    args[0][a] = Scalar(1);
    out.gradient[a] = F.evaluate(args);
  }
  return out;
}

LeftDerivative right_derivative(const FermionicFunctional& F, const Vec& hdir,
                                const std::vector<Vec>& h) {
  LeftDerivative out;
  std::vector<Vec> args = h;
  args.push_back(hdir);
  out.pairing = F.evaluate(args);
  out.gradient.assign(F.space().dim(), Scalar(0));
  for (int a = 0; a < F.space().dim(); ++a) {
    args.back() = Vec(F.space().dim());
    args.back()[a] = Scalar(1);
    out.gradient[a] = F.evaluate(args);
  }
  return out;
}

namespace {

int check_odd_params(const std::vector<SmearedTerm>& terms) {
  int n = -1;
  for (const auto& t : terms) {
    if (t.parameter.is_zero() || t.parameter.parity() != 1)
      throw FunctionalError("smeared sections need odd Grassmann parameters");
    if (n < 0)
      n = t.parameter.generators();
    else if (n != t.parameter.generators())
      throw FunctionalError("parameters must live in one Grassmann algebra");
  }
  return n < 0 ? 0 : n;
}

GrassmannElement reversed_product(const std::vector<GrassmannElement>& factors, int params) {
  GrassmannElement prod = GrassmannElement::unit(params);
  for (auto it = factors.rbegin(); it != factors.rend(); ++it) prod = prod * *it;
  return prod;
}

}  // namespace

GrassmannElement extend_and_evaluate(const FermionicFunctional& F,
                                     const std::vector<SmearedTerm>& assignment) {
  int params = check_odd_params(assignment);
  GrassmannElement out = GrassmannElement::unit(params) * F.component(0, 0);
  int k = int(assignment.size());
  for (uint32_t sub = 1; sub < (1u << k); ++sub) {
    int n = popcount(sub);
    if (n > F.max_degree()) continue;
    std::vector<Vec> args;
    std::vector<GrassmannElement> etas;
    for (int i = 0; i < k; ++i)
      if ((sub >> i) & 1) {
        args.push_back(assignment[i].section);
        etas.push_back(assignment[i].parameter);
      }
    Scalar value = F.evaluate_component(n, args);
    if (value.is_zero()) continue;
    out = out + reversed_product(etas, params) * value;
  }
  return out;
}

GrassmannValuedFunctional::GrassmannValuedFunctional(ConfigurationSpace space, int max_degree,
                                                     int params)
    : space_(std::move(space)), params_(params), comp_(max_degree + 1) {}

GrassmannElement GrassmannValuedFunctional::component(int n, uint32_t mask) const {
  if (n < 0 || n > max_degree()) return GrassmannElement(params_);
  auto it = comp_[n].find(mask);
  return it == comp_[n].end() ? GrassmannElement(params_) : it->second;
}

void GrassmannValuedFunctional::set_component(int n, uint32_t mask, const GrassmannElement& v) {
  if (n < 0 || n > max_degree()) throw FunctionalError("component degree out of range");
  if (v.is_zero())
    comp_[n].erase(mask);
  else
    comp_[n][mask] = v;
}

GrassmannElement GrassmannValuedFunctional::evaluate_component(int n,
                                                               const std::vector<Vec>& args) const {
  GrassmannElement total(params_);
  if (n < 0 || n > max_degree()) return total;
  for (const auto& [mask, value] : comp_[n]) {
    std::vector<int> idx = mask_indices(mask);
    std::vector<Vec> m(n, Vec(n));
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) m[r][c] = args[r][idx[c]];
    Scalar d = det(std::move(m));
    if (!d.is_zero()) total = total + value * d;
  }
  return total;
}

bool GrassmannValuedFunctional::operator==(const GrassmannValuedFunctional& o) const {
  int N = std::max(max_degree(), o.max_degree());
  for (int n = 0; n <= N; ++n)
    for (uint32_t m = 0; m < (1u << space_.dim()); ++m)
      if (popcount(m) == n && !(component(n, m) == o.component(n, m))) return false;
  return true;
}

GrassmannElement GrassmannValuedFunctional::extend_and_evaluate(
    const std::vector<SmearedTerm>& assignment) const {
  int params = check_odd_params(assignment);
  if (params != params_ && !assignment.empty())
    throw FunctionalError("assignment parameters must match the functional's algebra");
  GrassmannElement out = component(0, 0);
  int k = int(assignment.size());
  for (uint32_t sub = 1; sub < (1u << k); ++sub) {
    int n = popcount(sub);
    if (n > max_degree()) continue;
    std::vector<Vec> args;
    std::vector<GrassmannElement> etas;
    for (int i = 0; i < k; ++i)
      if ((sub >> i) & 1) {
        args.push_back(assignment[i].section);
        etas.push_back(assignment[i].parameter);
      }
    GrassmannElement value = evaluate_component(n, args);
    if (value.is_zero()) continue;
    out = out + value * reversed_product(etas, params_);
  }
  return out;
}

GrassmannValuedFunctional shift(const FermionicFunctional& F, const std::vector<SmearedTerm>& w,
                                int params) {
  for (const auto& t : w)
    if (!t.parameter.is_zero() && (t.parameter.parity() != 1 || t.parameter.generators() != params))
      throw FunctionalError("shift parameters must be odd elements of the given algebra");
  GrassmannValuedFunctional R(F.space(), F.max_degree(), params);
  const int d = F.space().dim();
  const int kw = int(w.size());
  for (int n = 0; n <= F.max_degree(); ++n) {
    for (uint32_t mask = 0; mask < (1u << d); ++mask) {
      if (popcount(mask) != n) continue;
      std::vector<Vec> base;
      for (int idx : mask_indices(mask)) {
        Vec e(d);
        e[idx] = Scalar(1);
        base.push_back(e);
      }
      GrassmannElement acc(params);
      for (uint32_t sub = 0; sub < (1u << kw); ++sub) {
        int k = popcount(sub);
        if (k + n > F.max_degree()) continue;
        std::vector<Vec> args = base;
        std::vector<GrassmannElement> thetas;
        for (int j = 0; j < kw; ++j)
          if ((sub >> j) & 1) {
            args.push_back(w[j].section);
            thetas.push_back(w[j].parameter);
          }
        Scalar value = F.evaluate_component(n + k, args);
        if (value.is_zero()) continue;
        acc = acc + reversed_product(thetas, params) * value;
      }
      R.set_component(n, mask, acc);
    }
  }
  return R;
}

}  // namespace fermicas

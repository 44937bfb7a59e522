#include "car_model.hpp"

#include <json.hpp>

namespace fermicas {

using nlohmann::json;

std::vector<int> CausalDiracModel::test_indices() const {
  std::vector<int> idx;
  for (int a = 0; a < dim(); ++a)
    if (test_point(space.point_of(a))) idx.push_back(a);
  return idx;
}

Scalar CausalDiracModel::pairing(const Vec& u, const Vec& v) const {
  return sandwich(u, Gamma, v);
}

const Matrix& CausalDiracModel::S() const {
  if (!has_s_) {
    Matrix SA = solve_linear(Gamma, S_R.adjoint() * Gamma);
    s_cache_ = S_R - SA;
    has_s_ = true;
  }
  return s_cache_;
}

const Matrix& CausalDiracModel::gram() const {
  if (!has_gram_) {
    gram_cache_ = Gamma * S() * Scalar::i();
    has_gram_ = true;
  }
  return gram_cache_;
}

Matrix CausalDiracModel::gram_window() const {
  auto idx = test_indices();
  Matrix G(int(idx.size()), int(idx.size()));
  for (size_t i = 0; i < idx.size(); ++i)
    for (size_t j = 0; j < idx.size(); ++j) G.at(int(i), int(j)) = gram().at(idx[i], idx[j]);
  return G;
}

namespace {

int ring_dist(int x, int y, int L) {
  int d = std::abs(x - y) % L;
  return std::min(d, L - d);
}

}  // namespace

CausalDiracModel builtin_lattice(int T, int L, const Rational& mass,
                                 const Rational& gamma_diag) {
  if (T < 3) throw ModelError("builtin lattice needs T >= 3 (one interior timestep)");
  if (L < 1) throw ModelError("builtin lattice needs L >= 1");
  CausalDiracModel m;
  m.name = "lattice:T=" + std::to_string(T) + ",L=" + std::to_string(L) + ",m=" + mass.get_str() +
           (gamma_diag == Rational(1, 2) ? "" : ",g=" + gamma_diag.get_str());
  m.space = ConfigurationSpace(T * L, 2);
  std::vector<std::pair<int, int>> coords;
  for (int t = 0; t < T; ++t)
    for (int x = 0; x < L; ++x) coords.emplace_back(t, x);
  m.space.set_coords(coords);
  std::vector<std::vector<bool>> leq(T * L, std::vector<bool>(T * L, false));
  for (int p = 0; p < T * L; ++p)
    for (int q = 0; q < T * L; ++q) {
      int dt = coords[q].first - coords[p].first;
      if (dt >= 0 && ring_dist(coords[p].second, coords[q].second, L) <= dt) leq[p][q] = true;
    }
  m.space.set_order(leq);
  m.is_test.assign(T * L, 0);
  for (int t = 1; t <= T - 2; ++t)
    for (int x = 0; x < L; ++x) m.is_test[t * L + x] = 1;

  const int d = 2 * T * L;
  auto idx = [&](int t, int x, int c) { return ((t * L + ((x % L) + L) % L) * 2) + c; };
  // Staircase successor of half-step (t,x,c): within a cell c0 -> c1 at the same
  // site, across cells c1 -> next timestep, next site on the ring.
  auto succ = [&](int t, int x, int c) -> std::optional<std::array<int, 3>> {
    if (c == 0) return std::array<int, 3>{t, x, 1};
    if (t + 1 >= T) return std::nullopt;
    return std::array<int, 3>{t + 1, (x + 1) % L, 0};
  };

  Matrix D(d, d), Gamma(d, d);
  Scalar I = Scalar::i();
  for (int t = 0; t < T; ++t)
    for (int x = 0; x < L; ++x)
      for (int c = 0; c < 2; ++c) {
        int a = idx(t, x, c);
        D.at(a, a) = Scalar(mass);
        Gamma.at(a, a) = Scalar(gamma_diag);
        if (auto s = succ(t, x, c)) {
          int b = idx((*s)[0], (*s)[1], (*s)[2]);
          D.at(a, b) = I;
          D.at(b, a) = -I;
          Gamma.at(a, b) = Scalar(1);
          Gamma.at(b, a) = Scalar(1);
        }
      }
  m.Gamma = Gamma;
  m.D = D;

  // Retarded inverse by forward substitution along each staircase chain.
  Matrix S_R(d, d);
  for (int y = 0; y < d; ++y) {
    Vec h(d);
    // walk every staircase; the source enters through its chain only
    for (int x0 = 0; x0 < L; ++x0) {
      // chain slots: (t, (x0 + t) mod L, c), tau = 2t + c
      auto slot = [&](int tau) { return idx(tau / 2, x0 + tau / 2, tau % 2); };
      bool contains_source = false;
      for (int tau = 0; tau < 2 * T; ++tau) contains_source |= (slot(tau) == y);
      if (!contains_source) continue;
      // h(slot(0)) = 0; row slot(tau) determines h(slot(tau+1)).
      for (int tau = 0; tau + 1 < 2 * T; ++tau) {
        int r = slot(tau);
        Scalar acc = (r == y) ? Scalar(1) : Scalar(0);
        acc -= D.at(r, r) * h[r];
        if (tau > 0) acc -= D.at(r, slot(tau - 1)) * h[slot(tau - 1)];
        h[slot(tau + 1)] = acc / D.at(r, slot(tau + 1));
      }
    }
    for (int i = 0; i < d; ++i) S_R.at(i, y) = h[i];
  }
  m.S_R = S_R;
  m.S_minus = m.S() * (Scalar::i() * Scalar(Rational(1, 2)));  // symmetric split
  return m;
}

std::vector<ModelCheck> validate_model(const CausalDiracModel& m) {
  std::vector<ModelCheck> out;
  const int d = m.dim();
  const auto W = m.test_indices();
  std::vector<bool> in_w(d, false);
  for (int a : W) in_w[a] = true;

  {
    ModelCheck c{"gamma-hermitian-invertible", true, ""};
    if (!m.Gamma.is_hermitian()) {
      c.pass = false;
      c.witness = "Gamma not hermitian";
    } else {
      try {
        inverse(m.Gamma);
      } catch (const MatrixError&) {
        c.pass = false;
        c.witness = "Gamma singular";
      }
    }
    out.push_back(c);
  }
  {
    // <f, D g> = <D f, g> whenever f or g is supported on the test window.
    ModelCheck c{"dirac-window-hermitian", true, ""};
    Matrix defect = m.Gamma * m.D - m.D.adjoint() * m.Gamma;
    for (int w : W)
      for (int i = 0; i < d && c.pass; ++i)
        if (!defect.at(w, i).is_zero() || !defect.at(i, w).is_zero()) {
          c.pass = false;
          c.witness = "hermiticity defect touches window index " + std::to_string(w);
        }
    out.push_back(c);
  }
  {
    ModelCheck c{"retardation-cone", true, ""};
    for (int b = 0; b < d && c.pass; ++b)
      for (int a = 0; a < d; ++a) {
        if (m.S_R.at(b, a).is_zero()) continue;
        int pa = m.space.point_of(a), pb = m.space.point_of(b);
        if (!m.space.leq(pa, pb)) {
          c.pass = false;
          c.witness = "S_R has support at (row point " + std::to_string(pb) +
                      ", column point " + std::to_string(pa) + ") outside the cone";
          break;
        }
      }
    out.push_back(c);
  }
  Matrix DSR = m.D * m.S_R;
  Matrix SRD = m.S_R * m.D;
  {
    // D S_R = 1 against test sources, on every row not in the final time slice.
    ModelCheck c{"retarded-inverse-interior-rows", true, ""};
    int t_max = 0;
    for (int p = 0; p < m.space.points(); ++p)
      t_max = std::max(t_max, m.space.has_coords() ? m.space.time_of(p) : 0);
    for (int w : W)
      for (int i = 0; i < d && c.pass; ++i) {
        bool last_slice =
            m.space.has_coords() && m.space.time_of(m.space.point_of(i)) == t_max;
        if (last_slice) continue;
        Scalar want(i == w ? 1 : 0);
        if (DSR.at(i, w) != want) {
          c.pass = false;
          c.witness = "(D S_R)(" + std::to_string(i) + "," + std::to_string(w) + ") wrong";
        }
      }
    out.push_back(c);
  }
  {
    ModelCheck c{"two-sided-inverse-on-tests", true, ""};
    for (int w : W)
      for (int i = 0; i < d && c.pass; ++i) {
        Scalar want(i == w ? 1 : 0);
        if (SRD.at(i, w) != want) {
          c.pass = false;
          c.witness = "(S_R D)(" + std::to_string(i) + "," + std::to_string(w) + ") wrong";
        }
      }
    out.push_back(c);
  }
  {
    ModelCheck c{"advanced-adjoint-inverse-on-tests", true, ""};
    Matrix SAD = solve_linear(m.Gamma, m.S_R.adjoint() * m.Gamma) * m.D;
    for (int w : W)
      for (int i = 0; i < d && c.pass; ++i) {
        Scalar want(i == w ? 1 : 0);
        if (SAD.at(i, w) != want) {
          c.pass = false;
          c.witness = "(S_A D)(" + std::to_string(i) + "," + std::to_string(w) + ") wrong";
        }
      }
    out.push_back(c);
  }
  {
    ModelCheck c{"kernel-annihilates-test-sources", true, ""};
    Matrix SD = m.S() * m.D;
    for (int w : W)
      for (int i = 0; i < d && c.pass; ++i)
        if (!SD.at(i, w).is_zero()) {
          c.pass = false;
          c.witness = "(S D) e_" + std::to_string(w) + " != 0";
        }
    out.push_back(c);
  }
  {
    // S_minus f is a solution for every test source f: (S_minus D) f = 0 for
    // f in the window (the adjoint-side identity the Wick calculus consumes).
    ModelCheck c{"s-minus-solution-kernel", true, ""};
    Matrix SmD = m.S_minus * m.D;
    for (int w : W)
      for (int i = 0; i < d && c.pass; ++i)
        if (!SmD.at(i, w).is_zero()) {
          c.pass = false;
          c.witness = "(S_minus D) e_" + std::to_string(w) + " != 0";
        }
    out.push_back(c);
  }
  {
    ModelCheck c{"gram-hermitian", true, ""};
    if (!m.gram().is_hermitian()) {
      c.pass = false;
      c.witness = "Gamma iS not hermitian";
    }
    out.push_back(c);
  }
  {
    ModelCheck c{"gram-positive-on-window", true, ""};
    Matrix G = m.gram_window();
    if (!G.is_hermitian()) {
      c.pass = false;
      c.witness = "window Gram not hermitian";
    } else {
      auto v = psd_check(G);
      if (!v.positive_semidefinite) {
        c.pass = false;
        c.witness = "window Gram indefinite: " + v.detail;
      }
    }
    out.push_back(c);
  }
  {
    ModelCheck c{"window-gram-nondegenerate", true, ""};
    if (m.gram_window().is_zero()) {
      c.pass = false;
      c.witness = "window Gram vanishes identically (degenerate model)";
    }
    out.push_back(c);
  }
  return out;
}

bool all_pass(const std::vector<ModelCheck>& checks) {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string first_failure(const std::vector<ModelCheck>& checks) {
  for (const auto& c : checks)
    if (!c.pass) return c.name + ": " + c.witness;
  return "";
}

CommutatorKernel commutator_kernel(const CausalDiracModel& m) {
  auto checks = validate_model(m);
  if (!all_pass(checks)) throw ModelError("invalid model: " + first_failure(checks));
  CommutatorKernel out;
  out.S = m.S();
  const auto W = m.test_indices();
  {
    ModelCheck c{"adjoint-decomposition", true, ""};
    Matrix SA = solve_linear(m.Gamma, m.S_R.adjoint() * m.Gamma);
    if (out.S != m.S_R - SA) {
      c.pass = false;
      c.witness = "S != S_R - Gamma^{-1} S_R^dagger Gamma";
    }
    out.checks.push_back(c);
  }
  {
    ModelCheck c{"kernel-values-are-solutions", true, ""};
    Matrix SD = out.S * m.D;
    for (int w : W)
      for (int i = 0; i < m.dim() && c.pass; ++i)
        if (!SD.at(i, w).is_zero()) {
          c.pass = false;
          c.witness = "S D e_w != 0";
        }
    out.checks.push_back(c);
  }
  {
    ModelCheck c{"pairing-real", true, ""};
    // <f, iS f> real for all f follows from hermitian Gamma iS; spot-check basis.
    for (int a = 0; a < m.dim(); ++a)
      if (m.gram().at(a, a).im() != 0) {
        c.pass = false;
        c.witness = "<e_a, iS e_a> not real at " + std::to_string(a);
        break;
      }
    out.checks.push_back(c);
  }
  return out;
}

CausalSplit causal_split(const CausalDiracModel& m, const Vec& f, const Vec& g) {
  const auto& sp = m.space;
  std::set<int> supp_g = sp.support(g);
  std::set<int> past = sp.past_of(supp_g);
  std::set<int> supp_f = sp.support(f);

  CausalSplit out;
  bool disjoint = true;
  for (int p : supp_f)
    if (past.count(p)) disjoint = false;
  if (disjoint) {
    out.f_prime = f;
    out.h.assign(m.dim(), Scalar(0));
    return out;
  }
  if (!sp.has_coords()) throw ModelError("causal_split needs time coordinates");
  int t_star = 0;
  for (int p : past) t_star = std::max(t_star, sp.time_of(p));
  ++t_star;  // one collar slice above the past
  int t_max = 0;
  for (int p = 0; p < sp.points(); ++p) t_max = std::max(t_max, sp.time_of(p));
  if (t_star > t_max)
    throw ModelError(
        "no downward-closed region separates the supports (degenerate causal order)");
  std::set<int> region;
  for (int p = 0; p < sp.points(); ++p)
    if (sp.time_of(p) <= t_star) region.insert(p);
  out.cutoff_region = region;

  Vec u = m.S_R * f;
  out.h.assign(m.dim(), Scalar(0));
  for (int a = 0; a < m.dim(); ++a)
    if (region.count(sp.point_of(a))) out.h[a] = u[a];
  Vec Dh = m.D * out.h;
  out.f_prime.assign(m.dim(), Scalar(0));
  for (int a = 0; a < m.dim(); ++a) out.f_prime[a] = f[a] - Dh[a];

  for (int a = 0; a < m.dim(); ++a)
    if (!out.f_prime[a].is_zero() && past.count(sp.point_of(a)))
      throw ModelError("causal split failed: residual support intersects the past");
  return out;
}

PropagatorPack propagator_pack(const CausalDiracModel& m) {
  PropagatorPack p;
  p.Gamma = m.Gamma;
  p.D = m.D;
  p.S_minus = m.S_minus;
  p.S_F = m.S_R * Scalar::i() - m.S_minus;
  p.S_plus = m.S() * Scalar::i() - m.S_minus;
  p.window = m.test_indices();
  return p;
}

// --- spec strings and JSON ---------------------------------------------------

CausalDiracModel model_from_spec(const std::string& spec) {
  if (spec.rfind("lattice:", 0) == 0) {
    int T = 3, L = 2;
    Rational mass(1, 2), gdiag(1, 2);
    std::string rest = spec.substr(8);
    size_t pos = 0;
    while (pos < rest.size()) {
      size_t eq = rest.find('=', pos);
      if (eq == std::string::npos) throw ModelError("malformed lattice spec: " + spec);
      std::string key = rest.substr(pos, eq - pos);
      size_t comma = rest.find(',', eq);
      std::string val = rest.substr(eq + 1, comma == std::string::npos ? std::string::npos
                                                                       : comma - eq - 1);
      if (key == "T")
        T = std::stoi(val);
      else if (key == "L")
        L = std::stoi(val);
      else if (key == "m") {
        mass = Rational(val);
        mass.canonicalize();
      } else if (key == "g") {
        gdiag = Rational(val);
        gdiag.canonicalize();
      } else
        throw ModelError("unknown lattice parameter: " + key);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    return builtin_lattice(T, L, mass, gdiag);
  }
  throw ModelError("unknown model spec (expected lattice:... or a JSON file): " + spec);
}

namespace {

json matrix_json(const Matrix& M) {
  json rows = json::array();
  for (int i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < M.cols(); ++j) row.push_back(M.at(i, j).str());
    rows.push_back(row);
  }
  return rows;
}

Matrix matrix_unjson(const json& j) {
  int rows = int(j.size());
  int cols = rows ? int(j.at(0).size()) : 0;
  Matrix M(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int c = 0; c < cols; ++c) M.at(i, c) = Scalar::parse(j.at(i).at(c).get<std::string>());
  return M;
}

}  // namespace

std::string model_to_json(const CausalDiracModel& m) {
  json j;
  j["name"] = m.name;
  j["rank"] = m.space.rank();
  j["points"] = json::array();
  for (int p = 0; p < m.space.points(); ++p) {
    json pt;
    pt["id"] = p;
    if (m.space.has_coords()) {
      pt["time"] = m.space.time_of(p);
      pt["site"] = m.space.site_of(p);
    }
    pt["test"] = bool(m.is_test[p]);
    j["points"].push_back(pt);
  }
  json order = json::array();
  for (int p = 0; p < m.space.points(); ++p)
    for (int q = 0; q < m.space.points(); ++q)
      if (p != q && m.space.leq(p, q)) order.push_back({p, q});
  j["order"] = order;
  j["Gamma"] = matrix_json(m.Gamma);
  j["D"] = matrix_json(m.D);
  j["S_R"] = matrix_json(m.S_R);
  j["S_minus"] = matrix_json(m.S_minus);
  return j.dump();
}

CausalDiracModel model_from_json(const std::string& text) {
  json j = json::parse(text);
  CausalDiracModel m;
  m.name = j.value("name", "json-model");
  int rank = j.at("rank").get<int>();
  int points = int(j.at("points").size());
  m.space = ConfigurationSpace(points, rank);
  m.is_test.assign(points, 0);
  std::vector<std::pair<int, int>> coords;
  bool has_coords = points > 0 && j.at("points").at(0).contains("time");
  for (int p = 0; p < points; ++p) {
    const auto& pt = j.at("points").at(p);
    if (pt.value("test", false)) m.is_test[p] = 1;
    if (has_coords) coords.emplace_back(pt.at("time").get<int>(), pt.at("site").get<int>());
  }
  if (has_coords) m.space.set_coords(coords);
  std::vector<std::vector<bool>> leq(points, std::vector<bool>(points, false));
  for (int p = 0; p < points; ++p) leq[p][p] = true;
  for (const auto& pair : j.at("order")) leq[pair.at(0).get<int>()][pair.at(1).get<int>()] = true;
  m.space.set_order(leq);
  m.Gamma = matrix_unjson(j.at("Gamma"));
  m.D = matrix_unjson(j.at("D"));
  m.S_R = matrix_unjson(j.at("S_R"));
  m.S_minus = matrix_unjson(j.at("S_minus"));
  if (m.Gamma.rows() != m.dim()) throw ModelError("matrix dimensions do not match the space");
  return m;
}

}  // namespace fermicas

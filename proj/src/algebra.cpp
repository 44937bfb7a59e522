#include "algebra.hpp"

#include <json.hpp>

#include "rng.hpp"

namespace fermicas {

using nlohmann::json;

StructureConstantAlgebra::StructureConstantAlgebra(std::vector<int> degrees, Vec unit,
                                                   std::vector<std::vector<Vec>> mult,
                                                   std::vector<Vec> star,
                                                   std::vector<std::string> labels)
    : degrees_(std::move(degrees)),
      unit_(std::move(unit)),
      mult_(std::move(mult)),
      star_(std::move(star)),
      labels_(std::move(labels)) {
  const size_t d = degrees_.size();
  if (unit_.size() != d || mult_.size() != d || star_.size() != d)
    throw AlgebraError("inconsistent structure-constant tables");
  for (const auto& row : mult_) {
    if (row.size() != d) throw AlgebraError("multiplication table shape mismatch");
    for (const auto& v : row)
      if (v.size() != d) throw AlgebraError("multiplication table entry shape mismatch");
  }
  for (const auto& v : star_)
    if (v.size() != d) throw AlgebraError("involution table shape mismatch");
  if (labels_.empty()) {
    for (size_t i = 0; i < d; ++i) labels_.push_back("e" + std::to_string(i));
  }
  for (int dg : degrees_)
    if (dg != 0 && dg != 1) throw AlgebraError("degrees must be 0 or 1");
}

Vec StructureConstantAlgebra::multiply(const Vec& a, const Vec& b) const {
  if (int(a.size()) != dim() || int(b.size()) != dim())
    throw AlgebraError("element dimension mismatch");
  Vec r(dim());
  for (int i = 0; i < dim(); ++i) {
    if (a[i].is_zero()) continue;
    for (int j = 0; j < dim(); ++j) {
      if (b[j].is_zero()) continue;
      Scalar c = a[i] * b[j];
      const Vec& m = mult_[i][j];
      for (int k = 0; k < dim(); ++k)
        if (!m[k].is_zero()) r[k] += c * m[k];
    }
  }
  return r;
}

Vec StructureConstantAlgebra::star(const Vec& a) const {
  Vec r(dim());
  for (int i = 0; i < dim(); ++i) {
    if (a[i].is_zero()) continue;
    Scalar c = a[i].conj();
    for (int k = 0; k < dim(); ++k)
      if (!star_[i][k].is_zero()) r[k] += c * star_[i][k];
  }
  return r;
}

Vec StructureConstantAlgebra::basis(int i) const {
  Vec r(dim());
  r[i] = Scalar(1);
  return r;
}

int StructureConstantAlgebra::parity(const Vec& a) const {
  int p = -1;
  for (int i = 0; i < dim(); ++i) {
    if (a[i].is_zero()) continue;
    if (p < 0)
      p = degrees_[i];
    else if (p != degrees_[i])
      return -1;
  }
  return p < 0 ? 0 : p;
}

std::pair<Vec, Vec> StructureConstantAlgebra::split(const Vec& a) const {
  Vec even(dim()), odd(dim());
  for (int i = 0; i < dim(); ++i) (degrees_[i] ? odd : even)[i] = a[i];
  return {even, odd};
}

std::optional<std::string> StructureConstantAlgebra::validate(uint64_t seed) const {
  const int d = dim();
  if (parity(unit_) != 0) return "unit is not even";
  for (int i = 0; i < d; ++i) {
    if (multiply(unit_, basis(i)) != basis(i)) return "unit not left-neutral on " + labels_[i];
    if (multiply(basis(i), unit_) != basis(i)) return "unit not right-neutral on " + labels_[i];
  }
  auto is_zero_vec = [](const Vec& v) {
    for (const auto& s : v)
      if (!s.is_zero()) return false;
    return true;
  };
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      if (is_zero_vec(mult_[i][j])) continue;
      int p = parity(mult_[i][j]);
      if (p != ((degrees_[i] + degrees_[j]) & 1))
        return "degree not additive on " + labels_[i] + "*" + labels_[j];
    }
  // star: antilinear, involutive, degree-preserving, (ab)* = b* a*
  for (int i = 0; i < d; ++i) {
    if (star(star(basis(i))) != basis(i)) return "involution not involutive on " + labels_[i];
    if (!is_zero_vec(star_[i]) && parity(star_[i]) != degrees_[i])
      return "involution changes degree of " + labels_[i];
  }
  if (star(unit_) != unit_) return "involution moves the unit";
  auto star_ok = [&](int i, int j) {
    return star(mult_[i][j]) == multiply(star(basis(j)), star(basis(i)));
  };
  auto assoc_ok = [&](int i, int j, int k) {
    return multiply(mult_[i][j], basis(k)) == multiply(basis(i), mult_[j][k]);
  };
  if (d <= 32) {
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        if (!star_ok(i, j))
          return "involution does not reverse " + labels_[i] + "*" + labels_[j];
        for (int k = 0; k < d; ++k)
          if (!assoc_ok(i, j, k))
            return "associativity fails on (" + labels_[i] + "," + labels_[j] + "," + labels_[k] +
                   ")";
      }
  } else {
    Rng rng(seed);
    for (int t = 0; t < 512; ++t) {
      int i = int(rng.uniform(0, d - 1)), j = int(rng.uniform(0, d - 1)),
          k = int(rng.uniform(0, d - 1));
      if (!star_ok(i, j))
        return "involution does not reverse " + labels_[i] + "*" + labels_[j];
      if (!assoc_ok(i, j, k))
        return "associativity fails on (" + labels_[i] + "," + labels_[j] + "," + labels_[k] + ")";
    }
  }
  return std::nullopt;
}

bool StructureConstantAlgebra::operator==(const StructureConstantAlgebra& o) const {
  return degrees_ == o.degrees_ && unit_ == o.unit_ && mult_ == o.mult_ && star_ == o.star_;
}

StructureConstantAlgebra grassmann_algebra(int n) {
  const int d = 1 << n;
  std::vector<int> degrees(d);
  std::vector<std::vector<Vec>> mult(d, std::vector<Vec>(d, Vec(d)));
  std::vector<Vec> star(d, Vec(d));
  std::vector<std::string> labels(d);
  Vec unit(d);
  unit[0] = Scalar(1);
  for (uint32_t I = 0; I < uint32_t(d); ++I) {
    degrees[I] = popcount(I) & 1;
    GrassmannElement eI = GrassmannElement::basis(n, I);
    labels[I] = eI.str();
    GrassmannElement eIs = eI.star();
    for (const auto& [m, s] : eIs.coeffs()) star[I][m] = s;
    for (uint32_t J = 0; J < uint32_t(d); ++J) {
      GrassmannElement prod = eI * GrassmannElement::basis(n, J);
      for (const auto& [m, s] : prod.coeffs()) mult[I][J][m] = s;
    }
  }
  return StructureConstantAlgebra(degrees, unit, mult, star, labels);
}

StructureConstantAlgebra graded_matrix_algebra(int k) {
  const int d = k * k;
  auto idx = [k](int i, int j) { return i * k + j; };
  std::vector<int> degrees(d);
  std::vector<std::vector<Vec>> mult(d, std::vector<Vec>(d, Vec(d)));
  std::vector<Vec> star(d, Vec(d));
  std::vector<std::string> labels(d);
  Vec unit(d);
  for (int i = 0; i < k; ++i) unit[idx(i, i)] = Scalar(1);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      int a = idx(i, j);
      degrees[a] = (i + j) & 1;
      labels[a] = "E" + std::to_string(i) + std::to_string(j);
      star[a][idx(j, i)] = Scalar(1);  // conjugate transpose on basis units
      for (int p = 0; p < k; ++p)
        for (int q = 0; q < k; ++q)
          if (j == p) mult[a][idx(p, q)][idx(i, q)] = Scalar(1);
    }
  return StructureConstantAlgebra(degrees, unit, mult, star, labels);
}

StructureConstantAlgebra graded_matrix_algebra_2x2() { return graded_matrix_algebra(2); }

StructureConstantAlgebra direct_sum(const StructureConstantAlgebra& A,
                                    const StructureConstantAlgebra& B) {
  const int dA = A.dim(), d = A.dim() + B.dim();
  std::vector<int> degrees(d);
  std::vector<std::vector<Vec>> mult(d, std::vector<Vec>(d, Vec(d)));
  std::vector<Vec> star(d, Vec(d));
  std::vector<std::string> labels(d);
  Vec unit(d);
  for (int i = 0; i < dA; ++i) {
    degrees[i] = A.degree(i);
    labels[i] = "L." + A.label(i);
    unit[i] = A.unit()[i];
    for (int k = 0; k < dA; ++k) star[i][k] = A.basis_star(i)[k];
    for (int j = 0; j < dA; ++j)
      for (int k = 0; k < dA; ++k) mult[i][j][k] = A.basis_product(i, j)[k];
  }
  for (int i = 0; i < B.dim(); ++i) {
    degrees[dA + i] = B.degree(i);
    labels[dA + i] = "R." + B.label(i);
    unit[dA + i] = B.unit()[i];
    for (int k = 0; k < B.dim(); ++k) star[dA + i][dA + k] = B.basis_star(i)[k];
    for (int j = 0; j < B.dim(); ++j)
      for (int k = 0; k < B.dim(); ++k) mult[dA + i][dA + j][dA + k] = B.basis_product(i, j)[k];
  }
  return StructureConstantAlgebra(degrees, unit, mult, star, labels);
}

StructureConstantAlgebra graded_tensor(int n, const StructureConstantAlgebra& A) {
  const int dA = A.dim();
  const int d = (1 << n) * dA;
  std::vector<int> degrees(d);
  std::vector<std::vector<Vec>> mult(d, std::vector<Vec>(d, Vec(d)));
  std::vector<Vec> star(d, Vec(d));
  std::vector<std::string> labels(d);
  Vec unit(d);
  for (int k = 0; k < dA; ++k) unit[tensor_index(dA, 0, k)] = A.unit()[k];

  for (uint32_t I = 0; I < (1u << n); ++I)
    for (int a = 0; a < dA; ++a) {
      int row = tensor_index(dA, I, a);
      degrees[row] = (popcount(I) + A.degree(a)) & 1;
      labels[row] = GrassmannElement::basis(n, I).str() + "(x)" + A.label(a);
      // (eta_I (x) e_a)* = (-1)^{|I| dg(a)} eta_I^* (x) e_a^*
      GrassmannElement eIs = GrassmannElement::basis(n, I).star();
      Scalar sign(((popcount(I) * A.degree(a)) & 1) ? -1 : 1);
      for (const auto& [m, s] : eIs.coeffs())
        for (int k = 0; k < dA; ++k) {
          const Scalar& st = A.basis_star(a)[k];
          if (!st.is_zero()) star[row][tensor_index(dA, m, k)] += sign * s * st;
        }
      for (uint32_t J = 0; J < (1u << n); ++J)
        for (int b = 0; b < dA; ++b) {
          int col = tensor_index(dA, J, b);
          if (I & J) continue;
          Scalar sgn(((popcount(J) * A.degree(a)) & 1) ? -1 : 1);
          if (inversions(I, J) & 1) sgn = -sgn;
          const Vec& ab = A.basis_product(a, b);
          for (int k = 0; k < dA; ++k)
            if (!ab[k].is_zero()) mult[row][col][tensor_index(dA, I | J, k)] += sgn * ab[k];
        }
    }
  return StructureConstantAlgebra(degrees, unit, mult, star, labels);
}

HomVerdict check_homomorphism(const AlgebraMap& f, bool check_star, int pair_budget,
                              uint64_t seed) {
  HomVerdict v;
  const auto& A = *f.src;
  const auto& B = *f.dst;
  if (f.apply(A.unit()) != B.unit()) {
    v.ok = false;
    v.witness = "f(1) != 1";
    return v;
  }
  for (int i = 0; i < A.dim(); ++i) {
    Vec fi = f.apply(A.basis(i));
    int p = B.parity(fi);
    bool zero = true;
    for (const auto& s : fi) zero = zero && s.is_zero();
    if (!zero && p != A.degree(i)) {
      v.ok = false;
      v.witness = "degree violated on basis " + std::to_string(i);
      return v;
    }
    if (check_star && f.apply(A.star(A.basis(i))) != B.star(fi)) {
      v.ok = false;
      v.witness = "involution violated on basis " + std::to_string(i);
      return v;
    }
  }
  auto check_pair = [&](int i, int j) -> bool {
    return f.apply(A.multiply(A.basis(i), A.basis(j))) ==
           B.multiply(f.apply(A.basis(i)), f.apply(A.basis(j)));
  };
  long total = long(A.dim()) * A.dim();
  if (total <= pair_budget) {
    for (int i = 0; i < A.dim(); ++i)
      for (int j = 0; j < A.dim(); ++j)
        if (!check_pair(i, j)) {
          v.ok = false;
          v.witness = "multiplicativity fails on pair (" + std::to_string(i) + "," +
                      std::to_string(j) + ")";
          return v;
        }
  } else {
    Rng rng(seed);
    for (int t = 0; t < pair_budget; ++t) {
      int i = int(rng.uniform(0, A.dim() - 1)), j = int(rng.uniform(0, A.dim() - 1));
      if (!check_pair(i, j)) {
        v.ok = false;
        v.witness = "multiplicativity fails on pair (" + std::to_string(i) + "," +
                    std::to_string(j) + ") [seed " + std::to_string(seed) + "]";
        return v;
      }
    }
  }
  return v;
}

std::string algebra_to_json(const StructureConstantAlgebra& A) {
  json j;
  j["dimension"] = A.dim();
  j["degrees"] = json::array();
  j["unit"] = json::array();
  j["labels"] = json::array();
  for (int i = 0; i < A.dim(); ++i) {
    j["degrees"].push_back(A.degree(i));
    j["unit"].push_back(A.unit()[i].str());
    j["labels"].push_back(A.label(i));
  }
  j["mult_table"] = json::array();
  j["star_table"] = json::array();
  for (int i = 0; i < A.dim(); ++i) {
    json row = json::array();
    for (int jj = 0; jj < A.dim(); ++jj) {
      json cell = json::array();
      for (int k = 0; k < A.dim(); ++k) cell.push_back(A.basis_product(i, jj)[k].str());
      row.push_back(cell);
    }
    j["mult_table"].push_back(row);
    json srow = json::array();
    for (int k = 0; k < A.dim(); ++k) srow.push_back(A.basis_star(i)[k].str());
    j["star_table"].push_back(srow);
  }
  return j.dump(1);
}

StructureConstantAlgebra algebra_from_json(const std::string& text) {
  json j = json::parse(text);
  int d = j.at("dimension").get<int>();
  std::vector<int> degrees;
  Vec unit;
  for (int i = 0; i < d; ++i) {
    degrees.push_back(j.at("degrees").at(i).get<int>());
    unit.push_back(Scalar::parse(j.at("unit").at(i).get<std::string>()));
  }
  std::vector<std::vector<Vec>> mult(d, std::vector<Vec>(d));
  std::vector<Vec> star(d);
  for (int i = 0; i < d; ++i) {
    for (int jj = 0; jj < d; ++jj) {
      Vec cell;
      for (int k = 0; k < d; ++k)
        cell.push_back(Scalar::parse(j.at("mult_table").at(i).at(jj).at(k).get<std::string>()));
      mult[i][jj] = std::move(cell);
    }
    for (int k = 0; k < d; ++k)
      star[i].push_back(Scalar::parse(j.at("star_table").at(i).at(k).get<std::string>()));
  }
  std::vector<std::string> labels;
  if (j.contains("labels"))
    for (int i = 0; i < d; ++i) labels.push_back(j.at("labels").at(i).get<std::string>());
  return StructureConstantAlgebra(degrees, unit, mult, star, labels);
}

}  // namespace fermicas

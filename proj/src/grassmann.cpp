#include "grassmann.hpp"

#include <bit>
#include <sstream>

namespace fermicas {

int popcount(uint32_t m) { return std::popcount(m); }

int inversions(uint32_t I, uint32_t J) {
  int count = 0;
  uint32_t j = J;
  while (j) {
    int b = std::countr_zero(j);
    j &= j - 1;
    count += std::popcount(I >> (b + 1));
  }
  return count;
}

GrassmannElement::GrassmannElement(int n) : n_(n) {
  if (n < 0 || n > kMaxGenerators) throw GrassmannError("generator count out of range");
}

GrassmannElement GrassmannElement::basis(int n, uint32_t mask) {
  GrassmannElement e(n);
  if (mask >> n) throw GrassmannError("basis mask exceeds generator count");
  e.c_[mask] = Scalar(1);
  return e;
}

Scalar GrassmannElement::coeff(uint32_t mask) const {
  auto it = c_.find(mask);
  return it == c_.end() ? Scalar() : it->second;
}

void GrassmannElement::set_coeff(uint32_t mask, const Scalar& v) {
  if (mask >> n_) throw GrassmannError("mask exceeds generator count");
  if (v.is_zero())
    c_.erase(mask);
  else
    c_[mask] = v;
}

int GrassmannElement::parity() const {
  int p = -1;
  for (const auto& [mask, s] : c_) {
    int d = popcount(mask) & 1;
    if (p < 0)
      p = d;
    else if (p != d)
      return -1;
  }
  return p < 0 ? 0 : p;
}

GrassmannElement GrassmannElement::operator-() const {
  GrassmannElement r(n_);
  for (const auto& [m, s] : c_) r.c_[m] = -s;
  return r;
}

GrassmannElement GrassmannElement::operator+(const GrassmannElement& o) const {
  if (n_ != o.n_) throw GrassmannError("generator count mismatch in +");
  GrassmannElement r = *this;
  for (const auto& [m, s] : o.c_) r.set_coeff(m, r.coeff(m) + s);
  return r;
}

GrassmannElement GrassmannElement::operator-(const GrassmannElement& o) const {
  return *this + (-o);
}

GrassmannElement GrassmannElement::operator*(const GrassmannElement& o) const {
  if (n_ != o.n_) throw GrassmannError("generator count mismatch in *");
  GrassmannElement r(n_);
  for (const auto& [ma, sa] : c_)
    for (const auto& [mb, sb] : o.c_) {
      if (ma & mb) continue;
      Scalar term = sa * sb;
      if (inversions(ma, mb) & 1) term = -term;
      r.set_coeff(ma | mb, r.coeff(ma | mb) + term);
    }
  return r;
}

GrassmannElement GrassmannElement::operator*(const Scalar& s) const {
  GrassmannElement r(n_);
  if (s.is_zero()) return r;
  for (const auto& [m, v] : c_) r.c_[m] = v * s;
  return r;
}

GrassmannElement GrassmannElement::star() const {
  GrassmannElement r(n_);
  for (const auto& [m, s] : c_) {
    int k = popcount(m);
    Scalar v = s.conj();
    if ((k * (k - 1) / 2) & 1) v = -v;
    r.c_[m] = v;
  }
  return r;
}

GrassmannElement GrassmannElement::widen(int m) const {
  if (m < n_) throw GrassmannError("widen cannot shrink");
  GrassmannElement r(m);
  r.c_ = c_;
  return r;
}

std::string GrassmannElement::str() const {
  if (c_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, s] : c_) {
    if (!first) os << " + ";
    first = false;
    os << s.str() << " * n[";
    bool f2 = true;
    for (int i = 0; i < n_; ++i)
      if (m & (1u << i)) {
        if (!f2) os << ",";
        f2 = false;
        os << (i + 1);
      }
    os << "]";
  }
  return os.str();
}

GrassmannElement GrassmannElement::parse(int n, const std::string& text) {
  GrassmannElement r(n);
  std::string t;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) t.push_back(c);
  if (t == "0" || t.empty()) return r;
  size_t pos = 0;
  while (pos < t.size()) {
    size_t star = t.find("*n[", pos);
    if (star == std::string::npos) throw GrassmannError("malformed element: " + text);
    Scalar coeff = Scalar::parse(t.substr(pos, star - pos));
    size_t close = t.find(']', star);
    if (close == std::string::npos) throw GrassmannError("malformed element: " + text);
    std::string list = t.substr(star + 3, close - star - 3);
    uint32_t mask = 0;
    size_t p = 0;
    while (p < list.size()) {
      size_t comma = list.find(',', p);
      std::string num = list.substr(p, comma == std::string::npos ? std::string::npos : comma - p);
      int idx = std::stoi(num);
      if (idx < 1 || idx > n) throw GrassmannError("generator index out of range: " + num);
      mask |= 1u << (idx - 1);
      if (comma == std::string::npos) break;
      p = comma + 1;
    }
    r.set_coeff(mask, r.coeff(mask) + coeff);
    pos = close + 1;
    if (pos < t.size()) {
      if (t[pos] != '+') throw GrassmannError("terms must be joined by '+': " + text);
      ++pos;
    }
  }
  return r;
}

GrassmannHom::GrassmannHom(int src_n, int dst_n, std::vector<GrassmannElement> images)
    : src_n_(src_n), dst_n_(dst_n), images_(std::move(images)) {
  if (int(images_.size()) != src_n_) throw GrassmannError("hom needs one image per generator");
  for (const auto& im : images_) {
    if (im.generators() != dst_n_) throw GrassmannError("hom image over wrong algebra");
    if (!im.is_zero() && im.parity() != 1)
      throw GrassmannError("hom images must be odd: " + im.str());
  }
}

GrassmannHom GrassmannHom::identity(int n) {
  std::vector<GrassmannElement> im;
  for (int i = 0; i < n; ++i) im.push_back(GrassmannElement::generator(n, i));
  return GrassmannHom(n, n, std::move(im));
}

GrassmannHom GrassmannHom::kill(int n, uint32_t keep) {
  std::vector<GrassmannElement> im;
  for (int i = 0; i < n; ++i)
    im.push_back((keep >> i) & 1 ? GrassmannElement::generator(n, i) : GrassmannElement(n));
  return GrassmannHom(n, n, std::move(im));
}

GrassmannHom GrassmannHom::scaling(int n, const std::vector<Scalar>& lambda) {
  std::vector<GrassmannElement> im;
  for (int i = 0; i < n; ++i) im.push_back(GrassmannElement::generator(n, i) * lambda[i]);
  return GrassmannHom(n, n, std::move(im));
}

GrassmannHom GrassmannHom::block_up(int n, uint32_t J) {
  std::vector<GrassmannElement> im;
  for (int i = 0; i < n; ++i)
    if ((J >> i) & 1) im.push_back(GrassmannElement::generator(n, i));
  return GrassmannHom(popcount(J), n, std::move(im));
}

GrassmannHom GrassmannHom::block_down(int n, uint32_t J) {
  int k = popcount(J);
  std::vector<GrassmannElement> im(n, GrassmannElement(k));
  int slot = 0;
  for (int i = 0; i < n; ++i)
    if ((J >> i) & 1) im[i] = GrassmannElement::generator(k, slot++);
  return GrassmannHom(n, k, std::move(im));
}

GrassmannHom GrassmannHom::permutation(int n, const std::vector<int>& perm) {
  std::vector<GrassmannElement> im;
  for (int i = 0; i < n; ++i) im.push_back(GrassmannElement::generator(n, perm[i]));
  return GrassmannHom(n, n, std::move(im));
}

GrassmannElement GrassmannHom::apply_basis(uint32_t mask) const {
  GrassmannElement out = GrassmannElement::unit(dst_n_);
  for (int i = 0; i < src_n_; ++i)
    if ((mask >> i) & 1) out = out * images_[i];
  return out;
}

GrassmannElement GrassmannHom::apply(const GrassmannElement& a) const {
  if (a.generators() != src_n_) throw GrassmannError("hom applied to wrong algebra");
  GrassmannElement out(dst_n_);
  for (const auto& [mask, s] : a.coeffs()) out = out + apply_basis(mask) * s;
  return out;
}

GrassmannHom GrassmannHom::compose(const GrassmannHom& inner) const {
  if (inner.dst_n_ != src_n_) throw GrassmannError("composition level mismatch");
  std::vector<GrassmannElement> im;
  for (int i = 0; i < inner.src_n_; ++i) im.push_back(apply(inner.images_[i]));
  return GrassmannHom(inner.src_n_, dst_n_, std::move(im));
}

bool GrassmannHom::operator==(const GrassmannHom& o) const {
  return src_n_ == o.src_n_ && dst_n_ == o.dst_n_ && images_ == o.images_;
}

bool GrassmannHom::is_monomial() const {
  for (const auto& im : images_)
    if (im.coeffs().size() > 1) return false;
  return true;
}

std::string GrassmannHom::str() const {
  std::ostringstream os;
  os << "hom(" << src_n_ << "->" << dst_n_ << ")[";
  for (int i = 0; i < src_n_; ++i) os << (i ? "; " : "") << images_[i].str();
  os << "]";
  return os.str();
}

GrassmannElement apply_combination(const HomCombination& combo, const GrassmannElement& a) {
  if (combo.empty()) throw GrassmannError("empty hom combination");
  GrassmannElement out(combo.front().second.dst());
  for (const auto& [c, h] : combo) out = out + h.apply(a) * c;
  return out;
}

GrassmannLinearMap::GrassmannLinearMap(int src_n, int dst_n)
    : src_n_(src_n), dst_n_(dst_n), images_(size_t(1) << src_n, GrassmannElement(dst_n)) {}

GrassmannLinearMap GrassmannLinearMap::from_hom(const GrassmannHom& h) {
  GrassmannLinearMap L(h.src(), h.dst());
  for (uint32_t m = 0; m < (1u << h.src()); ++m) L.images_[m] = h.apply_basis(m);
  return L;
}

GrassmannLinearMap GrassmannLinearMap::from_combination(int src_n, int dst_n,
                                                        const HomCombination& combo) {
  GrassmannLinearMap L(src_n, dst_n);
  for (uint32_t m = 0; m < (1u << src_n); ++m)
    L.images_[m] = apply_combination(combo, GrassmannElement::basis(src_n, m));
  return L;
}

void GrassmannLinearMap::set_coefficient(uint32_t I, uint32_t J, const Scalar& c) {
  images_[I].set_coeff(J, c);
}

GrassmannElement GrassmannLinearMap::apply(const GrassmannElement& a) const {
  if (a.generators() != src_n_) throw GrassmannError("linear map applied to wrong algebra");
  GrassmannElement out(dst_n_);
  for (const auto& [mask, s] : a.coeffs()) out = out + images_[mask] * s;
  return out;
}

bool GrassmannLinearMap::operator==(const GrassmannLinearMap& o) const {
  return src_n_ == o.src_n_ && dst_n_ == o.dst_n_ && images_ == o.images_;
}

bool matrix_unit_admissible(uint32_t I, uint32_t J) {
  int ni = popcount(I), nj = popcount(J);
  if ((ni + nj) & 1) return false;
  if (nj < ni) return false;
  if (ni == 0 && nj != 0) return false;
  return true;
}

namespace {

// Partition of J into |I| ascending odd-size blocks: the first block takes
// |J| - |I| + 1 elements, the remaining ones are singletons.
std::vector<uint32_t> block_partition(uint32_t J, int parts) {
  std::vector<int> elems;
  for (int b = 0; b < kMaxGenerators; ++b)
    if ((J >> b) & 1) elems.push_back(b);
  std::vector<uint32_t> blocks;
  int first = int(elems.size()) - parts + 1;
  uint32_t b0 = 0;
  for (int k = 0; k < first; ++k) b0 |= 1u << elems[k];
  blocks.push_back(b0);
  for (int k = first; k < int(elems.size()); ++k) blocks.push_back(1u << elems[k]);
  return blocks;
}

}  // namespace

MatrixUnit matrix_unit(int m, int n, uint32_t J, uint32_t I) {
  if (J >> m) throw GrassmannError("J exceeds target generators");
  if (I >> n) throw GrassmannError("I exceeds source generators");
  int ni = popcount(I), nj = popcount(J);
  if ((ni + nj) & 1)
    throw GrassmannError("matrix unit requires |I|+|J| even");
  if (nj < ni) throw GrassmannError("matrix unit requires |J| >= |I|");
  if (ni == 0 && nj != 0)
    throw GrassmannError(
        "matrix unit with I empty and J nonempty is not a combination of unital "
        "homomorphisms (they all fix the image of 1)");

  HomCombination combo;
  if (ni == 0) {
    // E_{empty,empty} = P_empty as a single homomorphism into the target level.
    std::vector<GrassmannElement> zero(n, GrassmannElement(m));
    combo.emplace_back(Scalar(1), GrassmannHom(n, m, std::move(zero)));
  } else {
    std::vector<uint32_t> blocks = block_partition(J, ni);
    std::vector<int> gen_of;  // source generators in I, ascending
    for (int b = 0; b < n; ++b)
      if ((I >> b) & 1) gen_of.push_back(b);
    // E_{JI} = sum_{K subset I} (-1)^{|I \ K|} (chi^{JI} . P_K); each term is a
    // single monomial homomorphism.
    for (uint32_t sub = 0;; sub = (sub - I) & I) {  // iterate subsets of I
      std::vector<GrassmannElement> images(n, GrassmannElement(m));
      for (size_t k = 0; k < gen_of.size(); ++k)
        if ((sub >> gen_of[k]) & 1) images[gen_of[k]] = GrassmannElement::basis(m, blocks[k]);
      Scalar c((popcount(I & ~sub) & 1) ? -1 : 1);
      combo.emplace_back(c, GrassmannHom(n, m, std::move(images)));
      if (sub == I) break;
    }
  }
  MatrixUnit unit{GrassmannLinearMap::from_combination(n, m, combo), std::move(combo)};
  return unit;
}

Decomposition decompose_linear_map(const GrassmannLinearMap& L) {
  Decomposition d;
  for (uint32_t I = 0; I < (1u << L.src()); ++I) {
    for (const auto& [J, c] : L.image(I).coeffs()) {
      if (matrix_unit_admissible(I, J)) continue;
      d.admissible = false;
      d.bad_I = I;
      d.bad_J = J;
      int ni = popcount(I), nj = popcount(J);
      if ((ni + nj) & 1)
        d.reason = "|I|+|J| odd";
      else if (nj < ni)
        d.reason = "|J| < |I|";
      else
        d.reason = "I empty with J nonempty (unital homomorphisms fix 1)";
      return d;
    }
  }
  d.admissible = true;
  for (uint32_t I = 0; I < (1u << L.src()); ++I) {
    for (const auto& [J, c] : L.image(I).coeffs()) {
      MatrixUnit unit = matrix_unit(L.dst(), L.src(), J, I);
      for (auto& [w, h] : unit.combination) d.combination.emplace_back(c * w, h);
    }
  }
  if (d.combination.empty()) {
    std::vector<GrassmannElement> zero(L.src(), GrassmannElement(L.dst()));
    d.combination.emplace_back(Scalar(0), GrassmannHom(L.src(), L.dst(), std::move(zero)));
  }
  return d;
}

}  // namespace fermicas

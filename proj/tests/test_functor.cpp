#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "functor.hpp"
#include "rng.hpp"

using namespace fermicas;

namespace {

bool zero_vec(const Vec& v) {
  for (const auto& s : v)
    if (!s.is_zero()) return false;
  return true;
}

Vec tensor_basis_vec(const StructureConstantAlgebra& L, int dimB, uint32_t mask, int b) {
  Vec v(L.dim());
  v[tensor_index(dimB, mask, b)] = Scalar(1);
  return v;
}

GrassmannElement random_odd(Rng& rng, int n) {
  GrassmannElement e(n);
  for (uint32_t m = 0; m < (1u << n); ++m)
    if ((popcount(m) & 1) && rng.coin()) e.set_coeff(m, rng.small_scalar(2, 2, false));
  return e;
}

GrassmannHom random_hom(Rng& rng, int src, int dst) {
  std::vector<GrassmannElement> im;
  for (int i = 0; i < src; ++i) im.push_back(random_odd(rng, dst));
  return GrassmannHom(src, dst, std::move(im));
}

}  // namespace

TEST_CASE("pi and rho on the tensor model") {
  TensorFunctor F(graded_matrix_algebra_2x2(), 3);
  const int dB = 4;
  for (int n = 1; n <= 3; ++n) {
    const auto& L = F.level(n);
    uint32_t full = (1u << n) - 1;
    CHECK(pi_matrix(F, n, full) == Matrix::identity(L.dim()));
    // pi_K(eta_I (x) b) = [I subset K] eta_I (x) b; rho_K picks I == K exactly.
    for (uint32_t K = 0; K < (1u << n); ++K) {
      Matrix P = pi_matrix(F, n, K);
      Matrix R = rho_matrix(F, n, K);
      for (uint32_t I = 0; I < (1u << n); ++I)
        for (int b = 0; b < dB; ++b) {
          Vec e = tensor_basis_vec(L, dB, I, b);
          Vec pe = P * e;
          Vec re = R * e;
          if ((I & ~K) == 0)
            CHECK(pe == e);
          else
            CHECK(zero_vec(pe));
          if (I == K)
            CHECK(re == e);
          else
            CHECK(zero_vec(re));
        }
    }
  }
}

TEST_CASE("rho system identities (orthogonality, completeness, convolution)") {
  TensorFunctor F(graded_matrix_algebra_2x2(), 2);
  for (const auto& item : check_rho_system(F)) {
    INFO(item.name, ": ", item.witness);
    CHECK(item.pass);
  }
}

TEST_CASE("top component of the tensor model is eta_full (x) B") {
  TensorFunctor F(graded_matrix_algebra_2x2(), 3);
  for (int n = 0; n <= 3; ++n) {
    auto top = top_component(F, n);
    CHECK(int(top.basis.size()) == 4);
    for (const auto& v : top.basis) CHECK(in_top_component(F, n, v));
  }
}

TEST_CASE("dot on the tensor model is the fiber product") {
  auto B = graded_matrix_algebra_2x2();
  TensorFunctor F(B, 4);
  Rng rng(7);
  uint32_t full1 = 0b1;
  for (int t = 0; t < 20; ++t) {
    Vec b1(B.dim()), b2(B.dim());
    for (int i = 0; i < B.dim(); ++i) {
      if (rng.coin()) b1[i] = rng.small_scalar();
      if (rng.coin()) b2[i] = rng.small_scalar();
    }
    // a = eta_1 (x) b1 in A^1, b = eta_1 (x) b2 in A^1.
    const auto& L1 = F.level(1);
    Vec a(L1.dim()), b(L1.dim());
    for (int i = 0; i < B.dim(); ++i) {
      a[tensor_index(B.dim(), full1, i)] = b1[i];
      b[tensor_index(B.dim(), full1, i)] = b2[i];
    }
    Vec prod = dot(F, 1, a, 1, b);
    Vec expect(F.level(2).dim());
    Vec fiber = B.multiply(b1, b2);
    for (int i = 0; i < B.dim(); ++i) expect[tensor_index(B.dim(), 0b11, i)] = fiber[i];
    CHECK(prod == expect);
  }
}

TEST_CASE("dot with the level-0 unit embeds the other factor") {
  TensorFunctor F(graded_matrix_algebra_2x2(), 3);
  auto top1 = top_component(F, 1);
  Vec unit0 = F.level(0).unit();
  for (const auto& x : top1.basis) {
    CHECK(dot(F, 0, unit0, 1, x) == iota_up(F, 1, 1, x));
    // right unit: x . 1 = x as well
    CHECK(dot(F, 1, x, 0, unit0) == x);
  }
}

TEST_CASE("dot is associative on top components, levels <= 2") {
  TensorFunctor F(graded_matrix_algebra_2x2(), 4);
  Rng rng(11);
  auto random_top = [&](int n) {
    auto top = top_component(F, n);
    Vec v(F.level(n).dim());
    for (const auto& x : top.basis)
      if (rng.coin()) {
        Scalar c = rng.small_scalar();
        for (size_t i = 0; i < v.size(); ++i) v[i] += c * x[i];
      }
    return v;
  };
  for (int t = 0; t < 12; ++t) {
    int n = int(rng.uniform(0, 2)), m = int(rng.uniform(0, 2));
    int k = std::min(2, 4 - n - m);
    Vec a = random_top(n), b = random_top(m), c = random_top(k);
    Vec ab_c = dot(F, n + m, dot(F, n, a, m, b), k, c);
    Vec a_bc = dot(F, n, a, m + k, dot(F, m, b, k, c));
    CHECK(ab_c == a_bc);
  }
}

TEST_CASE("dot rejects non-top arguments and level overflow") {
  TensorFunctor F(graded_matrix_algebra_2x2(), 2);
  const auto& L1 = F.level(1);
  Vec not_top(L1.dim());
  not_top[tensor_index(4, 0, 0)] = Scalar(1);  // 1 (x) E00 is not in A^1
  auto top1 = top_component(F, 1);
  CHECK_THROWS_AS(dot(F, 1, not_top, 1, top1.basis[0]), FunctorError);
  CHECK_THROWS_AS(dot(F, 1, top1.basis[0], 2, top_component(F, 2).basis[0]), FunctorError);
}

TEST_CASE("iota embeddings") {
  TensorFunctor F(graded_matrix_algebra_2x2(), 4);
  auto top1 = top_component(F, 1);
  for (const auto& x : top1.basis) {
    CHECK(iota_up(F, 1, 1, x) == x);
    // iota_{2,1}(eta_1 (x) b) = eta_1 eta_2 (x) b
    Vec lifted = iota_up(F, 2, 1, x);
    Vec expect(F.level(2).dim());
    for (int b = 0; b < 4; ++b)
      expect[tensor_index(4, 0b11, b)] = x[tensor_index(4, 0b1, b)];
    CHECK(lifted == expect);
    // composition law
    CHECK(iota_up(F, 4, 2, iota_up(F, 2, 1, x)) == iota_up(F, 4, 1, x));
    CHECK(in_top_component(F, 2, lifted));
  }
}

TEST_CASE("iota agrees with the matrix unit E^{kn} when k = n mod 2") {
  TensorFunctor F(graded_matrix_algebra_2x2(), 3);
  // (n = 0 with k > 0 is excluded: E^{k0}_{full,empty} would need combinations
  // moving the unit, which unital homomorphisms cannot do.)
  for (auto [k, n] : std::vector<std::pair<int, int>>{{3, 1}, {2, 2}, {3, 3}}) {
    MatrixUnit u = matrix_unit(k, n, (1u << k) - 1, (1u << n) - 1);
    Matrix Mu = combination_matrix(F, n, k, u.combination);
    auto top = top_component(F, n);
    for (const auto& x : top.basis) CHECK(iota_up(F, k, n, x) == Mu * x);
  }
}

TEST_CASE("limit elements: normal form, unit, involution") {
  TensorFunctor F(graded_matrix_algebra_2x2(), 3);
  auto top2 = top_component(F, 2);
  // Every level-2 top element of the tensor model comes from level 0.
  for (const auto& x : top2.basis) {
    LimitElement el{2, x};
    LimitElement nf = limit_normalize(F, el);
    CHECK(nf.level == 0);
    CHECK(limit_equal(F, el, nf));
  }
  LimitElement one = limit_unit(F);
  auto top1 = top_component(F, 1);
  LimitElement a{1, top1.basis[0]};
  CHECK(limit_equal(F, limit_product(F, one, a), a));
  CHECK(limit_equal(F, limit_product(F, a, one), a));

  // (iota_1(a) iota_1(b))* = iota_1(b)* iota_1(a)* on random level-1 elements.
  Rng rng(13);
  for (int t = 0; t < 10; ++t) {
    Vec va(F.level(1).dim()), vb(F.level(1).dim());
    for (const auto& x : top1.basis) {
      Scalar ca = rng.small_scalar(), cb = rng.small_scalar();
      for (size_t i = 0; i < va.size(); ++i) {
        va[i] += ca * x[i];
        vb[i] += cb * x[i];
      }
    }
    LimitElement A{1, va}, Bl{1, vb};
    LimitElement lhs = limit_star(F, limit_product(F, A, Bl));
    LimitElement rhs = limit_product(F, limit_star(F, Bl), limit_star(F, A));
    CHECK(limit_equal(F, lhs, rhs));
  }
}

TEST_CASE("sigma: Grassmann part, fiber part, multiplicativity, star, injectivity") {
  auto B = graded_matrix_algebra_2x2();
  TensorFunctor F(B, 3);
  const int n = 2;
  const auto& L = F.level(n);

  // sigma(iota_G(eta_J)) = eta_J (x) 1
  for (uint32_t J = 0; J < (1u << n); ++J) {
    SigmaImage s = sigma(F, n, F.embed(n, GrassmannElement::basis(n, J)));
    REQUIRE(s.count(J) == 1);
    CHECK(int(s.size()) == 1);
    CHECK(limit_equal(F, s[J], limit_unit(F)));
  }
  // sigma(eta_J (x) b) = eta_J (x) (limit image of b)
  for (uint32_t J = 0; J < (1u << n); ++J)
    for (int b = 0; b < B.dim(); ++b) {
      SigmaImage s = sigma(F, n, tensor_basis_vec(L, B.dim(), J, b));
      REQUIRE(s.count(J) == 1);
      CHECK(int(s.size()) == 1);
      CHECK(limit_equal(F, s[J], LimitElement{0, B.basis(b)}));
    }
  // homomorphism property on random pairs
  Rng rng(17);
  for (int t = 0; t < 8; ++t) {
    Vec a(L.dim()), b(L.dim());
    for (int i = 0; i < L.dim(); ++i) {
      if (rng.coin()) a[i] = rng.small_scalar(1, 1);
      if (rng.coin()) b[i] = rng.small_scalar(1, 1);
    }
    SigmaImage sa = sigma(F, n, a), sb = sigma(F, n, b);
    SigmaImage sab = sigma(F, n, L.multiply(a, b));
    CHECK(sigma_equal(F, sab, sigma_product(F, n, sa, sb)));
    SigmaImage sastar = sigma(F, n, L.star(a));
    CHECK(sigma_equal(F, sastar, sigma_star(F, n, sa)));
  }
  // injectivity: stacked coefficient map has full rank
  {
    int rows = 0;
    std::vector<Matrix> blocks;
    for (uint32_t J = 0; J < (1u << n); ++J) {
      Matrix M = F.hom_matrix(GrassmannHom::block_down(n, J)) * rho_matrix(F, n, J);
      rows += M.rows();
      blocks.push_back(M);
    }
    Matrix total(rows, L.dim());
    int r0 = 0;
    for (const auto& M : blocks) {
      for (int i = 0; i < M.rows(); ++i)
        for (int j = 0; j < M.cols(); ++j) total.at(r0 + i, j) = M.at(i, j);
      r0 += M.rows();
    }
    CHECK(rank(total) == L.dim());
  }
}

TEST_CASE("sigma naturality square for seeded homs") {
  TensorFunctor F(graded_matrix_algebra_2x2(), 3);
  Rng rng(19);
  for (int t = 0; t < 10; ++t) {
    auto chi = random_hom(rng, 2, 3);
    const auto& L2 = F.level(2);
    Vec a(L2.dim());
    for (int i = 0; i < L2.dim(); ++i)
      if (rng.coin()) a[i] = rng.small_scalar(1, 1);
    SigmaImage lhs = sigma(F, 3, F.hom_matrix(chi) * a);
    SigmaImage rhs = sigma_push(F, chi, sigma(F, 2, a));
    CHECK(sigma_equal(F, lhs, rhs));
  }
}

TEST_CASE("universal tau: identity cone gives a graded *-isomorphism") {
  for (auto B : {graded_matrix_algebra_2x2(), grassmann_algebra(2)}) {
    TensorFunctor F(B, 3);
    PrimedCone cone = inclusion_cone(F);
    TauResult tau = universal_tau(F, cone);
    CHECK(tau.consistent);
    CHECK(tau.homomorphism);
    CHECK(tau.natural);
    CHECK(tau.determined);
    // Bijectivity onto B: the level-0 images span B exactly.
    Matrix M(B.dim(), int(tau.images[0].size()));
    for (size_t j = 0; j < tau.images[0].size(); ++j)
      for (int i = 0; i < B.dim(); ++i) M.at(i, int(j)) = tau.images[0][j][i];
    CHECK(rank(M) == B.dim());
  }
}

TEST_CASE("universal tau: diagonal cone is determined but not surjective") {
  auto B = graded_matrix_algebra_2x2();
  TensorFunctor F(B, 2);
  auto BB = direct_sum(B, B);
  PrimedCone cone;
  cone.target = &BB;
  for (int n = 0; n <= 2; ++n) {
    // sigma'_n = (id (x) diagonal) . sigma_canonical: coordinates (mask, t)
    // with t running over B (+) B.
    Matrix M((1 << n) * BB.dim(), F.level(n).dim());
    for (uint32_t mask = 0; mask < (1u << n); ++mask)
      for (int b = 0; b < B.dim(); ++b) {
        int col = tensor_index(B.dim(), mask, b);
        M.at(int(mask) * BB.dim() + b, col) = Scalar(1);
        M.at(int(mask) * BB.dim() + B.dim() + b, col) = Scalar(1);
      }
    cone.maps.push_back(M);
  }
  TauResult tau = universal_tau(F, cone);
  CHECK(tau.consistent);
  CHECK(tau.homomorphism);
  CHECK(tau.natural);
  // Not surjective: level-0 images span a 4-dim diagonal inside the 8-dim sum.
  Matrix M(BB.dim(), int(tau.images[0].size()));
  for (size_t j = 0; j < tau.images[0].size(); ++j)
    for (int i = 0; i < BB.dim(); ++i) M.at(i, int(j)) = tau.images[0][j][i];
  CHECK(rank(M) == B.dim());
}

TEST_CASE("validator accepts the tensor model") {
  TensorFunctor F(graded_matrix_algebra_2x2(), 2);
  for (const auto& item : validate_functor(F, 42, 12)) {
    INFO(item.name, ": ", item.witness);
    CHECK(item.pass);
  }
}

TEST_CASE("validator rejects the square non-example via linearity") {
  SquareFunctor F(2);
  bool linearity_failed = false;
  for (const auto& item : validate_functor(F, 42, 12)) {
    if (item.name == "linearity-over-hom-combinations") {
      linearity_failed = !item.pass;
      CHECK(!item.witness.empty());
    } else {
      INFO(item.name, ": ", item.witness);
      CHECK(item.pass);
    }
  }
  CHECK(linearity_failed);
}

TEST_CASE("json functor round-trip reproduces the tensor model") {
  TensorFunctor F(graded_matrix_algebra_2x2(), 3);
  JsonFunctor J = JsonFunctor::from_json(JsonFunctor::to_json(F));
  CHECK(J.max_level() == 3);
  Rng rng(23);
  for (int n = 0; n <= 3; ++n) {
    GrassmannElement g(n);
    for (uint32_t m = 0; m < (1u << n); ++m)
      if (rng.coin()) g.set_coeff(m, rng.small_scalar());
    CHECK(J.embed(n, g) == F.embed(n, g));
  }
  for (int t = 0; t < 15; ++t) {
    int a = int(rng.uniform(0, 3)), b = int(rng.uniform(0, 3));
    auto chi = random_hom(rng, a, b);
    CHECK(J.hom_matrix(chi) == F.hom_matrix(chi));
  }
  // structured homs exercise the monomial routing directly
  CHECK(J.hom_matrix(GrassmannHom::block_up(3, 0b101)) ==
        F.hom_matrix(GrassmannHom::block_up(3, 0b101)));
  CHECK(J.hom_matrix(GrassmannHom::block_down(3, 0b110)) ==
        F.hom_matrix(GrassmannHom::block_down(3, 0b110)));
  CHECK(J.hom_matrix(GrassmannHom::kill(2, 0b01)) == F.hom_matrix(GrassmannHom::kill(2, 0b01)));
  GrassmannHom expander(1, 3, {GrassmannElement::basis(3, 0b111)});
  CHECK(J.hom_matrix(expander) == F.hom_matrix(expander));
}

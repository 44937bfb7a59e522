#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "functional.hpp"
#include "rng.hpp"

using namespace fermicas;

namespace {

Vec basis_vec(int d, int i) {
  Vec v(d);
  v[i] = Scalar(1);
  return v;
}

Vec random_vec(Rng& rng, int d) {
  Vec v(d);
  for (int i = 0; i < d; ++i)
    if (rng.coin()) v[i] = rng.small_scalar(2, 2);
  return v;
}

FermionicFunctional random_functional(Rng& rng, const ConfigurationSpace& sp, int maxdeg,
                                      int entries = 4) {
  FermionicFunctional F(sp, maxdeg);
  for (int e = 0; e < entries; ++e) {
    int n = int(rng.uniform(0, maxdeg));
    uint32_t mask = 0;
    while (popcount(mask) != n) mask = uint32_t(rng.uniform(0, (1 << sp.dim()) - 1));
    F.set_component(n, mask, rng.small_scalar());
  }
  return F;
}

}  // namespace

TEST_CASE("evaluation is alternating and matches antisymmetric matrices") {
  ConfigurationSpace sp(4, 1);
  FermionicFunctional F(sp, 2);
  // F_2 given by an antisymmetric matrix a_{ij} via its upper entries.
  Matrix a(4, 4);
  Rng rng(3);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      a.at(i, j) = rng.small_scalar();
      a.at(j, i) = -a.at(i, j);
      F.set_component(2, (1u << i) | (1u << j), a.at(i, j));
    }
  for (int t = 0; t < 20; ++t) {
    Vec h1 = random_vec(rng, 4), h2 = random_vec(rng, 4);
    Scalar direct;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) direct += a.at(i, j) * h1[i] * h2[j];
    CHECK(F.evaluate({h1, h2}) == direct);
    CHECK(F.evaluate({h1, h1}) == Scalar(0));
    CHECK(F.evaluate({h2, h1}) == -F.evaluate({h1, h2}));
  }
  // degrees above the stored maximum evaluate to zero
  CHECK(F.evaluate({basis_vec(4, 0), basis_vec(4, 1), basis_vec(4, 2)}) == Scalar(0));
}

TEST_CASE("pointwise product: degree-0 and pure-degree-1 cases") {
  ConfigurationSpace sp(3, 1);
  Rng rng(9);
  FermionicFunctional F(sp, 1), G(sp, 1);
  F.set_component(0, 0, Scalar(2));
  G.set_component(0, 0, Scalar(Rational(1, 3)));
  for (int i = 0; i < 3; ++i) {
    F.set_component(1, 1u << i, rng.small_scalar());
    G.set_component(1, 1u << i, rng.small_scalar());
  }
  auto P = pointwise_product(F, G);
  CHECK(P.component(0, 0) == F.component(0, 0) * G.component(0, 0));
  for (int t = 0; t < 10; ++t) {
    Vec v = random_vec(rng, 3), w = random_vec(rng, 3);
    // (F.G)_2(v,w) includes F1(v)G1(w) - F1(w)G1(v) plus F0 G2 + F2 G0 terms (zero here)
    Scalar f1v = F.evaluate_component(1, {v}), f1w = F.evaluate_component(1, {w});
    Scalar g1v = G.evaluate_component(1, {v}), g1w = G.evaluate_component(1, {w});
    Scalar expect = f1v * g1w - f1w * g1v + F.component(0, 0) * G.evaluate_component(2, {v, w}) +
                    G.component(0, 0) * F.evaluate_component(2, {v, w});
    CHECK(P.evaluate_component(2, {v, w}) == expect);
  }
  // product with the constant functional 1
  auto One = FermionicFunctional::constant(sp, Scalar(1));
  CHECK(pointwise_product(F, One) == F);
  CHECK(pointwise_product(One, F) == F);
}

TEST_CASE("pointwise product: associative and graded-commutative, exhaustive small") {
  ConfigurationSpace sp(2, 2);  // dim 4
  Rng rng(21);
  for (int trial = 0; trial < 15; ++trial) {
    auto F = random_functional(rng, sp, 3);
    auto G = random_functional(rng, sp, 3);
    auto H = random_functional(rng, sp, 2);
    CHECK(pointwise_product(pointwise_product(F, G), H) ==
          pointwise_product(F, pointwise_product(G, H)));
  }
  // graded commutativity on pure degrees
  for (int df = 0; df <= 3; ++df)
    for (int dg = 0; dg <= 3; ++dg) {
      FermionicFunctional F(sp, df), G(sp, dg);
      uint32_t mf = (1u << df) - 1;             // first df indices
      uint32_t mg = ((1u << dg) - 1) << (4 - dg);  // last dg indices
      F.set_component(df, mf, rng.small_scalar());
      G.set_component(dg, mg, rng.small_scalar());
      Scalar sign((df & 1) && (dg & 1) ? -1 : 1);
      CHECK(pointwise_product(F, G) == pointwise_product(G, F) * sign);
    }
}

TEST_CASE("Leibniz rule for the left derivative over the pointwise product") {
  ConfigurationSpace sp(2, 2);
  Rng rng(33);
  for (int trial = 0; trial < 10; ++trial) {
    auto F = random_functional(rng, sp, 2);
    auto G = random_functional(rng, sp, 2);
    auto P = pointwise_product(F, G);
    // Evaluate d/d(hdir) at a wedge of basis vectors h1 ^ h2 via
    // P(hdir ^ h1 ^ h2) = sum over splits with graded signs; spot-check the
    // contraction form: <hdir, P^(1)(h1^h2)> = F(hdir^h1^h2-part) expansion.
    Vec hdir = random_vec(rng, 4);
    Vec h1 = random_vec(rng, 4), h2 = random_vec(rng, 4);
    Scalar lhs = left_derivative(P, hdir, {h1, h2}).pairing;
    // Independent evaluation of P on the full wedge.
    CHECK(lhs == P.evaluate({hdir, h1, h2}));
  }
}

TEST_CASE("support") {
  ConfigurationSpace sp(4, 2);
  FermionicFunctional Z(sp, 2);
  CHECK(support(Z).empty());

  FermionicFunctional F(sp, 1);
  F.set_component(1, 1u << sp.index_of(2, 1), Scalar(1));
  CHECK(support(F) == std::set<int>{2});

  // F2(v,w) = v(x0)w(x1) antisymmetrized, x0=0, x1=3
  FermionicFunctional G(sp, 2);
  G.set_component(2, (1u << sp.index_of(0, 0)) | (1u << sp.index_of(3, 0)), Scalar(1));
  CHECK(support(G) == std::set<int>({0, 3}));
}

TEST_CASE("additivity: diagonal (local) functionals pass, bilocal ones fail") {
  ConfigurationSpace sp(4, 2);  // dim 8, rank 2 so the diagonal admits degree 2
  FermionicFunctional local(sp, 2);
  Rng rng(55);
  for (int p = 0; p < 4; ++p) {
    local.set_component(1, 1u << sp.index_of(p, 0), rng.small_scalar());
    local.set_component(2, (1u << sp.index_of(p, 0)) | (1u << sp.index_of(p, 1)),
                        rng.small_scalar());
  }
  auto v = additivity_check(local, 40, 7);
  CHECK(v.additive);

  FermionicFunctional bilocal(sp, 2);
  bilocal.set_component(2, (1u << sp.index_of(0, 0)) | (1u << sp.index_of(1, 0)), Scalar(1));
  auto w = additivity_check(bilocal, 40, 7);
  CHECK_FALSE(w.additive);
  CHECK(!w.witness.empty());

  CHECK(additivity_check(FermionicFunctional(sp, 2), 10, 7).additive);
}

TEST_CASE("left derivative cases") {
  ConfigurationSpace sp(2, 1);
  FermionicFunctional F0(sp, 0);
  F0.set_component(0, 0, Scalar(5));
  Rng rng(13);
  Vec hdir = random_vec(rng, 2);
  CHECK(left_derivative(F0, hdir, {}).pairing == Scalar(0));

  FermionicFunctional F1(sp, 1);
  F1.set_component(1, 0b01, Scalar(2));
  F1.set_component(1, 0b10, Scalar::i());
  auto d = left_derivative(F1, hdir, {});
  CHECK(d.pairing == F1.evaluate_component(1, {hdir}));  // linear case, h-independent
  CHECK(d.gradient[0] == Scalar(2));
  CHECK(d.gradient[1] == Scalar::i());
}

TEST_CASE("two-point discretized quadratic form derivative") {
  // F(h1 ^ h2) = a*(h1(0)h2(1) - h1(1)h2(0)) models the antisymmetrized
  // first-example form on a two-point discretization; the derivative pairing
  // reproduces the hand expansion <hdir,F'(h)> = a*(hdir(0)h(1) - hdir(1)h(0)).
  ConfigurationSpace sp(2, 1);
  Scalar a(Rational(3, 7));
  FermionicFunctional F(sp, 2);
  F.set_component(2, 0b11, a);
  Rng rng(71);
  for (int t = 0; t < 10; ++t) {
    Vec h = random_vec(rng, 2), hd = random_vec(rng, 2);
    Scalar expect = a * (hd[0] * h[1] - hd[1] * h[0]);
    CHECK(left_derivative(F, hd, {h}).pairing == expect);
  }
}

TEST_CASE("extend_and_evaluate examples") {
  ConfigurationSpace sp(2, 1);
  Rng rng(81);

  // pure degree 1: F_G(exp(v eta)) = F0? no: F1(v) eta
  FermionicFunctional F1(sp, 1);
  F1.set_component(1, 0b01, Scalar(3));
  Vec v = random_vec(rng, 2);
  auto g1 = extend_and_evaluate(F1, {{v, GrassmannElement::generator(1, 0)}});
  CHECK(g1 == GrassmannElement::generator(1, 0) * F1.evaluate_component(1, {v}));

  // pure degree 2 with two terms: F(v1 ^ v2) eta2 eta1
  FermionicFunctional F2(sp, 2);
  F2.set_component(2, 0b11, Scalar(Rational(1, 2)));
  Vec v1 = random_vec(rng, 2), v2 = random_vec(rng, 2);
  auto e1 = GrassmannElement::generator(2, 0), e2 = GrassmannElement::generator(2, 1);
  auto g2 = extend_and_evaluate(F2, {{v1, e1}, {v2, e2}});
  CHECK(g2 == e2 * e1 * F2.evaluate_component(2, {v1, v2}));

  // F0 only
  FermionicFunctional F0(sp, 0);
  F0.set_component(0, 0, Scalar(7));
  CHECK(extend_and_evaluate(F0, {{v, e1}}) == GrassmannElement::unit(2) * Scalar(7));

  // even parameter rejected
  auto even = GrassmannElement::basis(2, 0b11);
  CHECK_THROWS_AS(extend_and_evaluate(F1, {{v, even}}), FunctionalError);
}

TEST_CASE("naturality of the extension under parameter homomorphisms") {
  // Applying a hom to the parameters before or after evaluation agrees.
  ConfigurationSpace sp(2, 2);
  Rng rng(91);
  auto F = random_functional(rng, sp, 2);
  for (int trial = 0; trial < 10; ++trial) {
    Vec v1 = random_vec(rng, 4), v2 = random_vec(rng, 4);
    // chi: Lambda^2 -> Lambda^3 with odd monomial images keeps parameters odd.
    GrassmannElement im1 = GrassmannElement::generator(3, int(rng.uniform(0, 2)));
    GrassmannElement im2 = GrassmannElement::basis(3, 0b111);
    GrassmannHom chi(2, 3, {im1, im2});
    auto e1 = GrassmannElement::generator(2, 0), e2 = GrassmannElement::generator(2, 1);
    auto before = chi.apply(extend_and_evaluate(F, {{v1, e1}, {v2, e2}}));
    auto after = extend_and_evaluate(F, {{v1, chi.apply(e1)}, {v2, chi.apply(e2)}});
    CHECK(before == after);
  }
}

TEST_CASE("shift: zero shift is identity; components match the contraction formula") {
  ConfigurationSpace sp(2, 2);
  Rng rng(101);
  auto F = random_functional(rng, sp, 3, 6);

  auto S0 = shift(F, {}, 1);
  for (int n = 0; n <= F.max_degree(); ++n)
    for (uint32_t m = 0; m < 16u; ++m)
      if (popcount(m) == n)
        CHECK(S0.component(n, m) == GrassmannElement::unit(1) * F.component(n, m));

  // F pure degree 1, w = w1 theta1: new degree-0 component F1(w1) theta1.
  FermionicFunctional F1(sp, 1);
  for (int i = 0; i < 4; ++i) F1.set_component(1, 1u << i, rng.small_scalar());
  Vec w1 = random_vec(rng, 4);
  auto theta = GrassmannElement::generator(1, 0);
  auto Sh = shift(F1, {{w1, theta}}, 1);
  CHECK(Sh.component(0, 0) == theta * F1.evaluate_component(1, {w1}));

  // F pure degree 2: F^w_1(v) = F2(v, w1) theta1.
  FermionicFunctional F2(sp, 2);
  for (uint32_t m = 0; m < 16u; ++m)
    if (popcount(m) == 2) F2.set_component(2, m, rng.small_scalar());
  auto Sh2 = shift(F2, {{w1, theta}}, 1);
  for (int a = 0; a < 4; ++a) {
    Vec ea = basis_vec(4, a);
    CHECK(Sh2.component(1, 1u << a) == theta * F2.evaluate_component(2, {ea, w1}));
  }
}

TEST_CASE("double shift composes in the joint algebra") {
  ConfigurationSpace sp(2, 2);
  Rng rng(111);
  auto F = random_functional(rng, sp, 3, 6);
  // Joint algebra Lambda^2: theta1 = gen 0 for the first shift, theta2 = gen 1.
  Vec w1 = random_vec(rng, 4), w2 = random_vec(rng, 4);
  auto t1 = GrassmannElement::generator(2, 0);
  auto t2 = GrassmannElement::generator(2, 1);
  auto once = shift(F, {{w1, t1}, {w2, t2}}, 2);

  // Shift twice: by w1 then by w2 (components must agree exactly).
  auto first = shift(F, {{w1, t1}}, 2);
  GrassmannValuedFunctional second(F.space(), F.max_degree(), 2);
  for (int n = 0; n <= F.max_degree(); ++n)
    for (uint32_t m = 0; m < 16u; ++m) {
      if (popcount(m) != n) continue;
      // F^{w1}^{w2}_n(e_mask) = sum_k contributions of w2 against F^{w1}.
      std::vector<Vec> base;
      for (int b = 0; b < 4; ++b)
        if ((m >> b) & 1) base.push_back(basis_vec(4, b));
      GrassmannElement acc(2);
      // k = 0 term
      acc = acc + first.component(n, m);
      // k = 1 term: F^{w1}_{n+1}(e..., w2) * t2
      if (n + 1 <= F.max_degree()) {
        std::vector<Vec> args = base;
        args.push_back(w2);
        acc = acc + first.evaluate_component(n + 1, args) * t2;
      }
      second.set_component(n, m, acc);
    }
  CHECK(once == second);
}

TEST_CASE("shift then extend agrees with extension in the joint algebra") {
  ConfigurationSpace sp(2, 2);
  Rng rng(121);
  auto F = random_functional(rng, sp, 4, 8);
  // |I| = 2 etas, |J| = 2 thetas in a joint Lambda^4: etas are gens 0,1; thetas gens 2,3.
  Vec v1 = random_vec(rng, 4), v2 = random_vec(rng, 4);
  Vec w1 = random_vec(rng, 4), w2 = random_vec(rng, 4);
  auto e1 = GrassmannElement::generator(4, 0), e2 = GrassmannElement::generator(4, 1);
  auto t1 = GrassmannElement::generator(4, 2), t2 = GrassmannElement::generator(4, 3);

  auto joint = extend_and_evaluate(F, {{v1, e1}, {v2, e2}, {w1, t1}, {w2, t2}});
  auto shifted = shift(F, {{w1, t1}, {w2, t2}}, 4);
  auto via_shift = shifted.extend_and_evaluate({{v1, e1}, {v2, e2}});
  CHECK(joint == via_shift);
}

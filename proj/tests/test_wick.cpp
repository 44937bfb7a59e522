#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "car_algebra.hpp"
#include "car_model.hpp"
#include "rng.hpp"
#include "wick.hpp"

using namespace fermicas;

namespace {

struct Fixture {
  CausalDiracModel model;
  PropagatorPack pack;
  Fixture(const char* spec = "lattice:T=3,L=1,m=1/2") : model(model_from_spec(spec)) {
    pack = propagator_pack(model);
  }
  Vec window_section(Rng& rng) const {
    Vec v(model.dim());
    for (int a : model.test_indices())
      if (rng.coin()) v[a] = rng.small_scalar(2, 2);
    return v;
  }
};

WickElement random_even(Rng& rng, const Fixture& fx, int params) {
  WickElement e(params, fx.model.dim());
  auto W = fx.model.test_indices();
  for (int t = 0; t < 3; ++t) {
    int a = W[int(rng.uniform(0, int(W.size()) - 1))];
    int b = W[int(rng.uniform(0, int(W.size()) - 1))];
    e.add_term((1ull << (16 + a)) | (1ull << (40 + b)), Poly(rng.small_scalar(2, 1)));
  }
  return e;
}

}  // namespace

TEST_CASE("propagator pack identities") {
  Fixture fx("lattice:T=4,L=2,m=1/2");
  const auto& p = fx.pack;
  Matrix S = fx.model.S();
  CHECK((p.S_plus + p.S_minus) * (-Scalar::i()) == S);
  // right identities on the window: S_pm D = 0, S_F D = i on tests
  Matrix SpD = p.S_plus * p.D;
  Matrix SmD = p.S_minus * p.D;
  Matrix SFD = p.S_F * p.D;
  for (int w : p.window)
    for (int i = 0; i < fx.model.dim(); ++i) {
      CHECK(SpD.at(i, w).is_zero());
      CHECK(SmD.at(i, w).is_zero());
      CHECK(SFD.at(i, w) == (i == w ? Scalar::i() : Scalar(0)));
    }
}

TEST_CASE("wedge and derivative basics") {
  Fixture fx;
  const int d = fx.model.dim();
  auto pb = WickElement::psibar(1, d, 0);
  auto ps = WickElement::psi(1, d, 1);
  CHECK(pb * ps == pb * ps);
  CHECK((pb * pb).is_zero());
  CHECK(pb * ps + ps * pb == WickElement::zero(1, d));
  // left and right derivatives differ by the position parity
  auto m2 = pb * ps;  // psibar_0 ^ psi_1
  auto l = left_derivative(m2, 1ull << 16);
  auto r = right_derivative(m2, 1ull << 16);
  CHECK(l == ps);
  CHECK(r == ps * Scalar(-1));
}

TEST_CASE("star product unital, associative; psi-psi has no contraction") {
  Fixture fx;
  Rng rng(3);
  auto one = WickElement::unit(2, fx.model.dim());
  for (int t = 0; t < 8; ++t) {
    auto A = random_even(rng, fx, 2);
    CHECK(product(ProductKind::Star, A, one, fx.pack, -1) == A);
    CHECK(product(ProductKind::StarF, one, A, fx.pack, -1) == A);
  }
  // psi_a star psi_b = psi_a wedge psi_b (no psi-psi channel)
  auto pa = WickElement::psi(0, fx.model.dim(), 0);
  auto pb = WickElement::psi(0, fx.model.dim(), 1);
  CHECK(product(ProductKind::Star, pa, pb, fx.pack, -1) == pa * pb);
}

TEST_CASE("lowest-order contraction against the hand formula") {
  // For linear fields the n+k=1 terms give
  //   psibar(u)-part of A against psi-part of B and vice versa, weighted by
  //   the channel kernels; checked against an explicit hand expansion on the
  //   smallest model.
  Fixture fx;
  Rng rng(5);
  const int d = fx.model.dim();
  Matrix Ginv = inverse(fx.model.Gamma);
  Matrix Kplus = (fx.pack.S_plus * Ginv) * Scalar(-1);
  Matrix Kminus = ((fx.pack.S_minus * Ginv) * Scalar(-1)).transpose();
  for (int t = 0; t < 6; ++t) {
    int a = int(rng.uniform(0, d - 1)), b = int(rng.uniform(0, d - 1));
    auto A = WickElement::psi(0, d, a);
    auto B = WickElement::psibar(0, d, b);
    auto AB = product(ProductKind::Star, A, B, fx.pack, -1);
    WickElement expect = A * B;
    expect.add_term(0, Poly::hbar() * Kplus.at(a, b));
    CHECK(AB == expect);
    auto BA = product(ProductKind::Star, B, A, fx.pack, -1);
    WickElement expect2 = B * A;
    expect2.add_term(0, Poly::hbar() * Kminus.at(b, a));
    CHECK(BA == expect2);
  }
}

TEST_CASE("time-ordered product commutes on even elements; hbar = 0 collapses to wedge") {
  Fixture fx;
  Rng rng(7);
  for (int t = 0; t < 8; ++t) {
    auto A = random_even(rng, fx, 2);
    auto B = random_even(rng, fx, 2);
    auto ab = product(ProductKind::StarF, A, B, fx.pack, -1);
    auto ba = product(ProductKind::StarF, B, A, fx.pack, -1);
    CHECK(ab == ba);
    CHECK(product(ProductKind::Star, A, B, fx.pack, -1).set_hbar(Scalar(0)) ==
          (A * B).set_hbar(Scalar(0)));
  }
}

TEST_CASE("star anticommutator of doubled fields reproduces the Gram data") {
  Fixture fx("lattice:T=3,L=2,m=1/2");
  Rng rng(9);
  for (int t = 0; t < 8; ++t) {
    Vec s1 = fx.window_section(rng), s2 = fx.window_section(rng);
    auto D1 = doubled_field(fx.pack, 0, s1);
    auto D2 = doubled_field(fx.pack, 0, s2);
    auto anti = product(ProductKind::Star, D1, D2, fx.pack, -1) +
                product(ProductKind::Star, D2, D1, fx.pack, -1);
    Matrix G = fx.model.gram();
    Scalar expect = sandwich(s2, G, s1) + sandwich(s1, G, s2);
    WickElement want(0, fx.model.dim());
    want.add_term(0, Poly::hbar() * expect);
    CHECK(anti == want);
  }
}

TEST_CASE("exponential edge cases") {
  Fixture fx;
  const int d = fx.model.dim();
  // exp_wedge(eta1 eta2 c) = 1 + eta1 eta2 c
  WickElement x(2, d);
  x.add_term(0b11, Poly(Scalar(Rational(2, 3))));
  auto e = exponential(ProductKind::Wedge, x, fx.pack, -1);
  WickElement expect = WickElement::unit(2, d);
  expect.add_term(0b11, Poly(Scalar(Rational(2, 3))));
  CHECK(e == expect);
  // exp(0) = 1
  CHECK(exponential(ProductKind::StarF, WickElement::zero(2, d), fx.pack, -1) ==
        WickElement::unit(2, d));
  // non-nilpotent scalar part rejected
  WickElement bad = WickElement::unit(2, d);
  CHECK_THROWS_AS(exponential(ProductKind::StarF, bad, fx.pack, -1), WickError);
  // odd argument rejected
  CHECK_THROWS_AS(exponential(ProductKind::Wedge, WickElement::psi(0, d, 0), fx.pack, -1),
                  WickError);
}

TEST_CASE("lagrangian evaluates to <fh, D fh>_G and delta_L matches the shift route") {
  Fixture fx;
  Rng rng(11);
  const int d = fx.model.dim();
  auto L = lagrangian(fx.pack, 2);
  for (int t = 0; t < 6; ++t) {
    std::vector<ParamSection> h = {{0, fx.window_section(rng)}, {1, fx.window_section(rng)}};
    // evaluation on exp(sum eta_i h^i)
    WickElement lhs = evaluate_on(L, fx.pack, h);
    std::vector<ParamSection> Dh;
    for (const auto& term : h) Dh.push_back({term.param, fx.pack.D * term.section});
    WickElement rhs = pairing_G(fx.pack, 2, h, Dh);
    CHECK(lhs == rhs);
    // delta_h L from the shift of L agrees with D(Dh) + <h, Dh>_G ...
    WickElement direct = delta_L(fx.pack, 2, h);
    WickElement shifted = shift_fields(L, fx.pack, h, false) - L;
    CHECK(shifted == direct);
    // ... and vanishes at h = 0
    CHECK(delta_L(fx.pack, 2, {}).is_zero());
  }
}

TEST_CASE("euler derivative: of a scalar, of delta_L, and the aux flow identities") {
  Fixture fx;
  Rng rng(13);
  const int d = fx.model.dim();
  std::vector<ParamSection> h = {{0, fx.window_section(rng)}, {1, fx.window_section(rng)}};
  // scalar -> 0
  WickElement c = WickElement::unit(2, d) * Scalar(5);
  CHECK(euler_derivative(c, fx.pack, h).is_zero());
  // (eps delta_{u0 h} L)(h) = 2 u0 <h, D h>_G at sample flow values
  std::vector<ParamSection> Dh;
  for (const auto& term : h) Dh.push_back({term.param, fx.pack.D * term.section});
  WickElement dL_u = doubled_field(fx.pack, 2, Dh) * Poly::u() +
                     pairing_G(fx.pack, 2, h, Dh) * (Poly::u() * Poly::u());
  for (int pt = 0; pt <= 3; ++pt) {
    Scalar u0(Rational(pt, 3));
    WickElement eps = euler_derivative(dL_u.set_u(u0), fx.pack, h);
    WickElement expect = pairing_G(fx.pack, 2, h, Dh) * (Scalar(2) * u0);
    CHECK(eps == expect);
  }
  // d/du F^{uh} = (eps F^{uh})(h) checked pointwise in u for a quadratic F
  WickElement F = random_even(rng, fx, 2);
  WickElement Fu = shift_fields(F, fx.pack, h, true);
  for (int pt = 0; pt <= 3; ++pt) {
    Scalar u0(Rational(pt, 2));
    WickElement lhs = Fu.d_du().set_u(u0);
    WickElement rhs = euler_derivative(Fu.set_u(u0), fx.pack, h);
    CHECK(lhs == rhs);
  }
}

TEST_CASE("time-ordered exponential of a linear shift collapses to wedge times a phase") {
  Fixture fx("lattice:T=3,L=2,m=1/2");
  Rng rng(17);
  for (int t = 0; t < 5; ++t) {
    std::vector<ParamSection> h;
    int n = int(rng.uniform(1, 3));
    for (int i = 0; i < n; ++i) h.push_back({i, fx.window_section(rng)});
    auto c = f1_identity_check(fx.pack, h);
    INFO(c.witness);
    CHECK(c.pass);
  }
}

TEST_CASE("smatrix basics and the shifted-lagrangian case") {
  Fixture fx;
  Rng rng(19);
  // S(0) = 1
  CHECK(smatrix(WickElement::zero(2, fx.model.dim()), fx.pack, 3) ==
        WickElement::unit(2, fx.model.dim()));
  // S(delta_h L) = exp_wedge(i D(Dh)) with hbar evaluated (no loop diagrams)
  std::vector<ParamSection> h = {{0, fx.window_section(rng)}, {1, fx.window_section(rng)}};
  WickElement dL = delta_L(fx.pack, 2, h);
  WickElement S = exponential(ProductKind::StarF, dL * Scalar::i(), fx.pack, -1);
  std::vector<ParamSection> Dh;
  for (const auto& term : h) Dh.push_back({term.param, fx.pack.D * term.section});
  WickElement expect =
      exponential(ProductKind::Wedge, doubled_field(fx.pack, 2, Dh) * Scalar::i(), fx.pack, -1);
  CHECK(S.set_hbar(Scalar(1)) == expect.set_hbar(Scalar(1)));
}

TEST_CASE("current-type bilinears multiply with cross terms and a finite loop term") {
  Fixture fx("lattice:T=3,L=2,m=1/2");
  auto j = interaction_preset(fx.pack, 0, "current");
  auto jj = product(ProductKind::StarF, j, j, fx.pack, -1);
  // the hbar^2 part is the finite loop scalar; on a finite model it exists
  bool has_loop = false;
  for (const auto& [mask, poly] : jj.terms())
    for (const auto& [k, v] : poly.coeffs())
      if (mask == 0 && k[0] == 2) has_loop = true;
  CHECK(has_loop);
  CHECK(jj == product(ProductKind::StarF, j, j, fx.pack, -1));
}

TEST_CASE("retarded field edge cases") {
  Fixture fx;
  Rng rng(23);
  auto H = random_even(rng, fx, 2);
  // A = 0: R(1, H) = H
  CHECK(retarded_field(WickElement::zero(2, fx.model.dim()), H, fx.pack, 3) ==
        H.truncate_lambda(3));
  // scalar H: R = H
  WickElement scalar(2, fx.model.dim());
  scalar.add_term(0b11, Poly(Scalar(Rational(3, 4))));
  auto A = interaction_preset(fx.pack, 2, "quartic");
  CHECK(retarded_field(A, scalar, fx.pack, 2) == scalar);
}

TEST_CASE("retarded field matches an independent first-order expansion") {
  // R(e^A, H) = H + i lambda (A starF H - A star H) + O(lambda^2): the
  // first-order coefficient is compared against a direct evaluation of
  // S^{-1} star T at order 1.
  Fixture fx;
  Rng rng(29);
  auto A = interaction_preset(fx.pack, 2, "mass");
  auto H = random_even(rng, fx, 2);
  auto R = retarded_field(A, H, fx.pack, 1);
  WickElement order1 = product(ProductKind::StarF, A, H, fx.pack, -1) -
                       product(ProductKind::Star, A, H, fx.pack, -1);
  WickElement expect = H + order1 * (Poly::lambda() * Scalar::i());
  CHECK(R == expect.truncate_lambda(1));
}

TEST_CASE("field equation and dynamics equivalence on the builtin model") {
  Fixture fx;
  Rng rng(31);
  for (const char* preset : {"mass", "quartic"}) {
    auto A = interaction_preset(fx.pack, 2, preset);
    std::vector<ParamSection> h = {{0, fx.window_section(rng)}, {1, fx.window_section(rng)}};
    auto fe = field_equation_check(fx.pack, A, h, 2);
    INFO(preset, " field equation: ", fe.witness);
    CHECK(fe.pass);
    for (const auto& c : dynamics_equivalence_check(fx.pack, A, h, 2)) {
      INFO(preset, " ", c.name, ": ", c.witness);
      CHECK(c.pass);
    }
  }
}

TEST_CASE("field equation and dynamics checks fail together on a mutated propagator") {
  Fixture fx;
  Rng rng(37);
  auto A = interaction_preset(fx.pack, 2, "mass");
  std::vector<ParamSection> h = {{0, fx.window_section(rng)}, {1, fx.window_section(rng)}};
  PropagatorPack broken = fx.pack;
  broken.S_F.at(0, 0) += Scalar(1);  // no longer an inverse of D on the window
  auto fe = field_equation_check(broken, A, h, 2);
  auto dyn = dynamics_equivalence_check(broken, A, h, 2);
  bool dyn_failed = false;
  for (const auto& c : dyn) dyn_failed = dyn_failed || !c.pass;
  CHECK_FALSE(fe.pass);
  CHECK(dyn_failed);
}

TEST_CASE("causal factorization for causally ordered supports") {
  Fixture fx("lattice:T=5,L=1,m=1/2");
  const auto& sp = fx.model.space;
  const int d = fx.model.dim();
  auto bilinear_at = [&](int point) {
    WickElement e(0, d);
    int a = sp.index_of(point, 0), b = sp.index_of(point, 1);
    e.add_term((1ull << (16 + a)) | (1ull << (40 + a)), Poly(Scalar(1)));
    e.add_term((1ull << (16 + b)) | (1ull << (40 + b)), Poly(Scalar(Rational(1, 2))));
    return e;
  };
  // A1 at late time, A3 at early time, A2 in between
  auto A1 = bilinear_at(3);  // time 3
  auto A2 = bilinear_at(2);
  auto A3 = bilinear_at(1);
  auto c = causal_factorization_check(fx.pack, fx.model, A1, A2, A3, 2);
  INFO(c.witness);
  CHECK(c.pass);
  // precondition violation flagged
  auto bad = causal_factorization_check(fx.pack, fx.model, A3, A2, A1, 2);
  CHECK_FALSE(bad.pass);
}

TEST_CASE("wick element star involution and serialization") {
  Fixture fx;
  Rng rng(41);
  const int d = fx.model.dim();
  auto A = random_even(rng, fx, 2) + WickElement::psi(2, d, 0) * rng.small_scalar();
  auto B = random_even(rng, fx, 2);
  CHECK(A.star().star() == A);
  CHECK((A * B).star() == B.star() * A.star());
  // psi(s)* = -psibar(s)
  Vec s = fx.window_section(rng);
  CHECK(field_psi(fx.pack, 0, s).star() == field_psibar(fx.pack, 0, s) * Scalar(-1));
  // doubled field is selfadjoint
  auto D = doubled_field(fx.pack, 0, s);
  CHECK(D.star() == D);
  CHECK(!A.str().empty());
}

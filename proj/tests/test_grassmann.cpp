#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "grassmann.hpp"
#include "rng.hpp"

using namespace fermicas;

namespace {

GrassmannElement random_element(Rng& rng, int n, int terms = 3) {
  GrassmannElement e(n);
  for (int t = 0; t < terms; ++t) {
    uint32_t mask = uint32_t(rng.uniform(0, (1 << n) - 1));
    e.set_coeff(mask, e.coeff(mask) + rng.small_scalar());
  }
  return e;
}

GrassmannElement random_odd(Rng& rng, int n) {
  GrassmannElement e(n);
  for (uint32_t m = 0; m < (1u << n); ++m)
    if (popcount(m) & 1)
      if (rng.coin()) e.set_coeff(m, rng.small_scalar());
  return e;
}

GrassmannHom random_hom(Rng& rng, int src, int dst) {
  std::vector<GrassmannElement> im;
  for (int i = 0; i < src; ++i) im.push_back(random_odd(rng, dst));
  return GrassmannHom(src, dst, std::move(im));
}

}  // namespace

TEST_CASE("product basics") {
  auto n1 = GrassmannElement::generator(3, 0);
  auto n2 = GrassmannElement::generator(3, 1);
  auto n3 = GrassmannElement::generator(3, 2);

  CHECK((n1 * n1).is_zero());
  CHECK(n2 * n1 == -(n1 * n2));
  // (eta1 eta3) * eta2 = -eta1 eta2 eta3
  CHECK((n1 * n3) * n2 == -(n1 * n2 * n3));
  CHECK(GrassmannElement::unit(3) * n2 == n2);
}

TEST_CASE("associativity and graded commutativity, exhaustive n<=3") {
  for (int n = 0; n <= 3; ++n) {
    for (uint32_t a = 0; a < (1u << n); ++a)
      for (uint32_t b = 0; b < (1u << n); ++b) {
        auto ea = GrassmannElement::basis(n, a);
        auto eb = GrassmannElement::basis(n, b);
        // graded commutativity on homogeneous elements
        Scalar sign((popcount(a) & 1) && (popcount(b) & 1) ? -1 : 1);
        CHECK(ea * eb == (eb * ea) * sign);
        for (uint32_t c = 0; c < (1u << n); ++c) {
          auto ec = GrassmannElement::basis(n, c);
          CHECK((ea * eb) * ec == ea * (eb * ec));
        }
      }
  }
}

TEST_CASE("involution signs") {
  auto n1 = GrassmannElement::generator(3, 0);
  auto n2 = GrassmannElement::generator(3, 1);
  auto n3 = GrassmannElement::generator(3, 2);
  CHECK(n1.star() == n1);
  CHECK((n1 * n2).star() == -(n1 * n2));
  CHECK((n1 * n2 * n3).star() == -(n1 * n2 * n3));

  Rng rng(17);
  for (int t = 0; t < 30; ++t) {
    auto a = random_element(rng, 4);
    auto b = random_element(rng, 4);
    CHECK(a.star().star() == a);          // involutive
    CHECK((a * b).star() == b.star() * a.star());  // antiautomorphism
  }
}

TEST_CASE("hom application: multiplicative, unital, degree-preserving") {
  // chi: eta1 -> theta1 theta2 theta3
  GrassmannElement t123 = GrassmannElement::basis(3, 0b111);
  GrassmannHom chi(1, 3, {t123});
  CHECK(chi.apply(GrassmannElement::generator(1, 0)) == t123);
  CHECK(chi.apply(GrassmannElement::unit(1)) == GrassmannElement::unit(3));

  Rng rng(5);
  for (int n = 1; n <= 3; ++n) {
    auto id = GrassmannHom::identity(n);
    for (uint32_t m = 0; m < (1u << n); ++m) {
      auto e = GrassmannElement::basis(n, m);
      CHECK(id.apply(e) == e);
    }
    auto h = random_hom(rng, n, 3);
    for (uint32_t a = 0; a < (1u << n); ++a)
      for (uint32_t b = 0; b < (1u << n); ++b) {
        auto ea = GrassmannElement::basis(n, a);
        auto eb = GrassmannElement::basis(n, b);
        CHECK(h.apply(ea * eb) == h.apply(ea) * h.apply(eb));
      }
  }
}

TEST_CASE("scaling hom multiplies by the product of lambdas") {
  std::vector<Scalar> lambda = {Scalar(2), Scalar(Rational(1, 3)), Scalar(-1)};
  auto chi = GrassmannHom::scaling(3, lambda);
  for (uint32_t m = 0; m < 8; ++m) {
    Scalar prod(1);
    for (int i = 0; i < 3; ++i)
      if ((m >> i) & 1) prod *= lambda[i];
    CHECK(chi.apply(GrassmannElement::basis(3, m)) == GrassmannElement::basis(3, m) * prod);
  }
}

TEST_CASE("hom images must be odd") {
  GrassmannElement even = GrassmannElement::basis(2, 0b11);
  CHECK_THROWS_AS(GrassmannHom(1, 2, {even}), GrassmannError);
}

TEST_CASE("matrix unit examples") {
  // E^{2,2}_{empty,empty}: 1 -> 1, all generators -> 0
  MatrixUnit e00 = matrix_unit(2, 2, 0, 0);
  CHECK(e00.map.image(0) == GrassmannElement::unit(2));
  for (uint32_t m = 1; m < 4; ++m) CHECK(e00.map.image(m).is_zero());

  // E^{2,2}_{{1,2},{1,2}} keeps only eta1 eta2
  MatrixUnit e_top = matrix_unit(2, 2, 0b11, 0b11);
  CHECK(e_top.map.image(0b11) == GrassmannElement::basis(2, 0b11));
  CHECK(e_top.map.image(0).is_zero());
  CHECK(e_top.map.image(0b01).is_zero());
  CHECK(e_top.map.image(0b10).is_zero());

  // E^{3,1}_{{1,2,3},{1}}: eta1 -> theta1 theta2 theta3, 1 -> 0
  MatrixUnit e31 = matrix_unit(3, 1, 0b111, 0b1);
  CHECK(e31.map.image(1) == GrassmannElement::basis(3, 0b111));
  CHECK(e31.map.image(0).is_zero());

  CHECK_THROWS_AS(matrix_unit(3, 3, 0b1, 0b11), GrassmannError);   // |J| < |I|
  CHECK_THROWS_AS(matrix_unit(3, 3, 0b11, 0b1), GrassmannError);   // parity
  CHECK_THROWS_AS(matrix_unit(3, 3, 0b11, 0), GrassmannError);     // I empty, J not
}

TEST_CASE("matrix units match the Kronecker specification exhaustively, n,m<=3") {
  for (int n = 0; n <= 3; ++n)
    for (int m = 0; m <= 3; ++m)
      for (uint32_t I = 0; I < (1u << n); ++I)
        for (uint32_t J = 0; J < (1u << m); ++J) {
          if (!matrix_unit_admissible(I, J)) continue;
          MatrixUnit u = matrix_unit(m, n, J, I);
          for (uint32_t Ip = 0; Ip < (1u << n); ++Ip) {
            GrassmannElement expect(m);
            if (Ip == I) expect = GrassmannElement::basis(m, J);
            CHECK(u.map.image(Ip) == expect);
            // the combination realizes the same map
            CHECK(apply_combination(u.combination, GrassmannElement::basis(n, Ip)) == expect);
          }
        }
}

TEST_CASE("decompose_linear_map: identity map") {
  for (int n = 1; n <= 3; ++n) {
    auto L = GrassmannLinearMap::from_hom(GrassmannHom::identity(n));
    Decomposition d = decompose_linear_map(L);
    REQUIRE(d.admissible);
    CHECK(GrassmannLinearMap::from_combination(n, n, d.combination) == L);
  }
}

TEST_CASE("decompose_linear_map rejects eta1 -> 1") {
  GrassmannLinearMap L(1, 1);
  L.set_coefficient(0b1, 0, Scalar(1));
  Decomposition d = decompose_linear_map(L);
  CHECK_FALSE(d.admissible);
  CHECK(d.bad_I == 0b1);
  CHECK(d.bad_J == 0);
  CHECK(d.reason == "|I|+|J| odd");
}

TEST_CASE("decompose_linear_map rejects 1 -> theta1 theta2") {
  GrassmannLinearMap L(2, 2);
  L.set_coefficient(0, 0b11, Scalar(1));
  Decomposition d = decompose_linear_map(L);
  CHECK_FALSE(d.admissible);
  CHECK(d.bad_I == 0);
  CHECK(d.bad_J == 0b11);
}

TEST_CASE("decompose_linear_map on random admissible maps, exhaustive evaluation") {
  Rng rng(23);
  for (int trial = 0; trial < 60; ++trial) {
    int n = 3, m = 3;
    GrassmannLinearMap L(n, m);
    for (uint32_t I = 0; I < (1u << n); ++I)
      for (uint32_t J = 0; J < (1u << m); ++J)
        if (matrix_unit_admissible(I, J) && rng.coin())
          L.set_coefficient(I, J, rng.small_scalar());
    Decomposition d = decompose_linear_map(L);
    REQUIRE(d.admissible);
    CHECK(GrassmannLinearMap::from_combination(n, m, d.combination) == L);
  }
}

TEST_CASE("homs themselves decompose into hom combinations") {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    auto h = random_hom(rng, 2, 3);
    auto L = GrassmannLinearMap::from_hom(h);
    Decomposition d = decompose_linear_map(L);
    REQUIRE(d.admissible);
    CHECK(GrassmannLinearMap::from_combination(2, 3, d.combination) == L);
  }
}

TEST_CASE("element text round-trip") {
  auto e = GrassmannElement::parse(3, "3/2 * n[1,3] + -1i * n[]");
  CHECK(e.coeff(0b101) == Scalar(Rational(3, 2)));
  CHECK(e.coeff(0) == -Scalar::i());
  CHECK(GrassmannElement::parse(3, e.str()) == e);
  Rng rng(41);
  for (int t = 0; t < 40; ++t) {
    auto x = random_element(rng, 4);
    CHECK(GrassmannElement::parse(4, x.str()) == x);
  }
}

TEST_CASE("block homs compose as expected") {
  // chi_down . chi_up = identity on Lambda^{|J|}; chi_up . chi_down = P_J.
  for (uint32_t J : {0b101u, 0b011u, 0b110u, 0b111u}) {
    auto up = GrassmannHom::block_up(3, J);
    auto down = GrassmannHom::block_down(3, J);
    CHECK(down.compose(up) == GrassmannHom::identity(popcount(J)));
    CHECK(up.compose(down) == GrassmannHom::kill(3, J));
  }
}

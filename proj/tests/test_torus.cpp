#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "bilctrl/torus.hpp"
#include "test_helpers.hpp"

using namespace bilctrl;
using bilctrl::test::random_field;

TEST_CASE("grid invariants") {
  CHECK_THROWS_AS(TorusGrid(7), Error);
  CHECK_THROWS_AS(TorusGrid(6), Error);
  TorusGrid g(16);
  CHECK(g.spacing() == doctest::Approx(kTwoPi / 16));
  CHECK(g.node(0) == 0.0);
  CHECK(g.node(15) < kTwoPi);
}

TEST_CASE("forward transform of constant field") {
  TorusGrid g(16);
  SpectrumField s = forward_transform(Field(g, 1.0));
  CHECK(std::abs(s.coeff(0) - 1.0) < 1e-14);
  for (int k = 1; k <= 8; ++k) CHECK(std::abs(s.coeff(k)) < 1e-14);
}

TEST_CASE("cos(3x) lands in the a_3 bin") {
  TorusGrid g(16);
  Field f = Field::sample(g, [](double x) { return std::cos(3 * x); });
  SpectrumField s = forward_transform(f);
  CHECK(s.a(3) == doctest::Approx(1.0).epsilon(1e-13));
  for (int k = 0; k <= 8; ++k) {
    if (k == 3) continue;
    CHECK(std::abs(s.coeff(k)) < 1e-14);
  }
  CHECK(std::abs(s.b(3)) < 1e-14);
}

TEST_CASE("round trip reproduces a random field") {
  TorusGrid g(64);
  Field f = random_field(g, 42, 31);
  Field back = inverse_transform(forward_transform(f));
  double err = 0.0;
  for (int j = 0; j < g.n(); ++j) err = std::max(err, std::abs(back[j] - f[j]));
  CHECK(err < 1e-12 * f.sup_norm());
}

TEST_CASE("spectral derivatives of resolved modes are exact") {
  TorusGrid g(32);
  Field s1 = Field::sample(g, [](double x) { return std::sin(x); });
  Field d1 = spatial_derivative(s1, 1);
  for (int j = 0; j < g.n(); ++j) {
    CHECK(d1[j] == doctest::Approx(std::cos(g.node(j))).epsilon(1e-12));
  }

  Field c2 = Field::sample(g, [](double x) { return std::cos(2 * x); });
  Field d2 = spatial_derivative(c2, 2);
  for (int j = 0; j < g.n(); ++j) {
    CHECK(d2[j] == doctest::Approx(-4.0 * std::cos(2 * g.node(j)))
                       .epsilon(1e-12));
  }

  Field flat(g, 3.5);
  CHECK(spatial_derivative(flat, 1).sup_norm() < 1e-13);
  CHECK_THROWS_AS(spatial_derivative(flat, 3), Error);
}

TEST_CASE("derivative commutes with transform") {
  TorusGrid g(64);
  Field f = random_field(g, 7, 20);
  SpectrumField sf = forward_transform(f);
  SpectrumField sd = forward_transform(spatial_derivative(f, 1));
  for (int k = 0; k < g.n() / 2; ++k) {
    const std::complex<double> want =
        std::complex<double>(0.0, k) * sf.coeff(k);
    CHECK(std::abs(sd.coeff(k) - want) < 1e-13);
  }
}

TEST_CASE("dealiased product basics") {
  TorusGrid g(32);
  Field one(g, 1.0);
  Field f = random_field(g, 3, g.dealias_cutoff());
  Field p = dealiased_product(one, f);
  for (int j = 0; j < g.n(); ++j) {
    CHECK(p[j] == doctest::Approx(f[j]).epsilon(1e-12));
  }

  // cos * cos -> 1/2 + 1/2 cos(2x), the product-to-sum identity.
  Field c = Field::sample(g, [](double x) { return std::cos(x); });
  Field cc = dealiased_product(c, c);
  for (int j = 0; j < g.n(); ++j) {
    const double want = 0.5 + 0.5 * std::cos(2 * g.node(j));
    CHECK(cc[j] == doctest::Approx(want).epsilon(1e-13));
  }
}

TEST_CASE("dealiased product matches the brute-force product for low modes") {
  TorusGrid g(64);
  // Joint content n/6 + n/6 stays inside the retained band, so nothing is
  // truncated and nothing aliases: the result must equal the raw product.
  Field f = random_field(g, 11, g.n() / 6);
  Field h = random_field(g, 12, g.n() / 6);
  Field got = dealiased_product(f, h);
  Field want = pointwise_product(f, h);
  for (int j = 0; j < g.n(); ++j) {
    CHECK(got[j] == doctest::Approx(want[j]).epsilon(1e-12));
  }
}

TEST_CASE("dealiased product discards aliased images") {
  TorusGrid g(30);  // cutoff floor(29/3) = 9
  const int kc = g.dealias_cutoff();
  Field f = Field::sample(g, [&](double x) { return std::cos(kc * x); });
  // True square is 1/2 + 1/2 cos(2 kc x); the high mode must vanish, not
  // fold back below the cutoff.
  Field sq = dealiased_product(f, f);
  SpectrumField s = forward_transform(sq);
  CHECK(s.a(0) == doctest::Approx(0.5).epsilon(1e-12));
  for (int k = 1; k <= g.n() / 2; ++k) CHECK(std::abs(s.coeff(k)) < 1e-13);
}

TEST_CASE("quadrature identities") {
  TorusGrid g(64);
  Field c1 = Field::sample(g, [](double x) { return std::cos(x); });
  CHECK(std::abs(integral(c1)) < 1e-13);
  CHECK(l2_norm_sq(c1) == doctest::Approx(kTwoPi / 2).epsilon(1e-13));
  for (int k : {1, 3, 7}) {
    Field ck = Field::sample(g, [&](double x) { return std::cos(k * x); });
    CHECK(h1_seminorm_sq(ck) ==
          doctest::Approx(kTwoPi / 2 * k * k).epsilon(1e-12));
    CHECK(std::abs(integral(ck)) < 1e-12);  // pure modes integrate to zero
  }
}

TEST_CASE("Parseval identity for band-limited fields") {
  TorusGrid g(128);
  Field f = random_field(g, 5, g.n() / 2 - 1);
  SpectrumField s = forward_transform(f);
  double spectral = kTwoPi * s.coeff(0).real() * s.coeff(0).real();
  for (int k = 1; k < g.n() / 2; ++k) {
    spectral += kTwoPi / 2 * (s.a(k) * s.a(k) + s.b(k) * s.b(k));
  }
  CHECK(l2_norm_sq(f) == doctest::Approx(spectral).epsilon(1e-10));
}

TEST_CASE("h1 seminorm agrees with the derivative's L2 norm") {
  TorusGrid g(64);
  Field f = random_field(g, 9, 20);
  CHECK(h1_seminorm_sq(f) ==
        doctest::Approx(l2_norm_sq(spatial_derivative(f, 1))).epsilon(1e-11));
}

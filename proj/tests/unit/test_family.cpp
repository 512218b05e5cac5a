#include <doctest.h>

#include <cmath>

#include "nsb/error.hpp"
#include "nsb/family.hpp"
#include "nsb/rng.hpp"

using namespace nsb;

namespace {

// Z demo profile restated from its definition: pinned sites are the negative
// block [-32768, -1] and -2^(j-1) for j >= 17.
bool demo_pinned(std::int64_t n) {
  if (n >= -32768 && n <= -1) return true;
  const std::int64_t m = -n;
  return m >= 65536 && (m & (m - 1)) == 0;
}

double demo_mu0(std::int64_t n) {
  if (demo_pinned(n)) return 0.5;
  if (n == 0) return 0.6;
  const double a = static_cast<double>(std::llabs(n));
  return 0.5 + std::min(0.1, 1.0 / std::sqrt(a * std::log(a + 2.0)));
}

double demo_kakutani(std::int64_t g, std::int64_t R) {
  double s = 0;
  for (std::int64_t h = -R; h <= R; ++h) s += std::pow(demo_mu0(h + g) - demo_mu0(h), 2);
  return s;
}

}  // namespace

TEST_SUITE("family") {
  TEST_CASE("z demo marginals match the stated profile") {
    GroupModel Z(GroupKind::Z);
    auto f = make_radial_demo_family(Z);
    for (std::int64_t n : {0, 1, -1, 2, 7, 100, -32768, -32769, 32768, -65536, -65537, 65536, -131072, 1000000}) {
      CHECK(f->mu0(GroupElement::z(n)) == doctest::Approx(demo_mu0(n)).epsilon(1e-15));
      CHECK(f->pinned(GroupElement::z(n)) == demo_pinned(n));
    }
    CHECK(f->mu0(GroupElement::z(0)) == doctest::Approx(0.6));
    CHECK(f->classify(GroupElement::z(1)) == Sign::Plus);
    CHECK(f->classify(GroupElement::z(-5)) == Sign::Neutral);
    const auto t = make_z_table(*f, 5000);
    for (std::int64_t n = -5000; n <= 5000; n += 37) CHECK(t(n) == f->mu0(GroupElement::z(n)));
  }

  TEST_CASE("eta weights") {
    GroupModel Z(GroupKind::Z);
    auto f = make_finitely_perturbed_family(Z, 0.5, 0.1, {{GroupElement::z(0), 0.6}});
    const auto e = f->eta(GroupElement::z(0));
    CHECK(e.eta0 == doctest::Approx(0.182322).epsilon(1e-6));
    CHECK(e.eta1 == doctest::Approx(-0.223144).epsilon(1e-6));
    CHECK(e.spread() == doctest::Approx(0.405465).epsilon(1e-6));
    const auto z = f->eta(GroupElement::z(8));
    CHECK(z.eta0 == 0.0);
    CHECK(z.eta1 == 0.0);
  }

  TEST_CASE("eta sign, lower bound and log inequalities over random marginals") {
    GroupModel Z(GroupKind::Z);
    Engine rng(5);
    for (int i = 0; i < 10000; ++i) {
      const double l0 = 0.3 + 0.4 * uniform01(rng);
      const double m = 0.1 + 0.8 * uniform01(rng);
      auto f = make_finitely_perturbed_family(Z, l0, 0.1, {{GroupElement::z(0), m}});
      const auto e = f->eta(GroupElement::z(0));
      const double d = e.eta0 - e.eta1;
      CHECK((d > 0) == (m > l0));
      CHECK(d >= (1.0 / m + 1.0 / (1.0 - l0)) * (m - l0) - 1e-12);
      for (int a : {0, 1}) {
        const double t = f->mu(GroupElement::z(0), a) / f->lambda(a) - 1.0;
        CHECK(t / (1 + t) <= std::log1p(t) + 1e-15);
        CHECK(std::log1p(t) <= t + 1e-15);
      }
    }
  }

  TEST_CASE("relabeling swaps symbols and signs") {
    GroupModel Z(GroupKind::Z);
    auto f = make_radial_demo_family(Z);
    auto r = relabeled(f);
    CHECK(r->lambda0() == doctest::Approx(0.5));
    for (std::int64_t n = -50; n <= 50; ++n) {
      const auto g = GroupElement::z(n);
      CHECK(r->mu0(g) == doctest::Approx(1.0 - f->mu0(g)).epsilon(1e-15));
      const auto s = f->classify(g), t = r->classify(g);
      CHECK((s == Sign::Plus) == (t == Sign::Minus));
      CHECK((s == Sign::Neutral) == (t == Sign::Neutral));
    }
  }

  TEST_CASE("kakutani partial sums") {
    GroupModel Z(GroupKind::Z);
    auto c = make_constant_family(Z, 0.5, 0.1);
    CHECK(kakutani_partial(*c, GroupElement::z(3), 100) == 0.0);
    auto one = make_finitely_perturbed_family(Z, 0.5, 0.1, {{GroupElement::z(0), 0.6}});
    CHECK(kakutani_partial(*one, GroupElement::z(1), 0) == doctest::Approx(0.01));
    for (std::int64_t R : {1, 5, 50}) CHECK(kakutani_partial(*one, GroupElement::z(1), R) == doctest::Approx(0.02).epsilon(1e-14));

    auto f = make_radial_demo_family(Z);
    const std::vector<std::int64_t> radii{1000, 10000, 100000};
    const auto v = kakutani_series(*f, GroupElement::z(1), radii);
    for (std::size_t i = 0; i < radii.size(); ++i) CHECK(v[i] == doctest::Approx(demo_kakutani(1, radii[i])).epsilon(1e-12));
    CHECK(v[1] >= v[0]);
    CHECK(v[2] >= v[1]);
  }

  TEST_CASE("z demo kakutani tail is a rigorous upper bound") {
    GroupModel Z(GroupKind::Z);
    auto f = make_radial_demo_family(Z);
    for (std::int64_t g : {1, -3, 40}) {
      const auto tail = f->kakutani_tail(GroupElement::z(g), 1000);
      CHECK(tail.rigorous);
      const double far = demo_kakutani(g, 300000) - demo_kakutani(g, 1000);
      CHECK(tail.value >= far);
    }
    const auto b = f->z_far_tail_bound(5, 300000);
    REQUIRE(b.has_value());
    CHECK(*b >= demo_kakutani(5, 2000000) - demo_kakutani(5, 300000));
  }

  TEST_CASE("divergence partial sums") {
    GroupModel Z(GroupKind::Z);
    auto f = make_radial_demo_family(Z);
    double oracle = 0;
    for (std::int64_t n = -2000; n <= 2000; ++n) oracle += std::pow(demo_mu0(n) - 0.5, 2);
    CHECK(divergence_partial(*f, 2000, Side::All) == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(divergence_partial(*f, 2000, Side::Plus) == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(divergence_partial(*f, 1000000, Side::Plus) - divergence_partial(*f, 1000, Side::Plus) >= 0.5);
    auto c = make_constant_family(Z, 0.5, 0.1);
    CHECK(divergence_partial(*c, 1000, Side::All) == 0.0);
    auto r = relabeled(f);
    CHECK(divergence_partial(*r, 1000, Side::Plus) == 0.0);
  }

  TEST_CASE("pinned deviations stay below the declared bound") {
    GroupModel Z(GroupKind::Z);
    auto f = make_radial_demo_family(Z);
    const auto bound = f->pinned_deviation_bound();
    REQUIRE(bound.has_value());
    CHECK(pinned_deviation_sum(*f, 200000) <= *bound + 1e-12);
    CHECK(pinned_deviation_sum(*f, 200000) > 0.0);
  }

  TEST_CASE("conservativity partial sums") {
    GroupModel Z(GroupKind::Z);
    auto c = make_constant_family(Z, 0.5, 0.1);
    CHECK(conservativity_partial(*c, 1.0, 50, 10) == doctest::Approx(101.0));
    auto f = make_radial_demo_family(Z);
    const std::vector<std::int64_t> radii{100, 1000, 3000};
    const auto v = conservativity_series(*f, {1.0, 2.0}, radii, 200);
    for (std::size_t j = 0; j < radii.size(); ++j) CHECK(v[1][j] <= v[0][j]);
    CHECK(v[0][1] > v[0][0]);
    CHECK(v[0][2] > v[0][1]);
    double oracle = 0;
    for (std::int64_t g = -100; g <= 100; ++g) oracle += std::exp(-demo_kakutani(g, 200));
    CHECK(v[0][0] == doctest::Approx(oracle).epsilon(1e-12));
  }

  TEST_CASE("l2 tail: convergent on the free group, divergent on Z") {
    GroupModel F2(GroupKind::F2), Z(GroupKind::Z);
    auto f = make_f2_radial_family(F2, 0.5, 0.1, 2.0);
    const auto v = l2_tail_series(*f, {24, 25, 40});
    // sphere r has 4 3^(r-1) elements, deviation min(0.1, 2^-r)
    double oracle = 0.01;
    for (int r = 1; r <= 25; ++r) oracle += 4 * std::pow(3.0, r - 1) * std::pow(std::min(0.1, std::pow(2.0, -r)), 2);
    CHECK(v[1] == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(v[2] - v[1] > 0.0);
    auto zd = make_radial_demo_family(Z);
    const auto w = l2_tail_series(*zd, {1000, 100000});
    CHECK(w[1] - w[0] > 0.3);
    auto c = make_constant_family(Z, 0.5, 0.1);
    CHECK(l2_tail_profile(*c, 100) == 0.0);
  }

  TEST_CASE("eta decays on the z demo family") {
    GroupModel Z(GroupKind::Z);
    auto f = make_radial_demo_family(Z);
    double worst = 0;
    for (std::int64_t r = 500; r <= 5000; ++r)
      for (std::int64_t n : {r, -r}) {
        const auto e = f->eta(GroupElement::z(n));
        worst = std::max({worst, std::abs(e.eta0), std::abs(e.eta1)});
      }
    CHECK(worst < 0.05);
  }

  TEST_CASE("construction errors") {
    GroupModel Z(GroupKind::Z), F2(GroupKind::F2);
    CHECK_THROWS_AS(make_constant_family(Z, 0.5, 0.0), ConfigError);
    CHECK_THROWS_AS(make_constant_family(Z, 0.5, 0.6), ConfigError);
    CHECK_THROWS_AS(make_constant_family(Z, 1.0, 0.1), ConfigError);
    CHECK_THROWS_AS(make_constant_family(Z, 0.05, 0.1), ConfigError);
    CHECK_THROWS_AS(make_radial_demo_family(F2), ConfigError);
    CHECK_THROWS_AS(make_f2_radial_family(Z), ConfigError);
    CHECK_THROWS_AS(make_finitely_perturbed_family(Z, 0.5, 0.1, {{GroupElement::z(0), 0.95}}), ConfigError);
    CHECK_THROWS_AS(PinnedRule::parse("primes"), ConfigError);
  }

  TEST_CASE("lamplighter profile is flagged heuristic") {
    GroupModel L(GroupKind::Lamplighter);
    auto f = make_lamplighter_folner_family(L);
    CHECK(f->heuristic());
    for (const auto& g : L.ball(4)) {
      CHECK(f->mu0(g) >= 0.1);
      CHECK(f->mu0(g) <= 0.9);
    }
  }
}

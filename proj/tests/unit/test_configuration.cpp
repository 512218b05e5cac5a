#include <doctest.h>

#include <cmath>

#include "nsb/configuration.hpp"
#include "nsb/error.hpp"
#include "nsb/rng.hpp"

using namespace nsb;

TEST_SUITE("configuration") {
  TEST_CASE("samples are pure functions of seed and site") {
    GroupModel Z(GroupKind::Z);
    auto f = make_radial_demo_family(Z);
    const auto x = Configuration::sample(f, 42), y = Configuration::sample(f, 42), z = Configuration::sample(f, 43);
    int diff = 0;
    for (std::int64_t n = -500; n <= 500; ++n) {
      CHECK(x.at(GroupElement::z(n)) == y.at(GroupElement::z(n)));
      diff += x.at(GroupElement::z(n)) != z.at(GroupElement::z(n));
    }
    CHECK(diff > 100);
  }

  TEST_CASE("empirical marginals follow the family") {
    GroupModel Z(GroupKind::Z);
    auto f = make_finitely_perturbed_family(Z, 0.5, 0.1, {{GroupElement::z(0), 0.8}, {GroupElement::z(3), 0.2}});
    const int n = 40000;
    int c0 = 0, c3 = 0, c9 = 0;
    for (int s = 0; s < n; ++s) {
      const auto x = Configuration::sample(f, static_cast<std::uint64_t>(s));
      c0 += x.at(GroupElement::z(0)) == 0;
      c3 += x.at(GroupElement::z(3)) == 0;
      c9 += x.at(GroupElement::z(9)) == 0;
    }
    const double se = std::sqrt(0.25 / n);
    CHECK(std::abs(c0 / double(n) - 0.8) < 5 * se);
    CHECK(std::abs(c3 / double(n) - 0.2) < 5 * se);
    CHECK(std::abs(c9 / double(n) - 0.5) < 5 * se);
  }

  TEST_CASE("shift action is a left action") {
    for (auto kind : {GroupKind::Z, GroupKind::Z2, GroupKind::Lamplighter, GroupKind::F2}) {
      GroupModel G(kind);
      auto f = make_constant_family(G, 0.5, 0.1);
      const auto x = Configuration::sample(f, 7).with_values({{G.generators()[0], 1}});
      const auto ball = G.ball(2);
      for (const auto& g : G.ball(1))
        for (const auto& h : G.ball(1)) {
          const auto a = x.acted(h).acted(g), b = x.acted(mul(g, h));
          for (const auto& k : ball) {
            CHECK(a.at(k) == b.at(k));
            CHECK(b.at(k) == x.at(mul(inv(mul(g, h)), k)));
          }
        }
    }
  }

  TEST_CASE("overlays and difference sets") {
    GroupModel Z(GroupKind::Z);
    auto f = make_constant_family(Z, 0.5, 0.1);
    const auto x = Configuration::sample(f, 3);
    const auto e0 = GroupElement::z(0), e5 = GroupElement::z(5);
    const auto y = x.with_values({{e0, 1 - x.at(e0)}, {e5, x.at(e5)}});
    const auto d = x.difference_set(y);
    REQUIRE(d.has_value());
    REQUIRE(d->size() == 1);
    CHECK((*d)[0] == e0);
    CHECK(!x.difference_set(Configuration::sample(f, 4)).has_value());
    CHECK(!x.difference_set(x.acted(GroupElement::z(1))).has_value());
    const auto g = GroupElement::z(2);
    CHECK(y.acted(g).at(GroupElement::z(2)) == 1 - x.at(e0));
    CHECK_THROWS_AS(x.with_values({{e0, 2}}), PreconditionError);
    CHECK_THROWS_AS(x.at(GroupElement::z2(0, 1)), ModelMismatchError);
  }

  TEST_CASE("dense window fill agrees with point reads") {
    GroupModel Z(GroupKind::Z);
    auto f = make_radial_demo_family(Z);
    const auto table = make_z_table(*f, 300);
    const auto x = Configuration::sample(f, 11).with_values({{GroupElement::z(4), 1}}).acted(GroupElement::z(-37));
    std::vector<std::int8_t> w;
    fill_z_window(x, table, -400, 400, w);
    for (std::int64_t n = -400; n <= 400; ++n) CHECK(w[static_cast<std::size_t>(n + 400)] == x.at(GroupElement::z(n)));
  }

  TEST_CASE("cylinders") {
    GroupModel Z(GroupKind::Z);
    auto f = make_radial_demo_family(Z);
    const CylinderSet A({{GroupElement::z(1), 0}, {GroupElement::z(0), 1}});
    CHECK(A.window().front() == GroupElement::z(0));
    CHECK(cylinder_measure(*f, A) == doctest::Approx(f->mu(GroupElement::z(0), 1) * f->mu(GroupElement::z(1), 0)));
    for (std::uint64_t s = 0; s < 50; ++s) {
      const auto x = sample_in(f, s, A);
      CHECK(A.contains(x));
      CHECK(A.translated(GroupElement::z(9)).contains(x.acted(GroupElement::z(9))));
    }
    const auto j = A.to_json();
    const auto B = CylinderSet::from_json(j, Z);
    CHECK(B.pattern() == A.pattern());
    CHECK_THROWS_AS(CylinderSet::from_json(nlohmann::json::parse(R"([["0", 2]])"), Z), ConfigError);
    CHECK_THROWS_AS(CylinderSet::from_json(nlohmann::json::parse(R"([["0", 1], ["0", 0]])"), Z), ConfigError);
    CHECK_THROWS_AS(CylinderSet::from_json(nlohmann::json::parse(R"({"a": 1})"), Z), ConfigError);
  }

  TEST_CASE("exact RN cocycle equals the cylinder measure ratio") {
    GroupModel Z(GroupKind::Z);
    auto f = make_finitely_perturbed_family(Z, 0.5, 0.1,
                                            {{GroupElement::z(0), 0.6}, {GroupElement::z(2), 0.3}, {GroupElement::z(-1), 0.85}});
    for (std::int64_t gn : {1, -2, 3}) {
      const auto g = GroupElement::z(gn);
      std::vector<GroupElement> W;
      for (std::int64_t n = -6; n <= 6; ++n) W.push_back(GroupElement::z(n));
      for (unsigned mask = 0; mask < 64; ++mask) {
        std::vector<std::pair<GroupElement, int>> p;
        for (std::size_t i = 0; i < W.size(); ++i) p.emplace_back(W[i], (mask >> (i % 6)) & 1u);
        const CylinderSet C(p);
        const auto x = Configuration::sample(f, mask).with_values(p);
        const double oracle = std::log(cylinder_measure(*f, C)) - std::log(cylinder_measure(*f, C.translated(g)));
        CHECK(exact_rn(*f, g, x) == doctest::Approx(oracle).epsilon(1e-12));
      }
    }
    auto demo = make_radial_demo_family(Z);
    CHECK_THROWS_AS(exact_rn(*demo, GroupElement::z(1), Configuration::sample(demo, 0)), PreconditionError);
  }

  TEST_CASE("exact RN cocycle identity") {
    GroupModel F2(GroupKind::F2);
    const auto a = F2.generators()[0], b = F2.generators()[2];
    auto f = make_finitely_perturbed_family(F2, 0.4, 0.1, {{F2.identity(), 0.7}, {a, 0.2}, {mul(a, b), 0.55}});
    Engine rng(1);
    for (int i = 0; i < 200; ++i) {
      const auto g = F2.random_element(rng, 4), h = F2.random_element(rng, 4);
      const auto x = Configuration::sample(f, static_cast<std::uint64_t>(i));
      CHECK(exact_rn(*f, mul(g, h), x) == doctest::Approx(exact_rn(*f, h, x) + exact_rn(*f, g, x.acted(h))).epsilon(1e-12));
    }
  }
}

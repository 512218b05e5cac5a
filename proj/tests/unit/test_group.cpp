#include <doctest.h>

#include <map>
#include <set>

#include "nsb/error.hpp"
#include "nsb/group.hpp"

using namespace nsb;

namespace {

// Lamplighter BFS on (cursor, lit lamps) with right moves: cursor +-1, toggle
// at the cursor. Written without the library's multiplication.
std::map<std::pair<std::int64_t, std::set<std::int64_t>>, int> lamplighter_bfs(int R) {
  using State = std::pair<std::int64_t, std::set<std::int64_t>>;
  std::map<State, int> dist{{State{0, {}}, 0}};
  std::vector<State> frontier{State{0, {}}};
  for (int r = 1; r <= R; ++r) {
    std::vector<State> next;
    for (const auto& s : frontier) {
      std::vector<State> nb{{s.first + 1, s.second}, {s.first - 1, s.second}, s};
      auto& t = nb.back().second;
      if (!t.erase(s.first)) t.insert(s.first);
      for (auto& n : nb)
        if (dist.emplace(n, r).second) next.push_back(n);
    }
    frontier = std::move(next);
  }
  return dist;
}

}  // namespace

TEST_SUITE("group") {
  TEST_CASE("sphere and ball sizes") {
    GroupModel Z(GroupKind::Z), Z2(GroupKind::Z2), F2(GroupKind::F2);
    CHECK(Z.ball_size(10) == 21);
    CHECK(Z2.sphere_size(3) == 12);
    CHECK(Z2.ball_size(3) == 25);
    CHECK(F2.sphere_size(1) == 4);
    CHECK(F2.sphere_size(4) == 108);
    CHECK(F2.ball_size(4) == 161);
    for (int r = 0; r <= 4; ++r) {
      CHECK(Z2.sphere(r).size() == Z2.sphere_size(r));
      CHECK(F2.sphere(r).size() == F2.sphere_size(r));
    }
  }

  TEST_CASE("lamplighter word length matches breadth-first search") {
    GroupModel L(GroupKind::Lamplighter);
    const auto dist = lamplighter_bfs(7);
    std::map<int, std::uint64_t> counts;
    for (const auto& [s, d] : dist) {
      const auto g = GroupElement::lamplighter(s.first, {s.second.begin(), s.second.end()});
      CHECK(g.word_length() == d);
      ++counts[d];
    }
    for (int r = 0; r <= 7; ++r) {
      CHECK(L.sphere_size(r) == counts[r]);
      CHECK(L.sphere(r).size() == counts[r]);
    }
  }

  TEST_CASE("group axioms on random elements") {
    for (auto kind : {GroupKind::Z, GroupKind::Z2, GroupKind::Lamplighter, GroupKind::F2}) {
      GroupModel G(kind);
      Engine rng(17);
      for (int i = 0; i < 200; ++i) {
        const auto a = G.random_element(rng, 5), b = G.random_element(rng, 5), c = G.random_element(rng, 5);
        CHECK(mul(mul(a, b), c) == mul(a, mul(b, c)));
        CHECK(mul(a, inv(a)).is_identity());
        CHECK(mul(inv(a), a).is_identity());
        CHECK(mul(a, G.identity()) == a);
        CHECK(mul(a, b).word_length() <= a.word_length() + b.word_length());
        CHECK(inv(a).word_length() == a.word_length());
      }
    }
  }

  TEST_CASE("canonical enumeration round trips") {
    for (auto kind : {GroupKind::Z, GroupKind::Z2, GroupKind::Lamplighter, GroupKind::F2}) {
      GroupModel G(kind);
      const auto ball = G.ball(4);
      CHECK(ball.front().is_identity());
      for (std::size_t i = 0; i < ball.size(); ++i) {
        CHECK(G.index_of(ball[i]) == i + 1);
        CHECK(G.element_at(i + 1) == ball[i]);
        if (i) CHECK(canonical_compare(ball[i - 1], ball[i]) < 0);
      }
    }
  }

  TEST_CASE("normal forms parse back") {
    for (auto kind : {GroupKind::Z, GroupKind::Z2, GroupKind::Lamplighter, GroupKind::F2}) {
      GroupModel G(kind);
      for (const auto& g : G.ball(3)) CHECK(G.parse(g.normal_form()) == g);
    }
    GroupModel F2(GroupKind::F2);
    CHECK(GroupElement::free_word({kLetterA, kLetterB, kLetterBInv, kLetterAInv}).is_identity());
    CHECK(F2.parse("e").is_identity());
  }

  TEST_CASE("errors") {
    GroupModel Z(GroupKind::Z), F2(GroupKind::F2, 1000);
    CHECK_THROWS_AS(Z.require(GroupElement::z2(0, 1)), ModelMismatchError);
    CHECK_THROWS_AS(F2.ball(10), ResourceLimitError);
    CHECK_THROWS_AS(parse_group_kind("Q"), ConfigError);
    CHECK_THROWS_AS(Z.parse("x"), ConfigError);
  }

  TEST_CASE("keys separate nearby elements") {
    GroupModel Z2(GroupKind::Z2);
    std::set<std::uint64_t> keys;
    for (const auto& g : Z2.ball(30)) keys.insert(g.key());
    CHECK(keys.size() == Z2.ball_size(30));
  }
}

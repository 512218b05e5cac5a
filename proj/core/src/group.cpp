#include "nsb/group.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <sstream>

#include "nsb/error.hpp"

namespace nsb {

namespace {

constexpr char kLetterChars[4] = {'a', 'A', 'b', 'B'};

std::int64_t lamplighter_length(std::int64_t p, const std::vector<std::int64_t>& lamps) {
  std::int64_t lo = std::min<std::int64_t>(0, p), hi = std::max<std::int64_t>(0, p);
  if (!lamps.empty()) {
    lo = std::min(lo, lamps.front());
    hi = std::max(hi, lamps.back());
  }
  // Tour from 0 covering [lo, hi] and ending at p, going left first or right first.
  const std::int64_t left_first = (0 - lo) + (hi - lo) + (hi - p);
  const std::int64_t right_first = (hi - 0) + (hi - lo) + (p - lo);
  return static_cast<std::int64_t>(lamps.size()) + std::min(left_first, right_first);
}

// Symmetric difference of two sorted lists.
std::vector<std::int64_t> sym_diff(const std::vector<std::int64_t>& x, const std::vector<std::int64_t>& y) {
  std::vector<std::int64_t> out;
  out.reserve(x.size() + y.size());
  std::set_symmetric_difference(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(out));
  return out;
}

std::uint64_t pow3(std::int64_t e) {
  if (e > 39) throw ResourceLimitError("free group sphere index overflow beyond radius 39");
  std::uint64_t r = 1;
  for (std::int64_t i = 0; i < e; ++i) r *= 3;
  return r;
}

std::int64_t parse_int(std::string_view s) {
  std::string tmp(s);
  char* end = nullptr;
  const long long v = std::strtoll(tmp.c_str(), &end, 10);
  if (tmp.empty() || end != tmp.c_str() + tmp.size()) throw ConfigError("bad integer in element '" + tmp + "'");
  return v;
}

}  // namespace

std::string to_string(GroupKind kind) {
  switch (kind) {
    case GroupKind::Z: return "Z";
    case GroupKind::Z2: return "Z2";
    case GroupKind::Lamplighter: return "lamplighter";
    case GroupKind::F2: return "F2";
  }
  return "?";
}

GroupKind parse_group_kind(std::string_view name) {
  if (name == "Z") return GroupKind::Z;
  if (name == "Z2") return GroupKind::Z2;
  if (name == "lamplighter") return GroupKind::Lamplighter;
  if (name == "F2") return GroupKind::F2;
  throw ConfigError("unknown group kind '" + std::string(name) + "'");
}

GroupElement GroupElement::z(std::int64_t n) {
  GroupElement g;
  g.a_ = n;
  return g;
}

GroupElement GroupElement::z2(std::int64_t x, std::int64_t y) {
  GroupElement g;
  g.kind_ = GroupKind::Z2;
  g.a_ = x;
  g.b_ = y;
  return g;
}

GroupElement GroupElement::lamplighter(std::int64_t cursor, std::vector<std::int64_t> lamps) {
  std::sort(lamps.begin(), lamps.end());
  if (std::adjacent_find(lamps.begin(), lamps.end()) != lamps.end())
    throw PreconditionError("lamplighter lamp positions must be distinct");
  GroupElement g;
  g.kind_ = GroupKind::Lamplighter;
  g.a_ = cursor;
  g.tail_ = std::move(lamps);
  return g;
}

GroupElement GroupElement::free_word(const std::vector<std::int8_t>& letters) {
  GroupElement g;
  g.kind_ = GroupKind::F2;
  for (std::int8_t l : letters) {
    if (l < 0 || l > 3) throw PreconditionError("free group letter out of range");
    if (!g.tail_.empty() && g.tail_.back() == (l ^ 1)) {
      g.tail_.pop_back();
    } else {
      g.tail_.push_back(l);
    }
  }
  return g;
}

GroupElement GroupElement::identity(GroupKind kind) {
  GroupElement g;
  g.kind_ = kind;
  return g;
}

std::int64_t GroupElement::word_length() const {
  switch (kind_) {
    case GroupKind::Z: return std::llabs(a_);
    case GroupKind::Z2: return std::llabs(a_) + std::llabs(b_);
    case GroupKind::Lamplighter: return lamplighter_length(a_, tail_);
    case GroupKind::F2: return static_cast<std::int64_t>(tail_.size());
  }
  return 0;
}

std::string GroupElement::normal_form() const {
  switch (kind_) {
    case GroupKind::Z: return std::to_string(a_);
    case GroupKind::Z2: return "(" + std::to_string(a_) + "," + std::to_string(b_) + ")";
    case GroupKind::Lamplighter: {
      std::string s = std::to_string(a_) + "|";
      for (std::size_t i = 0; i < tail_.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(tail_[i]);
      }
      return s;
    }
    case GroupKind::F2: {
      if (tail_.empty()) return "e";
      std::string s;
      for (auto l : tail_) s += kLetterChars[l];
      return s;
    }
  }
  return "";
}

std::uint64_t GroupElement::key() const {
  if (kind_ == GroupKind::Z) return z_key(a_);
  std::uint64_t h = splitmix64(0x5bd1e995ULL + static_cast<std::uint64_t>(kind_));
  h = splitmix64(h ^ static_cast<std::uint64_t>(a_));
  h = splitmix64(h ^ static_cast<std::uint64_t>(b_));
  h = splitmix64(h ^ tail_.size());
  for (auto v : tail_) h = splitmix64(h ^ static_cast<std::uint64_t>(v));
  return h;
}

GroupElement mul(const GroupElement& a, const GroupElement& b) {
  if (a.kind() != b.kind()) throw ModelMismatchError("mul: operands from different group models");
  switch (a.kind()) {
    case GroupKind::Z: return GroupElement::z(a.a() + b.a());
    case GroupKind::Z2: return GroupElement::z2(a.a() + b.a(), a.b() + b.b());
    case GroupKind::Lamplighter: {
      // (f, p)(f', p') = (f + shift_p f', p + p')
      std::vector<std::int64_t> shifted = b.tail();
      for (auto& v : shifted) v += a.a();
      return GroupElement::lamplighter(a.a() + b.a(), sym_diff(a.tail(), shifted));
    }
    case GroupKind::F2: {
      std::vector<std::int8_t> w;
      w.reserve(a.tail().size() + b.tail().size());
      for (auto l : a.tail()) w.push_back(static_cast<std::int8_t>(l));
      for (auto l : b.tail()) w.push_back(static_cast<std::int8_t>(l));
      return GroupElement::free_word(w);
    }
  }
  return a;
}

GroupElement inv(const GroupElement& a) {
  switch (a.kind()) {
    case GroupKind::Z: return GroupElement::z(-a.a());
    case GroupKind::Z2: return GroupElement::z2(-a.a(), -a.b());
    case GroupKind::Lamplighter: {
      std::vector<std::int64_t> lamps = a.tail();
      for (auto& v : lamps) v -= a.a();
      return GroupElement::lamplighter(-a.a(), std::move(lamps));
    }
    case GroupKind::F2: {
      std::vector<std::int8_t> w;
      for (auto it = a.tail().rbegin(); it != a.tail().rend(); ++it) w.push_back(static_cast<std::int8_t>(*it ^ 1));
      return GroupElement::free_word(w);
    }
  }
  return a;
}

int canonical_compare(const GroupElement& a, const GroupElement& b) {
  if (a.kind() != b.kind()) throw ModelMismatchError("compare: operands from different group models");
  const auto la = a.word_length(), lb = b.word_length();
  if (la != lb) return la < lb ? -1 : 1;
  auto cmp = [](auto x, auto y) { return x < y ? -1 : (y < x ? 1 : 0); };
  if (int c = cmp(a.a(), b.a())) return c;
  if (int c = cmp(a.b(), b.b())) return c;
  const auto& ta = a.tail();
  const auto& tb = b.tail();
  if (std::lexicographical_compare(ta.begin(), ta.end(), tb.begin(), tb.end())) return -1;
  if (std::lexicographical_compare(tb.begin(), tb.end(), ta.begin(), ta.end())) return 1;
  return 0;
}

// Spheres of the lamplighter group, grown on demand under a lock. Sphere R+1
// is the set of length-(R+1) right neighbours of sphere R.
struct GroupModel::LamplighterTable {
  std::mutex m;
  std::vector<std::vector<GroupElement>> spheres{{GroupElement::identity(GroupKind::Lamplighter)}};
  std::vector<std::uint64_t> balls{1};
};

GroupModel::GroupModel(GroupKind kind, std::uint64_t ball_cap) : kind_(kind), ball_cap_(ball_cap) {
  if (ball_cap_ == 0) throw ConfigError("ball cap must be positive");
  switch (kind_) {
    case GroupKind::Z: generators_ = {GroupElement::z(-1), GroupElement::z(1)}; break;
    case GroupKind::Z2:
      generators_ = {GroupElement::z2(-1, 0), GroupElement::z2(0, -1), GroupElement::z2(0, 1), GroupElement::z2(1, 0)};
      break;
    case GroupKind::Lamplighter:
      generators_ = {GroupElement::lamplighter(-1, {}), GroupElement::lamplighter(0, {0}),
                     GroupElement::lamplighter(1, {})};
      lamp_ = std::make_shared<LamplighterTable>();
      break;
    case GroupKind::F2:
      for (std::int8_t l = 0; l < 4; ++l) generators_.push_back(GroupElement::free_word({l}));
      break;
  }
}

void GroupModel::require(const GroupElement& g) const {
  if (!owns(g)) throw ModelMismatchError("element " + g.normal_form() + " does not belong to group " + name());
}

void GroupModel::check_cap(std::uint64_t count, std::int64_t R) const {
  if (count > ball_cap_)
    throw ResourceLimitError("ball(" + std::to_string(R) + ") of " + name() + " has " + std::to_string(count) +
                             " elements, above cap " + std::to_string(ball_cap_));
}

GroupElement GroupModel::parse(std::string_view s) const {
  switch (kind_) {
    case GroupKind::Z: return GroupElement::z(parse_int(s));
    case GroupKind::Z2: {
      if (s.size() < 5 || s.front() != '(' || s.back() != ')') throw ConfigError("bad Z2 element '" + std::string(s) + "'");
      auto body = s.substr(1, s.size() - 2);
      auto comma = body.find(',');
      if (comma == std::string_view::npos) throw ConfigError("bad Z2 element '" + std::string(s) + "'");
      return GroupElement::z2(parse_int(body.substr(0, comma)), parse_int(body.substr(comma + 1)));
    }
    case GroupKind::Lamplighter: {
      auto bar = s.find('|');
      if (bar == std::string_view::npos) throw ConfigError("bad lamplighter element '" + std::string(s) + "'");
      std::vector<std::int64_t> lamps;
      auto rest = s.substr(bar + 1);
      while (!rest.empty()) {
        auto comma = rest.find(',');
        lamps.push_back(parse_int(rest.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
      }
      return GroupElement::lamplighter(parse_int(s.substr(0, bar)), std::move(lamps));
    }
    case GroupKind::F2: {
      if (s == "e") return identity();
      std::vector<std::int8_t> w;
      for (char c : s) {
        auto p = std::find(std::begin(kLetterChars), std::end(kLetterChars), c);
        if (p == std::end(kLetterChars)) throw ConfigError("bad free group word '" + std::string(s) + "'");
        w.push_back(static_cast<std::int8_t>(p - std::begin(kLetterChars)));
      }
      auto g = GroupElement::free_word(w);
      if (static_cast<std::size_t>(g.word_length()) != s.size())
        throw ConfigError("free group word '" + std::string(s) + "' is not reduced");
      return g;
    }
  }
  return identity();
}

std::uint64_t GroupModel::sphere_size(std::int64_t R) const {
  if (R < 0) throw PreconditionError("negative radius");
  if (R == 0) return 1;
  switch (kind_) {
    case GroupKind::Z: return 2;
    case GroupKind::Z2: return 4 * static_cast<std::uint64_t>(R);
    case GroupKind::F2: return 4 * pow3(R - 1);
    case GroupKind::Lamplighter: return ball_size(R) - ball_size(R - 1);
  }
  return 0;
}

std::uint64_t GroupModel::ball_size(std::int64_t R) const {
  if (R < 0) throw PreconditionError("negative radius");
  const auto r = static_cast<std::uint64_t>(R);
  switch (kind_) {
    case GroupKind::Z: return 2 * r + 1;
    case GroupKind::Z2: return 2 * r * r + 2 * r + 1;
    case GroupKind::F2: return 2 * pow3(R) - 1;
    case GroupKind::Lamplighter: {
      ensure_lamplighter(R);
      std::lock_guard<std::mutex> lock(lamp_->m);
      return lamp_->balls[r];
    }
  }
  return 0;
}

std::vector<GroupElement> GroupModel::sphere(std::int64_t R) const {
  if (R < 0) throw PreconditionError("negative radius");
  std::vector<GroupElement> out;
  switch (kind_) {
    case GroupKind::Z:
      if (R == 0) return {GroupElement::z(0)};
      return {GroupElement::z(-R), GroupElement::z(R)};
    case GroupKind::Z2:
      if (R == 0) return {GroupElement::z2(0, 0)};
      out.reserve(4 * R);
      for (std::int64_t x = -R; x <= R; ++x) {
        const std::int64_t r = R - std::llabs(x);
        out.push_back(GroupElement::z2(x, -r));
        if (r) out.push_back(GroupElement::z2(x, r));
      }
      return out;
    case GroupKind::F2: {
      check_cap(sphere_size(R), R);
      if (R == 0) return {identity()};
      out.reserve(sphere_size(R));
      std::vector<std::int8_t> w(R);
      // Odometer over reduced words in lexicographic order.
      std::function<void(std::int64_t)> rec = [&](std::int64_t i) {
        if (i == R) {
          out.push_back(GroupElement::free_word(w));
          return;
        }
        for (std::int8_t l = 0; l < 4; ++l) {
          if (i > 0 && l == (w[i - 1] ^ 1)) continue;
          w[i] = l;
          rec(i + 1);
        }
      };
      rec(0);
      return out;
    }
    case GroupKind::Lamplighter: {
      ensure_lamplighter(R);
      std::lock_guard<std::mutex> lock(lamp_->m);
      return lamp_->spheres[R];
    }
  }
  return out;
}

void GroupModel::ensure_lamplighter(std::int64_t R) const {
  {
    std::lock_guard<std::mutex> lock(lamp_->m);
    auto& t = *lamp_;
      while (static_cast<std::int64_t>(t.spheres.size()) <= R) {
        const auto r = static_cast<std::int64_t>(t.spheres.size());
        std::vector<GroupElement> next;
        for (const auto& s : t.spheres.back()) {
          for (const auto& gen : generators_) {
            auto n = mul(s, gen);
            if (n.word_length() == r) next.push_back(std::move(n));
          }
        }
        std::sort(next.begin(), next.end(), CanonicalLess{});
        next.erase(std::unique(next.begin(), next.end()), next.end());
        const auto total = t.balls.back() + next.size();
        check_cap(total, r);
        t.spheres.push_back(std::move(next));
        t.balls.push_back(total);
      }
  }
}

std::vector<GroupElement> GroupModel::ball(std::int64_t R) const {
  check_cap(ball_size(R), R);
  std::vector<GroupElement> out;
  out.reserve(ball_size(R));
  for (std::int64_t r = 0; r <= R; ++r) {
    auto s = sphere(r);
    out.insert(out.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
  }
  return out;
}

std::vector<GroupElement> GroupModel::enumerate(std::uint64_t n) const {
  if (n == 0) throw PreconditionError("enumerate needs n >= 1");
  if (n > ball_cap_) throw ResourceLimitError("enumerate(" + std::to_string(n) + ") exceeds ball cap");
  std::vector<GroupElement> out;
  out.reserve(n);
  for (std::int64_t r = 0; out.size() < n; ++r) {
    for (auto& g : sphere(r)) {
      if (out.size() == n) break;
      out.push_back(std::move(g));
    }
  }
  return out;
}

void GroupModel::for_each_in_ball(std::int64_t R, const std::function<void(const GroupElement&)>& fn) const {
  check_cap(ball_size(R), R);
  switch (kind_) {
    case GroupKind::Z:
      fn(GroupElement::z(0));
      for (std::int64_t r = 1; r <= R; ++r) {
        fn(GroupElement::z(-r));
        fn(GroupElement::z(r));
      }
      return;
    case GroupKind::Z2:
      for (std::int64_t r = 0; r <= R; ++r) {
        if (r == 0) {
          fn(GroupElement::z2(0, 0));
          continue;
        }
        for (std::int64_t x = -r; x <= r; ++x) {
          const std::int64_t y = r - std::llabs(x);
          fn(GroupElement::z2(x, -y));
          if (y) fn(GroupElement::z2(x, y));
        }
      }
      return;
    default:
      for (std::int64_t r = 0; r <= R; ++r)
        for (const auto& g : sphere(r)) fn(g);
  }
}

std::uint64_t GroupModel::index_of(const GroupElement& g) const {
  require(g);
  const std::int64_t R = g.word_length();
  switch (kind_) {
    case GroupKind::Z: {
      const std::int64_t n = g.a();
      if (n == 0) return 1;
      return n < 0 ? 2 * static_cast<std::uint64_t>(-n) : 2 * static_cast<std::uint64_t>(n) + 1;
    }
    case GroupKind::Z2: {
      if (R == 0) return 1;
      const std::uint64_t base = ball_size(R - 1);
      const std::int64_t x = g.a();
      if (x == -R) return base + 1;
      if (x == R) return base + 4 * static_cast<std::uint64_t>(R);
      return base + 2 + 2 * static_cast<std::uint64_t>(x + R - 1) + (g.b() > 0 ? 1 : 0);
    }
    case GroupKind::F2: {
      if (R == 0) return 1;
      std::uint64_t rank = 0;
      const auto& w = g.tail();
      for (std::int64_t i = 0; i < R; ++i) {
        std::int64_t smaller = w[i];
        if (i > 0 && (w[i - 1] ^ 1) < w[i]) --smaller;
        rank += static_cast<std::uint64_t>(smaller) * pow3(R - 1 - i);
      }
      return ball_size(R - 1) + rank + 1;
    }
    case GroupKind::Lamplighter: {
      ensure_lamplighter(R);
      std::lock_guard<std::mutex> lock(lamp_->m);
      const auto& s = lamp_->spheres[R];
      auto it = std::lower_bound(s.begin(), s.end(), g, CanonicalLess{});
      const std::uint64_t before = R == 0 ? 0 : lamp_->balls[R - 1];
      return before + static_cast<std::uint64_t>(it - s.begin()) + 1;
    }
  }
  return 0;
}

GroupElement GroupModel::element_at(std::uint64_t index) const {
  if (index == 0) throw PreconditionError("canonical index is 1-based");
  switch (kind_) {
    case GroupKind::Z: {
      if (index == 1) return GroupElement::z(0);
      const auto m = static_cast<std::int64_t>(index / 2);
      return index % 2 == 0 ? GroupElement::z(-m) : GroupElement::z(m);
    }
    case GroupKind::Z2: {
      if (index == 1) return GroupElement::z2(0, 0);
      auto R = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::sqrt(static_cast<double>(index) / 2.0)) - 2);
      while (ball_size(R) < index) ++R;
      while (R > 1 && ball_size(R - 1) >= index) --R;
      const std::uint64_t o = index - ball_size(R - 1) - 1;
      if (o == 0) return GroupElement::z2(-R, 0);
      if (o == 4 * static_cast<std::uint64_t>(R) - 1) return GroupElement::z2(R, 0);
      const std::int64_t x = -R + 1 + static_cast<std::int64_t>((o - 1) / 2);
      const std::int64_t r = R - std::llabs(x);
      return GroupElement::z2(x, (o - 1) % 2 == 0 ? -r : r);
    }
    case GroupKind::F2: {
      if (index == 1) return identity();
      std::int64_t R = 1;
      while (ball_size(R) < index) ++R;
      std::uint64_t rank = index - ball_size(R - 1) - 1;
      std::vector<std::int8_t> w;
      for (std::int64_t i = 0; i < R; ++i) {
        const std::uint64_t unit = pow3(R - 1 - i);
        auto digit = static_cast<std::int64_t>(rank / unit);
        rank %= unit;
        if (i > 0 && (w.back() ^ 1) <= digit) ++digit;
        w.push_back(static_cast<std::int8_t>(digit));
      }
      return GroupElement::free_word(w);
    }
    case GroupKind::Lamplighter: {
      std::int64_t R = 0;
      while (ball_size(R) < index) ++R;
      std::lock_guard<std::mutex> lock(lamp_->m);
      const std::uint64_t before = R == 0 ? 0 : lamp_->balls[R - 1];
      return lamp_->spheres[R][index - before - 1];
    }
  }
  return identity();
}

GroupElement GroupModel::random_element(Engine& rng, std::int64_t R) const {
  return element_at(1 + uniform_below(rng, ball_size(R)));
}

}  // namespace nsb

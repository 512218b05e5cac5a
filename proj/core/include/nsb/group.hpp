#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "nsb/rng.hpp"

namespace nsb {

enum class GroupKind { Z, Z2, Lamplighter, F2 };

std::string to_string(GroupKind kind);
GroupKind parse_group_kind(std::string_view name);  // "Z", "Z2", "lamplighter", "F2"

// Free-group letters. The inverse of letter l is l ^ 1.
enum FreeLetter : std::int8_t { kLetterA = 0, kLetterAInv = 1, kLetterB = 2, kLetterBInv = 3 };

// Element of one of the supported groups, always stored in normal form:
//   Z            a = n
//   Z2           (a, b) = (x, y)
//   Lamplighter  a = cursor, tail = sorted positions of lit lamps
//   F2           tail = freely reduced word over {a, A, b, B}
class GroupElement {
 public:
  GroupElement() = default;

  static GroupElement z(std::int64_t n);
  static GroupElement z2(std::int64_t x, std::int64_t y);
  static GroupElement lamplighter(std::int64_t cursor, std::vector<std::int64_t> lamps);
  static GroupElement free_word(const std::vector<std::int8_t>& letters);
  static GroupElement identity(GroupKind kind);

  GroupKind kind() const { return kind_; }
  std::int64_t a() const { return a_; }
  std::int64_t b() const { return b_; }
  const std::vector<std::int64_t>& tail() const { return tail_; }

  std::int64_t z_value() const { return a_; }
  bool is_identity() const { return a_ == 0 && b_ == 0 && tail_.empty(); }

  std::int64_t word_length() const;
  std::string normal_form() const;

  // Stable 64-bit key; distinct elements get distinct keys with overwhelming
  // probability. Used to seed coordinate draws and for hashing.
  std::uint64_t key() const;

  friend bool operator==(const GroupElement&, const GroupElement&) = default;

 private:
  GroupKind kind_ = GroupKind::Z;
  std::int64_t a_ = 0;
  std::int64_t b_ = 0;
  std::vector<std::int64_t> tail_;
};

struct GroupElementHash {
  std::size_t operator()(const GroupElement& g) const { return static_cast<std::size_t>(g.key()); }
};

inline std::uint64_t z_key(std::int64_t n) { return splitmix64(static_cast<std::uint64_t>(n)); }

GroupElement mul(const GroupElement& a, const GroupElement& b);
GroupElement inv(const GroupElement& a);

// Canonical total order: word length first, then the per-kind lexicographic
// order (Z: -R before +R; Z2: (x, y) numerically; lamplighter: cursor then
// lamp list; F2: letters with a < A < b < B).
int canonical_compare(const GroupElement& a, const GroupElement& b);
struct CanonicalLess {
  bool operator()(const GroupElement& a, const GroupElement& b) const { return canonical_compare(a, b) < 0; }
};

class GroupModel {
 public:
  static constexpr std::uint64_t kDefaultBallCap = 10'000'000;

  explicit GroupModel(GroupKind kind, std::uint64_t ball_cap = kDefaultBallCap);

  GroupKind kind() const { return kind_; }
  std::string name() const { return to_string(kind_); }
  std::uint64_t ball_cap() const { return ball_cap_; }

  GroupElement identity() const { return GroupElement::identity(kind_); }
  const std::vector<GroupElement>& generators() const { return generators_; }

  bool owns(const GroupElement& g) const { return g.kind() == kind_; }
  void require(const GroupElement& g) const;

  GroupElement parse(std::string_view normal_form) const;

  std::uint64_t sphere_size(std::int64_t R) const;
  std::uint64_t ball_size(std::int64_t R) const;

  std::vector<GroupElement> sphere(std::int64_t R) const;
  std::vector<GroupElement> ball(std::int64_t R) const;
  std::vector<GroupElement> enumerate(std::uint64_t n) const;

  // Visits ball(R) sphere by sphere in canonical order without materializing it.
  void for_each_in_ball(std::int64_t R, const std::function<void(const GroupElement&)>& fn) const;

  // 1-based position in the canonical enumeration, and its inverse.
  std::uint64_t index_of(const GroupElement& g) const;
  GroupElement element_at(std::uint64_t index) const;

  // Uniform on ball(R).
  GroupElement random_element(Engine& rng, std::int64_t R) const;

 private:
  struct LamplighterTable;
  void ensure_lamplighter(std::int64_t R) const;
  void check_cap(std::uint64_t count, std::int64_t R) const;

  GroupKind kind_;
  std::uint64_t ball_cap_;
  std::vector<GroupElement> generators_;
  std::shared_ptr<LamplighterTable> lamp_;
};

}  // namespace nsb

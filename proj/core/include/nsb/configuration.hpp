#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nsb/family.hpp"

namespace nsb {

using Overlay = std::unordered_map<GroupElement, int, GroupElementHash>;

// A point of {0,1}^G. Base coordinates are a pure function of (seed, element),
// so nothing is cached and concurrent reads need no locking. Finitely many
// coordinates can be overridden; the shift action transports both layers.
class Configuration {
 public:
  static Configuration sample(FamilyPtr family, std::uint64_t seed);

  const FamilyPtr& family() const { return family_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t mixed_seed() const { return mixed_; }
  const GroupElement& shift() const { return shift_; }
  const Overlay& overlay() const { return *overlay_; }

  int at(const GroupElement& h) const;
  // Value of the unshifted, unmodified sample at u.
  int base_at(const GroupElement& u) const;

  // (g x)_h = x_{g^{-1} h}.
  Configuration acted(const GroupElement& g) const;
  Configuration with_values(const std::vector<std::pair<GroupElement, int>>& values) const;

  // Coordinates where the two points differ, when both come from the same
  // sample and shift (so the difference is finite and known); nullopt otherwise.
  std::optional<std::vector<GroupElement>> difference_set(const Configuration& other) const;

 private:
  FamilyPtr family_;
  std::uint64_t seed_ = 0;
  std::uint64_t mixed_ = 0;
  GroupElement shift_;
  std::shared_ptr<const Overlay> overlay_;
};

// Symbols of x on [lo, hi] (group Z), using the table for marginals it covers.
void fill_z_window(const Configuration& x, const ZProfileTable& table, std::int64_t lo, std::int64_t hi,
                   std::vector<std::int8_t>& out);

class CylinderSet {
 public:
  CylinderSet() = default;
  explicit CylinderSet(std::vector<std::pair<GroupElement, int>> pattern);

  const std::vector<std::pair<GroupElement, int>>& pattern() const { return pattern_; }
  std::vector<GroupElement> window() const;
  bool empty() const { return pattern_.empty(); }
  bool contains(const Configuration& x) const;
  // g A = {g x : x in A}, i.e. pattern (g k, sigma(k)).
  CylinderSet translated(const GroupElement& g) const;

  nlohmann::json to_json() const;
  static CylinderSet from_json(const nlohmann::json& j, const GroupModel& model);

 private:
  std::vector<std::pair<GroupElement, int>> pattern_;
};

double cylinder_measure(const MarginalFamily& family, const CylinderSet& A);

// Sample from mu conditioned on A (product measure: overwrite the window).
Configuration sample_in(FamilyPtr family, std::uint64_t seed, const CylinderSet& A);

// Exact RN cocycle for families equal to lambda off a finite set F: the sum
// runs over F and g^{-1}F only.
double exact_rn(const MarginalFamily& oracle, const GroupElement& g, const Configuration& x);

}  // namespace nsb

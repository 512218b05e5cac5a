#include "nsb/configuration.hpp"

#include <algorithm>
#include <cmath>

#include "nsb/error.hpp"

namespace nsb {

Configuration Configuration::sample(FamilyPtr family, std::uint64_t seed) {
  if (!family) throw PreconditionError("configuration needs a family");
  Configuration x;
  x.shift_ = family->model().identity();
  x.family_ = std::move(family);
  x.seed_ = seed;
  x.mixed_ = mix_seed(seed);
  x.overlay_ = std::make_shared<const Overlay>();
  return x;
}

int Configuration::base_at(const GroupElement& u) const {
  return draw_symbol(mixed_, u.key(), family_->mu0(u));
}

int Configuration::at(const GroupElement& h) const {
  family_->model().require(h);
  if (!overlay_->empty()) {
    auto it = overlay_->find(h);
    if (it != overlay_->end()) return it->second;
  }
  return base_at(shift_.is_identity() ? h : mul(inv(shift_), h));
}

Configuration Configuration::acted(const GroupElement& g) const {
  family_->model().require(g);
  Configuration y = *this;
  y.shift_ = mul(g, shift_);
  if (!overlay_->empty()) {
    auto moved = std::make_shared<Overlay>();
    moved->reserve(overlay_->size());
    for (const auto& [k, v] : *overlay_) moved->emplace(mul(g, k), v);
    y.overlay_ = std::move(moved);
  }
  return y;
}

Configuration Configuration::with_values(const std::vector<std::pair<GroupElement, int>>& values) const {
  Configuration y = *this;
  auto ov = std::make_shared<Overlay>(*overlay_);
  for (const auto& [k, v] : values) {
    family_->model().require(k);
    if (v != 0 && v != 1) throw PreconditionError("configuration symbols are 0 or 1");
    (*ov)[k] = v;
  }
  y.overlay_ = std::move(ov);
  return y;
}

std::optional<std::vector<GroupElement>> Configuration::difference_set(const Configuration& other) const {
  if (family_ != other.family_ || seed_ != other.seed_ || !(shift_ == other.shift_)) return std::nullopt;
  std::vector<GroupElement> keys;
  for (const auto& [k, v] : *overlay_) keys.push_back(k);
  for (const auto& [k, v] : *other.overlay_) keys.push_back(k);
  std::sort(keys.begin(), keys.end(), CanonicalLess{});
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  std::vector<GroupElement> out;
  for (const auto& k : keys)
    if (at(k) != other.at(k)) out.push_back(k);
  return out;
}

void fill_z_window(const Configuration& x, const ZProfileTable& table, std::int64_t lo, std::int64_t hi,
                   std::vector<std::int8_t>& out) {
  if (x.family()->model().kind() != GroupKind::Z) throw ModelMismatchError("fill_z_window needs group Z");
  out.resize(static_cast<std::size_t>(hi - lo + 1));
  const std::int64_t s = x.shift().z_value();
  const std::uint64_t mixed = x.mixed_seed();
  for (std::int64_t n = lo; n <= hi; ++n) {
    const std::int64_t u = n - s;
    const double m = table.covers(u) ? table(u) : x.family()->mu0(GroupElement::z(u));
    out[static_cast<std::size_t>(n - lo)] = static_cast<std::int8_t>(draw_symbol(mixed, z_key(u), m));
  }
  for (const auto& [k, v] : x.overlay()) {
    const std::int64_t n = k.z_value();
    if (n >= lo && n <= hi) out[static_cast<std::size_t>(n - lo)] = static_cast<std::int8_t>(v);
  }
}

CylinderSet::CylinderSet(std::vector<std::pair<GroupElement, int>> pattern) : pattern_(std::move(pattern)) {
  for (const auto& [g, s] : pattern_)
    if (s != 0 && s != 1) throw PreconditionError("cylinder symbols are 0 or 1");
  std::sort(pattern_.begin(), pattern_.end(),
            [](const auto& a, const auto& b) { return canonical_compare(a.first, b.first) < 0; });
  for (std::size_t i = 1; i < pattern_.size(); ++i)
    if (pattern_[i].first == pattern_[i - 1].first)
      throw PreconditionError("cylinder window repeats " + pattern_[i].first.normal_form());
}

std::vector<GroupElement> CylinderSet::window() const {
  std::vector<GroupElement> w;
  w.reserve(pattern_.size());
  for (const auto& [g, s] : pattern_) w.push_back(g);
  return w;
}

bool CylinderSet::contains(const Configuration& x) const {
  return std::all_of(pattern_.begin(), pattern_.end(), [&](const auto& p) { return x.at(p.first) == p.second; });
}

CylinderSet CylinderSet::translated(const GroupElement& g) const {
  std::vector<std::pair<GroupElement, int>> p;
  p.reserve(pattern_.size());
  for (const auto& [k, s] : pattern_) p.emplace_back(mul(g, k), s);
  return CylinderSet(std::move(p));
}

nlohmann::json CylinderSet::to_json() const {
  auto j = nlohmann::json::array();
  for (const auto& [g, s] : pattern_) j.push_back({g.normal_form(), s});
  return j;
}

CylinderSet CylinderSet::from_json(const nlohmann::json& j, const GroupModel& model) {
  if (!j.is_array()) throw ConfigError("cylinder must be a JSON list of [element, symbol] pairs");
  std::vector<std::pair<GroupElement, int>> p;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_number_integer())
      throw ConfigError("cylinder entries must be [\"<element>\", 0|1]");
    const int s = e[1].get<int>();
    if (s != 0 && s != 1) throw ConfigError("cylinder symbols are 0 or 1");
    p.emplace_back(model.parse(e[0].get<std::string>()), s);
  }
  try {
    return CylinderSet(std::move(p));
  } catch (const PreconditionError& err) {
    throw ConfigError(err.what());
  }
}

double cylinder_measure(const MarginalFamily& family, const CylinderSet& A) {
  double m = 1.0;
  for (const auto& [g, s] : A.pattern()) m *= family.mu(g, s);
  return m;
}

Configuration sample_in(FamilyPtr family, std::uint64_t seed, const CylinderSet& A) {
  return Configuration::sample(std::move(family), seed).with_values(A.pattern());
}

double exact_rn(const MarginalFamily& oracle, const GroupElement& g, const Configuration& x) {
  auto supp = oracle.finite_support();
  if (!supp) throw PreconditionError("exact_rn needs a finitely perturbed family");
  std::vector<GroupElement> sites;
  const auto gi = inv(g);
  for (const auto& f : *supp) {
    sites.push_back(f);
    sites.push_back(mul(gi, f));
  }
  std::sort(sites.begin(), sites.end(), CanonicalLess{});
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  double r = 0.0;
  for (const auto& h : sites) {
    const int a = x.at(h);
    r += std::log(oracle.mu(h, a)) - std::log(oracle.mu(mul(g, h), a));
  }
  return r;
}

}  // namespace nsb

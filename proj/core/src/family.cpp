#include "nsb/family.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nsb/error.hpp"
#include "nsb/parallel.hpp"

namespace nsb {

std::string to_string(Sign s) {
  switch (s) {
    case Sign::Plus: return "Plus";
    case Sign::Minus: return "Minus";
    case Sign::Neutral: return "Neutral";
  }
  return "?";
}

bool PinnedRule::contains(std::uint64_t index) const {
  const bool pow2 = index >= 8 && (index & (index - 1)) == 0;
  switch (kind) {
    case PinnedRuleKind::None: return false;
    case PinnedRuleKind::PowerOfTwo: return pow2;
    case PinnedRuleKind::BlockThenPowerOfTwo: return pow2 || (index % 2 == 0 && index <= 2 * block);
  }
  return false;
}

std::string PinnedRule::name() const {
  switch (kind) {
    case PinnedRuleKind::None: return "none";
    case PinnedRuleKind::PowerOfTwo: return "power_of_two";
    case PinnedRuleKind::BlockThenPowerOfTwo: return "block_then_power_of_two";
  }
  return "?";
}

PinnedRule PinnedRule::parse(std::string_view name, std::uint64_t block) {
  if (name == "none") return {PinnedRuleKind::None, 0};
  if (name == "power_of_two") return {PinnedRuleKind::PowerOfTwo, 0};
  if (name == "block_then_power_of_two") {
    if (block == 0) throw ConfigError("pinned block must be positive");
    return {PinnedRuleKind::BlockThenPowerOfTwo, block};
  }
  throw ConfigError("unknown pinned rule '" + std::string(name) + "'");
}

MarginalFamily::MarginalFamily(GroupModel model, double lambda0, double delta, PinnedRule rule)
    : model_(std::move(model)), lambda0_(lambda0), delta_(delta), rule_(rule) {
  if (!(delta_ > 0.0 && delta_ <= 0.5)) throw ConfigError("delta must lie in (0, 1/2]");
  if (!(lambda0_ > 0.0 && lambda0_ < 1.0)) throw ConfigError("lambda0 must lie in (0, 1); degenerate marginals are rejected");
  if (lambda0_ < delta_ || lambda0_ > 1.0 - delta_) throw ConfigError("lambda0 must lie in [delta, 1 - delta]");
}

bool MarginalFamily::pinned(const GroupElement& g) const {
  if (rule_.kind == PinnedRuleKind::None) return false;
  return rule_.contains(model_.index_of(g));
}

double MarginalFamily::mu0(const GroupElement& g) const {
  model_.require(g);
  if (pinned(g)) return lambda0_;
  const double v = profile0(g);
  if (!(v >= delta_ && v <= 1.0 - delta_))
    throw InvariantViolation("marginal at " + g.normal_form() + " = " + std::to_string(v) + " leaves [delta, 1-delta]");
  return v;
}

EtaWeights MarginalFamily::eta(const GroupElement& g) const {
  const double m = mu0(g);
  return {std::log(m / lambda0_), std::log((1.0 - m) / (1.0 - lambda0_))};
}

Sign MarginalFamily::classify(const GroupElement& g) const {
  const double m = mu0(g);
  if (m > lambda0_) return Sign::Plus;
  if (m < lambda0_) return Sign::Minus;
  return Sign::Neutral;
}

TailEstimate MarginalFamily::kakutani_tail(const GroupElement& g, std::int64_t R) const {
  // Direct sum over the next spheres, then a geometric extrapolation from the
  // last two sphere contributions. Numerical estimate only.
  std::int64_t R_ext = R;
  for (std::int64_t r = R + 1; r <= 2 * R + 2; ++r) {
    try {
      if (model_.ball_size(r) > model_.ball_cap()) break;
    } catch (const ResourceLimitError&) {
      break;
    }
    R_ext = r;
  }
  double total = 0.0, prev = 0.0, last = 0.0;
  for (std::int64_t r = R + 1; r <= R_ext; ++r) {
    double s = 0.0;
    for (const auto& h : model_.sphere(r)) {
      const double d = mu0(mul(g, h)) - mu0(h);
      s += d * d;
    }
    total += s;
    prev = last;
    last = s;
  }
  if (R_ext > R + 1 && prev > 0.0) {
    const double q = last / prev;
    total += q < 1.0 ? last * q / (1.0 - q) : last * static_cast<double>(R_ext);
  }
  return {total, false};
}

std::optional<double> MarginalFamily::z_far_tail_bound(std::int64_t, std::int64_t) const { return std::nullopt; }

double demo_decay(std::int64_t r) {
  if (r <= 0) return std::numeric_limits<double>::infinity();
  const double x = static_cast<double>(r);
  return 1.0 / std::sqrt(x * std::log(x + 2.0));
}

namespace {

class ConstantFamily final : public MarginalFamily {
 public:
  using MarginalFamily::MarginalFamily;
  std::string kind_name() const override { return "constant"; }
  double profile0(const GroupElement&) const override { return lambda0_; }
  std::optional<double> radial_profile0(std::int64_t) const override { return lambda0_; }
  std::optional<std::vector<GroupElement>> finite_support() const override { return std::vector<GroupElement>{}; }
  TailEstimate kakutani_tail(const GroupElement&, std::int64_t) const override { return {0.0, true}; }
  std::optional<double> z_far_tail_bound(std::int64_t, std::int64_t) const override { return 0.0; }
  std::optional<double> pinned_deviation_bound() const override { return 0.0; }
};

// Largest |n| among pinned block sites on Z (block indices are even, i.e. n < 0).
std::int64_t z_block_radius(const PinnedRule& rule) {
  return rule.kind == PinnedRuleKind::BlockThenPowerOfTwo ? static_cast<std::int64_t>(rule.block) : 0;
}

class RadialDemoFamily final : public MarginalFamily {
 public:
  RadialDemoFamily(GroupModel model, double lambda0, double delta, PinnedRule rule)
      : MarginalFamily(std::move(model), lambda0, delta, rule) {
    if (model_.kind() != GroupKind::Z && model_.kind() != GroupKind::Z2)
      throw ConfigError("radial demo family needs group Z or Z2");
    if (lambda0_ + delta_ > 1.0 - delta_) throw ConfigError("lambda0 + delta must not exceed 1 - delta");
  }
  std::string kind_name() const override { return model_.kind() == GroupKind::Z ? "z_demo" : "z2_demo"; }
  double profile0(const GroupElement& g) const override { return value(g.word_length()); }
  std::optional<double> radial_profile0(std::int64_t r) const override { return value(r); }

  TailEstimate kakutani_tail(const GroupElement& g, std::int64_t R) const override {
    if (model_.kind() != GroupKind::Z) return MarginalFamily::kakutani_tail(g, R);
    const std::int64_t n = g.z_value();
    const std::int64_t an = std::llabs(n);
    std::int64_t R2 = std::max(2 * R + 2 * an, z_block_radius(rule_) + 2 * an + 1024);
    while (!z_far_tail_bound(n, R2)) R2 *= 2;
    double s = 0.0;
    for (std::int64_t h = R + 1; h <= R2; ++h) {
      for (std::int64_t hh : {-h, h}) {
        const double d = mu0(GroupElement::z(hh + n)) - mu0(GroupElement::z(hh));
        s += d * d;
      }
    }
    return {s + *z_far_tail_bound(n, R2), true};
  }

  // For |h| > R2 write mu_h = lambda + F(|h|)(1 - pin(h)). A term with neither
  // site pinned is (F(|h+g|) - F(|h|))^2; with one site pinned it is F of the
  // other site squared; with both pinned it vanishes. The smooth part uses
  // |F'(m)| <= kappa(m) m^{-3/2}, kappa decreasing, which sums to at most
  // g^2 kappa(M)^2 / (M - 1)^2 over both sides, M = R2 - |g|. Each pinned p
  // with |p| > M adds at most F(|p| - |g|)^2 twice (h = p and h = p - g).
  std::optional<double> z_far_tail_bound(std::int64_t g, std::int64_t R2) const override {
    if (model_.kind() != GroupKind::Z) return std::nullopt;
    const std::int64_t ag = std::llabs(g);
    const std::int64_t M = R2 - ag;
    if (M < 1024 || M <= z_block_radius(rule_) || demo_decay(M) >= delta_) return std::nullopt;
    const double lm = std::log(static_cast<double>(M));
    const double kappa = (1.0 + 1.0 / lm) / (2.0 * std::sqrt(lm));
    const double gm = static_cast<double>(ag), m1 = static_cast<double>(M - 1);
    const double smooth = gm * gm * kappa * kappa / (m1 * m1);
    double pins = 0.0;
    if (rule_.kind != PinnedRuleKind::None) {
      for (int j = 3; j <= 62; ++j) {
        const std::uint64_t idx = std::uint64_t{1} << j;
        if (!rule_.contains(idx)) continue;
        const std::int64_t p = std::llabs(model_.element_at(idx).z_value());
        if (p > M) {
          const double f = demo_decay(p - ag);
          pins += 2.0 * f * f;
        }
      }
    }
    return smooth + pins;
  }

  std::optional<double> pinned_deviation_bound() const override {
    if (rule_.kind == PinnedRuleKind::None) return 0.0;
    auto dev2 = [&](std::uint64_t idx) {
      const double d = profile0(model_.element_at(idx)) - lambda0_;
      return d * d;
    };
    double s = 0.0;
    if (rule_.kind == PinnedRuleKind::BlockThenPowerOfTwo)
      for (std::uint64_t i = 2; i <= 2 * rule_.block; i += 2) s += dev2(i);
    for (int j = 3; j <= 62; ++j) {
      const std::uint64_t idx = std::uint64_t{1} << j;
      const bool in_block = rule_.kind == PinnedRuleKind::BlockThenPowerOfTwo && idx <= 2 * rule_.block;
      if (!in_block) s += dev2(idx);
    }
    return s;
  }

 private:
  double value(std::int64_t r) const { return lambda0_ + std::min(delta_, demo_decay(r)); }
};

class LamplighterFolnerFamily final : public MarginalFamily {
 public:
  LamplighterFolnerFamily(GroupModel model, double lambda0, double delta, PinnedRule rule)
      : MarginalFamily(std::move(model), lambda0, delta, rule) {
    if (model_.kind() != GroupKind::Lamplighter) throw ConfigError("lamplighter_folner family needs the lamplighter group");
    if (lambda0_ + delta_ > 1.0 - delta_) throw ConfigError("lambda0 + delta must not exceed 1 - delta");
  }
  std::string kind_name() const override { return "lamplighter_folner"; }
  bool heuristic() const override { return true; }
  double profile0(const GroupElement& g) const override {
    std::int64_t level = std::llabs(g.a());
    for (auto l : g.tail()) level = std::max<std::int64_t>(level, std::llabs(l));
    if (!g.tail().empty()) level = std::max<std::int64_t>(level, 1);
    return lambda0_ + std::min(delta_, demo_decay(level));
  }
};

class FinitelyPerturbedFamily final : public MarginalFamily {
 public:
  FinitelyPerturbedFamily(GroupModel model, double lambda0, double delta,
                          std::vector<std::pair<GroupElement, double>> values, PinnedRule rule)
      : MarginalFamily(std::move(model), lambda0, delta, rule) {
    for (auto& [g, v] : values) {
      model_.require(g);
      if (!(v >= delta_ && v <= 1.0 - delta_)) throw ConfigError("perturbed marginal outside [delta, 1 - delta]");
      if (std::any_of(support_.begin(), support_.end(), [&](const auto& e) { return e.first == g; }))
        throw ConfigError("duplicate perturbed site " + g.normal_form());
      support_.emplace_back(g, v);
    }
    std::sort(support_.begin(), support_.end(), [](const auto& x, const auto& y) { return canonical_compare(x.first, y.first) < 0; });
  }
  std::string kind_name() const override { return "finitely_perturbed"; }
  bool pinned(const GroupElement& g) const override {
    if (lookup(g)) return false;
    return MarginalFamily::pinned(g);
  }
  double profile0(const GroupElement& g) const override {
    auto v = lookup(g);
    return v ? *v : lambda0_;
  }
  std::optional<std::vector<GroupElement>> finite_support() const override {
    std::vector<GroupElement> out;
    for (const auto& [g, v] : support_)
      if (v != lambda0_) out.push_back(g);
    return out;
  }
  TailEstimate kakutani_tail(const GroupElement& g, std::int64_t R) const override {
    // Nonzero terms only at h in F or g^{-1}F.
    std::vector<GroupElement> sites;
    const auto gi = inv(g);
    const auto F = finite_support();
    for (const auto& f : *F) {
      sites.push_back(f);
      sites.push_back(mul(gi, f));
    }
    std::sort(sites.begin(), sites.end(), CanonicalLess{});
    sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
    double s = 0.0;
    for (const auto& h : sites) {
      if (h.word_length() <= R) continue;
      const double d = mu0(mul(g, h)) - mu0(h);
      s += d * d;
    }
    return {s, true};
  }
  std::optional<double> z_far_tail_bound(std::int64_t g, std::int64_t R2) const override {
    if (model_.kind() != GroupKind::Z) return std::nullopt;
    double s = 0.0;
    const auto F = finite_support();
    for (const auto& f : *F) {
      for (std::int64_t h : {f.z_value(), f.z_value() - g}) {
        if (std::llabs(h) <= R2) continue;
        const double d = mu0(GroupElement::z(h + g)) - mu0(GroupElement::z(h));
        s += d * d;
      }
    }
    return s;
  }
  std::optional<double> pinned_deviation_bound() const override { return 0.0; }

 private:
  std::optional<double> lookup(const GroupElement& g) const {
    for (const auto& [e, v] : support_)
      if (e == g) return v;
    return std::nullopt;
  }
  std::vector<std::pair<GroupElement, double>> support_;
};

class F2RadialFamily final : public MarginalFamily {
 public:
  F2RadialFamily(GroupModel model, double lambda0, double delta, double base, PinnedRule rule)
      : MarginalFamily(std::move(model), lambda0, delta, rule), base_(base) {
    if (model_.kind() != GroupKind::F2) throw ConfigError("f2_radial family needs group F2");
    if (!(base_ > 1.0)) throw ConfigError("f2_radial base must exceed 1");
    if (lambda0_ + delta_ > 1.0 - delta_) throw ConfigError("lambda0 + delta must not exceed 1 - delta");
  }
  std::string kind_name() const override { return "f2_radial"; }
  double profile0(const GroupElement& g) const override { return value(g.word_length()); }
  std::optional<double> radial_profile0(std::int64_t r) const override { return value(r); }
  TailEstimate kakutani_tail(const GroupElement& g, std::int64_t R) const override {
    // |gh| >= |h| - |g| and the profile decreases, so each term is at most
    // min(delta, base^{-(|h|-|g|)})^2, summed with sphere sizes 4*3^{r-1}.
    if (rule_.kind != PinnedRuleKind::None || 3.0 / (base_ * base_) >= 1.0) return MarginalFamily::kakutani_tail(g, R);
    const std::int64_t ag = g.word_length();
    double s = 0.0;
    double log_sphere = std::log(4.0) + static_cast<double>(R) * std::log(3.0);  // log |S(R+1)|
    for (std::int64_t r = R + 1; r <= R + 400; ++r, log_sphere += std::log(3.0)) {
      const double f = std::min(std::log(delta_), -static_cast<double>(r - ag) * std::log(base_));
      s += std::exp(log_sphere + 2.0 * f);
    }
    const double q = 3.0 / (base_ * base_);
    s += std::exp(log_sphere + 2.0 * (-static_cast<double>(R + 401 - ag) * std::log(base_))) / (1.0 - q);
    return {s, true};
  }

 private:
  double value(std::int64_t r) const { return lambda0_ + std::min(delta_, std::pow(base_, -static_cast<double>(r))); }
  double base_;
};

class RelabeledFamily final : public MarginalFamily {
 public:
  explicit RelabeledFamily(FamilyPtr base)
      : MarginalFamily(base->model(), 1.0 - base->lambda0(), base->delta(), base->pinned_rule()), base_(std::move(base)) {}
  std::string kind_name() const override { return base_->kind_name() + "_relabeled"; }
  bool pinned(const GroupElement& g) const override { return base_->pinned(g); }
  double profile0(const GroupElement& g) const override { return 1.0 - base_->profile0(g); }
  std::optional<double> radial_profile0(std::int64_t r) const override {
    auto v = base_->radial_profile0(r);
    if (v) return 1.0 - *v;
    return std::nullopt;
  }
  std::optional<std::vector<GroupElement>> finite_support() const override { return base_->finite_support(); }
  bool heuristic() const override { return base_->heuristic(); }
  TailEstimate kakutani_tail(const GroupElement& g, std::int64_t R) const override { return base_->kakutani_tail(g, R); }
  std::optional<double> z_far_tail_bound(std::int64_t g, std::int64_t R2) const override {
    return base_->z_far_tail_bound(g, R2);
  }
  std::optional<double> pinned_deviation_bound() const override { return base_->pinned_deviation_bound(); }

 private:
  FamilyPtr base_;
};

void check_radii(const std::vector<std::int64_t>& radii) {
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (radii[i] < 0) throw PreconditionError("radius must be nonnegative");
    if (i && radii[i] < radii[i - 1]) throw PreconditionError("radii must be nondecreasing");
  }
}

// Accumulates term(h) sphere by sphere and records the running sum at each radius.
template <class Term>
std::vector<double> sphere_series(const MarginalFamily& family, const std::vector<std::int64_t>& radii, Term&& term) {
  check_radii(radii);
  std::vector<double> out;
  if (radii.empty()) return out;
  const auto& model = family.model();
  model.ball_size(radii.back());  // cap check before any work
  if (model.ball_size(radii.back()) > model.ball_cap())
    throw ResourceLimitError("ball(" + std::to_string(radii.back()) + ") exceeds cap");
  double s = 0.0;
  std::size_t next = 0;
  for (std::int64_t r = 0; r <= radii.back(); ++r) {
    if (model.kind() == GroupKind::Z) {
      if (r == 0) {
        s += term(GroupElement::z(0));
      } else {
        s += term(GroupElement::z(-r));
        s += term(GroupElement::z(r));
      }
    } else {
      for (const auto& h : model.sphere(r)) s += term(h);
    }
    while (next < radii.size() && radii[next] == r) out.push_back(s), ++next;
  }
  return out;
}

}  // namespace

FamilyPtr make_constant_family(GroupModel model, double lambda0, double delta, PinnedRule rule) {
  return std::make_shared<ConstantFamily>(std::move(model), lambda0, delta, rule);
}
FamilyPtr make_radial_demo_family(GroupModel model, double lambda0, double delta, PinnedRule rule) {
  return std::make_shared<RadialDemoFamily>(std::move(model), lambda0, delta, rule);
}
FamilyPtr make_lamplighter_folner_family(GroupModel model, double lambda0, double delta, PinnedRule rule) {
  return std::make_shared<LamplighterFolnerFamily>(std::move(model), lambda0, delta, rule);
}
FamilyPtr make_finitely_perturbed_family(GroupModel model, double lambda0, double delta,
                                         std::vector<std::pair<GroupElement, double>> values, PinnedRule rule) {
  return std::make_shared<FinitelyPerturbedFamily>(std::move(model), lambda0, delta, std::move(values), rule);
}
FamilyPtr make_f2_radial_family(GroupModel model, double lambda0, double delta, double base, PinnedRule rule) {
  return std::make_shared<F2RadialFamily>(std::move(model), lambda0, delta, base, rule);
}
FamilyPtr relabeled(FamilyPtr base) { return std::make_shared<RelabeledFamily>(std::move(base)); }

ZProfileTable make_z_table(const MarginalFamily& family, std::int64_t W) {
  if (family.model().kind() != GroupKind::Z) throw ModelMismatchError("dense profile table needs group Z");
  ZProfileTable t;
  t.W = W;
  t.mu0 = parallel_map<double>(static_cast<std::size_t>(2 * W + 1), [&](std::size_t i) {
    return family.mu0(GroupElement::z(static_cast<std::int64_t>(i) - W));
  });
  return t;
}

std::vector<double> kakutani_series(const MarginalFamily& family, const GroupElement& g,
                                    const std::vector<std::int64_t>& radii) {
  family.model().require(g);
  check_radii(radii);
  if (radii.empty()) return {};
  if (family.model().kind() == GroupKind::Z) {
    const std::int64_t n = g.z_value();
    const auto t = make_z_table(family, radii.back() + std::llabs(n));
    return sphere_series(family, radii, [&](const GroupElement& h) {
      const double d = t(h.z_value() + n) - t(h.z_value());
      return d * d;
    });
  }
  return sphere_series(family, radii, [&](const GroupElement& h) {
    const double d = family.mu0(mul(g, h)) - family.mu0(h);
    return d * d;
  });
}

double kakutani_partial(const MarginalFamily& family, const GroupElement& g, std::int64_t R) {
  return kakutani_series(family, g, {R}).front();
}

std::vector<double> divergence_series(const MarginalFamily& family, const std::vector<std::int64_t>& radii, Side side) {
  const double l = family.lambda0();
  auto term_of = [&](double m) {
    if (side == Side::Plus && !(m > l)) return 0.0;
    return (m - l) * (m - l);
  };
  check_radii(radii);
  if (radii.empty()) return {};
  if (family.model().kind() == GroupKind::Z) {
    const auto t = make_z_table(family, radii.back());
    return sphere_series(family, radii, [&](const GroupElement& h) { return term_of(t(h.z_value())); });
  }
  return sphere_series(family, radii, [&](const GroupElement& h) { return term_of(family.mu0(h)); });
}

double divergence_partial(const MarginalFamily& family, std::int64_t R, Side side) {
  return divergence_series(family, {R}, side).front();
}

std::vector<std::vector<double>> conservativity_series(const MarginalFamily& family, const std::vector<double>& cs,
                                                       const std::vector<std::int64_t>& radii, std::int64_t R_inner) {
  for (double c : cs)
    if (!(c > 0.0)) throw PreconditionError("conservativity exponent c must be positive");
  check_radii(radii);
  if (R_inner < 0) throw PreconditionError("inner radius must be nonnegative");
  std::vector<std::vector<double>> out(cs.size());
  if (radii.empty()) return out;
  const auto& model = family.model();
  const std::int64_t Rmax = radii.back();
  // Kakutani sums K(g) for g in ball(Rmax), in canonical order.
  std::vector<double> K;
  if (model.kind() == GroupKind::Z) {
    const auto t = make_z_table(family, Rmax + R_inner);
    K = parallel_map<double>(static_cast<std::size_t>(2 * Rmax + 1), [&](std::size_t i) {
      const std::int64_t n = model.element_at(i + 1).z_value();
      double s = 0.0;
      for (std::int64_t h = -R_inner; h <= R_inner; ++h) {
        const double d = t(h + n) - t(h);
        s += d * d;
      }
      return s;
    });
  } else {
    const auto elems = model.ball(Rmax);
    K = parallel_map<double>(elems.size(), [&](std::size_t i) { return kakutani_partial(family, elems[i], R_inner); });
  }
  for (std::size_t ci = 0; ci < cs.size(); ++ci) {
    double s = 0.0;
    std::size_t next = 0, pos = 0;
    for (std::int64_t r = 0; r <= Rmax; ++r) {
      const std::uint64_t end = model.ball_size(r);
      for (; pos < end; ++pos) s += std::exp(-cs[ci] * K[pos]);
      while (next < radii.size() && radii[next] == r) out[ci].push_back(s), ++next;
    }
  }
  return out;
}

double conservativity_partial(const MarginalFamily& family, double c, std::int64_t R, std::int64_t R_inner) {
  return conservativity_series(family, {c}, {R}, R_inner).front().front();
}

std::vector<double> l2_tail_series(const MarginalFamily& family, const std::vector<std::int64_t>& radii) {
  check_radii(radii);
  if (radii.empty()) return {};
  if (family.pinned_rule().kind == PinnedRuleKind::None && family.radial_profile0(0) &&
      family.model().kind() != GroupKind::Lamplighter) {
    // Radial closed form: sum_r |S(r)| (p(r) - lambda)^2.
    std::vector<double> out;
    double s = 0.0;
    std::size_t next = 0;
    for (std::int64_t r = 0; r <= radii.back(); ++r) {
      const double d = *family.radial_profile0(r) - family.lambda0();
      const double size = family.model().kind() == GroupKind::F2 && r > 0
                              ? 4.0 * std::pow(3.0, static_cast<double>(r - 1))
                              : static_cast<double>(family.model().sphere_size(r));
      s += size * d * d;
      while (next < radii.size() && radii[next] == r) out.push_back(s), ++next;
    }
    return out;
  }
  return divergence_series(family, radii, Side::All);
}

double l2_tail_profile(const MarginalFamily& family, std::int64_t R) { return l2_tail_series(family, {R}).front(); }

double pinned_deviation_sum(const MarginalFamily& family, std::int64_t R) {
  return sphere_series(family, {R}, [&](const GroupElement& h) {
    if (!family.pinned(h)) return 0.0;
    const double d = family.profile0(h) - family.lambda0();
    return d * d;
  }).front();
}

}  // namespace nsb

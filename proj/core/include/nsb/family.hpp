#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nsb/group.hpp"

namespace nsb {

enum class Sign { Plus, Minus, Neutral };
std::string to_string(Sign s);

// eta_g(a) = log(mu_g(a) / lambda(a)).
struct EtaWeights {
  double eta0 = 0.0;
  double eta1 = 0.0;
  double spread() const { return eta0 - eta1; }
};

enum class PinnedRuleKind { None, PowerOfTwo, BlockThenPowerOfTwo };

// Which canonical indices carry pinned marginals mu_g = lambda.
//   PowerOfTwo           indices 2^j, j >= 3
//   BlockThenPowerOfTwo  even indices up to 2*block, plus the PowerOfTwo sites
struct PinnedRule {
  PinnedRuleKind kind = PinnedRuleKind::BlockThenPowerOfTwo;
  std::uint64_t block = 32768;

  bool contains(std::uint64_t index) const;
  std::string name() const;
  static PinnedRule parse(std::string_view name, std::uint64_t block = 32768);
};

struct TailEstimate {
  double value = 0.0;
  bool rigorous = false;
};

class MarginalFamily {
 public:
  MarginalFamily(GroupModel model, double lambda0, double delta, PinnedRule rule);
  virtual ~MarginalFamily() = default;

  const GroupModel& model() const { return model_; }
  double lambda0() const { return lambda0_; }
  double lambda(int a) const { return a == 0 ? lambda0_ : 1.0 - lambda0_; }
  double delta() const { return delta_; }
  const PinnedRule& pinned_rule() const { return rule_; }

  virtual bool pinned(const GroupElement& g) const;

  // Marginal mu_g(0); exactly lambda(0) on pinned sites. Throws
  // InvariantViolation if the profile leaves [delta, 1 - delta].
  double mu0(const GroupElement& g) const;
  double mu(const GroupElement& g, int a) const { return a == 0 ? mu0(g) : 1.0 - mu0(g); }
  EtaWeights eta(const GroupElement& g) const;
  Sign classify(const GroupElement& g) const;

  virtual std::string kind_name() const = 0;
  // Unpinned profile value.
  virtual double profile0(const GroupElement& g) const = 0;
  // Set when the profile depends only on word length.
  virtual std::optional<double> radial_profile0(std::int64_t) const { return std::nullopt; }
  // Set for families equal to lambda off a finite set.
  virtual std::optional<std::vector<GroupElement>> finite_support() const { return std::nullopt; }
  virtual bool heuristic() const { return false; }

  // Estimate of sum over h outside ball(R) of (mu_gh(0) - mu_h(0))^2.
  virtual TailEstimate kakutani_tail(const GroupElement& g, std::int64_t R) const;
  // Z only: rigorous bound on the same sum restricted to |h| > R2, if the
  // family admits one. Callers sum |h| <= R2 themselves.
  virtual std::optional<double> z_far_tail_bound(std::int64_t g, std::int64_t R2) const;

  // Declared bound on the sum over all pinned g of (profile0(g) - lambda(0))^2.
  virtual std::optional<double> pinned_deviation_bound() const { return std::nullopt; }

 protected:
  GroupModel model_;
  double lambda0_;
  double delta_;
  PinnedRule rule_;
};

using FamilyPtr = std::shared_ptr<const MarginalFamily>;

// Demo profile decay (r log(r + 2))^(-1/2); infinite at r = 0.
double demo_decay(std::int64_t r);

FamilyPtr make_constant_family(GroupModel model, double lambda0, double delta, PinnedRule rule = {});
// mu_g(0) = lambda0 + min(delta, demo_decay(|g|)); Z uses |n|, Z2 the L1 radius.
FamilyPtr make_radial_demo_family(GroupModel model, double lambda0 = 0.5, double delta = 0.1, PinnedRule rule = {});
// Heuristic profile on the lamplighter group driven by the furthest site the
// element touches; no analytic guarantee.
FamilyPtr make_lamplighter_folner_family(GroupModel model, double lambda0 = 0.5, double delta = 0.1,
                                         PinnedRule rule = {});
// Equal to lambda off the listed sites. Listed sites are never pinned.
FamilyPtr make_finitely_perturbed_family(GroupModel model, double lambda0, double delta,
                                         std::vector<std::pair<GroupElement, double>> values,
                                         PinnedRule rule = {PinnedRuleKind::PowerOfTwo, 0});
// mu_g(0) = lambda0 + min(delta, base^(-|g|)), no pinned sites by default.
FamilyPtr make_f2_radial_family(GroupModel model, double lambda0 = 0.5, double delta = 0.1, double base = 2.0,
                                PinnedRule rule = {PinnedRuleKind::None, 0});
// Symbol-swapped family: mu'_g(0) = mu_g(1), lambda'(0) = lambda(1).
FamilyPtr relabeled(FamilyPtr base);

// Dense copy of mu_n(0) for n in [-W, W] on Z.
struct ZProfileTable {
  std::int64_t W = 0;
  std::vector<double> mu0;
  double operator()(std::int64_t n) const { return mu0[static_cast<std::size_t>(n + W)]; }
  bool covers(std::int64_t n) const { return n >= -W && n <= W; }
};
ZProfileTable make_z_table(const MarginalFamily& family, std::int64_t W);

enum class Side { Plus, All };

double kakutani_partial(const MarginalFamily& family, const GroupElement& g, std::int64_t R);
std::vector<double> kakutani_series(const MarginalFamily& family, const GroupElement& g,
                                    const std::vector<std::int64_t>& radii);

double divergence_partial(const MarginalFamily& family, std::int64_t R, Side side);
std::vector<double> divergence_series(const MarginalFamily& family, const std::vector<std::int64_t>& radii, Side side);

double conservativity_partial(const MarginalFamily& family, double c, std::int64_t R, std::int64_t R_inner);
// values[i][j] for cs[i], radii[j]; Kakutani sums are shared across c.
std::vector<std::vector<double>> conservativity_series(const MarginalFamily& family, const std::vector<double>& cs,
                                                       const std::vector<std::int64_t>& radii, std::int64_t R_inner);

double l2_tail_profile(const MarginalFamily& family, std::int64_t R);
std::vector<double> l2_tail_series(const MarginalFamily& family, const std::vector<std::int64_t>& radii);

// Sum over pinned g in ball(R) of (profile0(g) - lambda(0))^2.
double pinned_deviation_sum(const MarginalFamily& family, std::int64_t R);

}  // namespace nsb

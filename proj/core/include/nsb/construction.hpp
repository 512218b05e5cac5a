#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nsb/configuration.hpp"
#include "nsb/stats.hpp"

namespace nsb {

// Pair k couples the k-th pinned site g_k with the k-th unpinned site h_k of
// the canonical enumeration.
struct SwapPair {
  std::size_t k = 0;  // 1-based
  GroupElement pinned;
  GroupElement free;
  double free_mu0 = 0.5;
  EtaWeights free_eta;
  bool active = false;
  std::string exclusion;  // "", "window", "large_increment"

  double d() const { return free_eta.spread(); }
};

struct SwapSchedule {
  FamilyPtr family;
  double eps = 0.0;
  std::vector<GroupElement> window;  // K
  std::vector<SwapPair> pairs;       // every examined k, in order
  std::vector<std::size_t> active;   // positions in pairs of active entries
  std::vector<std::size_t> excluded;  // the index set M (values of k)

  // Per active pair, in walk order.
  std::vector<double> d;
  std::vector<double> p_up;    // P(F = +d) = mu_h(0) lambda(1)
  std::vector<double> p_down;  // P(F = -d) = mu_h(1) lambda(0)
  std::vector<std::uint64_t> key_pinned, key_free;
  std::vector<double> mu_pinned, mu_free;

  std::size_t active_count() const { return active.size(); }
  const SwapPair& active_pair(std::size_t n) const { return pairs[active[n]]; }  // n is 0-based
  const SwapPair& pair(std::size_t k) const;                                      // k is 1-based
};

SwapSchedule build_schedule(FamilyPtr family, const std::vector<GroupElement>& K, double eps, std::size_t budget);

// F_k(x) = eta_h(x_h) - eta_h(x_g) for active pair k (1-based pair index).
double f_increment(const SwapSchedule& s, std::size_t k, const Configuration& x);

struct IncrementMoments {
  double mean = 0.0;
  double second = 0.0;  // E[F^2]
  double variance = 0.0;
};
IncrementMoments f_moments(const SwapSchedule& s, std::size_t k);

// Log of the exact measure ratio mu(cyl x) / mu(cyl tau_k x) on {g_k, h_k},
// computed from the marginals directly.
double tau_rn(const SwapSchedule& s, std::size_t k, const Configuration& x);
Configuration apply_swap(const SwapSchedule& s, std::size_t k, const Configuration& x);

// S_n: sum of F over the first n active pairs.
double walk(const SwapSchedule& s, const Configuration& x, std::size_t n);

struct WalkStats {
  std::size_t n = 0;
  double A = 0.0;  // exact mean of S_n
  double B = 0.0;  // exact standard deviation of S_n
};
WalkStats walk_stats(const SwapSchedule& s, std::size_t n);

enum class HorizonMode { Auto, Exact, MonteCarlo };
std::string to_string(HorizonMode m);

struct HorizonOptions {
  HorizonMode mode = HorizonMode::Auto;
  std::size_t exact_limit = 256;
  double bin_width_factor = 1e-4;  // bin width = factor * eps
  double margin_floor = 0.01;
  std::size_t mc_samples = 20000;
  std::uint64_t seed = 0x5eed;
  double target = 1.0 / 3.0;
  std::size_t max_n = 0;  // 0: all active pairs
};

struct HorizonResult {
  std::size_t horizon = 0;
  HorizonMode mode = HorizonMode::Exact;
  double probability = 0.0;
  double lower = 0.0;
  double upper = 1.0;
  double bin_width = 0.0;
  double position_error = 0.0;
};

// Smallest N with P(sign * S_N > sign * t) >= target + margin.
HorizonResult find_horizon(const SwapSchedule& s, double t, int sign, const HorizonOptions& opt = {});

// Exact law of sign * S_n on a grid: returns the rigorous [lower, upper]
// bracket for P(sign * S_n > sign * t).
Interval exact_tail_probability(const SwapSchedule& s, std::size_t n, double t, int sign, double bin_width);
double mc_tail_probability(const SwapSchedule& s, std::size_t n, double t, int sign, std::size_t samples,
                           std::uint64_t seed);

// Walk values within this of the threshold count as not above it, so sums of
// equal increments that cancel in exact arithmetic are not decided by rounding.
inline constexpr double kWalkTie = 1e-12;

struct WalkTrace {
  bool above = false;  // some n <= N with W_n > tau
  std::size_t t_above = 0;
  double w_above = 0.0;
  bool below = false;  // some n <= N with -W_n > tau
  std::size_t t_below = 0;
  double w_below = 0.0;
  double w_final = 0.0;
};

// Partial transformation swapping g_k <-> h_k for k <= T(x). With sign +,
// Dom = {S_N > t} and T = min{n : S_n > t}; sign - mirrors both inequalities.
// A translation c gives the conjugate c o phi o c^{-1}: sites move to c g_k,
// c h_k while the increment weights stay those of the original pair.
class PhiMap {
 public:
  PhiMap(std::shared_ptr<const SwapSchedule> schedule, double t, double eps, std::size_t N, int sign,
         std::optional<GroupElement> translation = std::nullopt);

  const SwapSchedule& schedule() const { return *schedule_; }
  std::shared_ptr<const SwapSchedule> schedule_ptr() const { return schedule_; }
  double t() const { return t_; }
  double eps() const { return eps_; }
  std::size_t horizon() const { return N_; }
  int sign() const { return sign_; }
  const GroupElement& translation() const { return translation_; }

  GroupElement pinned_site(std::size_t n) const;  // 0-based active position
  GroupElement free_site(std::size_t n) const;
  std::vector<GroupElement> support() const;

  WalkTrace trace(const Configuration& x) const;
  bool in_domain(const Configuration& x) const;
  std::optional<std::size_t> stopping_time(const Configuration& x) const;
  Configuration apply(const Configuration& x) const;
  double rn(const Configuration& x) const;  // S_T(x)
  bool in_image(const Configuration& z) const;
  Configuration preimage(const Configuration& z) const;
  PhiMap conjugated(const GroupElement& g) const;

  bool in_domain(const WalkTrace& w) const { return w.above && w.w_final > tau() + kWalkTie; }
  bool in_image(const WalkTrace& w) const { return w.below && w.w_final - 2.0 * w.w_below > tau() + kWalkTie; }

  // Walk for the point g x given the symbols of x on [lo, lo + win.size()) (group Z).
  template <class Sym>
  WalkTrace trace_with(Sym&& sym) const;
  WalkTrace trace_z(const std::vector<std::int8_t>& win, std::int64_t lo, std::int64_t g) const;

 private:
  double tau() const { return sign_ * t_; }

  std::shared_ptr<const SwapSchedule> schedule_;
  double t_, eps_;
  std::size_t N_;
  int sign_;
  GroupElement translation_;
  bool translated_ = false;
  std::vector<double> step_;  // sign * d per active pair
  std::vector<std::int64_t> z_pinned_, z_free_;  // translated sites on Z
};

template <class Sym>
WalkTrace PhiMap::trace_with(Sym&& sym) const {
  WalkTrace w;
  const double tau_ = tau() + kWalkTie;
  double W = 0.0;
  for (std::size_t n = 0; n < N_; ++n) {
    const int a = sym(n, false);
    const int b = sym(n, true);
    if (b == 0 && a == 1) {
      W += step_[n];
    } else if (b == 1 && a == 0) {
      W -= step_[n];
    }
    if (!w.above && W > tau_) {
      w.above = true;
      w.t_above = n + 1;
      w.w_above = W;
    }
    if (!w.below && -W > tau_) {
      w.below = true;
      w.t_below = n + 1;
      w.w_below = W;
    }
  }
  w.w_final = W;
  return w;
}

struct DomainEstimate {
  std::uint64_t samples = 0;
  std::uint64_t inside = 0;
  double fraction = 0.0;
  Interval ci;                       // 99% one-sided Wilson bounds
  std::uint64_t rn_violations = 0;   // domain points with phi_rn outside (t, t + eps)
  double rn_min = 0.0, rn_max = 0.0;
};
DomainEstimate estimate_domain(const PhiMap& phi, std::uint64_t samples, std::uint64_t seed);

struct BuildPhiOptions {
  std::size_t budget = 16384;
  HorizonOptions horizon;
  std::uint64_t domain_samples = 10000;
  std::uint64_t seed = 0x9417;
};

struct PhiBuild {
  std::shared_ptr<const PhiMap> phi;
  HorizonResult horizon;
  DomainEstimate domain;
};

PhiBuild build_phi(FamilyPtr family, const std::vector<GroupElement>& K, double t, double eps, int sign,
                   const BuildPhiOptions& opt = {});

struct InjectivityReport {
  std::uint64_t domain_points = 0;
  std::uint64_t collisions = 0;
  std::uint64_t sign_flip_violations = 0;
  bool ok() const { return collisions == 0 && sign_flip_violations == 0; }
};
// Images are compared through two independent 64-bit hashes of the image
// restricted to supp(phi).
InjectivityReport injectivity_audit(const PhiMap& phi, std::uint64_t samples, std::uint64_t seed);

struct CltReport {
  std::size_t n = 0;
  std::uint64_t samples = 0;
  double ks = 0.0;
  WalkStats exact;
  double sample_mean = 0.0;
  double sample_variance = 0.0;
  double mean_z = 0.0;      // (sample mean - A) / SE
  double variance_z = 0.0;  // (sample var - B^2) / SE
  bool moments_ok() const;
};
CltReport clt_check(const SwapSchedule& s, std::size_t n, std::uint64_t samples, std::uint64_t seed);

}  // namespace nsb

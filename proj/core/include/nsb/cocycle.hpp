#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "nsb/configuration.hpp"
#include "nsb/construction.hpp"

namespace nsb {

// Partial sum of the RN cocycle over ball(radius) together with bounds on the
// mean and spread of the omitted tail. The three numbers travel together.
struct CocycleEstimate {
  double value = 0.0;
  std::int64_t radius = 0;
  double tail_mean_bound = 0.0;
  double tail_std_bound = 0.0;
  bool tail_rigorous = true;

  // Width to subtract before trusting |value - t| < eps.
  double slack(double k = 3.0) const { return tail_mean_bound + k * tail_std_bound; }
};

// Each omitted term X_h = log mu_h(x_h) - log mu_gh(x_h) has mean
// KL(mu_h, mu_gh) <= D^2 / (delta (1 - delta)) and variance
// <= D^2 / (4 delta^2 (1 - delta)^2), D = mu_gh(0) - mu_h(0). Summed over the
// tail these give mean_constant * K and sqrt(variance_constant * K) with K the
// Kakutani tail. Zero picks these defaults.
struct CocycleOptions {
  double mean_constant = 0.0;
  double variance_constant = 0.0;
};

double tail_mean_constant(const MarginalFamily& family, const CocycleOptions& opt = {});
double tail_variance_constant(const MarginalFamily& family, const CocycleOptions& opt = {});

// Tail bounds alone (value 0) for truncation at R.
CocycleEstimate cocycle_tail(const MarginalFamily& family, const GroupElement& g, std::int64_t R,
                             const CocycleOptions& opt = {});

// r(g, x) truncated to h in ball(R): sum of log mu_h(x_h) - log mu_{gh}(x_h).
CocycleEstimate rn_cocycle(const MarginalFamily& family, const GroupElement& g, const Configuration& x, std::int64_t R,
                           const CocycleOptions& opt = {});

// c(x, x2) = sum over differing coordinates of eta_g(x_g) - eta_g(x2_g).
double gibbs_cocycle(const MarginalFamily& family, const Configuration& x, const Configuration& x2);
double gibbs_cocycle(const MarginalFamily& family, const Configuration& x, const Configuration& x2,
                     const std::vector<GroupElement>& difference);

using EtaFn = std::function<EtaWeights(const GroupElement&)>;
double gibbs_general(const EtaFn& eta, const Configuration& x, const Configuration& x2);
double gibbs_general(const EtaFn& eta, const Configuration& x, const Configuration& x2,
                     const std::vector<GroupElement>& difference);

// L = {g : max_a |eta_g(a)| >= eps / (2 supp_size)}, scanned over ball(R_search).
struct ComparisonSet {
  double threshold = 0.0;
  std::int64_t radius = 0;
  std::vector<GroupElement> members;
  bool boundary_clear = true;
  std::vector<std::string> warnings;
};

double comparison_threshold(std::size_t supp_size, double eps);
bool in_comparison_set(const MarginalFamily& family, const GroupElement& g, double threshold);
ComparisonSet comparison_set(const MarginalFamily& family, std::size_t supp_size, double eps, std::int64_t R_search);
// True when no g s with s in supp(phi) lies in L.
bool avoids_comparison_set(const MarginalFamily& family, double threshold, const GroupElement& g, const PhiMap& phi);

// r(g, x) - r(g, phi x) - c(x, phi x), computed exactly over supp(phi).
double compare_defect(const MarginalFamily& family, const GroupElement& g, const PhiMap& phi, const Configuration& x);

// Batch evaluation of r(g, x) for all g in ball(max_shift) at a fixed
// truncation radius. On Z the whole shift range comes from one FFT
// cross-correlation; other groups fall back to direct sums.
class CocycleEngine {
 public:
  CocycleEngine(FamilyPtr family, std::int64_t R_trunc, std::int64_t max_shift, CocycleOptions opt = {});
  ~CocycleEngine();
  CocycleEngine(const CocycleEngine&) = delete;
  CocycleEngine& operator=(const CocycleEngine&) = delete;

  const FamilyPtr& family() const { return family_; }
  std::int64_t radius() const { return R_; }
  std::int64_t max_shift() const { return G_; }

  CocycleEstimate tail(const GroupElement& g) const;

  class Prepared {
   public:
    const Configuration& point() const { return x_; }
    CocycleEstimate at(const GroupElement& g) const;
    int symbol(const GroupElement& h) const;
    // Z only: symbols on [window_lo, window_lo + size).
    const std::vector<std::int8_t>& window() const { return win_; }
    std::int64_t window_lo() const { return lo_; }

   private:
    friend class CocycleEngine;
    Prepared(const CocycleEngine& e, Configuration x) : engine_(&e), x_(std::move(x)) {}
    const CocycleEngine* engine_;
    Configuration x_;
    std::vector<std::int8_t> win_;
    std::int64_t lo_ = 0;
    std::vector<double> values_;  // Z: index g + max_shift
  };

  Prepared prepare(const Configuration& x) const;

 private:
  struct Fft;
  FamilyPtr family_;
  std::int64_t R_, G_;
  CocycleOptions opt_;
  bool z_ = false;
  ZProfileTable table_;
  std::vector<double> L0_, L1_, D_;  // logs on [-R-G, R+G]
  std::unique_ptr<Fft> fft_;
  mutable std::mutex mu_;
  mutable std::unordered_map<GroupElement, CocycleEstimate, GroupElementHash> tails_;
};

}  // namespace nsb

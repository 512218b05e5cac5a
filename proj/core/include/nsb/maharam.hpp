#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nsb/cocycle.hpp"
#include "nsb/construction.hpp"
#include "nsb/stats.hpp"

namespace nsb {

// X = ({0,1}^G, mu) times an optional pmp Bernoulli factor (Y, nu) with
// constant marginal nu(0) = y_zeta0. The diagonal cocycle ignores y.
struct ProductSystem {
  FamilyPtr x_family;
  std::optional<double> y_zeta0;

  bool trivial_y() const { return !y_zeta0.has_value(); }
  FamilyPtr y_family() const;
};

struct ProductPoint {
  Configuration x;
  std::optional<Configuration> y;

  ProductPoint acted(const GroupElement& g) const;
};

// Point of (A x B) drawn from mu x nu conditioned on the cylinders; B is
// ignored for a trivial Y.
ProductPoint sample_product(const ProductSystem& system, std::uint64_t seed, const CylinderSet& A,
                            const CylinderSet& B = {});

double product_rn(const ProductSystem& system, const GroupElement& g, const ProductPoint& p, std::int64_t R);

struct MaharamPoint {
  ProductPoint point;
  double t = 0.0;
  // Accumulated tail bounds of the cocycle terms added to t.
  double tail_mean = 0.0;
  double tail_std = 0.0;
};

// (x, t) -> (g x, t + r(g, x)).
MaharamPoint maharam_step(const ProductSystem& system, const GroupElement& g, const MaharamPoint& p, std::int64_t R,
                          const CocycleOptions& opt = {});

struct PreservationReport {
  std::size_t window_size = 0;
  std::uint64_t patterns = 0;
  double lhs = 0.0;  // measure of g (A x I)
  double rhs = 0.0;  // measure of A x I
  double max_error = 0.0;
};

// Exact comparison of the skew-product measure mu x e^t dt on A x [a, b] and
// on its image under g, by enumerating patterns on K u F u g^{-1} F.
PreservationReport maharam_preservation_check(const FamilyPtr& oracle, const GroupElement& g,
                                              const CylinderSet& A, double a, double b);

struct ReturnEvent {
  std::uint64_t sample = 0;
  GroupElement g;
  CocycleEstimate r;
};

// |r - t| < eps with room for the tail bounds.
bool within(const CocycleEstimate& r, double t, double eps);

struct ReturnScan {
  std::vector<ReturnEvent> events;
  std::uint64_t samples = 0;
  std::uint64_t candidates = 0;
  double return_fraction = 0.0;
  // Exact P(g x in A | x in A) (times the Y factor), averaged over candidates.
  double predicted_fraction = 0.0;
};

// Every g in ball(R_group) \ {e} with g (x, y) in A x B, for `seeds` points of
// A x B. The engine fixes the truncation radius.
ReturnScan scan_returns(const ProductSystem& system, const CylinderSet& A, const CylinderSet& B,
                        std::int64_t R_group, const CocycleEngine& engine, std::uint64_t seeds, std::uint64_t seed);

struct ConservativityCurve {
  std::vector<std::int64_t> radii;
  std::vector<double> fractions;
  std::vector<Interval> ci;
  std::uint64_t samples = 0;
};

// Fraction of sampled points of A x B with a return g outside F_excl and
// |r(g, x)| < eps, for each radius. Candidates are visited in canonical order
// so fractions are nondecreasing in the radius.
ConservativityCurve conservativity_return_check(const ProductSystem& system, const CylinderSet& A,
                                                const CylinderSet& B, double eps,
                                                const std::vector<GroupElement>& F_excl,
                                                const std::vector<std::int64_t>& radii, const CocycleEngine& engine,
                                                std::uint64_t seeds, std::uint64_t seed);

PhiMap phi_conjugate(const PhiMap& phi, const GroupElement& g);

struct WitnessOptions {
  // phi is built with tolerance eps * phi_eps_fraction.
  double phi_eps_fraction = 0.5;
  BuildPhiOptions build;
};

struct WitnessResult {
  double t = 0.0;
  double eps = 0.0;
  std::uint64_t samples = 0;      // points of A x B
  std::uint64_t domain_points = 0;
  std::uint64_t witnesses = 0;
  double fraction = 0.0;
  Interval ci;
  // Witnesses whose three comparison terms are each below eps / 3.
  std::uint64_t chain_validated = 0;
  std::size_t horizon = 0;
  std::vector<ReturnEvent> events;
  std::vector<std::string> warnings;
};

// Counts points w of A x B in Dom(phi) admitting g in ball(R_group) with
// g w in phi(A x B) and |r(g, w) - t| < eps.
WitnessResult essential_value_witness(const ProductSystem& system, const CylinderSet& A, const CylinderSet& B,
                                      double t, double eps, std::int64_t R_group, const CocycleEngine& engine,
                                      std::uint64_t seeds, std::uint64_t seed, const WitnessOptions& opt = {});

struct RatioReport {
  std::vector<double> grid;
  std::vector<bool> covered;
  std::vector<double> closest;  // min |r - t| over events, NaN without events
  double coverage = 0.0;
  std::string label;
};

RatioReport ratio_hist(const std::vector<ReturnEvent>& events, const std::vector<double>& grid, double eps);

struct RatioScan {
  ReturnScan returns;
  std::vector<double> assisted_targets;
  RatioReport report;
  std::vector<std::string> warnings;
};

// Plain return scan, then a phi-assisted witness search for every grid target
// the returns missed.
RatioScan ratio_scan(const ProductSystem& system, const CylinderSet& A, const std::vector<double>& grid, double eps,
                     std::int64_t R_group, const CocycleEngine& engine, std::uint64_t seeds, std::uint64_t seed,
                     bool phi_assist = true, const WitnessOptions& opt = {});

}  // namespace nsb

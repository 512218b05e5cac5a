// One PASS/FAIL line per acceptance criterion. Tolerances are pinned below.
#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "nsb/error.hpp"
#include "nsb/experiment.hpp"
#include "nsb/maharam.hpp"
#include "nsb/parallel.hpp"
#include "nsb/rng.hpp"

using namespace nsb;

namespace {

constexpr std::uint64_t kSeed = 20241018;

// criterion 1
constexpr double kOracleTol = 1e-12;
constexpr double kOracleSeconds = 60;
// criterion 2
constexpr double kPhiEps = 0.2;
constexpr std::uint64_t kDomainSamples = 100000;
constexpr double kDomainFloor = 1.0 / 3.0;
constexpr double kPhiSeconds = 300;
// criterion 3
constexpr std::size_t kDefectShifts = 1000;
constexpr std::int64_t kShiftLo = 100000000, kShiftHi = 10000000000;
// criterion 4
constexpr std::size_t kCltN = 10000;
constexpr std::uint64_t kCltSamples = 100000;
constexpr double kKsMax = 0.02;
// criterion 5
constexpr double kWitnessEps = 0.15;
constexpr std::int64_t kWitnessRadius = 1000;
constexpr std::uint64_t kWitnessSeeds = 1000;
constexpr double kWitnessFloor = 1.0 / 27.0;
constexpr double kWitnessSeconds = 900;
// criterion 6
constexpr double kConsEps = 0.2;
constexpr std::uint64_t kConsSeeds = 1000;
constexpr double kConsFloor = 0.95;
// criterion 7
constexpr double kKakutaniIncrement = 1e-4;
constexpr double kDivergenceGain = 0.5;
// Smallest per-unit-radius increment of the conservativity sums over
// [3e4, 1e5], frozen from the reference build (about half the observed value).
const std::vector<double> kTrend{0.6, 0.38, 0.15};
// criterion 8
constexpr double kL2Increment = 1e-6;
constexpr std::int64_t kL2Radius = 25;
// criterion 9
constexpr double kRatioEps = 0.1;
constexpr double kCoverageFloor = 0.9;
constexpr std::uint64_t kRatioSeeds = 200;

const std::int64_t kTruncZ = 250000;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const GroupModel& Z() {
  static const GroupModel z(GroupKind::Z);
  return z;
}

FamilyPtr demo() {
  static const FamilyPtr f = make_radial_demo_family(Z());
  return f;
}

CylinderSet origin_zero() { return CylinderSet({{GroupElement::z(0), 0}}); }

double log_cyl(const MarginalFamily& f, const Configuration& x, const std::vector<GroupElement>& sites) {
  double s = 0;
  for (const auto& g : sites) s += std::log(f.mu(g, x.at(g)));
  return s;
}

// ---------------------------------------------------------------------------

Outcome exact_oracle_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  Engine rng(derive_seed(kSeed, "oracle"));
  double e_cocycle = 0, e_gibbs = 0, e_phi = 0, e_maharam = 0;
  std::size_t families = 0, checks = 0;
  for (int fam = 0; fam < 40; ++fam) {
    const bool up = fam % 2 == 0;
    const double l0 = up ? 0.5 + 0.2 * uniform01(rng) : 0.3 + 0.19 * uniform01(rng);
    std::vector<std::pair<GroupElement, double>> support;
    std::set<std::int64_t> used;
    const int n_sites = 1 + static_cast<int>(uniform_below(rng, 4));
    while (static_cast<int>(support.size()) < n_sites) {
      const std::int64_t s = static_cast<std::int64_t>(uniform_below(rng, 9)) - 4;
      if (!used.insert(s).second) continue;
      support.emplace_back(GroupElement::z(s), 0.12 + 0.76 * uniform01(rng));
    }
    auto f = make_finitely_perturbed_family(Z(), l0, 0.1, support);
    ++families;

    for (int i = 0; i < 200; ++i) {
      const auto g = GroupElement::z(static_cast<std::int64_t>(uniform_below(rng, 13)) - 6);
      const auto h = GroupElement::z(static_cast<std::int64_t>(uniform_below(rng, 13)) - 6);
      const auto x = Configuration::sample(f, rng());
      const double lhs = exact_rn(*f, mul(g, h), x);
      const double rhs = exact_rn(*f, h, x) + exact_rn(*f, g, x.acted(h));
      e_cocycle = std::max(e_cocycle, std::abs(lhs - rhs));
      // the truncated sum over a covering ball is the exact value
      e_cocycle = std::max(e_cocycle, std::abs(rn_cocycle(*f, g, x, 12).value - exact_rn(*f, g, x)));
      ++checks;
    }

    auto sched = std::make_shared<SwapSchedule>(build_schedule(f, {}, 10.0, 8));
    for (std::size_t k = 1; k <= 8; ++k) {
      const auto& p = sched->pair(k);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          const auto x = Configuration::sample(f, rng()).with_values({{p.pinned, a}, {p.free, b}});
          const auto y = apply_swap(*sched, k, x);
          const double oracle = log_cyl(*f, x, {p.pinned, p.free}) - log_cyl(*f, y, {p.pinned, p.free});
          e_gibbs = std::max(e_gibbs, std::abs(gibbs_cocycle(*f, x, y) - oracle));
          e_gibbs = std::max(e_gibbs, std::abs(tau_rn(*sched, k, x) - oracle));
          ++checks;
        }
    }

    const PhiMap phi(sched, 0.0, 10.0, 8, up ? 1 : -1);
    const auto supp = phi.support();
    for (int i = 0; i < 300; ++i) {
      const auto x = Configuration::sample(f, rng());
      if (!phi.in_domain(x)) continue;
      const auto y = phi.apply(x);
      const double oracle = log_cyl(*f, x, supp) - log_cyl(*f, y, supp);
      e_phi = std::max(e_phi, std::abs(phi.rn(x) - oracle));
      e_phi = std::max(e_phi, std::abs(gibbs_cocycle(*f, x, y) - oracle));
      ++checks;
    }

    for (int i = 0; i < 6; ++i) {
      std::vector<std::pair<GroupElement, int>> pat;
      std::set<std::int64_t> ks;
      const int m = static_cast<int>(uniform_below(rng, 4));
      while (static_cast<int>(pat.size()) < m) {
        const std::int64_t s = static_cast<std::int64_t>(uniform_below(rng, 9)) - 4;
        if (ks.insert(s).second) pat.emplace_back(GroupElement::z(s), static_cast<int>(uniform_below(rng, 2)));
      }
      const CylinderSet A(pat);
      const auto g = GroupElement::z(static_cast<std::int64_t>(uniform_below(rng, 9)) - 4);
      const double a = -1.0 + 2.0 * uniform01(rng);
      const double len = 2.0 * uniform01(rng);
      const auto rep = maharam_preservation_check(f, g, A, a, a + len);
      if (rep.window_size > 12) continue;
      e_maharam = std::max(e_maharam, rep.max_error);
      ++checks;
    }
  }
  const double secs = since(t0);
  const double worst = std::max({e_cocycle, e_gibbs, e_phi, e_maharam});
  Outcome o;
  o.pass = worst < kOracleTol && secs < kOracleSeconds;
  o.detail = fmt("%zu families, %zu checks; max error cocycle %.1e gibbs %.1e phi %.1e maharam %.1e; %.1f s",
                 families, checks, e_cocycle, e_gibbs, e_phi, e_maharam, secs);
  return o;
}

// ---------------------------------------------------------------------------

struct PhiSet {
  std::vector<double> ts{0.0, 0.3, 0.7, 1.0};
  std::vector<PhiBuild> builds;
  double seconds = 0;
  std::string error;
};

PhiSet& phis() {
  static PhiSet s = [] {
    PhiSet p;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      for (std::size_t i = 0; i < p.ts.size(); ++i) {
        BuildPhiOptions o;
        o.domain_samples = kDomainSamples;
        o.seed = derive_seed(kSeed, "build-phi", i);
        o.horizon.seed = derive_seed(kSeed, "horizon", i);
        p.builds.push_back(build_phi(demo(), {}, p.ts[i], kPhiEps, 1, o));
      }
    } catch (const Error& e) {
      p.error = e.what();
    }
    p.seconds = since(t0);
    return p;
  }();
  return s;
}

Outcome domain_constants() {
  auto& p = phis();
  if (!p.error.empty()) return {false, "build_phi failed: " + p.error};
  Outcome o;
  o.pass = p.seconds < kPhiSeconds;
  std::string d;
  for (std::size_t i = 0; i < p.builds.size(); ++i) {
    const auto& b = p.builds[i];
    const bool ok = b.domain.ci.lower >= kDomainFloor && b.domain.rn_violations == 0;
    o.pass = o.pass && ok;
    d += fmt("t=%.1f N=%zu mu(Dom) %.4f [LCB %.4f] violations %llu; ", p.ts[i], b.horizon.horizon, b.domain.fraction,
             b.domain.ci.lower, static_cast<unsigned long long>(b.domain.rn_violations));
  }
  o.detail = d + fmt("%.1f s", p.seconds);
  return o;
}

// ---------------------------------------------------------------------------

Outcome defect_contract() {
  auto& p = phis();
  if (!p.error.empty()) return {false, "build_phi failed: " + p.error};
  Engine rng(derive_seed(kSeed, "defect"));
  std::uint64_t tested = 0, violations = 0, rejected = 0;
  double worst = 0;
  for (std::size_t i = 0; i < p.builds.size(); ++i) {
    const auto& phi = *p.builds[i].phi;
    const double thr = comparison_threshold(phi.support().size(), kPhiEps);
    std::uint64_t seed = derive_seed(kSeed, "defect-x", i);
    for (std::size_t n = 0; n < kDefectShifts;) {
      const auto x = Configuration::sample(demo(), seed++);
      if (!phi.in_domain(x)) continue;
      const auto mag = kShiftLo + static_cast<std::int64_t>(uniform_below(rng, kShiftHi - kShiftLo));
      const auto g = GroupElement::z(uniform_below(rng, 2) ? mag : -mag);
      if (!avoids_comparison_set(*demo(), thr, g, phi)) {
        ++rejected;
        continue;
      }
      const double d = std::abs(compare_defect(*demo(), g, phi, x));
      worst = std::max(worst, d);
      violations += !(d < kPhiEps);
      ++tested;
      ++n;
    }
  }
  Outcome o;
  o.pass = violations == 0 && tested == p.builds.size() * kDefectShifts;
  o.detail = fmt("%llu (phi, g, x) triples over %zu maps, %llu g rejected for meeting L; max |defect| %.3e, "
                 "violations %llu",
                 static_cast<unsigned long long>(tested), p.builds.size(), static_cast<unsigned long long>(rejected),
                 worst, static_cast<unsigned long long>(violations));
  return o;
}

// ---------------------------------------------------------------------------

Outcome clt() {
  const auto s = build_schedule(demo(), {}, 1.0, kCltN);
  const auto r = clt_check(s, kCltN, kCltSamples, derive_seed(kSeed, "clt"));
  Outcome o;
  o.pass = r.ks <= kKsMax && r.moments_ok();
  o.detail = fmt("n=%zu samples=%llu KS %.4f; A %.4f vs %.4f (z %.2f), B^2 %.4f vs %.4f (z %.2f)", r.n,
                 static_cast<unsigned long long>(r.samples), r.ks, r.exact.A, r.sample_mean, r.mean_z,
                 r.exact.B * r.exact.B, r.sample_variance, r.variance_z);
  return o;
}

// ---------------------------------------------------------------------------

const CocycleEngine& engine() {
  static const CocycleEngine e(demo(), kTruncZ, kWitnessRadius);
  return e;
}

Outcome witnesses() {
  const auto t0 = std::chrono::steady_clock::now();
  const ProductSystem sys{demo(), std::nullopt};
  Outcome o;
  o.pass = true;
  std::string d;
  const std::vector<double> ts{0.25, 0.5, 0.75};
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto w = essential_value_witness(sys, origin_zero(), {}, ts[i], kWitnessEps, kWitnessRadius, engine(),
                                           kWitnessSeeds, derive_seed(kSeed, "witness", i));
    o.pass = o.pass && w.ci.lower > kWitnessFloor;
    d += fmt("t=%.2f N=%zu fraction %.3f [LCB %.3f]; ", ts[i], w.horizon, w.fraction, w.ci.lower);
  }
  const double secs = since(t0);
  o.pass = o.pass && secs < kWitnessSeconds;
  o.detail = d + fmt("floor %.4f; %.1f s", kWitnessFloor, secs);
  return o;
}

// ---------------------------------------------------------------------------

Outcome conservativity() {
  const ProductSystem sys{demo(), std::nullopt};
  const std::vector<std::int64_t> radii{100, 300, 1000};
  const auto c = conservativity_return_check(sys, origin_zero(), {}, kConsEps, Z().ball(2), radii, engine(),
                                             kConsSeeds, derive_seed(kSeed, "conservativity"));
  Outcome o;
  o.pass = c.fractions.back() >= kConsFloor;
  for (std::size_t i = 1; i < c.fractions.size(); ++i) o.pass = o.pass && c.fractions[i] >= c.fractions[i - 1];
  o.detail = fmt("fractions %.3f, %.3f, %.3f at R = 100, 300, 1000 (%llu samples)", c.fractions[0], c.fractions[1],
                 c.fractions[2], static_cast<unsigned long long>(c.samples));
  return o;
}

// ---------------------------------------------------------------------------

Outcome family_diagnostics() {
  const auto& f = *demo();
  const auto g = GroupElement::z(1);
  const std::vector<std::int64_t> kr{100000, 200000, 400000, 800000};
  const auto k = kakutani_series(f, g, kr);
  double inc = 0;
  for (std::size_t i = 1; i < k.size(); ++i) inc = std::max(inc, k[i] - k[i - 1]);
  const auto tail = f.kakutani_tail(g, 100000);
  const bool kak = inc < kKakutaniIncrement && tail.rigorous && tail.value < kKakutaniIncrement;

  const auto dv = divergence_series(f, {1000, 1000000}, Side::All);
  const double gain = dv[1] - dv[0];

  const std::vector<double> cs{0.5, 1.0, 2.0};
  const std::vector<std::int64_t> radii{1000, 3000, 10000, 30000, 100000};
  const auto cv = conservativity_series(f, cs, radii, 1000);
  bool mono = true, trend = true;
  std::string slopes;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    for (std::size_t j = 1; j < radii.size(); ++j) mono = mono && cv[i][j] > cv[i][j - 1];
    const double slope = (cv[i][4] - cv[i][3]) / static_cast<double>(radii[4] - radii[3]);
    trend = trend && slope >= kTrend[i] && kTrend[i] > 0.0;
    slopes += fmt("%s%.4g", i ? ", " : "", slope);
  }
  Outcome o;
  o.pass = kak && gain >= kDivergenceGain && mono && trend;
  o.detail = fmt("kakutani increments beyond 1e5 max %.2e, rigorous tail %.2e; divergence gain %.3f; "
                 "conservativity monotone %s, last slopes (c = 0.5, 1, 2) %s",
                 inc, tail.value, gain, mono ? "yes" : "no", slopes.c_str());
  return o;
}

// ---------------------------------------------------------------------------

Outcome l2_contrast() {
  GroupModel F2(GroupKind::F2);
  auto f = make_f2_radial_family(F2);
  std::vector<std::int64_t> radii;
  for (std::int64_t r = kL2Radius; r <= 80; ++r) radii.push_back(r);
  const auto v = l2_tail_series(*f, radii);
  double inc = 0;
  std::int64_t settle = -1;
  for (std::size_t i = 1; i < v.size(); ++i) inc = std::max(inc, v[i] - v[i - 1]);
  for (std::size_t i = 0; i + 1 < v.size() && settle < 0; ++i) {
    double worst = 0;
    for (std::size_t j = i + 1; j < v.size(); ++j) worst = std::max(worst, v[j] - v[i]);
    if (worst < kL2Increment) settle = radii[i];
  }
  const auto z = l2_tail_series(*demo(), {1000, 10000, 100000, 1000000});
  bool diverges = true;
  for (std::size_t i = 1; i < z.size(); ++i) diverges = diverges && z[i] - z[i - 1] > 0.1;
  Outcome o;
  o.pass = inc < kL2Increment && diverges;
  o.detail = fmt("F2 radial: largest increment beyond R=%lld is %.3e (total beyond R: %.3e; increments fall below "
                 "%.0e from R=%lld); Z demo decade increments %.3f, %.3f, %.3f",
                 static_cast<long long>(kL2Radius), inc, v.back() - v.front(), kL2Increment,
                 static_cast<long long>(settle), z[1] - z[0], z[2] - z[1], z[3] - z[2]);
  return o;
}

// ---------------------------------------------------------------------------

Outcome ratio_set() {
  const std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};
  const auto d = ratio_scan({demo(), std::nullopt}, origin_zero(), grid, kRatioEps, kWitnessRadius, engine(),
                            kRatioSeeds, derive_seed(kSeed, "ratio"));
  auto c = make_constant_family(Z(), 0.5, 0.1);
  const CocycleEngine ec(c, kTruncZ, kWitnessRadius);
  const auto r = ratio_scan({c, std::nullopt}, origin_zero(), grid, kRatioEps, kWitnessRadius, ec, kRatioSeeds,
                            derive_seed(kSeed, "ratio-constant"));
  bool only_zero = r.report.covered[0];
  for (std::size_t i = 1; i < grid.size(); ++i) only_zero = only_zero && !r.report.covered[i];
  Outcome o;
  o.pass = d.report.coverage >= kCoverageFloor && d.report.label == "III_1-consistent" && only_zero &&
           r.report.label == "II-consistent";
  o.detail = fmt("z_demo coverage %.2f (%s, %zu assisted targets); constant coverage %.2f (%s)", d.report.coverage,
                 d.report.label.c_str(), d.assisted_targets.size(), r.report.coverage, r.report.label.c_str());
  return o;
}

// ---------------------------------------------------------------------------

Outcome reproducibility() {
  const auto cfg = parse_config(nlohmann::json::parse(R"({
    "seed": 777,
    "group": {"kind": "Z"},
    "family": {"kind": "z_demo"},
    "experiments": [
      {"kind": "kakutani", "radii": [1000, 10000], "divergence_radii": [1000, 10000]},
      {"kind": "conservativity", "radii": [1000, 3000], "r_inner": 200, "seeds": 100, "group_radii": [100, 300]},
      {"kind": "clt", "n": 1000, "samples": 5000},
      {"kind": "build-phi", "t": 0.5, "eps": 0.2, "domain_samples": 5000, "injectivity_samples": 2000},
      {"kind": "ratio-set", "radius": 300, "seeds": 40, "witness_targets": [0.5], "witness_seeds": 40},
      {"kind": "l2-tail"}
    ]
  })"));
  auto dump = [](const Report& r) {
    std::vector<std::string> out;
    for (const auto& e : r.experiments)
      for (const auto& t : e.tables) out.push_back(to_csv(t));
    return out;
  };
  const unsigned saved = thread_count();
  const auto a = dump(run(cfg));
  set_thread_count(saved > 1 ? 1 : 3);
  const auto b = dump(run(cfg));
  set_thread_count(saved);
  std::size_t bytes = 0, diff = 0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    bytes += a[i].size();
    diff += a[i] != b[i];
  }
  Outcome o;
  o.pass = a.size() == b.size() && diff == 0;
  o.detail = fmt("%zu CSV tables (%zu bytes) rerun with a different thread count; %zu differ", a.size(), bytes, diff);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::vector<int> only;
  app.add_option("--only", only, "criterion numbers to run")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"exact-oracle cocycle suite", exact_oracle_suite},
      {"domain measure and phi_rn window", domain_constants},
      {"comparison defect contract", defect_contract},
      {"CLT at desk scale", clt},
      {"essential value witnesses", witnesses},
      {"conservativity returns", conservativity},
      {"family diagnostics", family_diagnostics},
      {"l2 tail contrast", l2_contrast},
      {"ratio-set coverage", ratio_set},
      {"reproducibility", reproducibility},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures ? 1 : 0;
}

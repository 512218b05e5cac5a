#include "nsb/maharam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "nsb/error.hpp"
#include "nsb/parallel.hpp"

namespace nsb {

FamilyPtr ProductSystem::y_family() const {
  if (!y_zeta0) return nullptr;
  const double z = *y_zeta0;
  if (!(z > 0.0 && z < 1.0)) throw ConfigError("y marginal must lie in (0, 1)");
  return make_constant_family(x_family->model(), z, std::min({z, 1.0 - z, 0.5}), {PinnedRuleKind::None, 0});
}

ProductPoint ProductPoint::acted(const GroupElement& g) const {
  ProductPoint p{x.acted(g), std::nullopt};
  if (y) p.y = y->acted(g);
  return p;
}

ProductPoint sample_product(const ProductSystem& system, std::uint64_t seed, const CylinderSet& A,
                            const CylinderSet& B) {
  ProductPoint p{sample_in(system.x_family, derive_seed(seed, "x"), A), std::nullopt};
  if (!system.trivial_y()) p.y = sample_in(system.y_family(), derive_seed(seed, "y"), B);
  return p;
}

double product_rn(const ProductSystem& system, const GroupElement& g, const ProductPoint& p, std::int64_t R) {
  return rn_cocycle(*system.x_family, g, p.x, R).value;
}

MaharamPoint maharam_step(const ProductSystem& system, const GroupElement& g, const MaharamPoint& p, std::int64_t R,
                          const CocycleOptions& opt) {
  const auto e = rn_cocycle(*system.x_family, g, p.point.x, R, opt);
  MaharamPoint q{p.point.acted(g), p.t + e.value, p.tail_mean + e.tail_mean_bound, p.tail_std + e.tail_std_bound};
  return q;
}

PreservationReport maharam_preservation_check(const FamilyPtr& oracle, const GroupElement& g, const CylinderSet& A,
                                              double a, double b) {
  const auto F = oracle->finite_support();
  if (!F) throw PreconditionError("preservation check needs a finitely perturbed family");
  if (!(a <= b)) throw PreconditionError("interval needs a <= b");
  oracle->model().require(g);
  const auto K = A.window();
  std::unordered_set<GroupElement, GroupElementHash> in_k(K.begin(), K.end());
  std::vector<GroupElement> free;
  std::unordered_set<GroupElement, GroupElementHash> seen(K.begin(), K.end());
  const auto gi = inv(g);
  for (const auto& f : *F) {
    for (const auto& h : {f, mul(gi, f)}) {
      if (seen.insert(h).second) free.push_back(h);
    }
  }
  if (free.size() > 25) throw ResourceLimitError("preservation window needs more than 2^25 patterns");
  std::sort(free.begin(), free.end(), CanonicalLess{});

  PreservationReport rep;
  rep.window_size = K.size() + free.size();
  rep.patterns = std::uint64_t{1} << free.size();
  const auto base = Configuration::sample(oracle, 0);
  const double ea = std::exp(a), eb = std::exp(b);
  for (std::uint64_t mask = 0; mask < rep.patterns; ++mask) {
    auto pattern = A.pattern();
    for (std::size_t i = 0; i < free.size(); ++i) pattern.emplace_back(free[i], static_cast<int>((mask >> i) & 1U));
    const CylinderSet C(pattern);
    const double r = exact_rn(*oracle, g, base.with_values(pattern));
    const double mc = cylinder_measure(*oracle, C);
    const double mgc = cylinder_measure(*oracle, C.translated(g));
    const double l = mgc * (std::exp(b + r) - std::exp(a + r));
    const double rr = mc * (eb - ea);
    rep.lhs += l;
    rep.rhs += rr;
    rep.max_error = std::max(rep.max_error, std::abs(l - rr));
  }
  rep.max_error = std::max(rep.max_error, std::abs(rep.lhs - rep.rhs));
  return rep;
}

bool within(const CocycleEstimate& r, double t, double eps) { return std::abs(r.value - t) + r.slack() < eps; }

namespace {

void check_range(const CocycleEngine& engine, std::int64_t R_group) {
  if (R_group < 0) throw PreconditionError("group radius must be nonnegative");
  if (engine.family()->model().kind() == GroupKind::Z && R_group > engine.max_shift())
    throw PreconditionError("group radius exceeds the cocycle engine's shift range");
}

bool pattern_holds(const CylinderSet& C, const GroupElement& gi, const std::function<int(const GroupElement&)>& sym) {
  for (const auto& [k, s] : C.pattern())
    if (sym(mul(gi, k)) != s) return false;
  return true;
}

bool returns_to(const CocycleEngine::Prepared& P, const ProductPoint& p, const CylinderSet& A, const CylinderSet& B,
                const GroupElement& gi) {
  if (!pattern_holds(A, gi, [&](const GroupElement& h) { return P.symbol(h); })) return false;
  if (p.y && !pattern_holds(B, gi, [&](const GroupElement& h) { return p.y->at(h); })) return false;
  return true;
}

// P(g w in C | w in C) for a product measure with marginal m(h, symbol).
template <class Marg>
double return_probability(const CylinderSet& C, const GroupElement& gi, Marg m) {
  double p = 1.0;
  for (const auto& [k, s] : C.pattern()) {
    const auto u = mul(gi, k);
    const auto it = std::find_if(C.pattern().begin(), C.pattern().end(), [&](const auto& e) { return e.first == u; });
    if (it != C.pattern().end()) {
      if (it->second != s) return 0.0;
    } else {
      p *= m(u, s);
    }
  }
  return p;
}

std::vector<GroupElement> nontrivial_ball(const GroupModel& model, std::int64_t R) {
  auto gs = model.ball(R);
  gs.erase(std::remove_if(gs.begin(), gs.end(), [](const GroupElement& g) { return g.is_identity(); }), gs.end());
  return gs;
}

}  // namespace

ReturnScan scan_returns(const ProductSystem& system, const CylinderSet& A, const CylinderSet& B,
                        std::int64_t R_group, const CocycleEngine& engine, std::uint64_t seeds, std::uint64_t seed) {
  check_range(engine, R_group);
  const auto& family = *system.x_family;
  if (!(cylinder_measure(family, A) > 0.0)) throw PreconditionError("cylinder A has measure zero");
  const auto gs = nontrivial_ball(family.model(), R_group);
  std::vector<GroupElement> ginv;
  ginv.reserve(gs.size());
  for (const auto& g : gs) ginv.push_back(inv(g));

  auto per_sample = parallel_map<std::vector<ReturnEvent>>(seeds, [&](std::size_t i) {
    const auto p = sample_product(system, derive_seed(seed, "returns", i), A, B);
    const auto P = engine.prepare(p.x);
    std::vector<ReturnEvent> ev;
    for (std::size_t j = 0; j < gs.size(); ++j)
      if (returns_to(P, p, A, B, ginv[j])) ev.push_back({i, gs[j], P.at(gs[j])});
    return ev;
  });
  ReturnScan out;
  out.samples = seeds;
  out.candidates = gs.size();
  for (auto& v : per_sample) out.events.insert(out.events.end(), std::make_move_iterator(v.begin()), std::make_move_iterator(v.end()));
  const double total = static_cast<double>(seeds) * static_cast<double>(gs.size());
  out.return_fraction = total > 0.0 ? static_cast<double>(out.events.size()) / total : 0.0;

  const double z = system.y_zeta0.value_or(1.0);
  double pred = 0.0;
  for (const auto& gi : ginv) {
    double p = return_probability(A, gi, [&](const GroupElement& u, int s) { return family.mu(u, s); });
    if (!system.trivial_y())
      p *= return_probability(B, gi, [&](const GroupElement&, int s) { return s == 0 ? z : 1.0 - z; });
    pred += p;
  }
  out.predicted_fraction = gs.empty() ? 0.0 : pred / static_cast<double>(gs.size());
  return out;
}

ConservativityCurve conservativity_return_check(const ProductSystem& system, const CylinderSet& A,
                                                const CylinderSet& B, double eps,
                                                const std::vector<GroupElement>& F_excl,
                                                const std::vector<std::int64_t>& radii, const CocycleEngine& engine,
                                                std::uint64_t seeds, std::uint64_t seed) {
  if (!(eps > 0.0)) throw PreconditionError("eps must be positive");
  if (radii.empty()) throw PreconditionError("need at least one radius");
  const std::int64_t Rmax = *std::max_element(radii.begin(), radii.end());
  check_range(engine, Rmax);
  const auto& model = system.x_family->model();
  std::unordered_set<GroupElement, GroupElementHash> excl(F_excl.begin(), F_excl.end());
  std::vector<GroupElement> gs, ginv;
  for (auto& g : nontrivial_ball(model, Rmax)) {
    if (excl.count(g)) continue;
    ginv.push_back(inv(g));
    gs.push_back(std::move(g));
  }
  constexpr std::int64_t kNone = std::numeric_limits<std::int64_t>::max();
  const auto hit_radius = parallel_map<std::int64_t>(seeds, [&](std::size_t i) {
    const auto p = sample_product(system, derive_seed(seed, "conservativity", i), A, B);
    const auto P = engine.prepare(p.x);
    for (std::size_t j = 0; j < gs.size(); ++j) {
      if (!within(P.at(gs[j]), 0.0, eps)) continue;
      if (returns_to(P, p, A, B, ginv[j])) return gs[j].word_length();
    }
    return kNone;
  });
  ConservativityCurve c;
  c.radii = radii;
  c.samples = seeds;
  for (auto R : radii) {
    const auto hits = static_cast<std::uint64_t>(
        std::count_if(hit_radius.begin(), hit_radius.end(), [&](std::int64_t r) { return r <= R; }));
    c.fractions.push_back(seeds ? static_cast<double>(hits) / static_cast<double>(seeds) : 0.0);
    c.ci.push_back(wilson_bounds(hits, seeds));
  }
  return c;
}

PhiMap phi_conjugate(const PhiMap& phi, const GroupElement& g) { return phi.conjugated(g); }

namespace {

int sign_for(const MarginalFamily& family, double t) {
  const bool up = family.lambda0() >= 0.5;
  if (up && t >= 0.0) return 1;
  if (!up && t <= 0.0) return -1;
  throw PreconditionError("target t = " + std::to_string(t) + " has the wrong sign for lambda(0) = " +
                          std::to_string(family.lambda0()));
}

}  // namespace

WitnessResult essential_value_witness(const ProductSystem& system, const CylinderSet& A, const CylinderSet& B,
                                      double t, double eps, std::int64_t R_group, const CocycleEngine& engine,
                                      std::uint64_t seeds, std::uint64_t seed, const WitnessOptions& opt) {
  if (!(eps > 0.0)) throw PreconditionError("eps must be positive");
  if (!(opt.phi_eps_fraction > 0.0 && opt.phi_eps_fraction <= 1.0))
    throw PreconditionError("phi tolerance fraction must lie in (0, 1]");
  check_range(engine, R_group);
  const auto& family = system.x_family;
  const int sign = sign_for(*family, t);
  auto build = opt.build;
  build.seed = derive_seed(seed, "witness-phi");
  const auto pb = build_phi(family, A.window(), t, eps * opt.phi_eps_fraction, sign, build);
  const auto& phi = *pb.phi;
  const bool z = family->model().kind() == GroupKind::Z;
  const auto gs = nontrivial_ball(family->model(), R_group);

  struct Hit {
    bool domain = false;
    bool found = false;
    bool chain = false;
    ReturnEvent ev;
  };
  const auto hits = parallel_map<Hit>(seeds, [&](std::size_t i) {
    Hit h;
    const auto p = sample_product(system, derive_seed(seed, "witness", i), A, B);
    const auto P = engine.prepare(p.x);
    const auto w = z ? phi.trace_z(P.window(), P.window_lo(), 0) : phi.trace(p.x);
    if (!phi.in_domain(w)) return h;
    h.domain = true;
    for (const auto& g : gs) {
      const auto r = P.at(g);
      if (!within(r, t, eps)) continue;
      const auto gi = inv(g);
      if (!returns_to(P, p, A, B, gi)) continue;
      const bool img = z ? phi.in_image(phi.trace_z(P.window(), P.window_lo(), g.z_value()))
                         : phi.in_image(p.x.acted(g));
      if (!img) continue;
      h.found = true;
      h.ev = {i, g, r};
      const double c = sign * w.w_above;
      const double defect = compare_defect(*family, g, phi, p.x);
      const double r_phi = r.value - c - defect;
      h.chain = std::abs(defect) < eps / 3.0 && std::abs(r_phi) < eps / 3.0 && std::abs(c - t) < eps / 3.0;
      break;
    }
    return h;
  });

  WitnessResult res;
  res.t = t;
  res.eps = eps;
  res.samples = seeds;
  res.horizon = pb.horizon.horizon;
  for (const auto& h : hits) {
    res.domain_points += h.domain;
    if (!h.found) continue;
    ++res.witnesses;
    res.chain_validated += h.chain;
    res.events.push_back(h.ev);
  }
  res.fraction = seeds ? static_cast<double>(res.witnesses) / static_cast<double>(seeds) : 0.0;
  res.ci = wilson_bounds(res.witnesses, seeds);
  if (res.chain_validated < res.witnesses)
    res.warnings.push_back(std::to_string(res.witnesses - res.chain_validated) +
                           " witnesses do not split into three terms below eps/3 at this scale");
  return res;
}

RatioReport ratio_hist(const std::vector<ReturnEvent>& events, const std::vector<double>& grid, double eps) {
  RatioReport rep;
  rep.grid = grid;
  std::size_t n_cov = 0;
  for (double t : grid) {
    bool cov = false;
    double best = std::numeric_limits<double>::quiet_NaN();
    for (const auto& e : events) {
      const double d = std::abs(e.r.value - t);
      if (std::isnan(best) || d < best) best = d;
      cov = cov || within(e.r, t, eps);
    }
    rep.covered.push_back(cov);
    rep.closest.push_back(best);
    n_cov += cov;
  }
  rep.coverage = grid.empty() ? 0.0 : static_cast<double>(n_cov) / static_cast<double>(grid.size());
  bool zero_only = n_cov > 0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (rep.covered[i] && grid[i] != 0.0) zero_only = false;
  if (events.empty()) {
    rep.label = "insufficient data";
  } else if (grid.size() >= 3 && rep.coverage >= 0.9) {
    rep.label = "III_1-consistent";
  } else if (zero_only) {
    rep.label = "II-consistent";
  } else {
    rep.label = "inconclusive";
  }
  return rep;
}

RatioScan ratio_scan(const ProductSystem& system, const CylinderSet& A, const std::vector<double>& grid, double eps,
                     std::int64_t R_group, const CocycleEngine& engine, std::uint64_t seeds, std::uint64_t seed,
                     bool phi_assist, const WitnessOptions& opt) {
  RatioScan out;
  out.returns = scan_returns(system, A, {}, R_group, engine, seeds, derive_seed(seed, "ratio-returns"));
  auto events = out.returns.events;
  out.report = ratio_hist(events, grid, eps);
  if (phi_assist) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (out.report.covered[i]) continue;
      try {
        const auto w = essential_value_witness(system, A, {}, grid[i], eps, R_group, engine, seeds,
                                               derive_seed(seed, "ratio-assist", i), opt);
        if (w.witnesses > 0) {
          out.assisted_targets.push_back(grid[i]);
          events.insert(events.end(), w.events.begin(), w.events.end());
        }
      } catch (const Error& e) {
        out.warnings.push_back("no phi-assisted scan for t = " + std::to_string(grid[i]) + ": " + e.what());
      }
    }
    out.report = ratio_hist(events, grid, eps);
  }
  return out;
}

}  // namespace nsb

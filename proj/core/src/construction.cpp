#include "nsb/construction.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "nsb/error.hpp"
#include "nsb/parallel.hpp"

namespace nsb {

const SwapPair& SwapSchedule::pair(std::size_t k) const {
  if (k == 0 || k > pairs.size()) throw PreconditionError("pair index " + std::to_string(k) + " out of range");
  return pairs[k - 1];
}

namespace {

SwapSchedule schedule_upto(FamilyPtr family, const std::vector<GroupElement>& K, double eps, std::size_t budget,
                           bool stop_at_cap) {
  if (!(eps > 0.0)) throw PreconditionError("eps must be positive");
  if (budget == 0) throw PreconditionError("budget must be positive");
  const auto& model = family->model();
  for (const auto& k : K) model.require(k);
  SwapSchedule s;
  s.family = family;
  s.eps = eps;
  s.window = K;
  auto in_window = [&](const GroupElement& g) { return std::find(K.begin(), K.end(), g) != K.end(); };

  std::deque<GroupElement> pinned, free;
  const double l0 = family->lambda0();
  for (std::uint64_t idx = 1; s.active.size() < budget; ++idx) {
    if (idx > model.ball_cap()) {
      if (stop_at_cap && !s.active.empty()) break;
      throw ResourceLimitError("only " + std::to_string(s.active.size()) + " of " + std::to_string(budget) +
                               " swap pairs found within the ball cap");
    }
    auto e = model.element_at(idx);
    (family->pinned(e) ? pinned : free).push_back(std::move(e));
    while (!pinned.empty() && !free.empty() && s.active.size() < budget) {
      SwapPair p;
      p.k = s.pairs.size() + 1;
      p.pinned = std::move(pinned.front());
      p.free = std::move(free.front());
      pinned.pop_front();
      free.pop_front();
      p.free_mu0 = family->mu0(p.free);
      p.free_eta = family->eta(p.free);
      if (in_window(p.pinned) || in_window(p.free)) {
        p.exclusion = "window";
      } else if (!(std::abs(p.d()) < eps / 2.0)) {
        p.exclusion = "large_increment";
      } else {
        p.active = true;
      }
      if (p.active) {
        s.active.push_back(s.pairs.size());
        s.d.push_back(p.d());
        s.p_up.push_back(p.free_mu0 * (1.0 - l0));
        s.p_down.push_back((1.0 - p.free_mu0) * l0);
        s.key_pinned.push_back(p.pinned.key());
        s.key_free.push_back(p.free.key());
        s.mu_pinned.push_back(family->mu0(p.pinned));
        s.mu_free.push_back(p.free_mu0);
      } else {
        s.excluded.push_back(p.k);
      }
      s.pairs.push_back(std::move(p));
    }
  }
  return s;
}

}  // namespace

SwapSchedule build_schedule(FamilyPtr family, const std::vector<GroupElement>& K, double eps, std::size_t budget) {
  return schedule_upto(std::move(family), K, eps, budget, false);
}

namespace {

const SwapPair& active_or_throw(const SwapSchedule& s, std::size_t k) {
  const auto& p = s.pair(k);
  if (!p.active) throw PreconditionError("pair " + std::to_string(k) + " is excluded (" + p.exclusion + ")");
  return p;
}

double eta_of(const EtaWeights& e, int a) { return a == 0 ? e.eta0 : e.eta1; }

}  // namespace

double f_increment(const SwapSchedule& s, std::size_t k, const Configuration& x) {
  const auto& p = active_or_throw(s, k);
  return eta_of(p.free_eta, x.at(p.free)) - eta_of(p.free_eta, x.at(p.pinned));
}

IncrementMoments f_moments(const SwapSchedule& s, std::size_t k) {
  const auto& p = active_or_throw(s, k);
  const double l0 = s.family->lambda0();
  const double d = p.d();
  IncrementMoments m;
  m.mean = (p.free_mu0 - l0) * d;
  m.second = d * d * (p.free_mu0 * (1.0 - l0) + (1.0 - p.free_mu0) * l0);
  m.variance = m.second - m.mean * m.mean;
  return m;
}

double tau_rn(const SwapSchedule& s, std::size_t k, const Configuration& x) {
  const auto& p = active_or_throw(s, k);
  const auto& f = *s.family;
  const int a = x.at(p.pinned), b = x.at(p.free);
  return std::log(f.mu(p.pinned, a) * f.mu(p.free, b)) - std::log(f.mu(p.pinned, b) * f.mu(p.free, a));
}

Configuration apply_swap(const SwapSchedule& s, std::size_t k, const Configuration& x) {
  const auto& p = active_or_throw(s, k);
  const int a = x.at(p.pinned), b = x.at(p.free);
  return x.with_values({{p.pinned, b}, {p.free, a}});
}

double walk(const SwapSchedule& s, const Configuration& x, std::size_t n) {
  if (n > s.active_count()) throw PreconditionError("walk length exceeds the active pair count");
  double S = 0.0;
  for (std::size_t i = 0; i < n; ++i) S += f_increment(s, s.active_pair(i).k, x);
  return S;
}

WalkStats walk_stats(const SwapSchedule& s, std::size_t n) {
  if (n > s.active_count()) throw PreconditionError("walk length exceeds the active pair count");
  WalkStats w;
  w.n = n;
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto m = f_moments(s, s.active_pair(i).k);
    w.A += m.mean;
    var += m.variance;
  }
  w.B = std::sqrt(std::max(0.0, var));
  return w;
}

std::string to_string(HorizonMode m) {
  switch (m) {
    case HorizonMode::Auto: return "auto";
    case HorizonMode::Exact: return "exact";
    case HorizonMode::MonteCarlo: return "monte_carlo";
  }
  return "?";
}

namespace {

// Law of W_n = sign * S_n on the lattice bin_width * Z. Each step moves by the
// lattice point nearest to the true increment; the accumulated rounding is
// tracked so tail probabilities can be bracketed rigorously.
// Law of a sum of three-point increments on a grid of width bw. Each bin also
// keeps the range of accumulated rounding residuals (true - grid position) of
// the paths landing in it, so atoms that cancel exactly stay exact.
class GridLaw {
 public:
  explicit GridLaw(double bw) : bw_(bw), mass_{1.0}, rlo_{0.0}, rhi_{0.0} {}

  void step(double e, double pu, double pd) {
    const auto q = static_cast<std::int64_t>(std::llround(e / bw_));
    const double r = e - static_cast<double>(q) * bw_;
    const std::int64_t aq = q < 0 ? -q : q;
    const double p0 = 1.0 - pu - pd;
    const std::size_t n = mass_.size() + 2 * static_cast<std::size_t>(aq);
    std::vector<double> next(n, 0.0), lo(n, kInf), hi(n, -kInf);
    auto add = [&](std::size_t j, double m, double a, double b) {
      if (m == 0.0) return;
      next[j] += m;
      lo[j] = std::min(lo[j], a);
      hi[j] = std::max(hi[j], b);
    };
    for (std::size_t i = 0; i < mass_.size(); ++i) {
      const double v = mass_[i];
      if (v == 0.0) continue;
      const std::size_t c = i + static_cast<std::size_t>(aq);
      add(c + q, pu * v, rlo_[i] + r, rhi_[i] + r);
      add(c - q, pd * v, rlo_[i] - r, rhi_[i] - r);
      add(c, p0 * v, rlo_[i], rhi_[i]);
    }
    lo_ -= aq;
    mass_.swap(next);
    rlo_.swap(lo);
    rhi_.swap(hi);
    prune();
  }

  Interval tail(double tau) const {
    double lower = 0.0, upper = 0.0;
    for (std::size_t i = 0; i < mass_.size(); ++i) {
      if (mass_[i] == 0.0) continue;
      const double x = static_cast<double>(lo_ + static_cast<std::int64_t>(i)) * bw_;
      if (x + rlo_[i] > tau) lower += mass_[i];
      if (x + rhi_[i] > tau) upper += mass_[i];
    }
    return {std::clamp(lower, 0.0, 1.0), std::clamp(upper + dropped_, 0.0, 1.0)};
  }

  double position_error() const {
    double e = 0.0;
    for (std::size_t i = 0; i < mass_.size(); ++i)
      if (mass_[i] != 0.0) e = std::max({e, std::abs(rlo_[i]), std::abs(rhi_[i])});
    return e;
  }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  void prune() {
    constexpr double kBudget = 1e-16;
    std::size_t b = 0, e = mass_.size();
    double cut = 0.0;
    while (b + 1 < e && cut + mass_[b] <= kBudget) cut += mass_[b++];
    double cut_r = 0.0;
    while (e > b + 1 && cut_r + mass_[e - 1] <= kBudget) cut_r += mass_[--e];
    if (b == 0 && e == mass_.size()) return;
    dropped_ += cut + cut_r;
    auto slice = [&](std::vector<double>& v) {
      v = std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(b), v.begin() + static_cast<std::ptrdiff_t>(e));
    };
    slice(mass_);
    slice(rlo_);
    slice(rhi_);
    lo_ += static_cast<std::int64_t>(b);
  }

  double bw_;
  std::vector<double> mass_, rlo_, rhi_;
  std::int64_t lo_ = 0;
  double dropped_ = 0.0;
};

void check_sign(int sign) {
  if (sign != 1 && sign != -1) throw PreconditionError("sign must be +1 or -1");
}

}  // namespace

Interval exact_tail_probability(const SwapSchedule& s, std::size_t n, double t, int sign, double bin_width) {
  check_sign(sign);
  if (n > s.active_count()) throw PreconditionError("walk length exceeds the active pair count");
  if (!(bin_width > 0.0)) throw PreconditionError("bin width must be positive");
  GridLaw law(bin_width);
  for (std::size_t i = 0; i < n; ++i) law.step(sign * s.d[i], s.p_up[i], s.p_down[i]);
  return law.tail(sign * t);
}

double mc_tail_probability(const SwapSchedule& s, std::size_t n, double t, int sign, std::size_t samples,
                           std::uint64_t seed) {
  check_sign(sign);
  if (n > s.active_count()) throw PreconditionError("walk length exceeds the active pair count");
  Engine rng(derive_seed(seed, "mc-tail"));
  std::size_t hits = 0;
  for (std::size_t j = 0; j < samples; ++j) {
    double W = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = uniform01(rng);
      if (u < s.p_up[i]) {
        W += sign * s.d[i];
      } else if (u < s.p_up[i] + s.p_down[i]) {
        W -= sign * s.d[i];
      }
    }
    if (W > sign * t + kWalkTie) ++hits;
  }
  return samples ? static_cast<double>(hits) / static_cast<double>(samples) : 0.0;
}

HorizonResult find_horizon(const SwapSchedule& s, double t, int sign, const HorizonOptions& opt) {
  check_sign(sign);
  const std::size_t n_max = opt.max_n ? std::min(opt.max_n, s.active_count()) : s.active_count();
  const double tau = sign * t;
  const double need = opt.target + opt.margin_floor;
  auto too_slow = [&](const std::string& why) {
    return DivergenceTooSlowError("no horizon N <= " + std::to_string(n_max) + " with P(S_N " +
                                  (sign > 0 ? ">" : "<") + " " + std::to_string(t) + ") >= " + std::to_string(need) +
                                  ": " + why);
  };
  double reach = 0.0;
  for (std::size_t i = 0; i < n_max; ++i) reach += std::abs(s.d[i]);
  if (n_max == 0 || !(reach > tau)) throw too_slow("the walk cannot reach the threshold");

  const double bw = opt.bin_width_factor * s.eps;
  std::size_t exact_upto = 0;
  if (opt.mode != HorizonMode::MonteCarlo) {
    exact_upto = opt.mode == HorizonMode::Exact ? n_max : std::min(n_max, opt.exact_limit);
    GridLaw law(bw);
    for (std::size_t n = 1; n <= exact_upto; ++n) {
      law.step(sign * s.d[n - 1], s.p_up[n - 1], s.p_down[n - 1]);
      const auto b = law.tail(tau);
      if (b.lower >= need) {
        return {n, HorizonMode::Exact, 0.5 * (b.lower + b.upper), b.lower, b.upper, bw, law.position_error()};
      }
    }
    if (opt.mode == HorizonMode::Exact) throw too_slow("exact convolution never cleared the bound");
  }
  Engine rng(derive_seed(opt.seed, "horizon"));
  std::vector<double> W(opt.mc_samples, 0.0);
  for (std::size_t n = 1; n <= n_max; ++n) {
    const double e = sign * s.d[n - 1], pu = s.p_up[n - 1], pud = pu + s.p_down[n - 1];
    std::uint64_t hits = 0;
    for (auto& w : W) {
      const double u = uniform01(rng);
      if (u < pu) {
        w += e;
      } else if (u < pud) {
        w -= e;
      }
      hits += w > tau + kWalkTie;
    }
    if (n <= exact_upto) continue;
    const auto ci = wilson_bounds(hits, W.size());
    if (ci.lower >= need) {
      return {n, HorizonMode::MonteCarlo, static_cast<double>(hits) / static_cast<double>(W.size()), ci.lower,
              ci.upper, 0.0, 0.0};
    }
  }
  throw too_slow("Monte Carlo lower bound never cleared the bound");
}

PhiMap::PhiMap(std::shared_ptr<const SwapSchedule> schedule, double t, double eps, std::size_t N, int sign,
               std::optional<GroupElement> translation)
    : schedule_(std::move(schedule)), t_(t), eps_(eps), N_(N), sign_(sign) {
  check_sign(sign);
  if (!schedule_) throw PreconditionError("phi needs a schedule");
  if (N_ == 0 || N_ > schedule_->active_count()) throw PreconditionError("horizon outside the active pair range");
  if (!(eps_ > 0.0)) throw PreconditionError("eps must be positive");
  const auto& model = schedule_->family->model();
  translation_ = translation ? *translation : model.identity();
  model.require(translation_);
  translated_ = !translation_.is_identity();
  step_.resize(N_);
  for (std::size_t n = 0; n < N_; ++n) step_[n] = sign_ * schedule_->d[n];
  if (model.kind() == GroupKind::Z) {
    for (std::size_t n = 0; n < N_; ++n) {
      z_pinned_.push_back(translation_.z_value() + schedule_->active_pair(n).pinned.z_value());
      z_free_.push_back(translation_.z_value() + schedule_->active_pair(n).free.z_value());
    }
  }
}

GroupElement PhiMap::pinned_site(std::size_t n) const {
  const auto& g = schedule_->active_pair(n).pinned;
  return translated_ ? mul(translation_, g) : g;
}

GroupElement PhiMap::free_site(std::size_t n) const {
  const auto& h = schedule_->active_pair(n).free;
  return translated_ ? mul(translation_, h) : h;
}

std::vector<GroupElement> PhiMap::support() const {
  std::vector<GroupElement> out;
  out.reserve(2 * N_);
  for (std::size_t n = 0; n < N_; ++n) {
    out.push_back(pinned_site(n));
    out.push_back(free_site(n));
  }
  return out;
}

namespace {

// Symbol reader for the sites of phi. Unshifted points of an untranslated map
// read straight from the coordinate stream.
struct SiteReader {
  const PhiMap& phi;
  const Configuration& x;
  bool direct;

  int operator()(std::size_t n, bool free) const {
    if (direct) {
      const auto& s = phi.schedule();
      const auto& p = s.active_pair(n);
      const auto& site = free ? p.free : p.pinned;
      if (!x.overlay().empty()) {
        auto it = x.overlay().find(site);
        if (it != x.overlay().end()) return it->second;
      }
      return draw_symbol(x.mixed_seed(), free ? s.key_free[n] : s.key_pinned[n],
                         free ? s.mu_free[n] : s.mu_pinned[n]);
    }
    return x.at(free ? phi.free_site(n) : phi.pinned_site(n));
  }
};

SiteReader reader(const PhiMap& phi, const Configuration& x) {
  if (x.family() != phi.schedule_ptr()->family && x.family()->model().kind() != phi.schedule().family->model().kind())
    throw ModelMismatchError("configuration and phi live on different groups");
  const bool direct = x.family() == phi.schedule().family && phi.translation().is_identity() && x.shift().is_identity();
  return SiteReader{phi, x, direct};
}

}  // namespace

WalkTrace PhiMap::trace(const Configuration& x) const { return trace_with(reader(*this, x)); }

WalkTrace PhiMap::trace_z(const std::vector<std::int8_t>& win, std::int64_t lo, std::int64_t g) const {
  if (z_pinned_.empty()) throw ModelMismatchError("trace_z needs group Z");
  const std::int64_t hi = lo + static_cast<std::int64_t>(win.size()) - 1;
  for (std::size_t n = 0; n < N_; ++n) {
    const auto a = z_pinned_[n] - g, b = z_free_[n] - g;
    if (a < lo || a > hi || b < lo || b > hi) throw PreconditionError("symbol window does not cover the sites of phi");
  }
  const std::int8_t* base = win.data() - lo - g;
  return trace_with([&](std::size_t n, bool free) { return static_cast<int>(base[free ? z_free_[n] : z_pinned_[n]]); });
}

bool PhiMap::in_domain(const Configuration& x) const { return in_domain(trace(x)); }

std::optional<std::size_t> PhiMap::stopping_time(const Configuration& x) const {
  const auto w = trace(x);
  if (!in_domain(w)) return std::nullopt;
  return w.t_above;
}

Configuration PhiMap::apply(const Configuration& x) const {
  const auto rd = reader(*this, x);
  const auto w = trace_with(rd);
  if (!in_domain(w)) throw DomainError("point is outside Dom(phi)");
  std::vector<std::pair<GroupElement, int>> values;
  for (std::size_t n = 0; n < w.t_above; ++n) {
    const int a = rd(n, false), b = rd(n, true);
    if (a == b) continue;
    values.emplace_back(pinned_site(n), b);
    values.emplace_back(free_site(n), a);
  }
  return x.with_values(values);
}

double PhiMap::rn(const Configuration& x) const {
  const auto w = trace(x);
  if (!in_domain(w)) throw DomainError("point is outside Dom(phi)");
  return sign_ * w.w_above;
}

bool PhiMap::in_image(const Configuration& z) const { return in_image(trace(z)); }

Configuration PhiMap::preimage(const Configuration& z) const {
  const auto rd = reader(*this, z);
  const auto w = trace_with(rd);
  if (!in_image(w)) throw DomainError("point is outside the image of phi");
  std::vector<std::pair<GroupElement, int>> values;
  for (std::size_t n = 0; n < w.t_below; ++n) {
    const int a = rd(n, false), b = rd(n, true);
    if (a == b) continue;
    values.emplace_back(pinned_site(n), b);
    values.emplace_back(free_site(n), a);
  }
  return z.with_values(values);
}

PhiMap PhiMap::conjugated(const GroupElement& g) const {
  return PhiMap(schedule_, t_, eps_, N_, sign_, mul(g, translation_));
}

DomainEstimate estimate_domain(const PhiMap& phi, std::uint64_t samples, std::uint64_t seed) {
  struct Part {
    std::uint64_t inside = 0, bad = 0;
    double lo = 0.0, hi = 0.0;
    bool any = false;
  };
  std::vector<Part> parts(kReduceChunks);
  const auto& family = phi.schedule().family;
  const double t = phi.t(), eps = phi.eps();
  parallel_chunks(samples, kReduceChunks, [&](std::size_t c, std::size_t b, std::size_t e) {
    Part p;
    for (std::size_t i = b; i < e; ++i) {
      const auto x = Configuration::sample(family, derive_seed(seed, "domain", i));
      const auto w = phi.trace(x);
      if (!phi.in_domain(w)) continue;
      ++p.inside;
      const double r = phi.sign() * w.w_above;
      const bool ok = phi.sign() > 0 ? (r > t && r < t + eps) : (r < t && r > t - eps);
      if (!ok) ++p.bad;
      p.lo = p.any ? std::min(p.lo, r) : r;
      p.hi = p.any ? std::max(p.hi, r) : r;
      p.any = true;
    }
    parts[c] = p;
  });
  DomainEstimate d;
  d.samples = samples;
  bool any = false;
  for (const auto& p : parts) {
    d.inside += p.inside;
    d.rn_violations += p.bad;
    if (p.any) {
      d.rn_min = any ? std::min(d.rn_min, p.lo) : p.lo;
      d.rn_max = any ? std::max(d.rn_max, p.hi) : p.hi;
      any = true;
    }
  }
  d.fraction = samples ? static_cast<double>(d.inside) / static_cast<double>(samples) : 0.0;
  d.ci = wilson_bounds(d.inside, samples);
  return d;
}

PhiBuild build_phi(FamilyPtr family, const std::vector<GroupElement>& K, double t, double eps, int sign,
                   const BuildPhiOptions& opt) {
  check_sign(sign);
  const double l0 = family->lambda0();
  if (sign > 0 && !(t >= 0.0 && l0 >= 0.5))
    throw PreconditionError("the + construction needs t >= 0 and lambda(0) >= 1/2");
  if (sign < 0 && !(t <= 0.0 && l0 < 0.5))
    throw PreconditionError("the - construction needs t <= 0 and lambda(0) < 1/2");
  if (family->pinned_rule().kind == PinnedRuleKind::None)
    throw PreconditionError("the family has no pinned sites to swap with");
  // Take as many pairs as the cap allows up to the budget; the horizon search
  // reports when they are not enough.
  if (!(eps > 0.0)) throw PreconditionError("eps must be positive");
  if (opt.budget == 0) throw PreconditionError("budget must be positive");
  auto sched = std::make_shared<SwapSchedule>(schedule_upto(family, K, eps, opt.budget, true));
  PhiBuild out;
  out.horizon = find_horizon(*sched, t, sign, opt.horizon);
  out.phi = std::make_shared<PhiMap>(sched, t, eps, out.horizon.horizon, sign);
  out.domain = estimate_domain(*out.phi, opt.domain_samples, derive_seed(opt.seed, "build-phi-domain"));
  return out;
}

InjectivityReport injectivity_audit(const PhiMap& phi, std::uint64_t samples, std::uint64_t seed) {
  InjectivityReport rep;
  std::unordered_map<std::uint64_t, std::pair<std::uint64_t, std::uint64_t>> seen;  // image hash -> (image hash 2, x hash)
  const auto& family = phi.schedule().family;
  const std::size_t N = phi.horizon();
  for (std::uint64_t i = 0; i < samples; ++i) {
    const auto x = Configuration::sample(family, derive_seed(seed, "injectivity", i));
    const auto rd = reader(phi, x);
    const auto w = phi.trace_with(rd);
    if (!phi.in_domain(w)) continue;
    ++rep.domain_points;
    const auto y = phi.apply(x);
    const auto ry = reader(phi, y);
    std::uint64_t hx = 0x1234, hy1 = 0x5678, hy2 = 0x9abc;
    double Wx = 0.0, Wy = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
      const int a = rd(n, false), b = rd(n, true);
      const int ya = ry(n, false), yb = ry(n, true);
      hx = splitmix64(hx ^ static_cast<std::uint64_t>(2 * a + b + 4 * n));
      hy1 = splitmix64(hy1 ^ static_cast<std::uint64_t>(2 * ya + yb + 4 * n));
      hy2 = splitmix64(hy2 + 0x9e37 * static_cast<std::uint64_t>(2 * ya + yb + 1) + n);
      if (n < w.t_above) {
        const double d = phi.sign() * phi.schedule().d[n];
        Wx += (b == 0 && a == 1) ? d : (b == 1 && a == 0) ? -d : 0.0;
        Wy += (yb == 0 && ya == 1) ? d : (yb == 1 && ya == 0) ? -d : 0.0;
        if (std::abs(Wx + Wy) > 1e-12) {
          ++rep.sign_flip_violations;
          Wy = -Wx;
        }
      }
    }
    auto [it, inserted] = seen.emplace(hy1, std::make_pair(hy2, hx));
    if (!inserted && it->second.first == hy2 && it->second.second != hx) ++rep.collisions;
  }
  return rep;
}

bool CltReport::moments_ok() const { return std::abs(mean_z) <= 3.0 && std::abs(variance_z) <= 3.0; }

CltReport clt_check(const SwapSchedule& s, std::size_t n, std::uint64_t samples, std::uint64_t seed) {
  if (n == 0 || n > s.active_count()) throw PreconditionError("clt length outside the active pair range");
  CltReport rep;
  rep.n = n;
  rep.samples = samples;
  rep.exact = walk_stats(s, n);
  if (!(rep.exact.B > 0.0)) throw PreconditionError("degenerate variance: B_n = 0");
  auto S = parallel_map<double>(samples, [&](std::size_t i) {
    const std::uint64_t mixed = mix_seed(derive_seed(seed, "clt", i));
    double acc = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      const int a = draw_symbol(mixed, s.key_pinned[m], s.mu_pinned[m]);
      const int b = draw_symbol(mixed, s.key_free[m], s.mu_free[m]);
      if (b == 0 && a == 1) {
        acc += s.d[m];
      } else if (b == 1 && a == 0) {
        acc -= s.d[m];
      }
    }
    return acc;
  });
  const auto mom = sample_moments(S);
  rep.sample_mean = mom.mean;
  rep.sample_variance = mom.variance;
  const double M = static_cast<double>(samples);
  rep.mean_z = (mom.mean - rep.exact.A) / (rep.exact.B / std::sqrt(M));
  const double var_se = std::sqrt(std::max(mom.m4 - mom.variance * mom.variance, 1e-300) / M);
  rep.variance_z = (mom.variance - rep.exact.B * rep.exact.B) / var_se;
  for (auto& v : S) v = (v - rep.exact.A) / rep.exact.B;
  rep.ks = ks_statistic_normal(S);
  return rep;
}

}  // namespace nsb

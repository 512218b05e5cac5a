#include "nsb/cocycle.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>

#include "nsb/error.hpp"

namespace nsb {

double tail_mean_constant(const MarginalFamily& family, const CocycleOptions& opt) {
  if (opt.mean_constant > 0.0) return opt.mean_constant;
  return 1.0 / (family.delta() * (1.0 - family.delta()));
}

double tail_variance_constant(const MarginalFamily& family, const CocycleOptions& opt) {
  if (opt.variance_constant > 0.0) return opt.variance_constant;
  const double q = family.delta() * (1.0 - family.delta());
  return 1.0 / (4.0 * q * q);
}

CocycleEstimate cocycle_tail(const MarginalFamily& family, const GroupElement& g, std::int64_t R,
                             const CocycleOptions& opt) {
  if (R < 0) throw PreconditionError("truncation radius must be nonnegative");
  CocycleEstimate e;
  e.radius = R;
  if (g.is_identity()) return e;
  TailEstimate t;
  std::optional<double> far;
  if (family.model().kind() == GroupKind::Z) far = family.z_far_tail_bound(g.z_value(), R);
  if (far) {
    t = {*far, true};
  } else {
    t = family.kakutani_tail(g, R);
  }
  const double k = std::max(0.0, t.value);
  e.tail_mean_bound = tail_mean_constant(family, opt) * k;
  e.tail_std_bound = std::sqrt(tail_variance_constant(family, opt) * k);
  e.tail_rigorous = t.rigorous;
  return e;
}

namespace {

double rn_partial_sum(const MarginalFamily& family, const GroupElement& g, const Configuration& x, std::int64_t R) {
  const auto& model = family.model();
  double s = 0.0;
  auto term = [&](const GroupElement& h) {
    const double m = family.mu0(h), mg = family.mu0(mul(g, h));
    if (m == mg) return;
    s += x.at(h) == 0 ? std::log(m) - std::log(mg) : std::log1p(-m) - std::log1p(-mg);
  };
  if (model.kind() == GroupKind::Z) {
    if (static_cast<std::uint64_t>(2 * R + 1) > model.ball_cap())
      throw ResourceLimitError("ball(" + std::to_string(R) + ") exceeds the ball cap");
    for (std::int64_t n = -R; n <= R; ++n) term(GroupElement::z(n));
  } else {
    model.for_each_in_ball(R, term);
  }
  return s;
}

}  // namespace

CocycleEstimate rn_cocycle(const MarginalFamily& family, const GroupElement& g, const Configuration& x, std::int64_t R,
                           const CocycleOptions& opt) {
  family.model().require(g);
  auto e = cocycle_tail(family, g, R, opt);
  if (!g.is_identity()) e.value = rn_partial_sum(family, g, x, R);
  return e;
}

namespace {

std::vector<GroupElement> declared_difference(const Configuration& x, const Configuration& x2) {
  auto d = x.difference_set(x2);
  if (!d) throw PreconditionError("difference set of the pair is not declared; pass it explicitly");
  return *d;
}

}  // namespace

double gibbs_cocycle(const MarginalFamily& family, const Configuration& x, const Configuration& x2) {
  return gibbs_cocycle(family, x, x2, declared_difference(x, x2));
}

double gibbs_cocycle(const MarginalFamily& family, const Configuration& x, const Configuration& x2,
                     const std::vector<GroupElement>& difference) {
  return gibbs_general([&](const GroupElement& g) { return family.eta(g); }, x, x2, difference);
}

double gibbs_general(const EtaFn& eta, const Configuration& x, const Configuration& x2) {
  return gibbs_general(eta, x, x2, declared_difference(x, x2));
}

double gibbs_general(const EtaFn& eta, const Configuration& x, const Configuration& x2,
                     const std::vector<GroupElement>& difference) {
  double s = 0.0;
  for (const auto& g : difference) {
    const int a = x.at(g), b = x2.at(g);
    if (a == b) continue;
    const auto e = eta(g);
    s += (a == 0 ? e.eta0 : e.eta1) - (b == 0 ? e.eta0 : e.eta1);
  }
  return s;
}

double comparison_threshold(std::size_t supp_size, double eps) {
  if (!(eps > 0.0)) throw PreconditionError("eps must be positive");
  if (supp_size == 0) throw PreconditionError("support size must be positive");
  return eps / (2.0 * static_cast<double>(supp_size));
}

bool in_comparison_set(const MarginalFamily& family, const GroupElement& g, double threshold) {
  const auto e = family.eta(g);
  return std::max(std::abs(e.eta0), std::abs(e.eta1)) >= threshold;
}

ComparisonSet comparison_set(const MarginalFamily& family, std::size_t supp_size, double eps, std::int64_t R_search) {
  ComparisonSet L;
  L.threshold = comparison_threshold(supp_size, eps);
  L.radius = R_search;
  family.model().for_each_in_ball(R_search, [&](const GroupElement& g) {
    if (!in_comparison_set(family, g, L.threshold)) return;
    if (g.word_length() == R_search) L.boundary_clear = false;
    L.members.push_back(g);
  });
  if (!L.boundary_clear)
    L.warnings.push_back("finiteness of L not visible at R_search = " + std::to_string(R_search));
  return L;
}

bool avoids_comparison_set(const MarginalFamily& family, double threshold, const GroupElement& g, const PhiMap& phi) {
  for (std::size_t n = 0; n < phi.horizon(); ++n) {
    if (in_comparison_set(family, mul(g, phi.pinned_site(n)), threshold)) return false;
    if (in_comparison_set(family, mul(g, phi.free_site(n)), threshold)) return false;
  }
  return true;
}

double compare_defect(const MarginalFamily& family, const GroupElement& g, const PhiMap& phi, const Configuration& x) {
  const auto w = phi.trace(x);
  if (!phi.in_domain(w)) throw DomainError("point is outside Dom(phi)");
  auto eta_at = [](const EtaWeights& e, int a) { return a == 0 ? e.eta0 : e.eta1; };
  double s = 0.0;
  for (std::size_t n = 0; n < w.t_above; ++n) {
    const auto p = phi.pinned_site(n), f = phi.free_site(n);
    const int a = x.at(p), b = x.at(f);
    if (a == b) continue;
    // phi moves b to p and a to f.
    const auto ep = family.eta(mul(g, p)), ef = family.eta(mul(g, f));
    s += eta_at(ep, b) - eta_at(ep, a);
    s += eta_at(ef, a) - eta_at(ef, b);
  }
  return s;
}

namespace {

std::size_t smooth_size(std::size_t n) {
  std::size_t best = 1;
  while (best < n) best *= 2;
  for (std::size_t a = 1; a < best; a *= 2)
    for (std::size_t b = a; b < best; b *= 3)
      for (std::size_t c = b; c < best; c *= 5)
        if (c >= n) best = std::min(best, c);
  return best;
}

}  // namespace

struct CocycleEngine::Fft {
  std::size_t n = 0;
  fftw_plan fwd = nullptr, inv = nullptr;
  fftw_complex* kernel = nullptr;
  std::vector<double> a1;  // x-independent part of r, index g + G

  ~Fft() {
    if (fwd) fftw_destroy_plan(fwd);
    if (inv) fftw_destroy_plan(inv);
    if (kernel) fftw_free(kernel);
  }
};

namespace {
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

CocycleEngine::CocycleEngine(FamilyPtr family, std::int64_t R_trunc, std::int64_t max_shift, CocycleOptions opt)
    : family_(std::move(family)), R_(R_trunc), G_(max_shift), opt_(opt) {
  if (R_ < 0 || G_ < 0) throw PreconditionError("radii must be nonnegative");
  z_ = family_->model().kind() == GroupKind::Z;
  if (!z_) return;
  const std::int64_t W = R_ + G_;
  if (static_cast<std::uint64_t>(2 * W + 1) > family_->model().ball_cap())
    throw ResourceLimitError("cocycle window exceeds the ball cap");
  table_ = make_z_table(*family_, W);
  const std::size_t m = table_.mu0.size();
  L0_.resize(m);
  L1_.resize(m);
  D_.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    L0_[i] = std::log(table_.mu0[i]);
    L1_[i] = std::log1p(-table_.mu0[i]);
    D_[i] = L0_[i] - L1_[i];
  }
  fft_ = std::make_unique<Fft>();
  auto& f = *fft_;
  f.n = smooth_size(m);
  double* buf = fftw_alloc_real(f.n);
  f.kernel = fftw_alloc_complex(f.n / 2 + 1);
  {
    std::lock_guard lock(fftw_planner_mutex());
    f.fwd = fftw_plan_dft_r2c_1d(static_cast<int>(f.n), buf, f.kernel, FFTW_ESTIMATE);
    f.inv = fftw_plan_dft_c2r_1d(static_cast<int>(f.n), f.kernel, buf, FFTW_ESTIMATE);
  }
  std::fill(buf, buf + f.n, 0.0);
  std::copy(D_.begin(), D_.end(), buf);
  fftw_execute_dft_r2c(f.fwd, buf, f.kernel);
  fftw_free(buf);

  // A1(g) = sum_{|h| <= R} L1[h] - L1[h + g], built by sliding the window.
  auto L1 = [&](std::int64_t h) { return L1_[static_cast<std::size_t>(h + W)]; };
  f.a1.assign(static_cast<std::size_t>(2 * G_ + 1), 0.0);
  double acc = 0.0;
  for (std::int64_t g = 1; g <= G_; ++g) {
    acc += L1(-R_ + g - 1) - L1(R_ + g);
    f.a1[static_cast<std::size_t>(g + G_)] = acc;
  }
  acc = 0.0;
  for (std::int64_t g = -1; g >= -G_; --g) {
    acc += L1(R_ + g + 1) - L1(-R_ + g);
    f.a1[static_cast<std::size_t>(g + G_)] = acc;
  }
}

CocycleEngine::~CocycleEngine() = default;

CocycleEstimate CocycleEngine::tail(const GroupElement& g) const {
  std::lock_guard lock(mu_);
  auto it = tails_.find(g);
  if (it != tails_.end()) return it->second;
  auto e = cocycle_tail(*family_, g, R_, opt_);
  tails_.emplace(g, e);
  return e;
}

CocycleEngine::Prepared CocycleEngine::prepare(const Configuration& x) const {
  if (x.family()->model().kind() != family_->model().kind())
    throw ModelMismatchError("configuration lives on a different group");
  Prepared p(*this, x);
  if (!z_) return p;
  const std::int64_t W = R_ + G_;
  fill_z_window(x, table_, -W, W, p.win_);
  p.lo_ = -W;
  const auto& f = *fft_;
  double* a = fftw_alloc_real(f.n);
  fftw_complex* A = fftw_alloc_complex(f.n / 2 + 1);
  std::fill(a, a + f.n, 0.0);
  double zsum = 0.0;
  for (std::int64_t h = -R_; h <= R_; ++h) {
    if (p.win_[static_cast<std::size_t>(h + W)] != 0) continue;
    a[h + R_] = 1.0;
    zsum += D_[static_cast<std::size_t>(h + W)];
  }
  fftw_execute_dft_r2c(f.fwd, a, A);
  for (std::size_t k = 0; k < f.n / 2 + 1; ++k) {
    const double re = A[k][0], im = -A[k][1];
    const double kr = f.kernel[k][0], ki = f.kernel[k][1];
    A[k][0] = re * kr - im * ki;
    A[k][1] = re * ki + im * kr;
  }
  fftw_execute_dft_c2r(f.inv, A, a);
  p.values_.resize(static_cast<std::size_t>(2 * G_ + 1));
  const double scale = 1.0 / static_cast<double>(f.n);
  for (std::int64_t g = -G_; g <= G_; ++g) {
    const auto i = static_cast<std::size_t>(g + G_);
    p.values_[i] = g == 0 ? 0.0 : f.a1[i] + zsum - a[i] * scale;
  }
  fftw_free(a);
  fftw_free(A);
  return p;
}

CocycleEstimate CocycleEngine::Prepared::at(const GroupElement& g) const {
  if (engine_->z_) {
    const std::int64_t n = g.z_value();
    if (n < -engine_->G_ || n > engine_->G_) throw PreconditionError("shift outside the prepared range");
    auto e = engine_->tail(g);
    e.value = values_[static_cast<std::size_t>(n + engine_->G_)];
    return e;
  }
  engine_->family_->model().require(g);
  auto e = engine_->tail(g);
  if (!g.is_identity()) e.value = rn_partial_sum(*engine_->family_, g, x_, engine_->R_);
  return e;
}

int CocycleEngine::Prepared::symbol(const GroupElement& h) const {
  if (!win_.empty()) {
    const std::int64_t i = h.z_value() - lo_;
    if (i >= 0 && i < static_cast<std::int64_t>(win_.size())) return win_[static_cast<std::size_t>(i)];
  }
  return x_.at(h);
}

}  // namespace nsb

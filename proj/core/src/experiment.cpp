#include "nsb/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nsb/cocycle.hpp"
#include "nsb/construction.hpp"
#include "nsb/error.hpp"
#include "nsb/maharam.hpp"

#ifndef NSB_VERSION
#define NSB_VERSION "0.0.0"
#endif

namespace nsb {

using nlohmann::json;

std::string version() { return NSB_VERSION; }

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> k{"kakutani",  "conservativity", "clt",    "build-phi",
                                          "ratio-set", "maharam-check",  "l2-tail"};
  return k;
}

namespace {

class Params {
 public:
  Params(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + " must be an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  template <class T>
  T get(const char* key, T def) const {
    if (!j_.contains(key)) return def;
    return as<T>(j_.at(key), key);
  }

  template <class T>
  T require(const char* key) const {
    if (!j_.contains(key)) throw ConfigError(where_ + "." + key + " is required");
    return as<T>(j_.at(key), key);
  }

  const json& raw(const char* key) const { return j_.at(key); }

 private:
  template <class T>
  T as(const json& v, const char* key) const {
    const std::string path = where_ + "." + key;
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(path + ": expected a boolean");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(path + ": expected a string");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(path + ": expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_unsigned() == false && v.get<std::int64_t>() < 0)
          throw ConfigError(path + ": expected a nonnegative integer");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(path + ": expected a number");
    } else {
      if (!v.is_array()) throw ConfigError(path + ": expected a list");
      T out;
      for (const auto& e : v) out.push_back(as<typename T::value_type>(e, key));
      return out;
    }
    return v.get<T>();
  }

  const json& j_;
  std::string where_;
};

using I64s = std::vector<std::int64_t>;
using Reals = std::vector<double>;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

CylinderSet cylinder_param(const Params& p, const char* key, const GroupModel& model) {
  if (!p.has(key)) return CylinderSet({{model.identity(), 0}});
  return CylinderSet::from_json(p.raw(key), model);
}

std::vector<GroupElement> elements_param(const Params& p, const char* key, const GroupModel& model,
                                         std::vector<GroupElement> def) {
  if (!p.has(key)) return def;
  std::vector<GroupElement> out;
  for (const auto& s : p.get<std::vector<std::string>>(key, {})) out.push_back(model.parse(s));
  return out;
}

GroupElement element_param(const Params& p, const char* key, const GroupModel& model) {
  if (!p.has(key)) return model.generators().front();
  return model.parse(p.get<std::string>(key, ""));
}

std::int64_t default_r_trunc(const GroupModel& model) { return model.kind() == GroupKind::Z ? 250000 : 6; }

int sign_for(const MarginalFamily& family, double t) {
  const bool up = family.lambda0() >= 0.5;
  if (up && t >= 0.0) return 1;
  if (!up && t <= 0.0) return -1;
  throw ConfigError("target t has the wrong sign for lambda(0); relabel the family instead");
}

ProductSystem system_param(const Params& p, const FamilyPtr& family) {
  ProductSystem s{family, std::nullopt};
  if (p.has("y_zeta0")) s.y_zeta0 = p.get<double>("y_zeta0", 0.5);
  return s;
}

void run_kakutani(const GroupModel& model, const FamilyPtr& family, const Params& p, ExperimentResult& out) {
  const bool z = model.kind() == GroupKind::Z;
  const auto g = element_param(p, "g", model);
  const auto radii = p.get<I64s>("radii", z ? I64s{1000, 10000, 100000, 200000} : I64s{2, 4, 6});
  const auto vals = kakutani_series(*family, g, radii);
  Table t{"kakutani", {"radius", "partial", "increment"}, {}};
  for (std::size_t i = 0; i < radii.size(); ++i)
    t.rows.push_back({radii[i], vals[i], i ? vals[i] - vals[i - 1] : vals[i]});
  out.tables.push_back(std::move(t));
  out.summary["g"] = g.normal_form();
  out.summary["last_partial"] = vals.empty() ? 0.0 : vals.back();
  out.summary["last_increment"] = vals.size() > 1 ? vals.back() - vals[vals.size() - 2] : 0.0;

  const auto dr = p.get<I64s>("divergence_radii", z ? I64s{1000, 10000, 100000, 1000000} : I64s{2, 4, 6});
  const auto plus = divergence_series(*family, dr, Side::Plus);
  const auto all = divergence_series(*family, dr, Side::All);
  Table d{"divergence", {"radius", "plus", "all"}, {}};
  for (std::size_t i = 0; i < dr.size(); ++i) d.rows.push_back({dr[i], plus[i], all[i]});
  out.tables.push_back(std::move(d));
  if (family->heuristic()) out.warnings.push_back("family profile is heuristic; no analytic guarantee");
}

void run_conservativity(const GroupModel& model, const FamilyPtr& family, const Params& p, ExperimentResult& out) {
  const bool z = model.kind() == GroupKind::Z;
  if (p.get<bool>("partial", true)) {
    const auto cs = p.get<Reals>("cs", {0.5, 1.0, 2.0});
    const auto radii = p.get<I64s>("radii", z ? I64s{1000, 10000, 30000, 100000} : I64s{2, 3, 4});
    const auto r_inner = p.get<std::int64_t>("r_inner", z ? 1000 : 1);
    const auto v = conservativity_series(*family, cs, radii, r_inner);
    Table t{"partial", {"c", "radius", "value"}, {}};
    for (std::size_t i = 0; i < cs.size(); ++i)
      for (std::size_t j = 0; j < radii.size(); ++j) t.rows.push_back({cs[i], radii[j], v[i][j]});
    out.tables.push_back(std::move(t));
  }
  if (p.get<bool>("returns", z)) {
    const auto eps = p.get<double>("eps", 0.2);
    const auto excl = model.ball(p.get<std::int64_t>("excl_radius", 2));
    const auto radii = p.get<I64s>("group_radii", z ? I64s{100, 300, 1000} : I64s{2, 3, 4});
    const auto seeds = p.get<std::uint64_t>("seeds", 1000);
    const auto A = cylinder_param(p, "cylinder", model);
    const std::int64_t Rmax = radii.empty() ? 0 : *std::max_element(radii.begin(), radii.end());
    CocycleEngine engine(family, p.get<std::int64_t>("r_trunc", default_r_trunc(model)), Rmax);
    const auto sys = system_param(p, family);
    CylinderSet B;
    if (!sys.trivial_y()) B = cylinder_param(p, "y_cylinder", model);
    const auto c = conservativity_return_check(sys, A, B, eps, excl, radii, engine, seeds, out.seed);
    Table t{"returns", {"radius", "fraction", "ci_lower", "ci_upper"}, {}};
    for (std::size_t i = 0; i < radii.size(); ++i) t.rows.push_back({radii[i], c.fractions[i], c.ci[i].lower, c.ci[i].upper});
    out.tables.push_back(std::move(t));
    bool mono = true;
    for (std::size_t i = 1; i < c.fractions.size(); ++i) mono = mono && c.fractions[i] >= c.fractions[i - 1];
    out.summary["returns_nondecreasing"] = mono;
    out.summary["final_fraction"] = c.fractions.empty() ? 0.0 : c.fractions.back();
  }
}

void run_clt(const GroupModel&, const FamilyPtr& family, const Params& p, ExperimentResult& out) {
  const auto n = p.get<std::uint64_t>("n", 10000);
  const auto samples = p.get<std::uint64_t>("samples", 100000);
  const auto eps = p.get<double>("eps", 1.0);
  const auto s = build_schedule(family, {}, eps, n);
  const auto r = clt_check(s, n, samples, out.seed);
  Table t{"clt", {"n", "samples", "A_n", "B_n", "sample_mean", "sample_variance", "mean_z", "variance_z", "ks"}, {}};
  t.rows.push_back({r.n, r.samples, r.exact.A, r.exact.B, r.sample_mean, r.sample_variance, r.mean_z, r.variance_z, r.ks});
  out.tables.push_back(std::move(t));
  out.summary["ks"] = r.ks;
  out.summary["moments_ok"] = r.moments_ok();
}

void run_build_phi(const GroupModel& model, const FamilyPtr& family, const Params& p, ExperimentResult& out) {
  const auto t = p.get<double>("t", 0.0);
  const auto eps = p.get<double>("eps", 0.2);
  const auto K = elements_param(p, "window", model, {model.identity()});
  BuildPhiOptions o;
  o.budget = p.get<std::uint64_t>("budget", o.budget);
  o.domain_samples = p.get<std::uint64_t>("domain_samples", 100000);
  o.horizon.exact_limit = p.get<std::uint64_t>("exact_limit", o.horizon.exact_limit);
  o.horizon.mc_samples = p.get<std::uint64_t>("mc_samples", o.horizon.mc_samples);
  const auto mode = p.get<std::string>("horizon_mode", "auto");
  if (mode == "auto") {
    o.horizon.mode = HorizonMode::Auto;
  } else if (mode == "exact") {
    o.horizon.mode = HorizonMode::Exact;
  } else if (mode == "monte_carlo") {
    o.horizon.mode = HorizonMode::MonteCarlo;
  } else {
    throw ConfigError("horizon_mode must be auto, exact or monte_carlo");
  }
  o.horizon.seed = derive_seed(out.seed, "horizon");
  o.seed = out.seed;
  const int sign = sign_for(*family, t);
  const auto b = build_phi(family, K, t, eps, sign, o);
  const auto& s = b.phi->schedule();
  Table pairs{"pairs", {"k", "pinned", "free", "free_mu0", "d", "active", "exclusion"}, {}};
  const std::size_t last_k = s.active_pair(b.horizon.horizon - 1).k;
  for (std::size_t k = 1; k <= last_k; ++k) {
    const auto& q = s.pair(k);
    pairs.rows.push_back({q.k, q.pinned.normal_form(), q.free.normal_form(), q.free_mu0, q.d(), q.active, q.exclusion});
  }
  out.tables.push_back(std::move(pairs));
  auto& m = out.summary;
  m["t"] = t;
  m["eps"] = eps;
  m["sign"] = sign;
  m["horizon"] = b.horizon.horizon;
  m["horizon_mode"] = to_string(b.horizon.mode);
  m["horizon_probability"] = b.horizon.probability;
  m["horizon_lower"] = b.horizon.lower;
  m["horizon_upper"] = b.horizon.upper;
  m["bin_width"] = b.horizon.bin_width;
  m["position_error"] = b.horizon.position_error;
  m["support_size"] = 2 * b.horizon.horizon;
  m["excluded_pairs"] = std::count_if(s.pairs.begin(), s.pairs.begin() + static_cast<std::ptrdiff_t>(last_k),
                                      [](const SwapPair& q) { return !q.active; });
  m["domain_samples"] = b.domain.samples;
  m["domain_fraction"] = b.domain.fraction;
  m["domain_ci_lower"] = b.domain.ci.lower;
  m["domain_ci_upper"] = b.domain.ci.upper;
  m["rn_violations"] = b.domain.rn_violations;
  m["rn_min"] = b.domain.rn_min;
  m["rn_max"] = b.domain.rn_max;
  if (const auto inj = p.get<std::uint64_t>("injectivity_samples", 0)) {
    const auto rep = injectivity_audit(*b.phi, inj, derive_seed(out.seed, "injectivity"));
    m["injectivity_domain_points"] = rep.domain_points;
    m["injectivity_collisions"] = rep.collisions;
    m["sign_flip_violations"] = rep.sign_flip_violations;
  }
  if (b.domain.ci.lower < 1.0 / 3.0) out.warnings.push_back("domain measure lower bound is below 1/3");
}

void run_ratio_set(const GroupModel& model, const FamilyPtr& family, const Params& p, ExperimentResult& out) {
  const auto A = cylinder_param(p, "cylinder", model);
  const auto grid = p.get<Reals>("grid", {0.0, 0.25, 0.5, 0.75, 1.0});
  const auto eps = p.get<double>("eps", 0.1);
  const auto R = p.get<std::int64_t>("radius", model.kind() == GroupKind::Z ? 1000 : 3);
  const auto seeds = p.get<std::uint64_t>("seeds", 200);
  const auto rows = p.get<std::uint64_t>("event_rows", 10000);
  WitnessOptions wo;
  wo.phi_eps_fraction = p.get<double>("phi_eps_fraction", wo.phi_eps_fraction);
  wo.build.domain_samples = p.get<std::uint64_t>("domain_samples", wo.build.domain_samples);
  CocycleEngine engine(family, p.get<std::int64_t>("r_trunc", default_r_trunc(model)), R);
  const ProductSystem trivial{family, std::nullopt};
  const auto scan = ratio_scan(trivial, A, grid, eps, R, engine, seeds, derive_seed(out.seed, "scan"),
                               p.get<bool>("phi_assist", true), wo);
  Table cov{"coverage", {"t", "covered", "closest"}, {}};
  for (std::size_t i = 0; i < grid.size(); ++i) cov.rows.push_back({grid[i], scan.report.covered[i], scan.report.closest[i]});
  out.tables.push_back(std::move(cov));
  Table ev{"events", {"sample", "g", "r", "radius", "tail_mean_bound", "tail_std_bound"}, {}};
  for (std::size_t i = 0; i < scan.returns.events.size() && i < rows; ++i) {
    const auto& e = scan.returns.events[i];
    ev.rows.push_back({e.sample, e.g.normal_form(), e.r.value, e.r.radius, e.r.tail_mean_bound, e.r.tail_std_bound});
  }
  out.tables.push_back(std::move(ev));
  auto& m = out.summary;
  m["coverage"] = scan.report.coverage;
  m["label"] = scan.report.label;
  m["events"] = scan.returns.events.size();
  m["return_fraction"] = scan.returns.return_fraction;
  m["predicted_return_fraction"] = scan.returns.predicted_fraction;
  m["assisted_targets"] = scan.assisted_targets;
  out.warnings.insert(out.warnings.end(), scan.warnings.begin(), scan.warnings.end());

  const auto targets = p.get<Reals>("witness_targets", {});
  if (!targets.empty()) {
    const auto weps = p.get<double>("witness_eps", 0.15);
    const auto wseeds = p.get<std::uint64_t>("witness_seeds", 1000);
    const auto sys = system_param(p, family);
    CylinderSet B;
    if (!sys.trivial_y()) B = cylinder_param(p, "y_cylinder", model);
    Table w{"witness",
            {"t", "eps", "samples", "domain_points", "witnesses", "fraction", "ci_lower", "ci_upper", "chain_validated",
             "horizon"},
            {}};
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const auto r = essential_value_witness(sys, A, B, targets[i], weps, R, engine, wseeds,
                                             derive_seed(out.seed, "witness", i), wo);
      w.rows.push_back({r.t, r.eps, r.samples, r.domain_points, r.witnesses, r.fraction, r.ci.lower, r.ci.upper,
                        r.chain_validated, r.horizon});
      for (const auto& s : r.warnings) out.warnings.push_back("t = " + std::to_string(r.t) + ": " + s);
    }
    out.tables.push_back(std::move(w));
  }
}

void run_maharam_check(const GroupModel& model, const FamilyPtr& family, const Params& p, ExperimentResult& out) {
  const auto g = element_param(p, "g", model);
  const auto A = cylinder_param(p, "cylinder", model);
  const auto I = p.get<Reals>("interval", {0.0, 1.0});
  if (I.size() != 2) throw ConfigError("interval must have two endpoints");
  const auto rep = maharam_preservation_check(family, g, A, I[0], I[1]);
  Table t{"preservation", {"g", "window_size", "patterns", "lhs", "rhs", "max_error"}, {}};
  t.rows.push_back({g.normal_form(), rep.window_size, rep.patterns, rep.lhs, rep.rhs, rep.max_error});
  out.tables.push_back(std::move(t));
  out.summary["max_error"] = rep.max_error;

  const auto path = elements_param(p, "path", model, {});
  if (!path.empty()) {
    const auto R = p.get<std::int64_t>("r_trunc", 16);
    const ProductSystem sys{family, std::nullopt};
    MaharamPoint pt{sample_product(sys, derive_seed(out.seed, "path"), A), 0.0, 0.0, 0.0};
    Table tr{"path", {"step", "g", "t", "tail_mean", "tail_std"}, {}};
    for (std::size_t i = 0; i < path.size(); ++i) {
      pt = maharam_step(sys, path[i], pt, R);
      tr.rows.push_back({i + 1, path[i].normal_form(), pt.t, pt.tail_mean, pt.tail_std});
    }
    out.tables.push_back(std::move(tr));
  }
}

void run_l2_tail(const GroupModel& model, const FamilyPtr& family, const Params& p, ExperimentResult& out) {
  I64s def;
  if (model.kind() == GroupKind::F2) {
    def = {5, 10, 15, 20, 25, 30};
  } else if (model.kind() == GroupKind::Z) {
    def = {100, 1000, 10000, 100000};
  } else {
    def = {2, 4, 6};
  }
  const auto radii = p.get<I64s>("radii", def);
  const auto v = l2_tail_series(*family, radii);
  Table t{"l2_tail", {"radius", "value", "increment"}, {}};
  for (std::size_t i = 0; i < radii.size(); ++i) t.rows.push_back({radii[i], v[i], i ? v[i] - v[i - 1] : v[i]});
  out.tables.push_back(std::move(t));
  out.summary["last_increment"] = v.size() > 1 ? v.back() - v[v.size() - 2] : 0.0;
}

std::string format_cell(const json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  }
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isnan(d)) return "nan";
    if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", d);
    return buf;
  }
  if (v.is_null()) return "";
  return v.dump();
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  const Params top(j, "config");
  ExperimentConfig c;
  c.raw = j;
  c.seed = top.require<std::uint64_t>("seed");
  if (!j.contains("group")) throw ConfigError("config.group is required");
  if (!j.contains("family")) throw ConfigError("config.family is required");
  c.group = j.at("group");
  c.family = j.at("family");
  Params(c.group, "config.group").require<std::string>("kind");
  Params(c.family, "config.family").require<std::string>("kind");
  if (j.contains("experiments")) {
    if (!j.at("experiments").is_array()) throw ConfigError("config.experiments must be a list");
    for (std::size_t i = 0; i < j.at("experiments").size(); ++i) {
      const auto& e = j.at("experiments")[i];
      const auto kind = Params(e, "config.experiments[" + std::to_string(i) + "]").require<std::string>("kind");
      const auto& ks = experiment_kinds();
      if (std::find(ks.begin(), ks.end(), kind) == ks.end()) throw ConfigError("unknown experiment kind '" + kind + "'");
      c.experiments.push_back(e);
    }
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

GroupModel make_group(const json& spec) {
  const Params p(spec, "config.group");
  const auto kind = parse_group_kind(p.require<std::string>("kind"));
  return GroupModel(kind, p.get<std::uint64_t>("ball_cap", GroupModel::kDefaultBallCap));
}

FamilyPtr make_family(const GroupModel& model, const json& spec) {
  const Params p(spec, "config.family");
  const auto kind = p.require<std::string>("kind");
  const auto l0 = p.get<double>("lambda0", 0.5);
  const auto delta = p.get<double>("delta", 0.1);
  const auto block = p.get<std::uint64_t>("pinned_block", 32768);
  auto rule = [&](const char* def) { return PinnedRule::parse(p.get<std::string>("pinned_rule", def), block); };
  FamilyPtr f;
  if (kind == "constant") {
    f = make_constant_family(model, l0, delta, rule("block_then_power_of_two"));
  } else if (kind == "z_demo" || kind == "z2_demo" || kind == "radial_demo") {
    f = make_radial_demo_family(model, l0, delta, rule("block_then_power_of_two"));
  } else if (kind == "lamplighter_folner") {
    f = make_lamplighter_folner_family(model, l0, delta, rule("block_then_power_of_two"));
  } else if (kind == "finitely_perturbed") {
    std::vector<std::pair<GroupElement, double>> values;
    if (!p.has("support") || !p.raw("support").is_array()) throw ConfigError("config.family.support must be a list");
    for (const auto& e : p.raw("support")) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_number())
        throw ConfigError("config.family.support entries are [element, mu0] pairs");
      values.emplace_back(model.parse(e[0].get<std::string>()), e[1].get<double>());
    }
    f = make_finitely_perturbed_family(model, l0, delta, std::move(values), rule("power_of_two"));
  } else if (kind == "f2_radial") {
    f = make_f2_radial_family(model, l0, delta, p.get<double>("base", 2.0), rule("none"));
  } else {
    throw ConfigError("unknown family kind '" + kind + "'");
  }
  if (p.get<bool>("relabel", false)) f = relabeled(f);
  return f;
}

ExperimentResult run_experiment(const GroupModel& model, const FamilyPtr& family, const json& params,
                                std::size_t index, std::uint64_t master_seed) {
  const Params p(params, "experiment");
  ExperimentResult r;
  r.kind = p.require<std::string>("kind");
  r.index = index;
  r.seed = derive_seed(master_seed, r.kind, index);
  r.params = params;
  const auto t0 = std::chrono::steady_clock::now();
  if (r.kind == "kakutani") {
    run_kakutani(model, family, p, r);
  } else if (r.kind == "conservativity") {
    run_conservativity(model, family, p, r);
  } else if (r.kind == "clt") {
    run_clt(model, family, p, r);
  } else if (r.kind == "build-phi") {
    run_build_phi(model, family, p, r);
  } else if (r.kind == "ratio-set") {
    run_ratio_set(model, family, p, r);
  } else if (r.kind == "maharam-check") {
    run_maharam_check(model, family, p, r);
  } else if (r.kind == "l2-tail") {
    run_l2_tail(model, family, p, r);
  } else {
    throw ConfigError("unknown experiment kind '" + r.kind + "'");
  }
  r.wall_seconds = seconds_since(t0);
  return r;
}

Report run(const ExperimentConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  Report rep;
  rep.config = config.raw;
  rep.version = version();
  const auto model = make_group(config.group);
  const auto family = make_family(model, config.family);
  for (std::size_t i = 0; i < config.experiments.size(); ++i) {
    rep.experiments.push_back(run_experiment(model, family, config.experiments[i], i, config.seed));
    for (const auto& w : rep.experiments.back().warnings)
      rep.warnings.push_back(rep.experiments.back().kind + "[" + std::to_string(i) + "]: " + w);
  }
  rep.wall_seconds = seconds_since(t0);
  return rep;
}

std::string to_csv(const Table& t) {
  std::ostringstream os;
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << format_cell(t.columns[i]);
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_cell(row[i]);
    os << '\n';
  }
  return os.str();
}

namespace {
std::string csv_name(const ExperimentResult& e, const Table& t) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02zu", e.index);
  return std::string(buf) + "_" + e.kind + "_" + t.name + ".csv";
}
}  // namespace

json to_json(const Report& r) {
  json j;
  j["version"] = r.version;
  j["config"] = r.config;
  j["wall_seconds"] = r.wall_seconds;
  j["warnings"] = r.warnings;
  j["experiments"] = json::array();
  for (const auto& e : r.experiments) {
    json x;
    x["kind"] = e.kind;
    x["index"] = e.index;
    x["seed"] = e.seed;
    x["params"] = e.params;
    x["summary"] = e.summary.is_null() ? json::object() : e.summary;
    x["warnings"] = e.warnings;
    x["wall_seconds"] = e.wall_seconds;
    x["tables"] = json::array();
    for (const auto& t : e.tables)
      x["tables"].push_back({{"name", t.name}, {"columns", t.columns}, {"rows", t.rows.size()}, {"csv", csv_name(e, t)}});
    j["experiments"].push_back(std::move(x));
  }
  return j;
}

std::vector<std::filesystem::path> emit(const Report& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  auto write = [&](const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << body;
    if (!out) throw IoError("write failed for " + path.string());
    written.push_back(path);
  };
  write(dir / "report.json", to_json(r).dump(2) + "\n");
  for (const auto& e : r.experiments)
    for (const auto& t : e.tables) write(dir / csv_name(e, t), to_csv(t));
  return written;
}

}  // namespace nsb

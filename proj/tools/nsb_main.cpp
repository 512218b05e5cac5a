#include <CLI11.hpp>

#include <chrono>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nsb/error.hpp"
#include "nsb/experiment.hpp"
#include "nsb/parallel.hpp"

using nlohmann::json;

namespace {

json parse_json_flag(const std::string& flag, const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw nsb::ConfigError("--" + flag + " is not valid JSON: " + e.what());
  }
}

// "0,0.25,0.5" or "[0, 0.25, 0.5]".
json parse_list_flag(const std::string& flag, const std::string& text) {
  if (!text.empty() && text.front() == '[') return parse_json_flag(flag, text);
  return parse_json_flag(flag, "[" + text + "]");
}

struct Overrides {
  std::optional<double> t, eps;
  std::optional<std::string> window, cylinder, grid;
  std::optional<std::int64_t> radius;
  std::optional<std::uint64_t> seeds;
  std::vector<std::string> set;

  void apply(json& e) const {
    if (t) e["t"] = *t;
    if (eps) e["eps"] = *eps;
    if (window) e["window"] = parse_json_flag("window", *window);
    if (cylinder) e["cylinder"] = parse_json_flag("cylinder", *cylinder);
    if (grid) e["grid"] = parse_list_flag("grid", *grid);
    if (radius) e["radius"] = *radius;
    if (seeds) e["seeds"] = *seeds;
    for (const auto& kv : set) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) throw nsb::ConfigError("--set expects key=json, got '" + kv + "'");
      e[kv.substr(0, eq)] = parse_json_flag("set", kv.substr(eq + 1));
    }
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bernoulli shift simulator: cocycles, swap constructions, ratio-set scans"};
  app.set_version_flag("--version", nsb::version());
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir = "nsb-out";
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  Overrides ov;
  app.add_option("--config", config_path, "experiment config (JSON)")->required();
  app.add_option("--out", out_dir, "output directory for report.json and CSV tables");
  app.add_option("--seed", seed, "override the master seed");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--set", ov.set, "override an experiment parameter: key=json (repeatable)");

  const std::map<std::string, std::string> kinds{
      {"check-kakutani", "kakutani"}, {"check-conservativity", "conservativity"},
      {"clt", "clt"},                 {"build-phi", "build-phi"},
      {"ratio-set", "ratio-set"},     {"maharam-check", "maharam-check"},
      {"l2-tail", "l2-tail"},         {"report", ""}};
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, kind] : kinds)
    subs[name] = app.add_subcommand(name, kind.empty() ? "run every experiment in the config" : "run " + kind + " experiments");
  subs["build-phi"]->add_option("--t", ov.t, "target value t");
  subs["build-phi"]->add_option("--eps", ov.eps, "tolerance eps");
  subs["build-phi"]->add_option("--window", ov.window, "forbidden window K as a JSON list of elements");
  subs["ratio-set"]->add_option("--cylinder", ov.cylinder, "cylinder A as JSON [[element, symbol], ...]");
  subs["ratio-set"]->add_option("--grid", ov.grid, "grid of targets, e.g. 0,0.25,0.5");
  subs["ratio-set"]->add_option("--eps", ov.eps, "tolerance eps");
  subs["ratio-set"]->add_option("--radius", ov.radius, "group radius R_group");
  subs["ratio-set"]->add_option("--seeds", ov.seeds, "number of sampled points of A");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(nsb::ExitCode::config);
  }

  try {
    nsb::set_thread_count(threads);
    auto config = nsb::load_config(config_path);
    if (seed) config.seed = *seed;
    std::string name;
    for (const auto& [n, s] : subs)
      if (s->parsed()) name = n;
    const std::string kind = kinds.at(name);

    nsb::Report rep;
    rep.config = config.raw;
    if (seed) rep.config["seed"] = *seed;
    rep.version = nsb::version();
    const auto t0 = std::chrono::steady_clock::now();
    const auto model = nsb::make_group(config.group);
    const auto family = nsb::make_family(model, config.family);
    std::vector<std::pair<std::size_t, json>> todo;
    for (std::size_t i = 0; i < config.experiments.size(); ++i)
      if (kind.empty() || config.experiments[i]["kind"] == kind) todo.emplace_back(i, config.experiments[i]);
    if (todo.empty() && !kind.empty()) todo.emplace_back(config.experiments.size(), json{{"kind", kind}});
    for (auto& [i, e] : todo) {
      if (!kind.empty()) ov.apply(e);
      rep.experiments.push_back(nsb::run_experiment(model, family, e, i, config.seed));
      for (const auto& w : rep.experiments.back().warnings) {
        rep.warnings.push_back(rep.experiments.back().kind + "[" + std::to_string(i) + "]: " + w);
        std::cerr << "warning: " << rep.warnings.back() << '\n';
      }
      std::cout << rep.experiments.back().kind << "[" << i << "] " << rep.experiments.back().summary.dump() << '\n';
    }
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (const auto& p : nsb::emit(rep, out_dir)) std::cout << "wrote " << p.string() << '\n';
    return 0;
  } catch (const nsb::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(nsb::ExitCode::failure);
  }
}

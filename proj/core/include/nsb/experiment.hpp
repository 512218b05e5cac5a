#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "nsb/family.hpp"

namespace nsb {

std::string version();

// Experiment kinds accepted in a config.
const std::vector<std::string>& experiment_kinds();

struct ExperimentConfig {
  nlohmann::json raw;
  std::uint64_t seed = 0;
  nlohmann::json group;
  nlohmann::json family;
  std::vector<nlohmann::json> experiments;
};

// Throws ConfigError on any structural problem; the master seed is mandatory.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

GroupModel make_group(const nlohmann::json& spec);
FamilyPtr make_family(const GroupModel& model, const nlohmann::json& spec);

// Cells are JSON numbers, strings or booleans.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::json>> rows;
};

struct ExperimentResult {
  std::string kind;
  std::size_t index = 0;
  std::uint64_t seed = 0;  // derive_seed(master, kind, index)
  nlohmann::json params;
  nlohmann::json summary;
  std::vector<Table> tables;
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;
};

struct Report {
  nlohmann::json config;
  std::string version;
  std::vector<ExperimentResult> experiments;
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;
};

ExperimentResult run_experiment(const GroupModel& model, const FamilyPtr& family, const nlohmann::json& params,
                                std::size_t index, std::uint64_t master_seed);
Report run(const ExperimentConfig& config);

std::string to_csv(const Table& t);
nlohmann::json to_json(const Report& r);
// Writes report.json and one CSV per table into dir; returns the paths written.
std::vector<std::filesystem::path> emit(const Report& r, const std::filesystem::path& dir);

}  // namespace nsb

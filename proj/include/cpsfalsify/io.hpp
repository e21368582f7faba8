#pragma once

#include "cpsfalsify/evolution.hpp"
#include "cpsfalsify/scenario.hpp"
#include "cpsfalsify/simulation.hpp"
#include "cpsfalsify/surrogate.hpp"
#include "cpsfalsify/sysid.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cpsf::io {

using nlohmann::json;

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

std::string read_file(const std::filesystem::path &path);

/// Writes atomically enough for batch use: truncates and replaces contents.
void write_file(const std::filesystem::path &path, std::string_view contents);

// Test-case documents:
//   {"tc": [{"st": {"temp": 21.5, "duration": 120, "model": 2, "mode": "ON"}}, ...]}
// "mode" is optional on input and defaults to ON.
json test_case_to_json(const TestCase &tc);
TestCase test_case_from_json(const json &doc);
std::string serialize_test_case(const TestCase &tc);
TestCase parse_test_case(std::string_view text);

// Coefficient tables:
//   {"models": [{"model_id": 1, "k_on1": 6, "k_on2": 0.14170703,
//                "k_off1": 4.3, "k_off2": 0.09531917, "condition": "..."}]}
json registry_to_json(const ModelRegistry &registry);
ModelRegistry registry_from_json(const json &doc);
std::string serialize_registry(const ModelRegistry &registry);
ModelRegistry parse_registry(std::string_view text);

// Configuration objects. Missing keys take defaults, unknown keys are
// rejected. A document may also wrap the object under its section name
// ("generator", "ga", "simulation").
json to_json(const GeneratorConfig &cfg);
json to_json(const GAConfig &cfg);
json to_json(const SimConfig &cfg);
GeneratorConfig generator_config_from_json(const json &doc);
GAConfig ga_config_from_json(const json &doc);
SimConfig sim_config_from_json(const json &doc);

/// All three sections with their default values.
json default_config();

/// Raw trace rows with header "t_minutes,temperature_c,mode".
std::vector<RawSample> parse_raw_trace(std::string_view text);
std::string format_raw_trace(std::span<const RawSample> samples);

/// Rows "minute_index,expected_c,simulated_c".
std::string format_trace(const Trace &expected, const Trace &simulated);

/// Rows "generation,best_fitness,mean_fitness"; generation starts at 1.
std::string format_convergence(std::span<const GenerationStats> history);

/// Rows "method,run_index,best_fitness" for GA and RS.
std::string format_comparison_runs(const ComparisonReport &report);

/// Rows "run_index,fitness" for every random-search individual.
std::string format_random_individuals(const ComparisonReport &report);

/// Boxplot statistics per series plus the rank test; the last column holds
/// the negated mean for side-by-side reading with minimizing tools.
std::string format_comparison_summary(const ComparisonReport &report);

struct RunManifest {
  std::optional<std::filesystem::path> registry;
  std::optional<std::filesystem::path> generator_config;
  std::optional<std::filesystem::path> ga_config;
  std::optional<std::filesystem::path> sim_config;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;
};

/// Relative paths resolve against the manifest's directory. Throws when a
/// referenced input file does not exist.
RunManifest load_manifest(const std::filesystem::path &path);

struct LoadedRun {
  ModelRegistry registry = ModelRegistry::defaults();
  GeneratorConfig generator;
  GAConfig ga;
  SimConfig sim;
};

LoadedRun load_run(const RunManifest &manifest);

/// FNV-1a 64 of the canonical JSON dump of all configs and the registry.
std::string config_hash(const LoadedRun &run);

} // namespace cpsf::io

#include "cpsfalsify/io.hpp"

#include "cpsfalsify/error.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace cpsf::io {

namespace fs = std::filesystem;

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string read_file(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path &path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error("cannot write " + path.string());
  }
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) {
    throw Error("write failed for " + path.string());
  }
}

namespace {

json parse_json(std::string_view text, const char *what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error &e) {
    throw Error(std::string("malformed ") + what + ": " + e.what());
  }
}

const json &require(const json &obj, const char *key, const std::string &where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw Error(where + ": missing \"" + key + "\"");
  }
  return obj.at(key);
}

double as_number(const json &v, const std::string &where) {
  if (!v.is_number()) {
    throw Error(where + ": expected a number");
  }
  return v.get<double>();
}

std::int64_t as_integer(const json &v, const std::string &where) {
  if (!v.is_number_integer()) {
    throw Error(where + ": expected an integer");
  }
  return v.get<std::int64_t>();
}

std::uint64_t as_unsigned(const json &v, const std::string &where) {
  if (!v.is_number_unsigned()) {
    throw Error(where + ": expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

void reject_unknown(const json &obj, std::initializer_list<const char *> keys, const std::string &where) {
  if (!obj.is_object()) {
    throw Error(where + ": expected an object");
  }
  const std::set<std::string> known(keys.begin(), keys.end());
  for (const auto &[k, _] : obj.items()) {
    if (!known.contains(k)) {
      throw Error(where + ": unknown key \"" + k + "\"");
    }
  }
}

const json &section(const json &doc, const char *name) {
  if (doc.is_object() && doc.contains(name) && doc.at(name).is_object()) {
    return doc.at(name);
  }
  return doc;
}

Mode parse_mode(std::string_view text, const std::string &where) {
  std::string upper(text);
  for (char &c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (upper == "ON") return Mode::On;
  if (upper == "OFF") return Mode::Off;
  throw Error(where + ": mode must be ON or OFF, got \"" + std::string(text) + "\"");
}

} // namespace

json test_case_to_json(const TestCase &tc) {
  json states = json::array();
  for (const auto &s : tc.states) {
    states.push_back({{"st",
                       {{"temp", s.target_temp},
                        {"duration", s.duration},
                        {"model", s.model_id},
                        {"mode", std::string(to_string(s.mode_hint))}}}});
  }
  return {{"tc", states}};
}

TestCase test_case_from_json(const json &doc) {
  const json &states = require(doc, "tc", "test case");
  if (!states.is_array()) {
    throw Error("test case: \"tc\" must be an array");
  }
  TestCase tc;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const std::string where = "test case state " + std::to_string(i);
    const json &st = require(states[i], "st", where);
    reject_unknown(st, {"temp", "duration", "model", "mode"}, where);
    ScenarioState s;
    s.target_temp = as_number(require(st, "temp", where), where + " temp");
    s.duration = as_integer(require(st, "duration", where), where + " duration");
    s.model_id = as_integer(require(st, "model", where), where + " model");
    if (st.contains("mode")) {
      if (!st.at("mode").is_string()) throw Error(where + ": mode must be a string");
      s.mode_hint = parse_mode(st.at("mode").get<std::string>(), where);
    }
    tc.states.push_back(s);
  }
  if (tc.states.empty()) {
    throw Error("test case: no states");
  }
  return tc;
}

std::string serialize_test_case(const TestCase &tc) {
  return test_case_to_json(tc).dump(2) + "\n";
}

TestCase parse_test_case(std::string_view text) {
  return test_case_from_json(parse_json(text, "test case document"));
}

json registry_to_json(const ModelRegistry &registry) {
  json models = json::array();
  for (const auto &m : registry.models()) {
    json row = {{"model_id", m.model_id}, {"k_on1", m.k_on1}, {"k_on2", m.k_on2},
                {"k_off1", m.k_off1},     {"k_off2", m.k_off2}};
    if (m.condition) row["condition"] = *m.condition;
    models.push_back(std::move(row));
  }
  return {{"models", models}};
}

ModelRegistry registry_from_json(const json &doc) {
  const json &rows = require(doc, "models", "coefficient table");
  if (!rows.is_array()) {
    throw Error("coefficient table: \"models\" must be an array");
  }
  std::vector<ModelCoefficients> models;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string where = "coefficient row " + std::to_string(i);
    const json &row = rows[i];
    reject_unknown(row, {"model_id", "k_on1", "k_on2", "k_off1", "k_off2", "condition"}, where);
    ModelCoefficients m;
    m.model_id = as_integer(require(row, "model_id", where), where + " model_id");
    m.k_on1 = as_number(require(row, "k_on1", where), where + " k_on1");
    m.k_on2 = as_number(require(row, "k_on2", where), where + " k_on2");
    m.k_off1 = as_number(require(row, "k_off1", where), where + " k_off1");
    m.k_off2 = as_number(require(row, "k_off2", where), where + " k_off2");
    if (row.contains("condition")) {
      if (!row.at("condition").is_string()) throw Error(where + ": condition must be a string");
      m.condition = row.at("condition").get<std::string>();
    }
    models.push_back(std::move(m));
  }
  return ModelRegistry(std::move(models));
}

std::string serialize_registry(const ModelRegistry &registry) {
  return registry_to_json(registry).dump(2) + "\n";
}

ModelRegistry parse_registry(std::string_view text) {
  return registry_from_json(parse_json(text, "coefficient table"));
}

json to_json(const GeneratorConfig &cfg) {
  return {{"p_switch", cfg.p_switch},
          {"p_stay", cfg.p_stay},
          {"temp_bounds", {cfg.temp_bounds.lo, cfg.temp_bounds.hi}},
          {"duration_bounds", {cfg.duration_bounds.lo, cfg.duration_bounds.hi}},
          {"state_count_bounds", {cfg.state_count_bounds.lo, cfg.state_count_bounds.hi}},
          {"horizon", cfg.horizon},
          {"rng_seed", cfg.rng_seed}};
}

json to_json(const GAConfig &cfg) {
  json out = {{"generations", cfg.generations},
              {"population_size", cfg.population_size},
              {"mutation_rate", cfg.mutation_rate},
              {"crossover_rate", cfg.crossover_rate},
              {"tournament_k", cfg.tournament_k},
              {"rng_seed", cfg.rng_seed},
              {"threads", cfg.threads},
              {"eliminate_duplicates", cfg.eliminate_duplicates}};
  out["evaluation_budget"] = cfg.evaluation_budget ? json(*cfg.evaluation_budget) : json(nullptr);
  return out;
}

json to_json(const SimConfig &cfg) {
  return {{"initial_temp", cfg.initial_temp}, {"hysteresis", cfg.hysteresis}};
}

namespace {

template <typename T, typename Convert>
Bounds<T> bounds_from(const json &v, const std::string &where, Convert convert) {
  if (!v.is_array() || v.size() != 2) {
    throw Error(where + ": expected [lo, hi]");
  }
  return {convert(v[0], where), convert(v[1], where)};
}

} // namespace

GeneratorConfig generator_config_from_json(const json &doc) {
  const json &obj = section(doc, "generator");
  const std::string where = "generator config";
  reject_unknown(obj, {"p_switch", "p_stay", "temp_bounds", "duration_bounds", "state_count_bounds",
                       "horizon", "rng_seed"},
                 where);
  GeneratorConfig cfg;
  if (obj.contains("p_switch")) cfg.p_switch = as_number(obj["p_switch"], where + " p_switch");
  if (obj.contains("p_stay")) cfg.p_stay = as_number(obj["p_stay"], where + " p_stay");
  if (obj.contains("temp_bounds")) cfg.temp_bounds = bounds_from<double>(obj["temp_bounds"], where + " temp_bounds", as_number);
  if (obj.contains("duration_bounds"))
    cfg.duration_bounds = bounds_from<std::int64_t>(obj["duration_bounds"], where + " duration_bounds", as_integer);
  if (obj.contains("state_count_bounds"))
    cfg.state_count_bounds =
        bounds_from<std::int64_t>(obj["state_count_bounds"], where + " state_count_bounds", as_integer);
  if (obj.contains("horizon")) cfg.horizon = as_integer(obj["horizon"], where + " horizon");
  if (obj.contains("rng_seed")) cfg.rng_seed = as_unsigned(obj["rng_seed"], where + " rng_seed");
  cfg.validate();
  return cfg;
}

GAConfig ga_config_from_json(const json &doc) {
  const json &obj = section(doc, "ga");
  const std::string where = "ga config";
  reject_unknown(obj, {"generations", "population_size", "mutation_rate", "crossover_rate", "tournament_k",
                       "rng_seed", "evaluation_budget", "threads", "eliminate_duplicates"},
                 where);
  GAConfig cfg;
  if (obj.contains("generations")) cfg.generations = as_integer(obj["generations"], where + " generations");
  if (obj.contains("population_size"))
    cfg.population_size = as_integer(obj["population_size"], where + " population_size");
  if (obj.contains("mutation_rate")) cfg.mutation_rate = as_number(obj["mutation_rate"], where + " mutation_rate");
  if (obj.contains("crossover_rate"))
    cfg.crossover_rate = as_number(obj["crossover_rate"], where + " crossover_rate");
  if (obj.contains("tournament_k")) cfg.tournament_k = as_integer(obj["tournament_k"], where + " tournament_k");
  if (obj.contains("rng_seed")) cfg.rng_seed = as_unsigned(obj["rng_seed"], where + " rng_seed");
  if (obj.contains("threads")) cfg.threads = as_integer(obj["threads"], where + " threads");
  if (obj.contains("eliminate_duplicates")) {
    if (!obj["eliminate_duplicates"].is_boolean()) throw Error(where + " eliminate_duplicates: expected a boolean");
    cfg.eliminate_duplicates = obj["eliminate_duplicates"].get<bool>();
  }
  if (obj.contains("evaluation_budget")) {
    const json &b = obj["evaluation_budget"];
    cfg.evaluation_budget = b.is_null() ? std::nullopt
                                        : std::optional<std::int64_t>(as_integer(b, where + " evaluation_budget"));
  }
  cfg.validate();
  return cfg;
}

SimConfig sim_config_from_json(const json &doc) {
  const json &obj = section(doc, "simulation");
  const std::string where = "simulation config";
  reject_unknown(obj, {"initial_temp", "hysteresis"}, where);
  SimConfig cfg;
  if (obj.contains("initial_temp")) cfg.initial_temp = as_number(obj["initial_temp"], where + " initial_temp");
  if (obj.contains("hysteresis")) cfg.hysteresis = as_number(obj["hysteresis"], where + " hysteresis");
  cfg.validate();
  return cfg;
}

json default_config() {
  return {{"generator", to_json(GeneratorConfig{})},
          {"ga", to_json(GAConfig{})},
          {"simulation", to_json(SimConfig{})}};
}

std::vector<RawSample> parse_raw_trace(std::string_view text) {
  std::vector<RawSample> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    if (!header_seen) {
      if (line != "t_minutes,temperature_c,mode") {
        throw Error("line " + std::to_string(line_no) +
                    ": expected header \"t_minutes,temperature_c,mode\"");
      }
      header_seen = true;
      continue;
    }

    const std::string where = "line " + std::to_string(line_no);
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos || line.find(',', c2 + 1) != std::string_view::npos) {
      throw Error(where + ": expected 3 comma-separated fields");
    }
    auto number = [&](std::string_view field, const char *name) {
      double v = 0.0;
      const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
      if (res.ec != std::errc() || res.ptr != field.data() + field.size() || !std::isfinite(v)) {
        throw Error(where + ": invalid " + name + " \"" + std::string(field) + "\"");
      }
      return v;
    };
    RawSample s;
    s.t = number(line.substr(0, c1), "t_minutes");
    s.y = number(line.substr(c1 + 1, c2 - c1 - 1), "temperature_c");
    s.mode = parse_mode(line.substr(c2 + 1), where);
    out.push_back(s);
  }
  if (!header_seen) {
    throw Error("empty trace file");
  }
  if (out.empty()) {
    throw Error("trace file has no samples");
  }
  return out;
}

std::string format_raw_trace(std::span<const RawSample> samples) {
  std::string out = "t_minutes,temperature_c,mode\n";
  for (const auto &s : samples) {
    out += format_double(s.t) + "," + format_double(s.y) + "," + std::string(to_string(s.mode)) + "\n";
  }
  return out;
}

std::string format_trace(const Trace &expected, const Trace &simulated) {
  if (expected.size() != simulated.size()) {
    throw Error("trace export: lengths differ");
  }
  std::string out = "minute_index,expected_c,simulated_c\n";
  for (std::size_t i = 0; i < expected.size(); ++i) {
    out += std::to_string(i) + "," + format_double(expected.values[i]) + "," +
           format_double(simulated.values[i]) + "\n";
  }
  return out;
}

std::string format_convergence(std::span<const GenerationStats> history) {
  std::string out = "generation,best_fitness,mean_fitness\n";
  for (std::size_t i = 0; i < history.size(); ++i) {
    out += std::to_string(i + 1) + "," + format_double(history[i].best) + "," +
           format_double(history[i].mean) + "\n";
  }
  return out;
}

std::string format_comparison_runs(const ComparisonReport &report) {
  std::string out = "method,run_index,best_fitness\n";
  for (std::size_t i = 0; i < report.ga_best.size(); ++i) {
    out += "GA," + std::to_string(i) + "," + format_double(report.ga_best[i]) + "\n";
  }
  for (std::size_t i = 0; i < report.rs_best.size(); ++i) {
    out += "RS," + std::to_string(i) + "," + format_double(report.rs_best[i]) + "\n";
  }
  return out;
}

std::string format_random_individuals(const ComparisonReport &report) {
  std::string out = "run_index,fitness\n";
  const std::size_t runs = report.rs_best.size();
  const std::size_t per_run = runs == 0 ? 0 : report.rs_all.size() / runs;
  for (std::size_t i = 0; i < report.rs_all.size(); ++i) {
    out += std::to_string(per_run == 0 ? 0 : i / per_run) + "," + format_double(report.rs_all[i]) + "\n";
  }
  return out;
}

std::string format_comparison_summary(const ComparisonReport &report) {
  std::string out = "series,count,min,q1,median,q3,max,mean,mean_paper_sign\n";
  auto row = [&](const char *name, const SeriesSummary &s) {
    out += std::string(name) + "," + std::to_string(s.count) + "," + format_double(s.min) + "," +
           format_double(s.q1) + "," + format_double(s.median) + "," + format_double(s.q3) + "," +
           format_double(s.max) + "," + format_double(s.mean) + "," + format_double(-s.mean) + "\n";
  };
  row("ga_best", report.ga_summary);
  row("rs_best", report.rs_summary);
  row("rs_all_individuals", report.rs_all_summary);
  out += "\n# rank test (Mann-Whitney U, normal approximation): GA best vs RS best\n";
  out += "statistic,value\n";
  out += "u," + format_double(report.rank_test.u) + "\n";
  out += "z," + format_double(report.rank_test.z) + "\n";
  out += "p_value," + format_double(report.rank_test.p_value) + "\n";
  out += "budget_per_run," + std::to_string(report.budget) + "\n";
  return out;
}

RunManifest load_manifest(const fs::path &path) {
  const json doc = parse_json(read_file(path), "manifest");
  const std::string where = "manifest";
  reject_unknown(doc, {"registry", "generator_config", "ga_config", "sim_config", "output_dir", "seed"}, where);
  const fs::path base = path.parent_path();

  auto input = [&](const char *key) -> std::optional<fs::path> {
    if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
    if (!doc.at(key).is_string()) throw Error(where + ": \"" + key + "\" must be a path string");
    fs::path p = doc.at(key).get<std::string>();
    if (p.is_relative()) p = base / p;
    if (!fs::exists(p)) {
      throw Error(where + ": " + key + " " + p.string() + " does not exist");
    }
    return p;
  };

  RunManifest m;
  m.registry = input("registry");
  m.generator_config = input("generator_config");
  m.ga_config = input("ga_config");
  m.sim_config = input("sim_config");
  if (doc.contains("output_dir")) {
    if (!doc.at("output_dir").is_string()) throw Error(where + ": output_dir must be a path string");
    m.output_dir = doc.at("output_dir").get<std::string>();
  }
  if (m.output_dir.is_relative()) m.output_dir = base / m.output_dir;
  if (doc.contains("seed")) m.seed = as_unsigned(doc.at("seed"), where + " seed");
  return m;
}

LoadedRun load_run(const RunManifest &manifest) {
  LoadedRun run;
  if (manifest.registry) run.registry = parse_registry(read_file(*manifest.registry));
  if (manifest.generator_config)
    run.generator = generator_config_from_json(parse_json(read_file(*manifest.generator_config), "generator config"));
  if (manifest.ga_config) run.ga = ga_config_from_json(parse_json(read_file(*manifest.ga_config), "ga config"));
  if (manifest.sim_config)
    run.sim = sim_config_from_json(parse_json(read_file(*manifest.sim_config), "simulation config"));
  return run;
}

std::string config_hash(const LoadedRun &run) {
  json all = {{"generator", to_json(run.generator)},
              {"ga", to_json(run.ga)},
              {"simulation", to_json(run.sim)},
              {"registry", registry_to_json(run.registry)}};
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : all.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

} // namespace cpsf::io

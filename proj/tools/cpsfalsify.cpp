#include "cpsfalsify/error.hpp"
#include "cpsfalsify/evolution.hpp"
#include "cpsfalsify/io.hpp"
#include "cpsfalsify/scenario.hpp"
#include "cpsfalsify/simulation.hpp"
#include "cpsfalsify/sysid.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace cpsf;

namespace {

fs::path ensure_dir(const fs::path &dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error("cannot create output directory " + dir.string());
  }
  return dir;
}

io::json load_json(const fs::path &path) {
  try {
    return io::json::parse(io::read_file(path));
  } catch (const io::json::parse_error &e) {
    throw Error("malformed " + path.string() + ": " + e.what());
  }
}

ModelRegistry load_registry(const std::optional<fs::path> &path) {
  return path ? io::parse_registry(io::read_file(*path)) : ModelRegistry::defaults();
}

int cmd_fit(const fs::path &trace_path, const fs::path &out_path) {
  const auto raw = io::parse_raw_trace(io::read_file(trace_path));
  const TraceFit fit = fit_trace(raw);
  if (fit.dropped_samples > 0) {
    std::cerr << "warning: dropped " << fit.dropped_samples << " samples in runs shorter than 3\n";
  }
  if (fit.unpaired_segments > 0) {
    std::cerr << "warning: " << fit.unpaired_segments << " segment(s) without an opposite-mode neighbour ignored\n";
  }
  std::vector<ModelCoefficients> models;
  for (const auto &m : fit.models) {
    std::cout << "model " << m.coeffs.model_id << ": on rmse " << io::format_double(m.on_rmse)
              << " C, off rmse " << io::format_double(m.off_rmse) << " C\n";
    models.push_back(m.coeffs);
  }
  io::write_file(out_path, io::serialize_registry(ModelRegistry(std::move(models))));
  return 0;
}

int cmd_generate(const std::optional<fs::path> &config, const std::optional<fs::path> &registry_path,
                 std::int64_t n, std::optional<std::uint64_t> seed, const fs::path &out_dir) {
  if (n < 1) {
    throw Error("n must be >= 1");
  }
  const GeneratorConfig cfg = config ? io::generator_config_from_json(load_json(*config)) : GeneratorConfig{};
  const ModelRegistry registry = load_registry(registry_path);
  const auto cases = generate_population(static_cast<std::size_t>(n), cfg, registry, seed.value_or(cfg.rng_seed));
  ensure_dir(out_dir);
  for (std::size_t i = 0; i < cases.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "tc_%05zu.json", i);
    io::write_file(out_dir / name, io::serialize_test_case(cases[i]));
  }
  std::cout << "wrote " << cases.size() << " test cases to " << out_dir.string() << "\n";
  return 0;
}

int cmd_simulate(const fs::path &tc_path, const std::optional<fs::path> &registry_path,
                 const std::optional<fs::path> &config, const std::optional<fs::path> &generator_config,
                 const fs::path &out_path) {
  const ModelRegistry registry = load_registry(registry_path);
  const SimConfig sim = config ? io::sim_config_from_json(load_json(*config)) : SimConfig{};
  const GeneratorConfig gen =
      generator_config ? io::generator_config_from_json(load_json(*generator_config)) : GeneratorConfig{};
  const TestCase tc = io::parse_test_case(io::read_file(tc_path));
  check_constraints(tc, gen, registry);

  const Trace expected = expected_trace(tc);
  const Trace simulated = simulate(tc, registry, sim);
  io::write_file(out_path, io::format_trace(expected, simulated));
  const double f = rmse(expected, simulated);
  std::cout << "fitness (rmse, C): " << io::format_double(f) << "\n";
  std::cout << "fitness (paper-sign): " << io::format_double(-f) << "\n";
  return 0;
}

struct RunContext {
  io::RunManifest manifest;
  io::LoadedRun run;
  fs::path out_dir;
};

RunContext load_context(const fs::path &manifest_path, std::optional<std::uint64_t> seed,
                        const std::optional<fs::path> &out, const std::optional<fs::path> &registry) {
  RunContext ctx;
  ctx.manifest = io::load_manifest(manifest_path);
  if (registry) ctx.manifest.registry = *registry;
  if (seed) ctx.manifest.seed = *seed;
  ctx.run = io::load_run(ctx.manifest);
  ctx.run.ga.rng_seed = ctx.manifest.seed;
  ctx.out_dir = ensure_dir(out.value_or(ctx.manifest.output_dir));
  return ctx;
}

void write_best(const RunContext &ctx, const EvolutionResult &result, const char *history_file) {
  io::write_file(ctx.out_dir / "best_test_case.json", io::serialize_test_case(result.best));
  io::write_file(ctx.out_dir / history_file, io::format_convergence(result.history));
  const io::json summary = {{"seed", result.seed},
                            {"config_hash", io::config_hash(ctx.run)},
                            {"best_fitness", result.best_fitness},
                            {"best_fitness_paper_sign", -result.best_fitness},
                            {"evaluations_used", result.evaluations_used},
                            {"history_rows", result.history.size()}};
  io::write_file(ctx.out_dir / "summary.json", summary.dump(2) + "\n");
  std::cout << "best fitness (rmse, C): " << io::format_double(result.best_fitness) << " after "
            << result.evaluations_used << " evaluations\n";
}

int cmd_evolve(const RunContext &ctx) {
  const EvolutionResult result = run_ga(ctx.run.ga, ctx.run.generator, ctx.run.registry, ctx.run.sim);
  write_best(ctx, result, "convergence.csv");
  return 0;
}

int cmd_random_search(const RunContext &ctx, std::optional<std::int64_t> budget) {
  const std::int64_t b =
      budget.value_or(ctx.run.ga.evaluation_budget.value_or(ctx.run.ga.generations * ctx.run.ga.population_size));
  const EvolutionResult result =
      run_random_search(b, ctx.run.generator, ctx.run.registry, ctx.run.sim, ctx.manifest.seed, ctx.run.ga.threads);
  write_best(ctx, result, "random_search_history.csv");
  return 0;
}

int cmd_compare(const RunContext &ctx, std::int64_t runs) {
  if (runs < 2) {
    throw Error("runs must be >= 2");
  }
  const ComparisonReport report =
      compare(runs, ctx.run.ga, ctx.run.generator, ctx.run.registry, ctx.run.sim, ctx.manifest.seed);
  io::write_file(ctx.out_dir / "compare_runs.csv", io::format_comparison_runs(report));
  io::write_file(ctx.out_dir / "random_individuals.csv", io::format_random_individuals(report));
  io::write_file(ctx.out_dir / "compare_summary.csv", io::format_comparison_summary(report));

  std::string conv = "run_index,generation,best_fitness,mean_fitness\n";
  for (std::size_t r = 0; r < report.ga_histories.size(); ++r) {
    const auto &h = report.ga_histories[r];
    for (std::size_t g = 0; g < h.size(); ++g) {
      conv += std::to_string(r) + "," + std::to_string(g + 1) + "," + io::format_double(h[g].best) + "," +
              io::format_double(h[g].mean) + "\n";
    }
  }
  io::write_file(ctx.out_dir / "ga_convergence.csv", conv);

  std::cout << "GA best mean " << io::format_double(report.ga_summary.mean) << ", median "
            << io::format_double(report.ga_summary.median) << "\n";
  std::cout << "RS best mean " << io::format_double(report.rs_summary.mean) << ", median "
            << io::format_double(report.rs_summary.median) << "\n";
  std::cout << "all random individuals mean " << io::format_double(report.rs_all_summary.mean) << "\n";
  std::cout << "rank test p-value " << io::format_double(report.rank_test.p_value) << "\n";
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Search-based falsification of a surrogate-modelled thermostat"};
  app.require_subcommand(1);

  std::optional<fs::path> registry;
  std::optional<fs::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<fs::path> out;

  fs::path trace_path;
  auto *fit = app.add_subcommand("fit", "Fit surrogate coefficients from a raw (t, temperature, mode) trace");
  fit->add_option("--trace", trace_path, "Trace file with header t_minutes,temperature_c,mode")->required();
  fit->add_option("--out", out, "Coefficient table to write")->required();

  std::int64_t n = 1;
  auto *gen = app.add_subcommand("generate", "Generate test cases with the Markov chain");
  gen->add_option("--config", config, "Generator config (JSON)");
  gen->add_option("--registry", registry, "Coefficient table (default: built-in)");
  gen->add_option("-n,--count", n, "Number of test cases")->required();
  gen->add_option("--seed", seed, "Random seed (default: config rng_seed)");
  gen->add_option("--out", out, "Output directory")->required();

  fs::path tc_path;
  std::optional<fs::path> gen_config;
  auto *sim = app.add_subcommand("simulate", "Simulate one test case and print its fitness");
  sim->add_option("--test-case", tc_path, "Test case document")->required();
  sim->add_option("--registry", registry, "Coefficient table (default: built-in)");
  sim->add_option("--config", config, "Simulation config (JSON)");
  sim->add_option("--generator-config", gen_config, "Generator config holding the constraint bounds");
  sim->add_option("--out", out, "Trace CSV to write")->required();

  fs::path manifest;
  std::int64_t runs = 50;
  std::optional<std::int64_t> budget;
  auto add_run_options = [&](CLI::App *cmd) {
    cmd->add_option("--manifest,--config", manifest, "Run manifest (JSON)")->required();
    cmd->add_option("--seed", seed, "Override the manifest seed");
    cmd->add_option("--out", out, "Override the manifest output directory");
    cmd->add_option("--registry", registry, "Override the manifest registry");
  };
  auto *evolve = app.add_subcommand("evolve", "Run the genetic algorithm");
  add_run_options(evolve);
  auto *random = app.add_subcommand("random-search", "Run the random-search baseline");
  add_run_options(random);
  random->add_option("--budget", budget, "Evaluations (default: GA evaluation budget)");
  auto *cmp = app.add_subcommand("compare", "Paired GA vs random-search runs");
  add_run_options(cmp);
  cmp->add_option("--runs", runs, "Number of runs per method")->capture_default_str();

  auto *defaults = app.add_subcommand("print-default-config", "Print every configuration default");
  defaults->add_option("--out", out, "Write to file instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit) return cmd_fit(trace_path, *out);
    if (*gen) return cmd_generate(config, registry, n, seed, *out);
    if (*sim) return cmd_simulate(tc_path, registry, config, gen_config, *out);
    if (*evolve) return cmd_evolve(load_context(manifest, seed, out, registry));
    if (*random) return cmd_random_search(load_context(manifest, seed, out, registry), budget);
    if (*cmp) return cmd_compare(load_context(manifest, seed, out, registry), runs);
    if (*defaults) {
      const std::string text = io::default_config().dump(2) + "\n";
      if (out) {
        io::write_file(*out, text);
      } else {
        std::cout << text;
      }
      return 0;
    }
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

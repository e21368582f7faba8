#pragma once

#include "cpsfalsify/rng.hpp"
#include "cpsfalsify/scenario.hpp"
#include "cpsfalsify/simulation.hpp"
#include "cpsfalsify/surrogate.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace cpsf {

struct GAConfig {
  std::int64_t generations = 90;
  std::int64_t population_size = 100;
  double mutation_rate = 0.4;
  double crossover_rate = 0.9;
  std::int64_t tournament_k = 2;
  std::uint64_t rng_seed = 0;
  /// Total fitness evaluations per run, initial population included.
  std::optional<std::int64_t> evaluation_budget = 9000;
  /// Worker threads for fitness evaluation; 0 means hardware concurrency.
  /// Results do not depend on this value.
  std::int64_t threads = 1;
  /// Discard offspring whose (temp, duration, model) sequence equals a
  /// current population member or an earlier offspring of the same
  /// generation. Discarded offspring cost no evaluations.
  bool eliminate_duplicates = true;

  void validate() const;

  friend bool operator==(const GAConfig &, const GAConfig &) = default;
};

struct GenerationStats {
  double best = 0.0;
  double mean = 0.0;
};

struct EvolutionResult {
  TestCase best;
  double best_fitness = 0.0;
  /// GA: one row per completed generation, the initial population being the
  /// first. Random search: one row per 100-evaluation window.
  std::vector<GenerationStats> history;
  std::int64_t evaluations_used = 0;
  std::uint64_t seed = 0;
  GAConfig config_snapshot;
  /// Fitness of every evaluated individual, in evaluation order. Filled by
  /// random search only.
  std::vector<double> all_fitnesses;
};

/// Evaluates fitness for every test case; output order matches input order
/// regardless of thread count.
std::vector<double> evaluate_all(std::span<const TestCase> population, const ModelRegistry &registry,
                                 const SimConfig &sim_cfg, std::int64_t threads = 1);

/// k-way tournament with replacement. Returns the index of the fittest
/// contestant, the lowest index on ties.
std::size_t tournament_select(std::span<const double> fitnesses, std::int64_t k, Rng &rng);

/// Uniform crossover point in [1, min(|a|, |b|) - 1].
std::size_t sample_crossover_point(const TestCase &a, const TestCase &b, Rng &rng);

/// Exchanges state tails after `point`. Children are returned unrepaired.
std::pair<TestCase, TestCase> crossover_one_point(const TestCase &a, const TestCase &b,
                                                  std::size_t point);

/// Swaps states i and j in place.
void exchange_states(TestCase &tc, std::size_t i, std::size_t j);

/// Swaps two distinct randomly chosen states. Returns false (and leaves tc
/// untouched) when there are fewer than two states.
bool mutate_exchange(TestCase &tc, Rng &rng);

enum class StateField { Temperature, Duration, Model };

/// Resamples one field of one random state within its bounds, then repairs
/// the horizon. Returns false when the draw had no alternative value (model
/// field with a single-model registry).
bool mutate_change_variable(TestCase &tc, Rng &rng, const GeneratorConfig &gen_cfg,
                            const ModelRegistry &registry, StateField *chosen = nullptr);

/// True when both test cases prescribe the same (temp, duration, model)
/// sequence; mode hints are ignored.
bool same_schedule(const TestCase &a, const TestCase &b);

/// Generational GA with (mu + lambda) survival, maximizing fitness.
EvolutionResult run_ga(const GAConfig &ga_cfg, const GeneratorConfig &gen_cfg,
                       const ModelRegistry &registry, const SimConfig &sim_cfg);

/// Baseline: evaluate `budget` chain-generated test cases and keep the best.
EvolutionResult run_random_search(std::int64_t budget, const GeneratorConfig &gen_cfg,
                                  const ModelRegistry &registry, const SimConfig &sim_cfg,
                                  std::uint64_t seed, std::int64_t threads = 1);

struct SeriesSummary {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double mean = 0.0;
  std::size_t count = 0;
};

/// Boxplot statistics with linearly interpolated quartiles.
SeriesSummary summarize(std::span<const double> values);

/// Two-sided Mann-Whitney U test with normal approximation and tie correction.
struct RankTest {
  double u = 0.0; ///< U statistic of the first sample
  double z = 0.0;
  double p_value = 1.0;
};

RankTest mann_whitney_u(std::span<const double> first, std::span<const double> second);

struct ComparisonReport {
  std::vector<double> ga_best;
  std::vector<double> rs_best;
  std::vector<double> rs_all;
  std::vector<std::vector<GenerationStats>> ga_histories;
  std::vector<std::uint64_t> run_seeds;
  std::int64_t budget = 0;
  SeriesSummary ga_summary;
  SeriesSummary rs_summary;
  SeriesSummary rs_all_summary;
  RankTest rank_test;
};

/// `runs` paired GA / random-search runs. Run r of both methods uses seed
/// derive_seed(base_seed, r); random search gets the GA's evaluation budget.
ComparisonReport compare(std::int64_t runs, const GAConfig &ga_cfg, const GeneratorConfig &gen_cfg,
                         const ModelRegistry &registry, const SimConfig &sim_cfg,
                         std::uint64_t base_seed);

} // namespace cpsf

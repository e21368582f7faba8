#pragma once

#include "cpsfalsify/rng.hpp"
#include "cpsfalsify/surrogate.hpp"

#include <cstdint>
#include <vector>

namespace cpsf {

/// One segment of a usage scenario: hold `target_temp` for `duration`
/// minutes using the dynamics of `model_id`.
struct ScenarioState {
  double target_temp = 20.0;
  std::int64_t duration = 60;
  ModelId model_id = 1;
  /// Markov state that emitted this triplet. Informational only; the
  /// simulator picks actual modes from temperatures.
  Mode mode_hint = Mode::On;

  friend bool operator==(const ScenarioState &, const ScenarioState &) = default;
};

/// Ordered sequence of states; also the chromosome of the search.
struct TestCase {
  std::vector<ScenarioState> states;

  std::int64_t total_duration() const;

  friend bool operator==(const TestCase &, const TestCase &) = default;
};

template <typename T> struct Bounds {
  T lo;
  T hi;

  bool contains(T v) const { return lo <= v && v <= hi; }
};

struct GeneratorConfig {
  double p_switch = 0.9;
  double p_stay = 0.1;
  Bounds<double> temp_bounds{16.0, 25.0};
  Bounds<std::int64_t> duration_bounds{15, 360};
  Bounds<std::int64_t> state_count_bounds{5, 12};
  std::int64_t horizon = 1440;
  std::uint64_t rng_seed = 0;

  /// Throws when probabilities do not sum to one, bounds are inverted, or
  /// the horizon cannot be met by any admissible state count.
  void validate() const;
};

/// Constraint K: every state within bounds, known model ids, length in
/// state_count_bounds, durations summing to the horizon.
bool satisfies_constraints(const TestCase &tc, const GeneratorConfig &cfg,
                           const ModelRegistry &registry);

/// Same check as satisfies_constraints, throwing an Error that names the
/// first violation.
void check_constraints(const TestCase &tc, const GeneratorConfig &cfg,
                       const ModelRegistry &registry);

/// Uniform target temperature on a 0.1 degree grid within temp_bounds.
double sample_target_temp(Rng &rng, const GeneratorConfig &cfg);

/// Rescales durations proportionally so they sum to the horizon, rounds to
/// whole minutes and clamps to duration_bounds. The remaining difference is
/// absorbed starting from the last state, moving backwards only when a state
/// hits a bound. Throws if the horizon is unreachable for this state count.
void rescale_durations(TestCase &tc, const GeneratorConfig &cfg);

/// Restores the length bounds (truncate to the maximum, or pad by repeating
/// the final state) and then rescales durations.
void repair(TestCase &tc, const GeneratorConfig &cfg);

/// Walks the two-state chain and samples one triplet per visited state.
TestCase generate_test_case(const GeneratorConfig &cfg, const ModelRegistry &registry, Rng &rng);

/// `n` test cases, case i drawn from sub-seed derive_seed(seed, i).
std::vector<TestCase> generate_population(std::size_t n, const GeneratorConfig &cfg,
                                          const ModelRegistry &registry, std::uint64_t seed);

} // namespace cpsf

#include "cpsfalsify/scenario.hpp"

#include "cpsfalsify/error.hpp"

#include <algorithm>
#include <cmath>

namespace cpsf {

std::int64_t TestCase::total_duration() const {
  std::int64_t sum = 0;
  for (const auto &s : states) sum += s.duration;
  return sum;
}

void GeneratorConfig::validate() const {
  auto probability = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!probability(p_switch) || !probability(p_stay) || std::abs(p_switch + p_stay - 1.0) > 1e-12) {
    throw Error("generator: p_switch and p_stay must be probabilities summing to 1");
  }
  if (!(temp_bounds.lo <= temp_bounds.hi)) {
    throw Error("generator: temp_bounds must be ordered");
  }
  if (duration_bounds.lo < 1 || duration_bounds.lo > duration_bounds.hi) {
    throw Error("generator: duration_bounds must be ordered and positive");
  }
  if (state_count_bounds.lo < 1 || state_count_bounds.lo > state_count_bounds.hi) {
    throw Error("generator: state_count_bounds must be ordered and positive");
  }
  if (horizon < state_count_bounds.hi * duration_bounds.lo ||
      horizon > state_count_bounds.lo * duration_bounds.hi) {
    throw Error("generator: horizon " + std::to_string(horizon) +
                " is not reachable for every admissible state count");
  }
}

void check_constraints(const TestCase &tc, const GeneratorConfig &cfg,
                       const ModelRegistry &registry) {
  const auto n = static_cast<std::int64_t>(tc.states.size());
  if (!cfg.state_count_bounds.contains(n)) {
    throw Error("test case has " + std::to_string(n) + " states, expected " +
                std::to_string(cfg.state_count_bounds.lo) + ".." +
                std::to_string(cfg.state_count_bounds.hi));
  }
  for (std::size_t i = 0; i < tc.states.size(); ++i) {
    const auto &s = tc.states[i];
    const std::string where = "state " + std::to_string(i) + ": ";
    if (!cfg.temp_bounds.contains(s.target_temp)) {
      throw Error(where + "target temperature " + std::to_string(s.target_temp) + " out of bounds");
    }
    if (!cfg.duration_bounds.contains(s.duration)) {
      throw Error(where + "duration " + std::to_string(s.duration) + " out of bounds");
    }
    if (!registry.contains(s.model_id)) {
      throw Error(where + "unknown model id " + std::to_string(s.model_id));
    }
  }
  if (tc.total_duration() != cfg.horizon) {
    throw Error("durations sum to " + std::to_string(tc.total_duration()) + ", expected horizon " +
                std::to_string(cfg.horizon));
  }
}

bool satisfies_constraints(const TestCase &tc, const GeneratorConfig &cfg,
                           const ModelRegistry &registry) {
  try {
    check_constraints(tc, cfg, registry);
    return true;
  } catch (const Error &) {
    return false;
  }
}

double sample_target_temp(Rng &rng, const GeneratorConfig &cfg) {
  const double raw = rng.uniform(cfg.temp_bounds.lo, cfg.temp_bounds.hi);
  const double gridded = std::round(raw * 10.0) / 10.0;
  return std::clamp(gridded, cfg.temp_bounds.lo, cfg.temp_bounds.hi);
}

void rescale_durations(TestCase &tc, const GeneratorConfig &cfg) {
  const auto n = static_cast<std::int64_t>(tc.states.size());
  const auto lo = cfg.duration_bounds.lo;
  const auto hi = cfg.duration_bounds.hi;
  if (n == 0 || cfg.horizon < n * lo || cfg.horizon > n * hi) {
    throw Error("cannot fit " + std::to_string(n) + " states into horizon " +
                std::to_string(cfg.horizon));
  }

  const double sum = static_cast<double>(tc.total_duration());
  const double scale = sum > 0.0 ? static_cast<double>(cfg.horizon) / sum : 1.0;
  for (auto &s : tc.states) {
    const auto scaled = static_cast<std::int64_t>(std::llround(static_cast<double>(s.duration) * scale));
    s.duration = std::clamp(scaled, lo, hi);
  }

  std::int64_t remainder = cfg.horizon - tc.total_duration();
  for (auto it = tc.states.rbegin(); it != tc.states.rend() && remainder != 0; ++it) {
    const std::int64_t adjusted = std::clamp(it->duration + remainder, lo, hi);
    remainder -= adjusted - it->duration;
    it->duration = adjusted;
  }
}

void repair(TestCase &tc, const GeneratorConfig &cfg) {
  const auto max_len = static_cast<std::size_t>(cfg.state_count_bounds.hi);
  const auto min_len = static_cast<std::size_t>(cfg.state_count_bounds.lo);
  if (tc.states.empty()) {
    throw Error("cannot repair an empty test case");
  }
  if (tc.states.size() > max_len) {
    tc.states.resize(max_len);
  }
  while (tc.states.size() < min_len) {
    tc.states.push_back(tc.states.back());
  }
  rescale_durations(tc, cfg);
}

TestCase generate_test_case(const GeneratorConfig &cfg, const ModelRegistry &registry, Rng &rng) {
  if (registry.size() == 0) {
    throw Error("empty registry");
  }
  const auto count = rng.uniform_int(cfg.state_count_bounds.lo, cfg.state_count_bounds.hi);
  TestCase tc;
  tc.states.reserve(static_cast<std::size_t>(count));

  Mode mode = rng.bernoulli(0.5) ? Mode::On : Mode::Off;
  for (std::int64_t i = 0; i < count; ++i) {
    if (i > 0 && rng.bernoulli(cfg.p_switch)) {
      mode = mode == Mode::On ? Mode::Off : Mode::On;
    }
    ScenarioState s;
    s.mode_hint = mode;
    s.target_temp = sample_target_temp(rng, cfg);
    s.duration = rng.uniform_int(cfg.duration_bounds.lo, cfg.duration_bounds.hi);
    s.model_id = registry.ids()[rng.index(registry.size())];
    tc.states.push_back(s);
  }
  rescale_durations(tc, cfg);
  return tc;
}

std::vector<TestCase> generate_population(std::size_t n, const GeneratorConfig &cfg,
                                          const ModelRegistry &registry, std::uint64_t seed) {
  if (n < 1) {
    throw Error("n must be >= 1");
  }
  std::vector<TestCase> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, i));
    out.push_back(generate_test_case(cfg, registry, rng));
  }
  return out;
}

} // namespace cpsf

#include "cpsfalsify/simulation.hpp"

#include "cpsfalsify/error.hpp"

#include <cmath>

namespace cpsf {

void SimConfig::validate() const {
  if (!(hysteresis >= 0.0)) {
    throw Error("simulation: hysteresis must be non-negative");
  }
  if (!(initial_temp >= 0.0 && initial_temp <= 40.0)) {
    throw Error("simulation: initial_temp must lie in [0, 40]");
  }
}

Trace expected_trace(const TestCase &tc) {
  Trace out;
  out.values.reserve(static_cast<std::size_t>(tc.total_duration()));
  for (const auto &s : tc.states) {
    out.values.insert(out.values.end(), static_cast<std::size_t>(s.duration), s.target_temp);
  }
  return out;
}

Trace simulate(const TestCase &tc, const ModelRegistry &registry, const SimConfig &cfg) {
  cfg.validate();
  Trace out;
  out.values.reserve(static_cast<std::size_t>(tc.total_duration()));

  double temp = cfg.initial_temp;
  for (const auto &state : tc.states) {
    const ModelCoefficients &coeffs = registry.lookup(state.model_id);
    const double target = state.target_temp;

    Mode mode = temp < target ? Mode::On : Mode::Off;
    double anchor = temp;
    std::int64_t local = 0;

    for (std::int64_t minute = 0; minute < state.duration; ++minute) {
      if (minute > 0) {
        Mode wanted = mode;
        if (temp < target - cfg.hysteresis) {
          wanted = Mode::On;
        } else if (temp > target + cfg.hysteresis) {
          wanted = Mode::Off;
        }
        if (wanted != mode) {
          mode = wanted;
          anchor = temp;
          local = 0;
        }
      }
      ++local;
      temp = eval_mode(mode, coeffs, anchor, static_cast<double>(local));
      out.values.push_back(temp);
    }
  }
  return out;
}

double rmse(const Trace &expected, const Trace &simulated) {
  if (expected.size() != simulated.size()) {
    throw Error("rmse: trace lengths differ");
  }
  if (expected.size() == 0) {
    throw Error("rmse: empty traces");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const double d = simulated.values[i] - expected.values[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(expected.size()));
}

double fitness(const TestCase &tc, const ModelRegistry &registry, const SimConfig &cfg) {
  return rmse(expected_trace(tc), simulate(tc, registry, cfg));
}

} // namespace cpsf

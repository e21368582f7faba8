#pragma once

#include "cpsfalsify/scenario.hpp"
#include "cpsfalsify/surrogate.hpp"

#include <vector>

namespace cpsf {

/// Temperature per minute on a uniform 1-minute grid.
struct Trace {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

struct SimConfig {
  double initial_temp = 20.0;
  double hysteresis = 0.1;

  void validate() const;
};

/// Schedule signal: each state's target held for its duration.
Trace expected_trace(const TestCase &tc);

/// Runs the bang-bang thermostat over the schedule.
///
/// At each state boundary the actuator is set ON if the temperature is below
/// the target and OFF otherwise, and the active curve is re-anchored at the
/// current temperature. Within a state the actuator turns ON below
/// target - hysteresis, OFF above target + hysteresis, and otherwise keeps
/// its setting; every switch re-anchors the curve. Sample k is the
/// temperature at the end of minute k.
Trace simulate(const TestCase &tc, const ModelRegistry &registry, const SimConfig &cfg);

/// Root-mean-square deviation between two equally long traces.
double rmse(const Trace &expected, const Trace &simulated);

/// RMSE between the simulated and the scheduled temperature. Larger means
/// the system tracks the schedule worse.
double fitness(const TestCase &tc, const ModelRegistry &registry, const SimConfig &cfg);

} // namespace cpsf

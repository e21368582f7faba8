#pragma once

// Test-only reference implementations. Nothing here calls into the library
// code paths it is used to check.

#include "cpsfalsify/scenario.hpp"
#include "cpsfalsify/surrogate.hpp"
#include "cpsfalsify/sysid.hpp"

#include <cstdint>
#include <vector>

namespace oracle {

/// Heating / cooling curves evaluated in 50-digit binary floating point.
double precise_on(double k1, double k2, double t0, double t);
double precise_off(double k1, double k2, double t0, double t);

/// Minute-by-minute thermostat, written from the controller description
/// with absolute switch times instead of a local clock.
std::vector<double> reference_simulation(const cpsf::TestCase &tc, const std::vector<cpsf::ModelCoefficients> &models,
                                         double initial_temp, double hysteresis);

/// Reference RMSE between the schedule and reference_simulation.
double reference_fitness(const cpsf::TestCase &tc, const std::vector<cpsf::ModelCoefficients> &models,
                         double initial_temp, double hysteresis);

/// Samples of one curve at t = 0..count-1 plus optional Gaussian noise.
cpsf::TraceSegment synthetic_segment(cpsf::Mode mode, double k1, double k2, double t0, int count,
                                     double noise_sigma, std::uint64_t seed);

/// Random test case built without the chain generator: 5..12 states whose
/// durations are drawn as a random composition of the 1440-minute horizon.
cpsf::TestCase random_test_case(std::uint64_t seed, const std::vector<cpsf::ModelId> &ids);

} // namespace oracle

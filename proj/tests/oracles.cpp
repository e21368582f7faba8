#include "oracles.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace oracle {

using Big = boost::multiprecision::cpp_bin_float_50;

double precise_on(double k1, double k2, double t0, double t) {
  const Big r = Big(k1) * (Big(1) - boost::multiprecision::exp(-Big(k2) * Big(t))) + Big(t0);
  return r.convert_to<double>();
}

double precise_off(double k1, double k2, double t0, double t) {
  const Big r = Big(k1) * boost::multiprecision::exp(-Big(k2) * Big(t)) + Big(t0) - Big(k1);
  return r.convert_to<double>();
}

std::vector<double> reference_simulation(const cpsf::TestCase &tc, const std::vector<cpsf::ModelCoefficients> &models,
                                         double initial_temp, double hysteresis) {
  auto find = [&](cpsf::ModelId id) -> const cpsf::ModelCoefficients & {
    for (const auto &m : models) {
      if (m.model_id == id) return m;
    }
    throw std::runtime_error("oracle: unknown model");
  };

  std::vector<double> out;
  double temp = initial_temp;
  long now = 0;
  for (const auto &st : tc.states) {
    const auto &m = find(st.model_id);
    bool heating = temp < st.target_temp;
    long anchor_time = now;
    double anchor_temp = temp;
    const long state_end = now + st.duration;
    bool first = true;
    while (now < state_end) {
      if (!first) {
        const bool too_cold = temp < st.target_temp - hysteresis;
        const bool too_hot = temp > st.target_temp + hysteresis;
        if ((too_cold && !heating) || (too_hot && heating)) {
          heating = too_cold;
          anchor_time = now;
          anchor_temp = temp;
        }
      }
      first = false;
      ++now;
      const double dt = static_cast<double>(now - anchor_time);
      temp = heating ? anchor_temp + m.k_on1 - m.k_on1 * std::exp(-m.k_on2 * dt)
                     : anchor_temp - m.k_off1 + m.k_off1 * std::exp(-m.k_off2 * dt);
      out.push_back(temp);
    }
  }
  return out;
}

double reference_fitness(const cpsf::TestCase &tc, const std::vector<cpsf::ModelCoefficients> &models,
                         double initial_temp, double hysteresis) {
  const auto sim = reference_simulation(tc, models, initial_temp, hysteresis);
  long double sum = 0.0L;
  std::size_t k = 0;
  for (const auto &st : tc.states) {
    for (long i = 0; i < st.duration; ++i, ++k) {
      const long double d = static_cast<long double>(sim[k]) - st.target_temp;
      sum += d * d;
    }
  }
  return static_cast<double>(std::sqrt(sum / static_cast<long double>(k)));
}

cpsf::TraceSegment synthetic_segment(cpsf::Mode mode, double k1, double k2, double t0, int count,
                                     double noise_sigma, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> noise(0.0, noise_sigma > 0.0 ? noise_sigma : 1.0);
  cpsf::TraceSegment seg;
  seg.mode = mode;
  for (int i = 0; i < count; ++i) {
    const double t = i;
    double y = mode == cpsf::Mode::On ? precise_on(k1, k2, t0, t) : precise_off(k1, k2, t0, t);
    // The anchor sample stays exact so T0 matches the generating curve.
    if (noise_sigma > 0.0 && i > 0) y += noise(gen);
    seg.samples.push_back({t, y});
  }
  return seg;
}

cpsf::TestCase random_test_case(std::uint64_t seed, const std::vector<cpsf::ModelId> &ids) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> count_dist(5, 12);
  std::uniform_real_distribution<double> temp_dist(16.0, 25.0);
  std::uniform_int_distribution<std::size_t> model_dist(0, ids.size() - 1);
  const int n = count_dist(gen);

  // Start every state at the minimum and hand out the slack in random
  // chunks, respecting the per-state maximum.
  std::vector<long> durations(static_cast<std::size_t>(n), 15);
  long slack = 1440 - 15L * n;
  std::uniform_int_distribution<std::size_t> pick(0, static_cast<std::size_t>(n) - 1);
  while (slack > 0) {
    auto &d = durations[pick(gen)];
    const long room = 360 - d;
    if (room == 0) continue;
    const long give = std::min({slack, room, std::uniform_int_distribution<long>(1, 60)(gen)});
    d += give;
    slack -= give;
  }

  cpsf::TestCase tc;
  for (int i = 0; i < n; ++i) {
    cpsf::ScenarioState s;
    s.target_temp = temp_dist(gen);
    s.duration = durations[static_cast<std::size_t>(i)];
    s.model_id = ids[model_dist(gen)];
    s.mode_hint = i % 2 == 0 ? cpsf::Mode::On : cpsf::Mode::Off;
    tc.states.push_back(s);
  }
  return tc;
}

} // namespace oracle

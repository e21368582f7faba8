#include "cpsfalsify/evolution.hpp"

#include "cpsfalsify/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <tuple>
#include <thread>

namespace cpsf {

void GAConfig::validate() const {
  auto rate = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (!rate(mutation_rate) || !rate(crossover_rate)) {
    throw Error("ga: mutation_rate and crossover_rate must lie in [0, 1]");
  }
  if (population_size < 2) {
    throw Error("ga: population_size must be >= 2");
  }
  if (generations < 1) {
    throw Error("ga: generations must be >= 1");
  }
  if (tournament_k < 1) {
    throw Error("ga: tournament_k must be >= 1");
  }
  if (evaluation_budget && *evaluation_budget < population_size) {
    throw Error("ga: evaluation_budget must cover the initial population");
  }
  if (threads < 0) {
    throw Error("ga: threads must be >= 0");
  }
}

std::vector<double> evaluate_all(std::span<const TestCase> population, const ModelRegistry &registry,
                                 const SimConfig &sim_cfg, std::int64_t threads) {
  std::vector<double> out(population.size());
  std::size_t workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                     : static_cast<std::size_t>(threads);
  workers = std::min(workers, std::max<std::size_t>(population.size(), 1));

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      out[i] = fitness(population[i], registry, sim_cfg);
    }
  };
  if (workers <= 1) {
    work(0, population.size());
    return out;
  }

  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (population.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(w * chunk, population.size());
      const std::size_t end = std::min(begin + chunk, population.size());
      pool.emplace_back([&, w, begin, end] {
        try {
          work(begin, end);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto &e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::size_t tournament_select(std::span<const double> fitnesses, std::int64_t k, Rng &rng) {
  if (fitnesses.empty()) {
    throw Error("tournament_select: empty population");
  }
  if (k < 1) {
    throw Error("tournament_select: k must be >= 1");
  }
  std::size_t winner = rng.index(fitnesses.size());
  for (std::int64_t i = 1; i < k; ++i) {
    const std::size_t c = rng.index(fitnesses.size());
    if (fitnesses[c] > fitnesses[winner] || (fitnesses[c] == fitnesses[winner] && c < winner)) {
      winner = c;
    }
  }
  return winner;
}

std::size_t sample_crossover_point(const TestCase &a, const TestCase &b, Rng &rng) {
  const std::size_t shortest = std::min(a.states.size(), b.states.size());
  if (shortest < 2) {
    throw Error("crossover needs parents with at least two states");
  }
  return static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(shortest) - 1));
}

std::pair<TestCase, TestCase> crossover_one_point(const TestCase &a, const TestCase &b,
                                                  std::size_t point) {
  if (point < 1 || point >= std::min(a.states.size(), b.states.size())) {
    throw Error("crossover point " + std::to_string(point) + " out of range");
  }
  auto splice = [point](const TestCase &head, const TestCase &tail) {
    TestCase child;
    child.states.reserve(point + tail.states.size() - point);
    child.states.insert(child.states.end(), head.states.begin(), head.states.begin() + point);
    child.states.insert(child.states.end(), tail.states.begin() + point, tail.states.end());
    return child;
  };
  return {splice(a, b), splice(b, a)};
}

void exchange_states(TestCase &tc, std::size_t i, std::size_t j) {
  if (i >= tc.states.size() || j >= tc.states.size()) {
    throw Error("exchange position out of range");
  }
  std::swap(tc.states[i], tc.states[j]);
}

bool mutate_exchange(TestCase &tc, Rng &rng) {
  const std::size_t n = tc.states.size();
  if (n < 2) {
    return false;
  }
  const std::size_t i = rng.index(n);
  std::size_t j = rng.index(n - 1);
  if (j >= i) ++j;
  exchange_states(tc, i, j);
  return true;
}

bool mutate_change_variable(TestCase &tc, Rng &rng, const GeneratorConfig &gen_cfg,
                            const ModelRegistry &registry, StateField *chosen) {
  if (tc.states.empty()) {
    return false;
  }
  ScenarioState &state = tc.states[rng.index(tc.states.size())];
  const auto field = static_cast<StateField>(rng.index(3));
  if (chosen) *chosen = field;

  switch (field) {
  case StateField::Temperature:
    state.target_temp = sample_target_temp(rng, gen_cfg);
    return true;
  case StateField::Duration:
    state.duration = rng.uniform_int(gen_cfg.duration_bounds.lo, gen_cfg.duration_bounds.hi);
    rescale_durations(tc, gen_cfg);
    return true;
  case StateField::Model: {
    if (registry.size() < 2) {
      return false;
    }
    std::vector<ModelId> others;
    for (ModelId id : registry.ids()) {
      if (id != state.model_id) others.push_back(id);
    }
    state.model_id = others[rng.index(others.size())];
    return true;
  }
  }
  return false;
}

bool same_schedule(const TestCase &a, const TestCase &b) {
  return std::equal(a.states.begin(), a.states.end(), b.states.begin(), b.states.end(),
                    [](const ScenarioState &x, const ScenarioState &y) {
                      return x.target_temp == y.target_temp && x.duration == y.duration && x.model_id == y.model_id;
                    });
}

namespace {

struct ScheduleLess {
  bool operator()(const TestCase &a, const TestCase &b) const {
    return std::lexicographical_compare(
        a.states.begin(), a.states.end(), b.states.begin(), b.states.end(),
        [](const ScenarioState &x, const ScenarioState &y) {
          return std::tie(x.target_temp, x.duration, x.model_id) < std::tie(y.target_temp, y.duration, y.model_id);
        });
  }
};

GenerationStats stats_of(std::span<const double> fitnesses) {
  GenerationStats s;
  s.best = *std::max_element(fitnesses.begin(), fitnesses.end());
  s.mean = std::accumulate(fitnesses.begin(), fitnesses.end(), 0.0) /
           static_cast<double>(fitnesses.size());
  return s;
}

std::size_t argmax(std::span<const double> values) {
  // max_element returns the first maximum, i.e. the lowest index on ties.
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

} // namespace

EvolutionResult run_ga(const GAConfig &ga_cfg, const GeneratorConfig &gen_cfg,
                       const ModelRegistry &registry, const SimConfig &sim_cfg) {
  ga_cfg.validate();
  gen_cfg.validate();
  sim_cfg.validate();

  const auto pop_size = static_cast<std::size_t>(ga_cfg.population_size);
  const std::int64_t budget = ga_cfg.evaluation_budget.value_or(std::numeric_limits<std::int64_t>::max());

  Rng rng(derive_seed(ga_cfg.rng_seed, 0));
  std::vector<TestCase> population =
      generate_population(pop_size, gen_cfg, registry, derive_seed(ga_cfg.rng_seed, 1));
  std::vector<double> fit = evaluate_all(population, registry, sim_cfg, ga_cfg.threads);

  EvolutionResult result;
  result.seed = ga_cfg.rng_seed;
  result.config_snapshot = ga_cfg;
  result.evaluations_used = ga_cfg.population_size;
  result.history.push_back(stats_of(fit));

  for (std::int64_t gen = 1; gen < ga_cfg.generations; ++gen) {
    const std::int64_t remaining = budget - result.evaluations_used;
    if (remaining <= 0) {
      break;
    }
    const auto n_offspring = static_cast<std::size_t>(std::min<std::int64_t>(ga_cfg.population_size, remaining));

    // All stochastic choices for this generation happen here, before any
    // evaluation is dispatched.
    std::vector<TestCase> offspring;
    offspring.reserve(n_offspring + 1);
    std::set<TestCase, ScheduleLess> seen;
    if (ga_cfg.eliminate_duplicates) {
      seen.insert(population.begin(), population.end());
    }
    // Matings before duplicates are let through, so a converged population
    // cannot stall the run.
    std::size_t matings_left = 100 * n_offspring;
    auto accept = [&](TestCase &&child) {
      if (offspring.size() >= n_offspring) return;
      if (ga_cfg.eliminate_duplicates && matings_left > 0 && !seen.insert(child).second) return;
      offspring.push_back(std::move(child));
    };
    while (offspring.size() < n_offspring) {
      if (matings_left > 0) --matings_left;
      const TestCase &a = population[tournament_select(fit, ga_cfg.tournament_k, rng)];
      const TestCase &b = population[tournament_select(fit, ga_cfg.tournament_k, rng)];
      std::pair<TestCase, TestCase> children{a, b};
      if (rng.bernoulli(ga_cfg.crossover_rate)) {
        children = crossover_one_point(a, b, sample_crossover_point(a, b, rng));
      }
      for (TestCase *child : {&children.first, &children.second}) {
        if (rng.bernoulli(ga_cfg.mutation_rate)) {
          if (rng.bernoulli(0.5)) {
            mutate_exchange(*child, rng);
          } else {
            mutate_change_variable(*child, rng, gen_cfg, registry);
          }
        }
        repair(*child, gen_cfg);
      }
      accept(std::move(children.first));
      accept(std::move(children.second));
    }

    std::vector<double> offspring_fit = evaluate_all(offspring, registry, sim_cfg, ga_cfg.threads);
    result.evaluations_used += static_cast<std::int64_t>(n_offspring);

    // (mu + lambda): parents precede offspring, so stable sorting breaks
    // ties towards the lower combined index.
    std::vector<TestCase> pool = std::move(population);
    std::move(offspring.begin(), offspring.end(), std::back_inserter(pool));
    std::vector<double> pool_fit = std::move(fit);
    pool_fit.insert(pool_fit.end(), offspring_fit.begin(), offspring_fit.end());

    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) { return pool_fit[l] > pool_fit[r]; });
    order.resize(pop_size);

    population.clear();
    fit.clear();
    for (std::size_t idx : order) {
      population.push_back(std::move(pool[idx]));
      fit.push_back(pool_fit[idx]);
    }
    result.history.push_back(stats_of(fit));
  }

  const std::size_t best = argmax(fit);
  result.best = population[best];
  result.best_fitness = fit[best];
  return result;
}

EvolutionResult run_random_search(std::int64_t budget, const GeneratorConfig &gen_cfg,
                                  const ModelRegistry &registry, const SimConfig &sim_cfg,
                                  std::uint64_t seed, std::int64_t threads) {
  if (budget < 1) {
    throw Error("random search: budget must be >= 1");
  }
  gen_cfg.validate();
  sim_cfg.validate();

  const std::vector<TestCase> population =
      generate_population(static_cast<std::size_t>(budget), gen_cfg, registry, derive_seed(seed, 1));

  EvolutionResult result;
  result.seed = seed;
  result.config_snapshot.evaluation_budget = budget;
  result.config_snapshot.rng_seed = seed;
  result.config_snapshot.threads = threads;
  result.all_fitnesses = evaluate_all(population, registry, sim_cfg, threads);
  result.evaluations_used = budget;

  constexpr std::size_t window = 100;
  double running_best = -std::numeric_limits<double>::infinity();
  for (std::size_t begin = 0; begin < result.all_fitnesses.size(); begin += window) {
    const std::size_t end = std::min(begin + window, result.all_fitnesses.size());
    const std::span<const double> chunk(result.all_fitnesses.data() + begin, end - begin);
    const GenerationStats s = stats_of(chunk);
    running_best = std::max(running_best, s.best);
    result.history.push_back({running_best, s.mean});
  }

  const std::size_t best = argmax(result.all_fitnesses);
  result.best = population[best];
  result.best_fitness = result.all_fitnesses[best];
  return result;
}

namespace {

double quantile(const std::vector<double> &sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

} // namespace

SeriesSummary summarize(std::span<const double> values) {
  if (values.empty()) {
    throw Error("summarize: empty series");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  SeriesSummary s;
  s.count = sorted.size();
  s.min = sorted.front();
  s.max = sorted.back();
  s.q1 = quantile(sorted, 0.25);
  s.median = quantile(sorted, 0.5);
  s.q3 = quantile(sorted, 0.75);
  s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
  return s;
}

RankTest mann_whitney_u(std::span<const double> first, std::span<const double> second) {
  if (first.empty() || second.empty()) {
    throw Error("mann_whitney_u: empty sample");
  }
  struct Item {
    double value;
    bool from_first;
  };
  std::vector<Item> pooled;
  for (double v : first) pooled.push_back({v, true});
  for (double v : second) pooled.push_back({v, false});
  std::sort(pooled.begin(), pooled.end(), [](const Item &a, const Item &b) { return a.value < b.value; });

  const double n1 = static_cast<double>(first.size());
  const double n2 = static_cast<double>(second.size());
  const double n = n1 + n2;
  double rank_sum = 0.0;
  double tie_term = 0.0;
  for (std::size_t i = 0; i < pooled.size();) {
    std::size_t j = i;
    while (j < pooled.size() && pooled[j].value == pooled[i].value) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    const double ties = static_cast<double>(j - i);
    tie_term += ties * ties * ties - ties;
    for (std::size_t k = i; k < j; ++k) {
      if (pooled[k].from_first) rank_sum += avg_rank;
    }
    i = j;
  }

  RankTest out;
  out.u = rank_sum - n1 * (n1 + 1.0) / 2.0;
  const double mean_u = n1 * n2 / 2.0;
  const double var_u = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (var_u > 0.0) {
    out.z = (out.u - mean_u) / std::sqrt(var_u);
    out.p_value = std::erfc(std::abs(out.z) / std::sqrt(2.0));
  }
  return out;
}

ComparisonReport compare(std::int64_t runs, const GAConfig &ga_cfg, const GeneratorConfig &gen_cfg,
                         const ModelRegistry &registry, const SimConfig &sim_cfg,
                         std::uint64_t base_seed) {
  if (runs < 2) {
    throw Error("compare: runs must be >= 2");
  }
  ga_cfg.validate();

  ComparisonReport report;
  report.budget = ga_cfg.evaluation_budget.value_or(ga_cfg.generations * ga_cfg.population_size);
  for (std::int64_t r = 0; r < runs; ++r) {
    const std::uint64_t seed = derive_seed(base_seed, static_cast<std::uint64_t>(r));
    report.run_seeds.push_back(seed);

    GAConfig cfg = ga_cfg;
    cfg.rng_seed = seed;
    EvolutionResult ga = run_ga(cfg, gen_cfg, registry, sim_cfg);
    report.ga_best.push_back(ga.best_fitness);
    report.ga_histories.push_back(std::move(ga.history));

    EvolutionResult rs = run_random_search(report.budget, gen_cfg, registry, sim_cfg, seed, ga_cfg.threads);
    report.rs_best.push_back(rs.best_fitness);
    report.rs_all.insert(report.rs_all.end(), rs.all_fitnesses.begin(), rs.all_fitnesses.end());
  }
  report.ga_summary = summarize(report.ga_best);
  report.rs_summary = summarize(report.rs_best);
  report.rs_all_summary = summarize(report.rs_all);
  report.rank_test = mann_whitney_u(report.ga_best, report.rs_best);
  return report;
}

} // namespace cpsf

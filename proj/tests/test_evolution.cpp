#include "cpsfalsify/error.hpp"
#include "cpsfalsify/evolution.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>

using namespace cpsf;

namespace {

TestCase numbered(std::size_t n, double base = 16.0) {
  TestCase tc;
  for (std::size_t i = 0; i < n; ++i) {
    tc.states.push_back({base + static_cast<double>(i), 100 + static_cast<std::int64_t>(i), 1, Mode::On});
  }
  return tc;
}

std::vector<ScenarioState> sorted_states(TestCase tc) {
  auto key = [](const ScenarioState &s) { return std::tuple(s.target_temp, s.duration, s.model_id, s.mode_hint); };
  std::sort(tc.states.begin(), tc.states.end(), [&](const auto &a, const auto &b) { return key(a) < key(b); });
  return tc.states;
}

GAConfig small_ga(std::uint64_t seed) {
  GAConfig cfg;
  cfg.generations = 6;
  cfg.population_size = 20;
  cfg.evaluation_budget = std::nullopt;
  cfg.rng_seed = seed;
  return cfg;
}

} // namespace

TEST(Tournament, ArgmaxWithLowestIndexTies) {
  const std::vector<double> f{5.0, 1.0};
  Rng rng(0);
  // With k large, both individuals are drawn almost surely.
  for (int i = 0; i < 100; ++i) EXPECT_EQ(tournament_select(f, 64, rng), 0u);
  const std::vector<double> tied{3.0, 3.0, 3.0};
  for (int i = 0; i < 100; ++i) EXPECT_EQ(tournament_select(tied, 64, rng), 0u);
  EXPECT_THROW(tournament_select(std::vector<double>{}, 2, rng), Error);
}

TEST(Tournament, KOneIsUniform) {
  const std::vector<double> f{1, 2, 3, 4};
  Rng rng(1);
  std::map<std::size_t, int> counts;
  for (int i = 0; i < 40000; ++i) ++counts[tournament_select(f, 1, rng)];
  for (auto [idx, c] : counts) EXPECT_NEAR(c / 40000.0, 0.25, 0.02) << idx;
}

TEST(Tournament, FullSizeFavoursBest) {
  const std::vector<double> f{0.3, 2.5, 1.0, 0.7, 1.9};
  Rng rng(2);
  std::map<std::size_t, int> counts;
  for (int i = 0; i < 10000; ++i) ++counts[tournament_select(f, 5, rng)];
  for (auto [idx, c] : counts) EXPECT_GE(counts[1], c);
}

TEST(Crossover, PublishedShape) {
  const auto [c1, c2] = crossover_one_point(numbered(5), numbered(6, 30.0), 3);
  EXPECT_EQ(c1.states.size(), 6u);
  EXPECT_EQ(c2.states.size(), 5u);
  EXPECT_EQ(c1.states[2].target_temp, 18.0);
  EXPECT_EQ(c1.states[3].target_temp, 33.0);
  EXPECT_EQ(c2.states[3].target_temp, 19.0);
}

TEST(Crossover, IdenticalParentsAndRange) {
  const TestCase a = numbered(7);
  const auto [c1, c2] = crossover_one_point(a, a, 4);
  EXPECT_EQ(c1, a);
  EXPECT_EQ(c2, a);
  EXPECT_THROW(crossover_one_point(a, numbered(5), 0), Error);
  EXPECT_THROW(crossover_one_point(a, numbered(5), 5), Error);
}

TEST(EvolutionProperty, CrossoverConservesGenes) {
  Rng rng(3);
  const auto reg = ModelRegistry::defaults();
  const auto pop = generate_population(200, {}, reg, 9);
  for (std::size_t i = 0; i + 1 < pop.size(); i += 2) {
    const auto &a = pop[i];
    const auto &b = pop[i + 1];
    const std::size_t point = sample_crossover_point(a, b, rng);
    ASSERT_GE(point, 1u);
    ASSERT_LT(point, std::min(a.states.size(), b.states.size()));
    const auto [c1, c2] = crossover_one_point(a, b, point);
    EXPECT_EQ(c1.states.size() + c2.states.size(), a.states.size() + b.states.size());
    TestCase all_parents = a, all_children = c1;
    all_parents.states.insert(all_parents.states.end(), b.states.begin(), b.states.end());
    all_children.states.insert(all_children.states.end(), c2.states.begin(), c2.states.end());
    EXPECT_EQ(sorted_states(all_parents), sorted_states(all_children));
  }
}

TEST(MutateExchange, Examples) {
  TestCase tc = numbered(3);
  exchange_states(tc, 0, 2);
  EXPECT_EQ(tc.states[0].target_temp, 18.0);
  EXPECT_EQ(tc.states[1].target_temp, 17.0);
  EXPECT_EQ(tc.states[2].target_temp, 16.0);

  TestCase one = numbered(1);
  Rng rng(0);
  EXPECT_FALSE(mutate_exchange(one, rng));
  EXPECT_EQ(one, numbered(1));
}

TEST(EvolutionProperty, ExchangePreservesMultiset) {
  Rng rng(4), replay(4);
  for (int i = 0; i < 500; ++i) {
    TestCase tc = numbered(5 + i % 8);
    TestCase copy = tc;
    ASSERT_TRUE(mutate_exchange(tc, rng));
    ASSERT_TRUE(mutate_exchange(copy, replay));
    EXPECT_EQ(tc, copy);
    EXPECT_EQ(sorted_states(tc), sorted_states(numbered(5 + i % 8)));
    int moved = 0;
    const TestCase orig = numbered(5 + i % 8);
    for (std::size_t k = 0; k < tc.states.size(); ++k) moved += !(tc.states[k] == orig.states[k]);
    EXPECT_EQ(moved, 2);
  }
}

TEST(MutateChangeVariable, SingleModelRegistryIsNoOp) {
  const ModelRegistry reg({{1, 6.0, 0.14, 4.3, 0.09, {}}});
  const GeneratorConfig cfg;
  Rng rng(5);
  int noops = 0;
  for (int i = 0; i < 300; ++i) {
    TestCase tc = generate_population(1, cfg, reg, i)[0];
    const TestCase before = tc;
    StateField field{};
    const bool changed = mutate_change_variable(tc, rng, cfg, reg, &field);
    if (field == StateField::Model) {
      EXPECT_FALSE(changed);
      EXPECT_EQ(tc, before);
      ++noops;
    }
  }
  EXPECT_GT(noops, 0);
}

TEST(EvolutionProperty, ChangeVariableKeepsConstraints) {
  const auto reg = ModelRegistry::defaults();
  const GeneratorConfig cfg;
  Rng rng(6);
  std::map<StateField, int> seen;
  TestCase tc = generate_population(1, cfg, reg, 1)[0];
  for (int i = 0; i < 1000; ++i) {
    const TestCase before = tc;
    StateField field{};
    EXPECT_TRUE(mutate_change_variable(tc, rng, cfg, reg, &field));
    ++seen[field];
    ASSERT_TRUE(satisfies_constraints(tc, cfg, reg)) << "mutation " << i;
    if (field == StateField::Model) {
      int diffs = 0;
      for (std::size_t k = 0; k < tc.states.size(); ++k) diffs += tc.states[k].model_id != before.states[k].model_id;
      EXPECT_EQ(diffs, 1);
    }
  }
  EXPECT_EQ(seen.size(), 3u);
}

TEST(RunGa, DeterministicAndMonotone) {
  const auto reg = ModelRegistry::defaults();
  const auto a = run_ga(small_ga(10), {}, reg, {});
  const auto b = run_ga(small_ga(10), {}, reg, {});
  EXPECT_EQ(a.best, b.best);
  EXPECT_EQ(a.best_fitness, b.best_fitness);
  ASSERT_EQ(a.history.size(), 6u);
  for (std::size_t i = 1; i < a.history.size(); ++i) EXPECT_GE(a.history[i].best, a.history[i - 1].best);
  EXPECT_EQ(a.best_fitness, a.history.back().best);
  EXPECT_EQ(a.evaluations_used, 6 * 20);
  EXPECT_TRUE(satisfies_constraints(a.best, {}, reg));
  EXPECT_NEAR(a.best_fitness, fitness(a.best, reg, {}), 0.0);
}

TEST(RunGa, ThreadCountDoesNotChangeResult) {
  const auto reg = ModelRegistry::defaults();
  GAConfig cfg = small_ga(12);
  const auto serial = run_ga(cfg, {}, reg, {});
  cfg.threads = 4;
  const auto parallel = run_ga(cfg, {}, reg, {});
  EXPECT_EQ(serial.best, parallel.best);
  EXPECT_EQ(serial.history.back().mean, parallel.history.back().mean);
}

TEST(RunGa, DuplicateEliminationKeepsOffspringDistinct) {
  TestCase a = numbered(5);
  TestCase b = a;
  b.states[2].mode_hint = Mode::Off;
  EXPECT_TRUE(same_schedule(a, b));
  b.states[2].duration += 1;
  EXPECT_FALSE(same_schedule(a, b));

  const auto reg = ModelRegistry::defaults();
  GAConfig cfg = small_ga(21);
  cfg.generations = 30;
  const auto with = run_ga(cfg, {}, reg, {});
  cfg.eliminate_duplicates = false;
  const auto without = run_ga(cfg, {}, reg, {});
  EXPECT_EQ(with.evaluations_used, without.evaluations_used);
  for (const auto &h : {with.history, without.history}) {
    for (std::size_t i = 1; i < h.size(); ++i) EXPECT_GE(h[i].best, h[i - 1].best);
  }
}

TEST(RunGa, BudgetAccounting) {
  const auto reg = ModelRegistry::defaults();
  GAConfig cfg;
  cfg.population_size = 10;
  cfg.generations = 90;
  cfg.evaluation_budget = 95;
  const auto r = run_ga(cfg, {}, reg, {});
  EXPECT_EQ(r.evaluations_used, 95);
  EXPECT_EQ(r.history.size(), 10u); // initial + 8 full + 1 partial generation

  cfg.population_size = 100;
  cfg.evaluation_budget = 9000;
  cfg.generations = 2;
  EXPECT_EQ(run_ga(cfg, {}, reg, {}).evaluations_used, 200);
}

TEST(RunGa, ConfigErrors) {
  const auto reg = ModelRegistry::defaults();
  GAConfig cfg;
  cfg.mutation_rate = 1.5;
  EXPECT_THROW(run_ga(cfg, {}, reg, {}), Error);
  cfg = {};
  cfg.population_size = 1;
  EXPECT_THROW(run_ga(cfg, {}, reg, {}), Error);
  cfg = {};
  cfg.generations = 0;
  EXPECT_THROW(run_ga(cfg, {}, reg, {}), Error);
}

TEST(RandomSearch, Basics) {
  const auto reg = ModelRegistry::defaults();
  const auto one = run_random_search(1, {}, reg, {}, 3);
  EXPECT_EQ(one.evaluations_used, 1);
  EXPECT_EQ(one.best_fitness, one.all_fitnesses[0]);
  EXPECT_EQ(one.history.size(), 1u);

  const auto a = run_random_search(250, {}, reg, {}, 4);
  const auto b = run_random_search(250, {}, reg, {}, 4);
  EXPECT_EQ(a.best, b.best);
  EXPECT_EQ(a.all_fitnesses, b.all_fitnesses);
  ASSERT_EQ(a.history.size(), 3u);
  EXPECT_EQ(a.history.back().best, a.best_fitness);
  EXPECT_EQ(a.best_fitness, *std::max_element(a.all_fitnesses.begin(), a.all_fitnesses.end()));
  EXPECT_THROW(run_random_search(0, {}, reg, {}, 4), Error);
}

TEST(Statistics, SummaryQuartiles) {
  const std::vector<double> v{4, 1, 3, 2, 5};
  const auto s = summarize(v);
  EXPECT_EQ(s.min, 1);
  EXPECT_EQ(s.q1, 2);
  EXPECT_EQ(s.median, 3);
  EXPECT_EQ(s.q3, 4);
  EXPECT_EQ(s.max, 5);
  EXPECT_EQ(s.mean, 3);
  EXPECT_EQ(summarize(std::vector<double>{1, 2, 3, 4}).median, 2.5);
}

TEST(Statistics, MannWhitney) {
  // Reference values from scipy.stats.mannwhitneyu (asymptotic, no continuity).
  const std::vector<double> hi{6, 7, 8, 9, 10}, lo{1, 2, 3, 4, 5};
  const auto t = mann_whitney_u(hi, lo);
  EXPECT_EQ(t.u, 25.0);
  EXPECT_NEAR(t.z, 2.6111648393354674, 1e-12);
  EXPECT_NEAR(t.p_value, 0.009023438818080326, 1e-12);
  EXPECT_EQ(mann_whitney_u(lo, lo).u, 12.5);
}

TEST(Compare, DeterministicSmallReport) {
  const auto reg = ModelRegistry::defaults();
  GAConfig cfg = small_ga(0);
  cfg.evaluation_budget = 100;
  const auto a = compare(2, cfg, {}, reg, {}, 5);
  const auto b = compare(2, cfg, {}, reg, {}, 5);
  EXPECT_EQ(a.ga_best, b.ga_best);
  EXPECT_EQ(a.rs_best, b.rs_best);
  EXPECT_EQ(a.rs_all.size(), 200u);
  EXPECT_EQ(a.budget, 100);
  EXPECT_THROW(compare(1, cfg, {}, reg, {}, 5), Error);
}

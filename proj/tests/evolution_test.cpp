#include <doctest.h>

#include <atomic>
#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "ssg/error.hpp"
#include "ssg/evolution.hpp"

using namespace ssg;
using ssg::testing::pure_1step;

namespace {

EvolutionConfig small_config(std::uint64_t seed) {
  EvolutionConfig c;
  c.population_size = 30;
  c.generations = 40;
  c.seed = seed;
  return c;
}

Individual single(PureStrategy p) { return {MixedStrategy::pure(std::move(p)), std::nullopt}; }

std::vector<Individual> scored(std::initializer_list<double> values) {
  std::vector<Individual> pop;
  int t = 0;
  for (double v : values) pop.push_back({MixedStrategy::pure(pure_1step(1, {t++})), v});
  return pop;
}

}  // namespace

TEST_CASE("initial population holds single pure strategies") {
  Rng rng(1);
  const auto game = testing::random_game(6, 3, 2, rng);
  EvolutionConfig cfg;
  Rng a(42), b(42);
  const auto pop = init_population(game, cfg, a);
  REQUIRE(pop.size() == 100);
  for (const auto& ind : pop) {
    CHECK(ind.strategy.size() == 1);
    CHECK(ind.strategy.support()[0].prob == 1.0);
    CHECK_FALSE(ind.fitness.has_value());
    CHECK_NOTHROW(ind.strategy.validate_for(game));
  }
  const auto again = init_population(game, cfg, b);
  for (std::size_t i = 0; i < pop.size(); ++i) CHECK(pop[i].strategy == again[i].strategy);

  const Game lone(2, 3, {{0.5, -0.5, 0.5, -0.5}});
  Rng c(3);
  for (const auto& ind : init_population(lone, cfg, c)) {
    for (int t : ind.strategy.support()[0].pure.allocation()) CHECK(t == 0);
  }
}

TEST_CASE("crossover halves and merges") {
  const auto s1 = pure_1step(1, {0});
  const auto s2 = pure_1step(1, {1});
  const auto child = crossover(single(s1), single(s2), 20);
  REQUIRE(child.strategy.size() == 2);
  CHECK(child.strategy.support()[0].pure == s1);
  CHECK(child.strategy.support()[0].prob == 0.5);
  CHECK(child.strategy.support()[1].prob == 0.5);
  CHECK_FALSE(child.fitness.has_value());

  const auto same = crossover(single(s1), single(s1), 20);
  REQUIRE(same.strategy.size() == 1);
  CHECK(same.strategy.support()[0].prob == 1.0);

  const Individual mixed{MixedStrategy({{s1, 0.5}, {s2, 0.5}}), std::nullopt};
  const auto lop = crossover(mixed, single(s1), 20);
  REQUIRE(lop.strategy.size() == 2);
  CHECK(lop.strategy.support()[0].pure == s1);
  CHECK(lop.strategy.support()[0].prob == 0.75);
  CHECK(lop.strategy.support()[1].prob == 0.25);
}

TEST_CASE("crossover respects the support cap") {
  std::vector<SupportEntry> a, b;
  for (int t = 0; t < 15; ++t) a.push_back({pure_1step(1, {t}), 1.0 / 15});
  for (int t = 15; t < 30; ++t) b.push_back({pure_1step(1, {t}), (t == 15 ? 0.3 : 0.05)});
  const auto child =
      crossover({MixedStrategy::normalized(a), {}}, {MixedStrategy::normalized(b), {}}, 20);
  CHECK(child.strategy.size() == 20);
  double sum = 0;
  for (const auto& e : child.strategy.support()) sum += e.prob;
  CHECK(std::abs(sum - 1.0) < 1e-12);
  // The heavy entry from the second parent survives the cut.
  bool heavy = false;
  for (const auto& e : child.strategy.support()) heavy = heavy || e.pure == pure_1step(1, {15});
  CHECK(heavy);
  CHECK_THROWS_AS(crossover(single(pure_1step(1, {0})), single(pure_1step(1, {1})), 0),
                  ConfigError);
}

TEST_CASE("mutation with one unit always reassigns it") {
  const Game game(3, 1, std::vector<TargetPayoffs>(1000, {0.5, -0.5, 0.5, -0.5}));
  Rng rng(9);
  int changed = 0;
  for (int i = 0; i < 200; ++i) {
    const auto before = single(PureStrategy(1, 3, {7, 7, 7}));
    const auto after = mutate(before, game, rng);
    if (!(after.strategy == before.strategy)) ++changed;
  }
  CHECK(changed == 200);
}

TEST_CASE("mutation touches one site and keeps probabilities") {
  Rng rng(10);
  const auto game = testing::random_game(500, 2, 3, rng);
  for (int trial = 0; trial < 200; ++trial) {
    const auto parent = testing::random_mixed(game, 6, rng);
    const auto child = mutate({parent, 0.3}, game, rng);
    CHECK_FALSE(child.fitness.has_value());
    CHECK_NOTHROW(child.strategy.validate_for(game));
    if (child.strategy.size() != parent.size()) continue;  // rare merge
    int diffs = 0;
    for (std::size_t i = 0; i < parent.size(); ++i) {
      CHECK(child.strategy.support()[i].prob == parent.support()[i].prob);
      if (!(child.strategy.support()[i].pure == parent.support()[i].pure)) ++diffs;
    }
    CHECK(diffs <= 1);
  }
}

TEST_CASE("mutation unit inclusion frequency") {
  // With 10^4 targets a reassigned unit lands back on its old schedule with
  // negligible probability, so a changed row means the unit was chosen.
  const int n = 10000;
  const Game game(2, 4, std::vector<TargetPayoffs>(n, {0.5, -0.5, 0.5, -0.5}));
  const PureStrategy base(4, 2, {0, 0, 1, 1, 2, 2, 3, 3});
  Rng rng(2718);
  constexpr int kTrials = 10000;
  std::array<int, 4> hits{};
  for (int i = 0; i < kTrials; ++i) {
    const auto out = mutate(single(base), game, rng).strategy.support()[0].pure;
    int any = 0;
    for (int u = 0; u < 4; ++u) {
      const bool moved = out.target(u, 0) != base.target(u, 0) || out.target(u, 1) != base.target(u, 1);
      hits[u] += moved;
      any += moved;
    }
    CHECK(any >= 1);
  }
  const double expected = 0.5 / (1 - std::pow(0.5, 4));
  for (int u = 0; u < 4; ++u) CHECK(std::abs(hits[u] / double(kTrials) - expected) < 0.02);
}

TEST_CASE("tournament selection returns the fitter entrant at the configured rate") {
  const auto pop = scored({0.1, 0.9});
  Rng rng(5);
  constexpr int kTrials = 100000;
  int fitter = 0;
  for (int i = 0; i < kTrials; ++i) fitter += (*tournament_select(pop, 0.9, rng).fitness == 0.9);
  CHECK(std::abs(fitter / double(kTrials) - 0.9) < 0.01);

  int always = 0;
  for (int i = 0; i < 1000; ++i) always += (*tournament_select(pop, 1.0, rng).fitness == 0.9);
  CHECK(always == 1000);

  int coin = 0;
  for (int i = 0; i < kTrials; ++i) coin += (*tournament_select(pop, 0.5, rng).fitness == 0.9);
  CHECK(std::abs(coin / double(kTrials) - 0.5) < 0.01);

  CHECK_THROWS_AS(tournament_select(scored({0.3}), 0.9, rng), ConfigError);
}

TEST_CASE("tournament entrants are distinct and uniform") {
  const auto pop = scored({0.0, 1.0, 2.0, 3.0, 4.0});
  Rng rng(6);
  std::array<int, 5> wins{};
  constexpr int kTrials = 100000;
  for (int i = 0; i < kTrials; ++i) wins[static_cast<int>(*tournament_select(pop, 1.0, rng).fitness)]++;
  // Pressure 1: individual r (0-based rank from the bottom) wins when it meets
  // only weaker ones, probability 2r / (N(N-1)).
  CHECK(wins[0] == 0);
  for (int r = 1; r < 5; ++r) CHECK(std::abs(wins[r] / double(kTrials) - 2.0 * r / 20) < 0.01);
}

TEST_CASE("config validation") {
  EvolutionConfig c;
  CHECK_NOTHROW(c.validate());
  auto bad = c;
  bad.mutation_rate = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.elite_size = 100;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.max_support = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.population_size = 1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("evolution is reproducible for a fixed seed and any thread count") {
  Rng rng(1);
  const auto game = testing::random_game(8, 2, 2, rng);
  const auto eval = exact_evaluator(Quantal{});
  auto cfg = small_config(77);
  const auto a = evolve(game, eval, cfg);
  const auto b = evolve(game, eval, cfg);
  cfg.threads = 4;
  const auto c = evolve(game, eval, cfg);
  for (const auto* r : {&b, &c}) {
    CHECK(r->best == a.best);
    CHECK(r->best_value == a.best_value);
    REQUIRE(r->history.size() == a.history.size());
    for (std::size_t g = 0; g < a.history.size(); ++g) {
      CHECK(r->history[g].best == a.history[g].best);
      CHECK(r->history[g].mean == a.history[g].mean);
      CHECK(r->history[g].evaluations == a.history[g].evaluations);
    }
  }
  cfg.seed = 78;
  cfg.threads = 1;
  CHECK_FALSE(evolve(game, eval, cfg).history.back().mean == a.history.back().mean);
}

TEST_CASE("single-target game returns the only strategy") {
  const Game game(3, 2, {{0.4, -0.6, 0.5, -0.5}});
  const auto r = evolve(game, exact_evaluator(Rational{}), small_config(1));
  REQUIRE(r.best.size() == 1);
  CHECK(r.best_value == 0.4);
}

TEST_CASE("elitism keeps the best fitness non-decreasing") {
  Rng rng(13);
  const auto game = testing::random_game(10, 2, 3, rng);
  EvolutionConfig cfg;
  cfg.seed = 4;
  const auto r = evolve(game, exact_evaluator(Rational{}), cfg);
  REQUIRE(r.history.size() == 1001);
  for (std::size_t g = 1; g < r.history.size(); ++g) {
    CHECK(r.history[g].best >= r.history[g - 1].best);
    CHECK(r.history[g].evaluations >= r.history[g - 1].evaluations);
    CHECK(r.history[g].generation == static_cast<int>(g));
  }
  CHECK(r.best_value >= r.history.back().best);
  CHECK(r.best.size() <= 20);
  CHECK_NOTHROW(r.best.validate_for(game));
}

TEST_CASE("symmetric two-target game reaches the even split") {
  const Game game(1, 1, {{1, -1, 1, -1}, {1, -1, 1, -1}});
  EvolutionConfig cfg = small_config(3);
  cfg.generations = 200;
  const auto r = evolve(game, exact_evaluator(Rational{}), cfg);
  CHECK(r.best_value >= -0.05);
  CHECK(r.best_value <= 1e-12);  // 0 is the optimum
}

TEST_CASE("four units on four targets match brute force over pure allocations") {
  Rng rng(404);
  for (int trial = 0; trial < 3; ++trial) {
    const auto game = testing::random_game(4, 1, 4, rng);
    double best_pure = -INFINITY;
    for (int code = 0; code < 256; ++code) {
      const PureStrategy p(4, 1, {code & 3, (code >> 2) & 3, (code >> 4) & 3, (code >> 6) & 3});
      best_pure = std::max(best_pure, oracle::naive_leader_value(game, MixedStrategy::pure(p),
                                                                 Rational{}));
    }
    EvolutionConfig cfg = small_config(10 + trial);
    cfg.population_size = 50;
    cfg.generations = 200;
    const auto r = evolve(game, exact_evaluator(Rational{}), cfg);
    CHECK(r.best_value >= best_pure - 0.02);
  }
}

TEST_CASE("evaluator failures carry generation and individual context") {
  Rng rng(2);
  const auto game = testing::random_game(5, 1, 1, rng);
  std::atomic<int> calls = 0;
  const Evaluator flaky("flaky", [&](const Game&, const MixedStrategy&) -> double {
    if (++calls > 35) throw std::runtime_error("boom");
    return 0.0;
  });
  try {
    evolve(game, flaky, small_config(1));
    FAIL("expected an exception");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("generation 1") != std::string::npos);
    CHECK(msg.find("flaky") != std::string::npos);
    CHECK(msg.find("individual") != std::string::npos);
    CHECK(msg.find("boom") != std::string::npos);
  }
}

TEST_CASE("cached fitness is not recomputed") {
  Rng rng(2);
  const auto game = testing::random_game(5, 1, 1, rng);
  int calls = 0;
  const Evaluator counting("count", [&](const Game&, const MixedStrategy&) {
    ++calls;
    return 1.0;
  });
  std::vector<Individual> pop{{MixedStrategy::pure(pure_1step(1, {0})), 0.5},
                              {MixedStrategy::pure(pure_1step(1, {1})), std::nullopt}};
  CHECK(evaluate_population(pop, game, counting) == 1);
  CHECK(calls == 1);
  CHECK(*pop[0].fitness == 0.5);
  CHECK(*pop[1].fitness == 1.0);
}

TEST_CASE("history csv") {
  Rng rng(2);
  const auto game = testing::random_game(5, 1, 1, rng);
  auto cfg = small_config(1);
  cfg.generations = 3;
  const auto r = evolve(game, exact_evaluator(Rational{}), cfg);
  std::ostringstream os;
  write_history_csv(os, r.history);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "generation,best,mean,evaluations,wall_ms");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 4);
  }
  CHECK(rows == 4);
}

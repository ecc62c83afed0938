#include "ssg/evolution.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <numeric>
#include <ostream>
#include <string>
#include <thread>

#include "ssg/error.hpp"

namespace ssg {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

double fitness_of(const Individual& ind) {
  if (!ind.fitness) throw Error("individual has not been evaluated");
  return *ind.fitness;
}

// Indices sorted by fitness, best first; ties keep population order.
std::vector<std::size_t> ranking(std::span<const Individual> pop) {
  std::vector<std::size_t> order(pop.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return fitness_of(pop[a]) > fitness_of(pop[b]);
  });
  return order;
}

GenerationStats stats_of(int generation, std::span<const Individual> pop) {
  GenerationStats st;
  st.generation = generation;
  st.best = fitness_of(pop.front());
  double sum = 0.0;
  for (const auto& ind : pop) {
    st.best = std::max(st.best, fitness_of(ind));
    sum += fitness_of(ind);
  }
  st.mean = sum / static_cast<double>(pop.size());
  return st;
}

}  // namespace

void EvolutionConfig::validate() const {
  if (population_size < 2) throw ConfigError("population_size must be >= 2");
  if (generations < 0) throw ConfigError("generations must be >= 0");
  for (double r : {mutation_rate, crossover_rate, selection_pressure}) {
    if (!(r >= 0.0 && r <= 1.0)) {
      throw ConfigError("mutation, crossover and selection rates must lie in [0, 1]");
    }
  }
  if (elite_size < 0 || elite_size >= population_size) {
    throw ConfigError("elite_size must satisfy 0 <= elite_size < population_size");
  }
  if (max_support < 1) throw ConfigError("max_support must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
}

PureStrategy random_pure_strategy(const Game& game, Rng& rng) {
  const int k = game.num_units();
  const int m = game.num_steps();
  std::vector<int> alloc(static_cast<std::size_t>(k * m));
  for (int& t : alloc) t = static_cast<int>(rng.uniform_index(game.num_targets()));
  return PureStrategy(k, m, std::move(alloc));
}

std::vector<Individual> init_population(const Game& game, const EvolutionConfig& config,
                                        Rng& rng) {
  config.validate();
  std::vector<Individual> pop;
  pop.reserve(static_cast<std::size_t>(config.population_size));
  for (int i = 0; i < config.population_size; ++i) {
    pop.push_back({MixedStrategy::pure(random_pure_strategy(game, rng)), std::nullopt});
  }
  return pop;
}

Individual crossover(const Individual& a, const Individual& b, int max_support) {
  if (max_support < 1) throw ConfigError("max_support must be >= 1");
  std::vector<SupportEntry> joined;
  joined.reserve(a.strategy.size() + b.strategy.size());
  for (const auto* parent : {&a, &b}) {
    for (const auto& e : parent->strategy.support()) joined.push_back({e.pure, e.prob * 0.5});
  }
  auto child = MixedStrategy::normalized(std::move(joined));
  if (child.size() > static_cast<std::size_t>(max_support)) {
    const auto support = child.support();
    std::vector<std::size_t> order(support.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      return support[x].prob > support[y].prob;
    });
    order.resize(static_cast<std::size_t>(max_support));
    std::sort(order.begin(), order.end());
    std::vector<SupportEntry> kept;
    kept.reserve(order.size());
    for (auto i : order) kept.push_back(support[i]);
    child = MixedStrategy::normalized(std::move(kept));
  }
  return {std::move(child), std::nullopt};
}

Individual mutate(const Individual& ind, const Game& game, Rng& rng) {
  const auto support = ind.strategy.support();
  const auto site = rng.uniform_index(support.size());
  const int k = game.num_units();
  const int m = game.num_steps();
  std::vector<char> chosen(static_cast<std::size_t>(k), 0);
  bool any = false;
  while (!any) {
    for (auto& c : chosen) {
      c = rng.bernoulli(0.5) ? 1 : 0;
      any = any || c;
    }
  }
  std::vector<SupportEntry> entries(support.begin(), support.end());
  const auto old = entries[site].pure.allocation();
  std::vector<int> alloc(old.begin(), old.end());
  for (int u = 0; u < k; ++u) {
    if (!chosen[u]) continue;
    for (int s = 0; s < m; ++s) {
      alloc[static_cast<std::size_t>(u * m + s)] =
          static_cast<int>(rng.uniform_index(game.num_targets()));
    }
  }
  entries[site].pure = PureStrategy(k, m, std::move(alloc));
  // The mutated schedule may now coincide with another entry; the strict
  // constructor merges it without touching the other probabilities.
  return {MixedStrategy(std::move(entries)), std::nullopt};
}

const Individual& tournament_select(std::span<const Individual> population, double pressure,
                                    Rng& rng) {
  if (population.size() < 2) throw ConfigError("tournament needs at least 2 individuals");
  const auto i = rng.uniform_index(population.size());
  auto j = rng.uniform_index(population.size() - 1);
  if (j >= i) ++j;
  const bool i_fitter = fitness_of(population[i]) >= fitness_of(population[j]);
  const auto& stronger = i_fitter ? population[i] : population[j];
  const auto& weaker = i_fitter ? population[j] : population[i];
  return rng.bernoulli(pressure) ? stronger : weaker;
}

std::int64_t evaluate_population(std::vector<Individual>& population, const Game& game,
                                 const Evaluator& evaluator, int threads) {
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < population.size(); ++i) {
    if (!population[i].fitness) todo.push_back(i);
  }
  std::vector<double> values(todo.size());
  std::vector<std::exception_ptr> errors(todo.size());
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t w = begin; w < todo.size(); w += stride) {
      try {
        values[w] = evaluator(game, population[todo[w]].strategy);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    }
  };
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)),
                                             std::max<std::size_t>(todo.size(), 1));
  if (workers <= 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work, t, workers);
  }
  // Write back in index order so the result does not depend on scheduling.
  for (std::size_t w = 0; w < todo.size(); ++w) {
    if (errors[w]) {
      try {
        std::rethrow_exception(errors[w]);
      } catch (const std::exception& e) {
        throw Error("evaluator '" + evaluator.name() + "' failed on individual " +
                    std::to_string(todo[w]) + ": " + e.what());
      }
    }
    population[todo[w]].fitness = values[w];
  }
  return static_cast<std::int64_t>(todo.size());
}

EvolutionResult evolve(const Game& game, const Evaluator& evaluator,
                       const EvolutionConfig& config) {
  config.validate();
  const auto start = Clock::now();
  Rng rng(config.seed);
  std::int64_t evaluations = 0;
  double eval_ms = 0.0;
  int generation = 0;
  auto evaluate = [&](std::vector<Individual>& pop) {
    const auto t0 = Clock::now();
    try {
      evaluations += evaluate_population(pop, game, evaluator, config.threads);
    } catch (const std::exception& e) {
      throw Error("generation " + std::to_string(generation) + ": " + e.what());
    }
    eval_ms += ms_since(t0);
  };

  auto population = init_population(game, config, rng);
  evaluate(population);

  std::vector<GenerationStats> history;
  auto record = [&](int g) {
    auto st = stats_of(g, population);
    st.evaluations = evaluations;
    st.wall_ms = ms_since(start);
    history.push_back(st);
  };
  record(0);

  Individual best_ever = population[ranking(population).front()];
  const auto n = static_cast<std::size_t>(config.population_size);

  for (generation = 1; generation <= config.generations; ++generation) {
    const auto order = ranking(population);
    std::vector<Individual> elites;
    for (int e = 0; e < config.elite_size; ++e) elites.push_back(population[order[e]]);

    // Crossover: a random crossover_rate share of the population is paired up;
    // each pair is replaced by its child.
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(idx.begin(), idx.end());
    const auto pairs = static_cast<std::size_t>(config.crossover_rate * static_cast<double>(n)) / 2;
    std::vector<char> consumed(n, 0);
    std::vector<Individual> children;
    for (std::size_t p = 0; p < pairs; ++p) {
      const auto a = idx[2 * p];
      const auto b = idx[2 * p + 1];
      consumed[a] = consumed[b] = 1;
      children.push_back(crossover(population[a], population[b], config.max_support));
    }
    std::vector<Individual> pool;
    pool.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!consumed[i]) pool.push_back(std::move(population[i]));
    }
    for (auto& c : children) pool.push_back(std::move(c));

    for (auto& ind : pool) {
      if (rng.bernoulli(config.mutation_rate)) ind = mutate(ind, game, rng);
    }
    evaluate(pool);

    for (const auto& ind : pool) {
      if (*ind.fitness > *best_ever.fitness) best_ever = ind;
    }

    if (pool.size() < 2) pool.insert(pool.end(), elites.begin(), elites.end());
    std::vector<Individual> next = std::move(elites);
    next.reserve(n);
    while (next.size() < n) {
      next.push_back(tournament_select(pool, config.selection_pressure, rng));
    }
    population = std::move(next);
    record(generation);
  }

  EvolutionResult result{best_ever.strategy, 0.0, std::move(history), evaluations, eval_ms, 0.0};
  const auto t0 = Clock::now();
  result.best_value = evaluator(game, result.best);
  result.eval_ms += ms_since(t0);
  result.evaluations += 1;
  result.total_ms = ms_since(start);
  return result;
}

void write_history_csv(std::ostream& os, std::span<const GenerationStats> history) {
  const auto old = os.precision(17);
  os << "generation,best,mean,evaluations,wall_ms\n";
  for (const auto& h : history) {
    os << h.generation << ',' << h.best << ',' << h.mean << ',' << h.evaluations << ','
       << h.wall_ms << '\n';
  }
  os.precision(old);
}

}  // namespace ssg

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "ssg/evaluator.hpp"
#include "ssg/game.hpp"
#include "ssg/rng.hpp"

namespace ssg {

struct EvolutionConfig {
  int population_size = 100;
  int generations = 1000;
  double mutation_rate = 0.5;
  double crossover_rate = 0.8;
  double selection_pressure = 0.9;
  int elite_size = 2;
  int max_support = 20;
  std::uint64_t seed = 0;
  // Worker threads for fitness evaluation; results are identical for any value.
  int threads = 1;

  void validate() const;
};

struct Individual {
  MixedStrategy strategy;
  std::optional<double> fitness;
};

struct GenerationStats {
  int generation = 0;
  double best = 0.0;
  double mean = 0.0;
  std::int64_t evaluations = 0;  // cumulative evaluator calls
  double wall_ms = 0.0;          // cumulative wall clock
};

struct EvolutionResult {
  MixedStrategy best;
  double best_value = 0.0;
  std::vector<GenerationStats> history;  // entry 0 is the initial population
  std::int64_t evaluations = 0;
  double eval_ms = 0.0;  // time spent inside the evaluator
  double total_ms = 0.0;
};

// population_size single-pure-strategy individuals with uniform allocations.
std::vector<Individual> init_population(const Game& game, const EvolutionConfig& config,
                                        Rng& rng);

PureStrategy random_pure_strategy(const Game& game, Rng& rng);

// Union of both supports at half probability; duplicates merged; support
// capped at max_support by dropping the least likely entries and renormalizing.
Individual crossover(const Individual& a, const Individual& b, int max_support);

// Reassigns a random non-empty subset of units of one support entry to fresh
// uniform targets in every step. Probabilities are unchanged.
Individual mutate(const Individual& ind, const Game& game, Rng& rng);

// Binary tournament: two distinct entrants; the fitter one wins with
// probability `pressure`. Requires an evaluated population of size >= 2.
const Individual& tournament_select(std::span<const Individual> population, double pressure,
                                    Rng& rng);

// Evaluates every individual without a cached fitness, in index order.
// Returns the number of evaluator calls.
std::int64_t evaluate_population(std::vector<Individual>& population, const Game& game,
                                 const Evaluator& evaluator, int threads = 1);

EvolutionResult evolve(const Game& game, const Evaluator& evaluator,
                       const EvolutionConfig& config);

// generation,best,mean,evaluations,wall_ms
void write_history_csv(std::ostream& os, std::span<const GenerationStats> history);

}  // namespace ssg

#pragma once

#include <cstdint>
#include <vector>

#include "ssg/behavior.hpp"
#include "ssg/game.hpp"
#include "ssg/rng.hpp"
#include "ssg/senn.hpp"

namespace ssg {

struct BenchmarkSpec {
  std::vector<int> steps_list{1, 2, 4};
  std::vector<int> targets_list{4, 8, 16, 32, 64, 128};
  int games_per_pair = 5;
  std::uint64_t seed = 0;

  void validate() const;
};

struct DatasetSpec {
  int num_examples = 5000;
  int max_support = 5;
  BehaviorModel model = Quantal{};
  std::uint64_t seed = 0;

  void validate() const;
};

// Unit count interval [floor(n/4m), ceil(3n/4m)], lower end clamped to 1.
std::pair<int, int> unit_range(int num_targets, int num_steps);

// Leader/follower penalties ~ U(-1, 0), rewards ~ U(0, 1), drawn per target in
// the order (lr, lp, fr, fp); then k ~ U{unit_range}.
Game gen_benchmark_game(int num_targets, int num_steps, Rng& rng);

// Seed used for game `index` (0-based) of the (n, m) cell.
std::uint64_t game_seed(std::uint64_t root, int num_targets, int num_steps, int index);

// l ~ U{1..max_support} uniform pure strategies, weights ~ U(0, 1), normalized,
// duplicates merged after normalization.
MixedStrategy sample_mixed_strategy(const Game& game, int max_support, Rng& rng);

// Historical data: random strategies labelled with the exact leader value.
std::vector<TrainingExample> gen_training_set(const Game& game, const BehaviorModel& model,
                                              int count, Rng& rng, int max_support = 5);

inline std::vector<TrainingExample> gen_training_set(const Game& game,
                                                     const DatasetSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  return gen_training_set(game, spec.model, spec.num_examples, rng, spec.max_support);
}

}  // namespace ssg

#include "ssg/datagen.hpp"

#include "ssg/error.hpp"
#include "ssg/evolution.hpp"

namespace ssg {

void BenchmarkSpec::validate() const {
  if (steps_list.empty() || targets_list.empty()) {
    throw ConfigError("benchmark needs at least one step count and one target count");
  }
  for (int v : steps_list) {
    if (v < 1) throw ConfigError("step counts must be positive");
  }
  for (int v : targets_list) {
    if (v < 1) throw ConfigError("target counts must be positive");
  }
  if (games_per_pair < 1) throw ConfigError("games_per_pair must be positive");
}

void DatasetSpec::validate() const {
  if (num_examples < 1) throw ConfigError("num_examples must be >= 1");
  if (max_support < 1) throw ConfigError("max_support must be >= 1");
  ssg::validate(model);
}

std::pair<int, int> unit_range(int num_targets, int num_steps) {
  const int denom = 4 * num_steps;
  const int lo = num_targets / denom;
  const int hi = (3 * num_targets + denom - 1) / denom;
  return {std::max(lo, 1), std::max(hi, 1)};
}

Game gen_benchmark_game(int num_targets, int num_steps, Rng& rng) {
  if (num_targets < 1 || num_steps < 1) throw ConfigError("n and m must be >= 1");
  std::vector<TargetPayoffs> payoffs(static_cast<std::size_t>(num_targets));
  for (auto& p : payoffs) {
    p.leader_reward = rng.uniform(0.0, 1.0);
    p.leader_penalty = rng.uniform(-1.0, 0.0);
    p.follower_reward = rng.uniform(0.0, 1.0);
    p.follower_penalty = rng.uniform(-1.0, 0.0);
  }
  const auto [lo, hi] = unit_range(num_targets, num_steps);
  const auto k = static_cast<int>(rng.uniform_int(lo, hi));
  return Game(num_steps, k, std::move(payoffs));
}

std::uint64_t game_seed(std::uint64_t root, int num_targets, int num_steps, int index) {
  return derive_seed(root, "game",
                     {static_cast<std::uint64_t>(num_targets),
                      static_cast<std::uint64_t>(num_steps), static_cast<std::uint64_t>(index)});
}

MixedStrategy sample_mixed_strategy(const Game& game, int max_support, Rng& rng) {
  if (max_support < 1) throw ConfigError("max_support must be >= 1");
  const auto l = rng.uniform_int(1, max_support);
  std::vector<SupportEntry> entries;
  entries.reserve(static_cast<std::size_t>(l));
  for (std::int64_t i = 0; i < l; ++i) {
    auto pure = random_pure_strategy(game, rng);
    entries.push_back({std::move(pure), rng.uniform01()});
  }
  return MixedStrategy::normalized(std::move(entries));
}

std::vector<TrainingExample> gen_training_set(const Game& game, const BehaviorModel& model,
                                              int count, Rng& rng, int max_support) {
  if (count < 1) throw ConfigError("training set size must be >= 1");
  validate(model);
  std::vector<TrainingExample> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const auto strategy = sample_mixed_strategy(game, max_support, rng);
    const auto cov = coverage_profile(game, strategy);
    out.push_back({{cov.values().begin(), cov.values().end()},
                   exact_leader_value(game, cov, model)});
  }
  return out;
}

}  // namespace ssg

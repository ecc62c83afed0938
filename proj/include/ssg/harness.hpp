#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssg/behavior.hpp"
#include "ssg/datagen.hpp"
#include "ssg/evolution.hpp"
#include "ssg/senn.hpp"

namespace ssg {

enum class Solver {
  kEasg,    // rational-follower evaluator, BR-blind
  kEasgBr,  // exact evaluator under the true follower model
  kNesg,    // trained network evaluator
};

std::string solver_id(Solver solver);
Solver parse_solver(std::string_view text);

struct HarnessConfig {
  BenchmarkSpec bench{{1, 2}, {4, 8, 16}, 3, 0};
  std::vector<BehaviorModel> models{Anchoring{}, Quantal{}, Prospect{}};
  std::vector<Solver> solvers{Solver::kEasg, Solver::kEasgBr, Solver::kNesg};
  EvolutionConfig evolution{.population_size = 50, .generations = 200};
  TrainConfig training;
  int train_size = 5000;        // includes the validation share
  double val_fraction = 0.1;
  int test_size = 1000;
  int data_max_support = 5;
  int repeats = 1;

  // Targets {4,8,16}, steps {1,2}, 3 games per cell, population 50,
  // 200 generations.
  static HarnessConfig desk_scale();
  // Targets up to 128, steps {1,2,4}, 5 games per cell, population 100,
  // 1000 generations.
  static HarnessConfig paper_scale();

  void validate() const;
};

struct ExperimentRecord {
  int num_targets = 0;
  int num_steps = 0;
  std::string model;      // format_model() of the follower model
  std::string solver_id;  // "easg", "easg_br", "nesg", "senn"
  std::string metric;     // "leader_value" or "senn_mae"
  double mean_value = 0.0;
  std::vector<double> per_game_values;  // averaged over repeats
  std::vector<double> per_run_values;   // game-major, repeat-minor
  std::optional<double> senn_mae;
  double wall_clock_ms = 0.0;
  double eval_ms = 0.0;      // time inside the evaluator (timing runs)
  double training_ms = 0.0;  // data generation + network training (timing runs)
  std::uint64_t seed = 0;
};

struct ExperimentReport {
  std::string kind;  // "table1" | "table2" | "timing"
  nlohmann::json config;
  std::vector<ExperimentRecord> records;

  const ExperimentRecord* find(int n, int m, std::string_view model,
                               std::string_view solver) const;
};

// Train/val/test data for one (game, model), trained network and its test MAE.
struct TrainedSenn {
  SennNetwork network;
  TrainReport report;
  double test_mae = 0.0;
  double data_ms = 0.0;
  double train_ms = 0.0;
};

TrainedSenn train_for_game(const Game& game, const BehaviorModel& model,
                           const HarnessConfig& config, std::uint64_t seed);

// Seeds for one cell member; shared across solvers and models for fairness.
std::uint64_t evolution_seed(std::uint64_t root, int n, int m, int game_index, int repeat);
std::uint64_t training_seed(std::uint64_t root, int n, int m, int game_index,
                            const BehaviorModel& model);

ExperimentReport run_senn_error(const HarnessConfig& config);
ExperimentReport run_payoff_comparison(const HarnessConfig& config);

// One row per (solver, n, m) plus "nesg+training". Each timed run is
// preceded by an untimed one-generation warm-up.
ExperimentReport run_timing(const HarnessConfig& config, const BehaviorModel& model);

// Mean wall-clock nanoseconds per evaluator call over `strategies`, repeated
// `rounds` times after one warm-up round.
double time_per_evaluation(const Game& game, const Evaluator& evaluator,
                           std::span<const MixedStrategy> strategies, int rounds);

nlohmann::json to_json(const ExperimentReport& report);
nlohmann::json to_json(const HarnessConfig& config);

// Plain-text tables mirroring the published layouts.
std::string render_table1(const ExperimentReport& report);
std::string render_table2(const ExperimentReport& report);

// solver,n,m,total_ms,eval_ms,eval_ms_per_generation,training_ms
void write_timing_csv(std::ostream& os, const ExperimentReport& report);

}  // namespace ssg

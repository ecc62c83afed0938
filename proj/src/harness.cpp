#include "ssg/harness.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "ssg/error.hpp"
#include "ssg/io.hpp"

namespace ssg {

namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

double mean_of(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

Game benchmark_game(const HarnessConfig& config, int n, int m, int index) {
  Rng rng(game_seed(config.bench.seed, n, m, index));
  return gen_benchmark_game(n, m, rng);
}

EvolutionConfig seeded(const EvolutionConfig& base, std::uint64_t seed) {
  auto c = base;
  c.seed = seed;
  return c;
}

// Accumulates per-run values for one report cell.
struct Cell {
  ExperimentRecord record;
  std::vector<double> mae;

  void add_game(std::span<const double> runs) {
    record.per_run_values.insert(record.per_run_values.end(), runs.begin(), runs.end());
    record.per_game_values.push_back(mean_of(runs));
  }
  ExperimentRecord finish() {
    record.mean_value = mean_of(record.per_game_values);
    if (!mae.empty()) record.senn_mae = mean_of(mae);
    return std::move(record);
  }
};

std::string pad(const std::string& s, int width) {
  std::ostringstream os;
  os << std::setw(width) << s;
  return os.str();
}

std::string fixed3(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << v;
  return os.str();
}

std::vector<int> unique_sorted(const std::vector<ExperimentRecord>& records, int ExperimentRecord::*field) {
  std::vector<int> out;
  for (const auto& r : records) out.push_back(r.*field);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::string> models_in_order(const std::vector<ExperimentRecord>& records) {
  std::vector<std::string> out;
  for (const auto& r : records) {
    if (std::find(out.begin(), out.end(), r.model) == out.end()) out.push_back(r.model);
  }
  return out;
}

std::string model_label(const std::string& formatted) {
  auto name = formatted.substr(0, formatted.find(':'));
  for (auto& c : name) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return name;
}

}  // namespace

std::string solver_id(Solver solver) {
  switch (solver) {
    case Solver::kEasg: return "easg";
    case Solver::kEasgBr: return "easg_br";
    case Solver::kNesg: return "nesg";
  }
  return "?";
}

Solver parse_solver(std::string_view text) {
  if (text == "easg") return Solver::kEasg;
  if (text == "easg_br") return Solver::kEasgBr;
  if (text == "nesg") return Solver::kNesg;
  throw ConfigError("unknown solver '" + std::string(text) + "' (expected easg | easg_br | nesg)");
}

HarnessConfig HarnessConfig::desk_scale() { return HarnessConfig{}; }

HarnessConfig HarnessConfig::paper_scale() {
  HarnessConfig c;
  c.bench = BenchmarkSpec{};
  c.evolution = EvolutionConfig{};
  return c;
}

void HarnessConfig::validate() const {
  bench.validate();
  evolution.validate();
  if (models.empty()) throw ConfigError("at least one behavior model is required");
  for (const auto& m : models) ssg::validate(m);
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw ConfigError("val_fraction must lie in (0, 1)");
  }
  if (train_size < 2) {
    throw ConfigError("train_size must be >= 2 (training and validation both need examples)");
  }
  if (test_size < 1) throw ConfigError("test_size must be >= 1");
  if (data_max_support < 1) throw ConfigError("data_max_support must be >= 1");
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
}

const ExperimentRecord* ExperimentReport::find(int n, int m, std::string_view model,
                                               std::string_view solver) const {
  for (const auto& r : records) {
    if (r.num_targets == n && r.num_steps == m && r.model == model && r.solver_id == solver) {
      return &r;
    }
  }
  return nullptr;
}

std::uint64_t evolution_seed(std::uint64_t root, int n, int m, int game_index, int repeat) {
  return derive_seed(root, "evolve",
                     {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(m),
                      static_cast<std::uint64_t>(game_index), static_cast<std::uint64_t>(repeat)});
}

std::uint64_t training_seed(std::uint64_t root, int n, int m, int game_index,
                            const BehaviorModel& model) {
  return derive_seed(root, "senn",
                     {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(m),
                      static_cast<std::uint64_t>(game_index), label_tag(format_model(model))});
}

TrainedSenn train_for_game(const Game& game, const BehaviorModel& model,
                           const HarnessConfig& config, std::uint64_t seed) {
  config.validate();
  const auto t0 = Clock::now();
  Rng data_rng(derive_seed(seed, "train-data"));
  auto examples = gen_training_set(game, model, config.train_size, data_rng,
                                   config.data_max_support);
  Rng test_rng(derive_seed(seed, "test-data"));
  const auto test = gen_training_set(game, model, config.test_size, test_rng,
                                     config.data_max_support);
  const double data_ms = ms_since(t0);

  auto val_count = static_cast<std::size_t>(
      std::ceil(config.val_fraction * static_cast<double>(examples.size())));
  val_count = std::clamp<std::size_t>(val_count, 1, examples.size() - 1);
  const std::span<const TrainingExample> all(examples);
  const auto train_part = all.first(all.size() - val_count);
  const auto val_part = all.last(val_count);

  const auto t1 = Clock::now();
  Rng init_rng(derive_seed(seed, "init"));
  auto net = build_senn(game.num_targets(), game.num_steps(), init_rng);
  auto tc = config.training;
  tc.seed = derive_seed(seed, "shuffle");
  auto result = train_senn(std::move(net), train_part, val_part, tc);
  const double train_ms = ms_since(t1);
  const double test_mae = evaluate_mae(result.network, test);
  return {std::move(result.network), std::move(result.report), test_mae, data_ms, train_ms};
}

ExperimentReport run_senn_error(const HarnessConfig& config) {
  config.validate();
  ExperimentReport report{"table1", to_json(config), {}};
  for (int m : config.bench.steps_list) {
    for (int n : config.bench.targets_list) {
      for (const auto& model : config.models) {
        Cell cell;
        cell.record.num_targets = n;
        cell.record.num_steps = m;
        cell.record.model = format_model(model);
        cell.record.solver_id = "senn";
        cell.record.metric = "senn_mae";
        cell.record.seed = config.bench.seed;
        const auto t0 = Clock::now();
        for (int g = 0; g < config.bench.games_per_pair; ++g) {
          try {
            const auto game = benchmark_game(config, n, m, g);
            const auto trained =
                train_for_game(game, model, config, training_seed(config.bench.seed, n, m, g, model));
            const double mae[] = {trained.test_mae};
            cell.add_game(mae);
            cell.mae.push_back(trained.test_mae);
          } catch (const std::exception& e) {
            throw Error("table1 cell (n=" + std::to_string(n) + ", m=" + std::to_string(m) +
                        ", model=" + format_model(model) + "): " + e.what());
          }
        }
        cell.record.wall_clock_ms = ms_since(t0);
        report.records.push_back(cell.finish());
      }
    }
  }
  return report;
}

ExperimentReport run_payoff_comparison(const HarnessConfig& config) {
  config.validate();
  ExperimentReport report{"table2", to_json(config), {}};
  const auto wants = [&](Solver s) {
    return std::find(config.solvers.begin(), config.solvers.end(), s) != config.solvers.end();
  };
  for (int m : config.bench.steps_list) {
    for (int n : config.bench.targets_list) {
      // cells[model][solver]
      std::map<std::pair<std::size_t, Solver>, Cell> cells;
      for (std::size_t mi = 0; mi < config.models.size(); ++mi) {
        for (Solver s : config.solvers) {
          auto& r = cells[{mi, s}].record;
          r.num_targets = n;
          r.num_steps = m;
          r.model = format_model(config.models[mi]);
          r.solver_id = solver_id(s);
          r.metric = "leader_value";
          r.seed = config.bench.seed;
        }
      }
      for (int g = 0; g < config.bench.games_per_pair; ++g) {
        const auto context = [&](const std::string& what) {
          return "table2 cell (n=" + std::to_string(n) + ", m=" + std::to_string(m) +
                 ", game " + std::to_string(g + 1) + "): " + what;
        };
        try {
          const auto game = benchmark_game(config, n, m, g);
          // BR-blind search does not depend on the follower model: run once,
          // judge under every model.
          std::vector<MixedStrategy> easg_best;
          double easg_ms = 0.0;
          if (wants(Solver::kEasg)) {
            const auto rational = exact_evaluator(Rational{});
            for (int r = 0; r < config.repeats; ++r) {
              const auto res = evolve(game, rational,
                                      seeded(config.evolution,
                                             evolution_seed(config.bench.seed, n, m, g, r)));
              easg_best.push_back(res.best);
              easg_ms += res.total_ms;
            }
          }
          for (std::size_t mi = 0; mi < config.models.size(); ++mi) {
            const auto& model = config.models[mi];
            if (wants(Solver::kEasg)) {
              std::vector<double> runs;
              for (const auto& s : easg_best) runs.push_back(exact_leader_value(game, s, model));
              auto& cell = cells[{mi, Solver::kEasg}];
              cell.add_game(runs);
              cell.record.wall_clock_ms += easg_ms;
            }
            if (wants(Solver::kEasgBr)) {
              const auto oracle = exact_evaluator(model);
              std::vector<double> runs;
              auto& cell = cells[{mi, Solver::kEasgBr}];
              for (int r = 0; r < config.repeats; ++r) {
                const auto res = evolve(game, oracle,
                                        seeded(config.evolution,
                                               evolution_seed(config.bench.seed, n, m, g, r)));
                runs.push_back(exact_leader_value(game, res.best, model));
                cell.record.wall_clock_ms += res.total_ms;
              }
              cell.add_game(runs);
            }
            if (wants(Solver::kNesg)) {
              auto& cell = cells[{mi, Solver::kNesg}];
              const auto t0 = Clock::now();
              auto trained = train_for_game(game, model, config,
                                            training_seed(config.bench.seed, n, m, g, model));
              cell.record.wall_clock_ms += ms_since(t0);
              cell.mae.push_back(trained.test_mae);
              const auto evaluator = senn_evaluator(
                  std::make_shared<const SennNetwork>(std::move(trained.network)), game);
              std::vector<double> runs;
              for (int r = 0; r < config.repeats; ++r) {
                const auto res = evolve(game, evaluator,
                                        seeded(config.evolution,
                                               evolution_seed(config.bench.seed, n, m, g, r)));
                runs.push_back(exact_leader_value(game, res.best, model));
                cell.record.wall_clock_ms += res.total_ms;
              }
              cell.add_game(runs);
            }
          }
        } catch (const std::exception& e) {
          throw Error(context(e.what()));
        }
      }
      for (std::size_t mi = 0; mi < config.models.size(); ++mi) {
        for (Solver s : config.solvers) report.records.push_back(cells[{mi, s}].finish());
      }
    }
  }
  return report;
}

ExperimentReport run_timing(const HarnessConfig& config, const BehaviorModel& model) {
  config.validate();
  validate(model);
  ExperimentReport report{"timing", to_json(config), {}};
  report.config["timing_model"] = format_model(model);
  for (int m : config.bench.steps_list) {
    for (int n : config.bench.targets_list) {
      const auto game = benchmark_game(config, n, m, 0);
      const auto seed = evolution_seed(config.bench.seed, n, m, 0, 0);
      auto warm = seeded(config.evolution, seed);
      warm.generations = 1;
      const auto base = [&](const std::string& id) {
        ExperimentRecord r;
        r.num_targets = n;
        r.num_steps = m;
        r.model = format_model(model);
        r.solver_id = id;
        r.metric = "leader_value";
        r.seed = seed;
        return r;
      };
      auto timed = [&](const std::string& id, const Evaluator& ev) {
        (void)evolve(game, ev, warm);
        const auto res = evolve(game, ev, seeded(config.evolution, seed));
        auto r = base(id);
        r.wall_clock_ms = res.total_ms;
        r.eval_ms = res.eval_ms;
        r.mean_value = exact_leader_value(game, res.best, model);
        r.per_game_values = {r.mean_value};
        r.per_run_values = {r.mean_value};
        return r;
      };
      for (Solver s : config.solvers) {
        switch (s) {
          case Solver::kEasg:
            report.records.push_back(timed("easg", exact_evaluator(Rational{})));
            break;
          case Solver::kEasgBr:
            report.records.push_back(timed("easg_br", exact_evaluator(model)));
            break;
          case Solver::kNesg: {
            auto trained = train_for_game(game, model, config,
                                          training_seed(config.bench.seed, n, m, 0, model));
            const double training_ms = trained.data_ms + trained.train_ms;
            const double mae = trained.test_mae;
            auto r = timed("nesg", senn_evaluator(std::make_shared<const SennNetwork>(
                                                      std::move(trained.network)),
                                                  game));
            r.senn_mae = mae;
            auto with_training = r;
            with_training.solver_id = "nesg+training";
            with_training.training_ms = training_ms;
            with_training.wall_clock_ms += training_ms;
            report.records.push_back(std::move(r));
            report.records.push_back(std::move(with_training));
            break;
          }
        }
      }
    }
  }
  return report;
}

double time_per_evaluation(const Game& game, const Evaluator& evaluator,
                           std::span<const MixedStrategy> strategies, int rounds) {
  if (strategies.empty() || rounds < 1) throw ConfigError("need strategies and rounds >= 1");
  volatile double sink = 0.0;
  for (const auto& s : strategies) sink = sink + evaluator(game, s);
  const auto t0 = Clock::now();
  for (int r = 0; r < rounds; ++r) {
    for (const auto& s : strategies) sink = sink + evaluator(game, s);
  }
  const double ns = std::chrono::duration<double, std::nano>(Clock::now() - t0).count();
  return ns / (static_cast<double>(rounds) * static_cast<double>(strategies.size()));
}

json to_json(const HarnessConfig& c) {
  json models = json::array();
  for (const auto& m : c.models) models.push_back(io::to_json(m));
  json solvers = json::array();
  for (auto s : c.solvers) solvers.push_back(solver_id(s));
  return {{"benchmark",
           {{"steps", c.bench.steps_list},
            {"targets", c.bench.targets_list},
            {"games_per_pair", c.bench.games_per_pair},
            {"seed", c.bench.seed}}},
          {"models", models},
          {"solvers", solvers},
          {"evolution", io::to_json(c.evolution)},
          {"training",
           {{"learning_rate", c.training.adam.learning_rate},
            {"beta1", c.training.adam.beta1},
            {"beta2", c.training.adam.beta2},
            {"epsilon", c.training.adam.epsilon},
            {"batch_size", c.training.batch_size},
            {"max_epochs", c.training.max_epochs},
            {"patience", c.training.patience},
            {"min_delta", c.training.min_delta}}},
          {"train_size", c.train_size},
          {"val_fraction", c.val_fraction},
          {"test_size", c.test_size},
          {"data_max_support", c.data_max_support},
          {"repeats", c.repeats},
          {"rng", Rng::kStreamVersion}};
}

json to_json(const ExperimentReport& report) {
  json records = json::array();
  for (const auto& r : report.records) {
    json j{{"targets", r.num_targets},
           {"steps", r.num_steps},
           {"model", r.model},
           {"solver", r.solver_id},
           {"metric", r.metric},
           {"mean", r.mean_value},
           {"per_game_values", r.per_game_values},
           {"per_run_values", r.per_run_values},
           {"wall_clock_ms", r.wall_clock_ms},
           {"seed", r.seed}};
    if (r.senn_mae) j["senn_mae"] = *r.senn_mae;
    if (report.kind == "timing") {
      j["eval_ms"] = r.eval_ms;
      j["training_ms"] = r.training_ms;
    }
    records.push_back(std::move(j));
  }
  return {{"kind", report.kind}, {"config", report.config}, {"records", records}};
}

std::string render_table1(const ExperimentReport& report) {
  const auto steps = unique_sorted(report.records, &ExperimentRecord::num_steps);
  const auto targets = unique_sorted(report.records, &ExperimentRecord::num_targets);
  const auto models = models_in_order(report.records);
  std::ostringstream os;
  os << "SENN error on test dataset (mean absolute error)\n";
  os << pad("targets", 8);
  for (const auto& model : models) {
    os << " ||";
    for (int m : steps) {
      os << pad(model_label(model) + " " + std::to_string(m) + (m == 1 ? " step" : " steps"), 12);
    }
  }
  os << '\n';
  for (int n : targets) {
    os << pad(std::to_string(n), 8);
    for (const auto& model : models) {
      os << " ||";
      for (int m : steps) {
        const auto* r = report.find(n, m, model, "senn");
        os << pad(r ? fixed3(r->mean_value) : "-", 12);
      }
    }
    os << '\n';
  }
  return os.str();
}

std::string render_table2(const ExperimentReport& report) {
  const auto steps = unique_sorted(report.records, &ExperimentRecord::num_steps);
  const auto targets = unique_sorted(report.records, &ExperimentRecord::num_targets);
  const auto models = models_in_order(report.records);
  std::ostringstream os;
  os << "Average leader payoffs (C2016 is an exact MILP baseline, not reproduced)\n";
  for (int m : steps) {
    os << '\n' << m << (m == 1 ? " step" : " steps") << '\n' << pad("targets", 8);
    for (const auto& model : models) {
      const auto label = model_label(model);
      os << " ||" << pad("C2016", 8) << pad("EASG", 8) << pad("EASG_" + label, 9)
         << pad("NESG", 8);
    }
    os << '\n';
    for (int n : targets) {
      os << pad(std::to_string(n), 8);
      for (const auto& model : models) {
        os << " ||" << pad("n/a", 8);
        const std::pair<const char*, int> cols[] = {{"easg", 8}, {"easg_br", 9}, {"nesg", 8}};
        for (const auto& [id, width] : cols) {
          const auto* r = report.find(n, m, model, id);
          os << pad(r ? fixed3(r->mean_value) : "-", width);
        }
      }
      os << '\n';
    }
  }
  return os.str();
}

void write_timing_csv(std::ostream& os, const ExperimentReport& report) {
  os << "solver,n,m,total_ms,eval_ms,eval_ms_per_generation,training_ms\n";
  const auto gens = std::max(1, report.config.value(json::json_pointer("/evolution/generations"), 1));
  for (const auto& r : report.records) {
    os << r.solver_id << ',' << r.num_targets << ',' << r.num_steps << ','
       << io::format_double(r.wall_clock_ms) << ',' << io::format_double(r.eval_ms) << ','
       << io::format_double(r.eval_ms / gens) << ',' << io::format_double(r.training_ms)
       << '\n';
  }
}

}  // namespace ssg

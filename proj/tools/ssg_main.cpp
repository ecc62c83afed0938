// ssg: command-line front end for game generation, training, solving and the
// experiment tables. Every subcommand is deterministic given its flags.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "ssg/datagen.hpp"
#include "ssg/error.hpp"
#include "ssg/evolution.hpp"
#include "ssg/harness.hpp"
#include "ssg/io.hpp"
#include "ssg/senn.hpp"

namespace fs = std::filesystem;
using namespace ssg;

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Evolution flags shared by solve, table2 and timing.
struct EvoFlags {
  std::string config_file;
  int pop = 0, gens = 0, elite = -1, max_support = 0, threads = 1;
  double mut = -1, cx = -1, pressure = -1;

  void add(CLI::App* app, bool with_config) {
    if (with_config) {
      app->add_option("--config", config_file, "Evolution config JSON; flags override it")
          ->check(CLI::ExistingFile);
    }
    app->add_option("--pop", pop, "Population size");
    app->add_option("--gens", gens, "Number of generations");
    app->add_option("--mut", mut, "Mutation rate");
    app->add_option("--cx", cx, "Crossover rate");
    app->add_option("--pressure", pressure, "Tournament selection pressure");
    app->add_option("--elite", elite, "Elite count");
    app->add_option("--max-support", max_support, "Support cap of evolved strategies");
    app->add_option("--threads", threads, "Fitness evaluation threads (results do not depend on it)");
  }

  EvolutionConfig apply(EvolutionConfig c) const {
    if (!config_file.empty()) {
      c = io::evolution_config_from_json(io::parse_json(io::read_text(config_file), config_file));
    }
    if (pop > 0) c.population_size = pop;
    if (gens > 0) c.generations = gens;
    if (mut >= 0) c.mutation_rate = mut;
    if (cx >= 0) c.crossover_rate = cx;
    if (pressure >= 0) c.selection_pressure = pressure;
    if (elite >= 0) c.elite_size = elite;
    if (max_support > 0) c.max_support = max_support;
    c.threads = threads;
    c.validate();
    return c;
  }
};

// Training flags shared by train and the tables.
struct TrainFlags {
  int epochs = 500, batch = 32, patience = 20;
  double lr = 1e-3, min_delta = 1e-5;

  void add(CLI::App* app) {
    app->add_option("--epochs", epochs, "Maximum training epochs")->capture_default_str();
    app->add_option("--batch", batch, "Minibatch size")->capture_default_str();
    app->add_option("--lr", lr, "Adam learning rate")->capture_default_str();
    app->add_option("--patience", patience, "Early-stopping patience in epochs")
        ->capture_default_str();
    app->add_option("--min-delta", min_delta, "Required validation improvement")
        ->capture_default_str();
  }

  TrainConfig apply(TrainConfig c) const {
    c.max_epochs = epochs;
    c.batch_size = batch;
    c.adam.learning_rate = lr;
    c.patience = patience;
    c.min_delta = min_delta;
    if (c.max_epochs < 1 || c.batch_size < 1 || c.patience < 1 || !(c.adam.learning_rate > 0)) {
      throw ConfigError("epochs, batch, patience and lr must be positive");
    }
    return c;
  }
};

std::vector<TrainingExample> split_tail(std::vector<TrainingExample>& all, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("--val-fraction must lie in (0, 1)");
  if (all.size() < 2) throw ConfigError("training needs at least 2 examples");
  auto count = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(all.size())));
  count = std::clamp<std::size_t>(count, 1, all.size() - 1);
  std::vector<TrainingExample> tail(all.end() - static_cast<std::ptrdiff_t>(count), all.end());
  all.resize(all.size() - count);
  return tail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stackelberg security games with boundedly rational followers"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string out;

  // gen-games
  auto* gen_games = app.add_subcommand("gen-games", "Generate benchmark games");
  std::vector<int> gg_steps{1, 2, 4};
  std::vector<int> gg_targets{4, 8, 16, 32, 64, 128};
  int gg_per_pair = 5;
  gen_games->add_option("--steps", gg_steps, "Time-step counts")->capture_default_str();
  gen_games->add_option("--targets", gg_targets, "Target counts")->capture_default_str();
  gen_games->add_option("--per-pair", gg_per_pair, "Games per (targets, steps) pair")
      ->capture_default_str();
  gen_games->add_option("--seed", seed, "Root seed")->capture_default_str();
  gen_games->add_option("--out", out, "Output directory")->required();

  // gen-data
  auto* gen_data = app.add_subcommand("gen-data", "Sample strategies labelled by exact leader value");
  std::string gd_game, gd_model = "qr";
  int gd_count = 5000, gd_support = 5;
  gen_data->add_option("--game", gd_game, "Game JSON")->required()->check(CLI::ExistingFile);
  gen_data->add_option("--model", gd_model, "Follower model: rational | at:D | qr:L | pt:G,T,A,B")
      ->capture_default_str();
  gen_data->add_option("--count", gd_count, "Number of examples")->capture_default_str();
  gen_data->add_option("--max-support", gd_support, "Largest sampled support")->capture_default_str();
  gen_data->add_option("--seed", seed, "Seed")->capture_default_str();
  gen_data->add_option("--out", out, "Output CSV")->required();

  // train
  auto* train = app.add_subcommand("train", "Train a strategy evaluation network");
  std::string tr_data, tr_test;
  double tr_val = 0.1;
  TrainFlags tr_flags;
  train->add_option("--data", tr_data, "Training CSV (validation share taken from the end)")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--test", tr_test, "Optional held-out CSV; its MAE is printed")
      ->check(CLI::ExistingFile);
  train->add_option("--val-fraction", tr_val, "Validation share")->capture_default_str();
  tr_flags.add(train);
  train->add_option("--seed", seed, "Initialization and shuffling seed")->capture_default_str();
  train->add_option("--out", out, "Output network JSON")->required();

  // solve
  auto* solve = app.add_subcommand("solve", "Evolve a leader strategy");
  std::string sv_game, sv_solver = "easg", sv_model = "qr", sv_net, sv_history;
  EvoFlags sv_evo;
  solve->add_option("--game", sv_game, "Game JSON")->required()->check(CLI::ExistingFile);
  solve->add_option("--solver", sv_solver, "easg | easg_br | nesg")->capture_default_str();
  solve->add_option("--model", sv_model, "Follower model used by easg_br")->capture_default_str();
  solve->add_option("--net", sv_net, "Trained network JSON (nesg)")->check(CLI::ExistingFile);
  solve->add_option("--history", sv_history, "Per-generation CSV");
  sv_evo.add(solve, true);
  solve->add_option("--seed", seed, "Evolution seed")->capture_default_str();
  solve->add_option("--out", out, "Output strategy JSON")->required();

  // score
  auto* score = app.add_subcommand("score", "Exact leader value of a strategy");
  std::string sc_game, sc_strategy, sc_model = "rational";
  score->add_option("--game", sc_game, "Game JSON")->required()->check(CLI::ExistingFile);
  score->add_option("--strategy", sc_strategy, "Strategy JSON")->required()->check(CLI::ExistingFile);
  score->add_option("--model", sc_model, "Follower model")->capture_default_str();
  score->add_option("--seed", seed, "Unused; accepted for uniformity");
  score->add_option("--out", out, "Also write the value as JSON");

  // table1 / table2
  struct TableFlags {
    std::vector<int> targets{4, 8, 16}, steps{1, 2};
    int per_pair = 3, train_size = 5000, test_size = 1000, repeats = 1;
    double val = 0.1;
    std::vector<std::string> models{"at", "qr", "pt"};
    std::vector<std::string> solvers{"easg", "easg_br", "nesg"};
    bool paper = false;
    std::string table;
    EvoFlags evo;
    TrainFlags train;
  };
  TableFlags t1, t2;
  auto add_table = [&](CLI::App* sub, TableFlags& f, bool solvers) {
    sub->add_option("--targets", f.targets, "Target counts")->capture_default_str();
    sub->add_option("--steps", f.steps, "Time-step counts")->capture_default_str();
    sub->add_option("--per-pair", f.per_pair, "Games per (targets, steps) pair")
        ->capture_default_str();
    sub->add_option("--models", f.models, "Follower models")->capture_default_str();
    sub->add_option("--train-size", f.train_size, "Training examples (incl. validation)")
        ->capture_default_str();
    sub->add_option("--test-size", f.test_size, "Test examples")->capture_default_str();
    sub->add_option("--val-fraction", f.val, "Validation share")->capture_default_str();
    sub->add_flag("--paper-scale", f.paper,
                  "Targets up to 128, steps {1,2,4}, 5 games per pair, population 100, 1000 generations");
    sub->add_option("--table", f.table, "Also write the plain-text table to this file");
    f.train.add(sub);
    if (solvers) {
      sub->add_option("--solvers", f.solvers, "Solvers")->capture_default_str();
      sub->add_option("--repeats", f.repeats, "Evolution runs per game and solver")
          ->capture_default_str();
      f.evo.add(sub, false);
    }
    sub->add_option("--seed", seed, "Root seed")->capture_default_str();
    sub->add_option("--out", out, "Report JSON");
  };
  auto* table1 = app.add_subcommand("table1", "Network error on held-out data per (n, m, model)");
  add_table(table1, t1, false);
  auto* table2 = app.add_subcommand("table2", "Average leader payoff per solver");
  add_table(table2, t2, true);

  // timing
  auto* timing = app.add_subcommand("timing", "Wall-clock scaling of EASG, EASG_BR and NESG");
  std::vector<int> tm_targets{4, 8, 16, 32, 64, 128}, tm_steps{1};
  std::string tm_model = "qr", tm_json;
  int tm_train = 5000, tm_test = 1000;
  EvoFlags tm_evo;
  TrainFlags tm_flags;
  timing->add_option("--targets", tm_targets, "Target counts")->capture_default_str();
  timing->add_option("--steps", tm_steps, "Time-step counts")->capture_default_str();
  timing->add_option("--model", tm_model, "Follower model")->capture_default_str();
  timing->add_option("--train-size", tm_train, "Training examples for NESG")->capture_default_str();
  timing->add_option("--test-size", tm_test, "Test examples for NESG")->capture_default_str();
  timing->add_option("--json", tm_json, "Also write the full report JSON");
  tm_evo.add(timing, false);
  tm_flags.add(timing);
  timing->add_option("--seed", seed, "Root seed")->capture_default_str();
  timing->add_option("--out", out, "Timing CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_games) {
      BenchmarkSpec spec{gg_steps, gg_targets, gg_per_pair, seed};
      spec.validate();
      fs::create_directories(out);
      nlohmann::json manifest{{"seed", seed}, {"rng", Rng::kStreamVersion}, {"games", nlohmann::json::array()}};
      for (int m : spec.steps_list) {
        for (int n : spec.targets_list) {
          for (int i = 0; i < spec.games_per_pair; ++i) {
            const auto gs = game_seed(seed, n, m, i);
            Rng rng(gs);
            const auto game = gen_benchmark_game(n, m, rng);
            const auto name = "game_n" + std::to_string(n) + "_m" + std::to_string(m) + "_" +
                              std::to_string(i + 1) + ".json";
            io::save_game(fs::path(out) / name, game);
            manifest["games"].push_back(
                {{"file", name}, {"targets", n}, {"steps", m}, {"units", game.num_units()}, {"seed", gs}});
          }
        }
      }
      io::write_text(fs::path(out) / "manifest.json", io::dump(manifest));
      std::cout << "wrote " << manifest["games"].size() << " games to " << out << '\n';
    } else if (*gen_data) {
      const auto game = io::load_game(gd_game);
      DatasetSpec spec{gd_count, gd_support, parse_model(gd_model), seed};
      io::save_dataset(out, {game.num_targets(), game.num_steps(), gen_training_set(game, spec)});
      std::cout << "wrote " << gd_count << " examples to " << out << '\n';
    } else if (*train) {
      auto data = io::load_dataset(tr_data);
      auto val = split_tail(data.examples, tr_val);
      Rng init(derive_seed(seed, "init"));
      auto cfg = tr_flags.apply({});
      cfg.seed = derive_seed(seed, "shuffle");
      auto result = train_senn(build_senn(data.num_targets, data.num_steps, init), data.examples,
                               val, cfg);
      io::save_network(out, result.network);
      std::cout << "epochs " << result.report.epochs_run << ", best epoch "
                << result.report.best_epoch << ", validation MAE "
                << fmt17(result.report.final_mae) << '\n';
      if (!tr_test.empty()) {
        const auto test = io::load_dataset(tr_test);
        if (test.num_targets != data.num_targets || test.num_steps != data.num_steps) {
          throw ValidationError("test set shape does not match the training set");
        }
        std::cout << "test MAE " << fmt17(evaluate_mae(result.network, test.examples)) << '\n';
      }
    } else if (*solve) {
      const auto game = io::load_game(sv_game);
      auto cfg = sv_evo.apply({});
      // A seed in the config file holds unless --seed is given.
      if (solve->count("--seed") > 0 || sv_evo.config_file.empty()) cfg.seed = seed;
      const auto kind = parse_solver(sv_solver);
      std::optional<Evaluator> evaluator;
      switch (kind) {
        case Solver::kEasg:
          evaluator = exact_evaluator(Rational{});
          break;
        case Solver::kEasgBr:
          evaluator = exact_evaluator(parse_model(sv_model));
          break;
        case Solver::kNesg:
          if (sv_net.empty()) throw ConfigError("--solver nesg requires --net");
          evaluator = senn_evaluator(std::make_shared<const SennNetwork>(io::load_network(sv_net)), game);
          break;
      }
      const auto result = evolve(game, *evaluator, cfg);
      io::save_strategy(out, result.best);
      if (!sv_history.empty()) {
        std::ostringstream os;
        write_history_csv(os, result.history);
        io::write_text(sv_history, os.str());
      }
      std::cout << "fitness (" << evaluator->name() << ") " << fmt17(result.best_value) << '\n';
    } else if (*score) {
      const auto game = io::load_game(sc_game);
      const auto strategy = io::load_strategy(sc_strategy, game);
      const auto model = parse_model(sc_model);
      const double value = exact_leader_value(game, strategy, model);
      std::cout << fmt17(value) << '\n';
      if (!out.empty()) {
        io::write_text(out, io::dump({{"model", format_model(model)}, {"leader_value", value}}));
      }
    } else if (*table1 || *table2) {
      const bool first = table1->parsed();
      const auto& f = first ? t1 : t2;
      auto cfg = f.paper ? HarnessConfig::paper_scale() : HarnessConfig::desk_scale();
      if (!f.paper) cfg.bench = BenchmarkSpec{f.steps, f.targets, f.per_pair, seed};
      cfg.bench.seed = seed;
      cfg.models.clear();
      for (const auto& m : f.models) cfg.models.push_back(parse_model(m));
      cfg.train_size = f.train_size;
      cfg.test_size = f.test_size;
      cfg.val_fraction = f.val;
      cfg.training = f.train.apply(cfg.training);
      if (!first) {
        cfg.solvers.clear();
        for (const auto& s : f.solvers) cfg.solvers.push_back(parse_solver(s));
        cfg.repeats = f.repeats;
        cfg.evolution = f.evo.apply(cfg.evolution);
      }
      const auto report = first ? run_senn_error(cfg) : run_payoff_comparison(cfg);
      const auto text = first ? render_table1(report) : render_table2(report);
      std::cout << text;
      if (!out.empty()) io::write_text(out, io::dump(to_json(report)));
      if (!f.table.empty()) io::write_text(f.table, text);
    } else if (*timing) {
      auto cfg = HarnessConfig::desk_scale();
      cfg.bench = BenchmarkSpec{tm_steps, tm_targets, 1, seed};
      cfg.train_size = tm_train;
      cfg.test_size = tm_test;
      cfg.evolution = tm_evo.apply(cfg.evolution);
      cfg.training = tm_flags.apply(cfg.training);
      const auto report = run_timing(cfg, parse_model(tm_model));
      std::ostringstream os;
      write_timing_csv(os, report);
      io::write_text(out, os.str());
      if (!tm_json.empty()) io::write_text(tm_json, io::dump(to_json(report)));
      std::cout << os.str();
    }
  } catch (const std::exception& e) {
    std::cerr << "ssg " << app.get_subcommands().front()->get_name() << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}

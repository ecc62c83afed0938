#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssg/behavior.hpp"
#include "ssg/evolution.hpp"
#include "ssg/game.hpp"
#include "ssg/senn.hpp"

// File formats. Target indices are 1-based in every file; doubles are written
// in shortest round-trip form, so save followed by load is lossless.
//
//   game      {"targets": n, "steps": m, "units": k,
//              "payoffs": [{"lr": .., "lp": .., "fr": .., "fp": ..}, ...]}
//   strategy  {"support": [{"prob": p, "alloc": [[t_11, .., t_1m], ..k rows]}]}
//   model     {"model": "qr", "lambda": 0.8}
//   network   {"n": .., "m": .., "layers": [..], "weights": [[..]..], "biases": [[..]..]}
//   dataset   CSV, header c_1_1,..,c_m_n,label (c_s_t = coverage of target t at step s)
namespace ssg::io {

using nlohmann::json;

json to_json(const Game& game);
Game game_from_json(const json& j);

json to_json(const MixedStrategy& strategy);
MixedStrategy strategy_from_json(const json& j);

json to_json(const BehaviorModel& model);
BehaviorModel model_from_json(const json& j);

json to_json(const SennNetwork& net);
SennNetwork network_from_json(const json& j);

json to_json(const EvolutionConfig& config);
// Missing keys keep their defaults.
EvolutionConfig evolution_config_from_json(const json& j);

struct Dataset {
  int num_targets = 0;
  int num_steps = 0;
  std::vector<TrainingExample> examples;
};

void write_dataset_csv(std::ostream& os, const Dataset& data);
Dataset read_dataset_csv(std::istream& is);

// Shortest round-trip decimal form of a double.
std::string format_double(double v);

// Parses JSON text; syntax errors become ParseError with line/column.
json parse_json(const std::string& text, const std::string& source);

std::string read_text(const std::filesystem::path& path);
// Truncates and writes; throws Error on failure.
void write_text(const std::filesystem::path& path, const std::string& text);

// File-level helpers. Loading a game with a nonstandard sign pattern prints a
// warning to stderr and succeeds.
Game load_game(const std::filesystem::path& path);
void save_game(const std::filesystem::path& path, const Game& game);
MixedStrategy load_strategy(const std::filesystem::path& path);
// Also checks the strategy fits `game`.
MixedStrategy load_strategy(const std::filesystem::path& path, const Game& game);
void save_strategy(const std::filesystem::path& path, const MixedStrategy& strategy);
Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const std::filesystem::path& path, const Dataset& data);
SennNetwork load_network(const std::filesystem::path& path);
void save_network(const std::filesystem::path& path, const SennNetwork& net);

std::string dump(const json& j);

}  // namespace ssg::io

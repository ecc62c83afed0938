#include "ssg/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ssg/error.hpp"

namespace ssg::io {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

const json& field(const json& j, const std::string& key, const std::string& ctx) {
  if (!j.is_object()) throw ParseError(ctx + ": expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(ctx + ": missing field '" + key + "'");
  return *it;
}

double number(const json& j, const std::string& key, const std::string& ctx) {
  const auto& v = field(j, key, ctx);
  if (!v.is_number()) throw ParseError(ctx + "." + key + ": expected a number");
  return v.get<double>();
}

int integer(const json& j, const std::string& key, const std::string& ctx) {
  const auto& v = field(j, key, ctx);
  if (!v.is_number_integer()) throw ParseError(ctx + "." + key + ": expected an integer");
  return v.get<int>();
}

const json& array(const json& j, const std::string& key, const std::string& ctx) {
  const auto& v = field(j, key, ctx);
  if (!v.is_array()) throw ParseError(ctx + "." + key + ": expected an array");
  return v;
}

std::vector<double> number_array(const json& j, const std::string& ctx) {
  if (!j.is_array()) throw ParseError(ctx + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      throw ParseError(ctx + "[" + std::to_string(i) + "]: expected a number");
    }
    out.push_back(j[i].get<double>());
  }
  return out;
}

template <class T, class F>
T load_with_context(const std::filesystem::path& path, F&& from_json) {
  const auto j = parse_json(read_text(path), path.string());
  try {
    return from_json(j);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source + ": " + e.what());
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

json to_json(const Game& game) {
  json payoffs = json::array();
  for (const auto& p : game.all_payoffs()) {
    payoffs.push_back({{"lr", p.leader_reward},
                       {"lp", p.leader_penalty},
                       {"fr", p.follower_reward},
                       {"fp", p.follower_penalty}});
  }
  return {{"targets", game.num_targets()},
          {"steps", game.num_steps()},
          {"units", game.num_units()},
          {"payoffs", payoffs}};
}

Game game_from_json(const json& j) {
  const int n = integer(j, "targets", "game");
  const int m = integer(j, "steps", "game");
  const int k = integer(j, "units", "game");
  const auto& arr = array(j, "payoffs", "game");
  if (static_cast<int>(arr.size()) != n) {
    throw ValidationError("game: 'payoffs' has " + std::to_string(arr.size()) +
                          " entries but targets = " + std::to_string(n));
  }
  std::vector<TargetPayoffs> payoffs;
  payoffs.reserve(arr.size());
  for (std::size_t t = 0; t < arr.size(); ++t) {
    const auto ctx = "game.payoffs[" + std::to_string(t) + "]";
    payoffs.push_back({number(arr[t], "lr", ctx), number(arr[t], "lp", ctx),
                       number(arr[t], "fr", ctx), number(arr[t], "fp", ctx)});
  }
  return Game(m, k, std::move(payoffs));
}

json to_json(const MixedStrategy& strategy) {
  json support = json::array();
  for (const auto& e : strategy.support()) {
    json alloc = json::array();
    for (int u = 0; u < e.pure.num_units(); ++u) {
      json row = json::array();
      for (int s = 0; s < e.pure.num_steps(); ++s) row.push_back(e.pure.target(u, s) + 1);
      alloc.push_back(row);
    }
    support.push_back({{"prob", e.prob}, {"alloc", alloc}});
  }
  return {{"support", support}};
}

MixedStrategy strategy_from_json(const json& j) {
  const auto& arr = array(j, "support", "strategy");
  std::vector<SupportEntry> entries;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto ctx = "strategy.support[" + std::to_string(i) + "]";
    const double prob = number(arr[i], "prob", ctx);
    const auto& rows = array(arr[i], "alloc", ctx);
    if (rows.empty() || !rows[0].is_array() || rows[0].empty()) {
      throw ParseError(ctx + ".alloc: expected a non-empty units x steps array");
    }
    const int k = static_cast<int>(rows.size());
    const int m = static_cast<int>(rows[0].size());
    std::vector<int> alloc;
    alloc.reserve(static_cast<std::size_t>(k * m));
    for (int u = 0; u < k; ++u) {
      const auto& row = rows[u];
      const auto rctx = ctx + ".alloc[" + std::to_string(u) + "]";
      if (!row.is_array() || static_cast<int>(row.size()) != m) {
        throw ParseError(rctx + ": expected " + std::to_string(m) + " step entries");
      }
      for (int s = 0; s < m; ++s) {
        if (!row[s].is_number_integer()) {
          throw ParseError(rctx + "[" + std::to_string(s) + "]: expected an integer target");
        }
        const int t = row[s].get<int>();
        if (t < 1) {
          throw ValidationError(rctx + "[" + std::to_string(s) +
                                "]: target indices are 1-based, got " + std::to_string(t));
        }
        alloc.push_back(t - 1);
      }
    }
    entries.push_back({PureStrategy(k, m, std::move(alloc)), prob});
  }
  return MixedStrategy(std::move(entries));
}

json to_json(const BehaviorModel& model) {
  return std::visit(
      Overloaded{
          [](const Rational&) { return json{{"model", "rational"}}; },
          [](const Anchoring& a) {
            json j{{"model", "at"}, {"delta", a.delta}};
            if (a.scope == AnchoringScope::kAttackProbability) j["scope"] = "attack";
            return j;
          },
          [](const Quantal& q) { return json{{"model", "qr"}, {"lambda", q.lambda}}; },
          [](const Prospect& p) {
            return json{{"model", "pt"},    {"gamma", p.gamma}, {"theta", p.theta},
                        {"alpha", p.alpha}, {"beta", p.beta}};
          },
      },
      model);
}

BehaviorModel model_from_json(const json& j) {
  const auto& name = field(j, "model", "model");
  if (!name.is_string()) throw ParseError("model.model: expected a string");
  const auto s = name.get<std::string>();
  BehaviorModel model;
  if (s == "rational") {
    model = Rational{};
  } else if (s == "at") {
    Anchoring a{number(j, "delta", "model")};
    if (auto it = j.find("scope"); it != j.end()) {
      if (*it == "attack") {
        a.scope = AnchoringScope::kAttackProbability;
      } else if (*it != "coverage") {
        throw ParseError("model.scope: expected \"coverage\" or \"attack\"");
      }
    }
    model = a;
  } else if (s == "qr") {
    model = Quantal{number(j, "lambda", "model")};
  } else if (s == "pt") {
    model = Prospect{number(j, "gamma", "model"), number(j, "theta", "model"),
                     number(j, "alpha", "model"), number(j, "beta", "model")};
  } else {
    throw ParseError("model.model: unknown model '" + s + "'");
  }
  validate(model);
  return model;
}

json to_json(const SennNetwork& net) {
  json weights = json::array();
  json biases = json::array();
  for (const auto& layer : net.layers()) {
    weights.push_back(layer.weights);
    biases.push_back(layer.biases);
  }
  return {{"n", net.num_targets()},
          {"m", net.num_steps()},
          {"layers", net.layer_sizes()},
          {"weights", weights},
          {"biases", biases}};
}

SennNetwork network_from_json(const json& j) {
  const int n = integer(j, "n", "network");
  const int m = integer(j, "m", "network");
  const auto& sizes = array(j, "layers", "network");
  const auto& weights = array(j, "weights", "network");
  const auto& biases = array(j, "biases", "network");
  constexpr auto L = SennNetwork::kNumLayers;
  if (sizes.size() != L + 1 || weights.size() != L || biases.size() != L) {
    throw ParseError("network: expected 4 layer sizes and 3 weight/bias blocks");
  }
  std::array<DenseLayer, L> layers;
  for (std::size_t l = 0; l < L; ++l) {
    if (!sizes[l].is_number_integer() || !sizes[l + 1].is_number_integer()) {
      throw ParseError("network.layers: expected integers");
    }
    layers[l].inputs = sizes[l].get<int>();
    layers[l].outputs = sizes[l + 1].get<int>();
    layers[l].weights = number_array(weights[l], "network.weights[" + std::to_string(l) + "]");
    layers[l].biases = number_array(biases[l], "network.biases[" + std::to_string(l) + "]");
  }
  return SennNetwork(n, m, std::move(layers));
}

json to_json(const EvolutionConfig& c) {
  return {{"population_size", c.population_size},
          {"generations", c.generations},
          {"mutation_rate", c.mutation_rate},
          {"crossover_rate", c.crossover_rate},
          {"selection_pressure", c.selection_pressure},
          {"elite_size", c.elite_size},
          {"max_support", c.max_support},
          {"seed", c.seed}};
}

EvolutionConfig evolution_config_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("evolution config: expected a JSON object");
  EvolutionConfig c;
  auto opt_int = [&](const char* key, int& dst) {
    if (j.contains(key)) dst = integer(j, key, "config");
  };
  auto opt_num = [&](const char* key, double& dst) {
    if (j.contains(key)) dst = number(j, key, "config");
  };
  opt_int("population_size", c.population_size);
  opt_int("generations", c.generations);
  opt_num("mutation_rate", c.mutation_rate);
  opt_num("crossover_rate", c.crossover_rate);
  opt_num("selection_pressure", c.selection_pressure);
  opt_int("elite_size", c.elite_size);
  opt_int("max_support", c.max_support);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ParseError("config.seed: expected an unsigned integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  c.validate();
  return c;
}

void write_dataset_csv(std::ostream& os, const Dataset& data) {
  for (int s = 1; s <= data.num_steps; ++s) {
    for (int t = 1; t <= data.num_targets; ++t) {
      os << "c_" << s << '_' << t << ',';
    }
  }
  os << "label\n";
  for (const auto& ex : data.examples) {
    for (double v : ex.input) os << format_double(v) << ',';
    os << format_double(ex.label) << '\n';
  }
}

Dataset read_dataset_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError("dataset line 1: missing header");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 2 || header.back() != "label") {
    throw ParseError("dataset line 1: header must be c_s_t columns followed by 'label'");
  }
  Dataset data;
  const auto cols = header.size() - 1;
  for (std::size_t c = 0; c < cols; ++c) {
    int s = 0;
    int t = 0;
    char tail = 0;
    if (std::sscanf(header[c].c_str(), "c_%d_%d%c", &s, &t, &tail) != 2 || s < 1 || t < 1) {
      throw ParseError("dataset line 1, column " + std::to_string(c + 1) + ": bad name '" +
                       header[c] + "' (expected c_<step>_<target>)");
    }
    data.num_steps = std::max(data.num_steps, s);
    data.num_targets = std::max(data.num_targets, t);
  }
  if (static_cast<std::size_t>(data.num_steps * data.num_targets) != cols) {
    throw ParseError("dataset line 1: expected m*n coverage columns");
  }
  for (std::size_t c = 0; c < cols; ++c) {
    const auto expect = "c_" + std::to_string(c / data.num_targets + 1) + "_" +
                        std::to_string(c % data.num_targets + 1);
    if (header[c] != expect) {
      throw ParseError("dataset line 1, column " + std::to_string(c + 1) + ": expected '" +
                       expect + "', got '" + header[c] + "'");
    }
  }
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    TrainingExample ex;
    ex.input.reserve(cols);
    std::size_t pos = 0;
    for (std::size_t c = 0; c <= cols; ++c) {
      const auto end = line.find(',', pos);
      const bool last = c == cols;
      if ((end == std::string::npos) != last) {
        throw ParseError("dataset line " + std::to_string(line_no) + ": expected " +
                         std::to_string(cols + 1) + " fields");
      }
      const auto cell = std::string_view(line).substr(pos, last ? std::string::npos : end - pos);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw ParseError("dataset line " + std::to_string(line_no) + ", column " +
                         std::to_string(c + 1) + " ('" + header[c] + "'): cannot parse '" +
                         std::string(cell) + "'");
      }
      if (last) {
        ex.label = v;
      } else {
        if (!(v >= -kTolerance && v <= 1.0 + kTolerance)) {
          throw ValidationError("dataset line " + std::to_string(line_no) + ", column '" +
                                header[c] + "': coverage must lie in [0, 1]");
        }
        ex.input.push_back(v);
      }
      pos = end + 1;
    }
    data.examples.push_back(std::move(ex));
  }
  return data;
}

Game load_game(const std::filesystem::path& path) {
  auto game = load_with_context<Game>(path, game_from_json);
  if (game.nonstandard_payoffs()) {
    std::cerr << "warning: " << path.string()
              << ": payoffs do not follow reward > 0 > penalty for every target\n";
  }
  return game;
}

void save_game(const std::filesystem::path& path, const Game& game) {
  write_text(path, dump(to_json(game)));
}

MixedStrategy load_strategy(const std::filesystem::path& path) {
  return load_with_context<MixedStrategy>(path, strategy_from_json);
}

MixedStrategy load_strategy(const std::filesystem::path& path, const Game& game) {
  auto s = load_strategy(path);
  try {
    s.validate_for(game);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return s;
}

void save_strategy(const std::filesystem::path& path, const MixedStrategy& strategy) {
  write_text(path, dump(to_json(strategy)));
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  try {
    return read_dataset_csv(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void save_dataset(const std::filesystem::path& path, const Dataset& data) {
  std::ostringstream os;
  write_dataset_csv(os, data);
  write_text(path, os.str());
}

SennNetwork load_network(const std::filesystem::path& path) {
  return load_with_context<SennNetwork>(path, network_from_json);
}

void save_network(const std::filesystem::path& path, const SennNetwork& net) {
  write_text(path, dump(to_json(net)));
}

}  // namespace ssg::io

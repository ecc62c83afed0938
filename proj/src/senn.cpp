#include "ssg/senn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ssg/error.hpp"

namespace ssg {

namespace {

using Activations = std::array<std::vector<double>, SennNetwork::kNumLayers + 1>;

void check_input(const SennNetwork& net, std::span<const double> input) {
  if (input.size() != static_cast<std::size_t>(net.input_size())) {
    throw ValidationError("network input has " + std::to_string(input.size()) +
                          " entries, expected m*n = " + std::to_string(net.input_size()));
  }
}

// Eight independent partial sums; a single accumulator makes the forward pass
// latency bound at large n.
double dot(const double* a, const double* b, int len) {
  std::array<double, 8> acc{};
  int i = 0;
  for (; i + 8 <= len; i += 8) {
    for (int r = 0; r < 8; ++r) acc[r] += a[i + r] * b[i + r];
  }
  for (; i < len; ++i) acc[0] += a[i] * b[i];
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
}

// Fills acts[0..3]; acts[0] is the input.
void forward_into(const SennNetwork& net, std::span<const double> input, Activations& acts) {
  acts[0].assign(input.begin(), input.end());
  for (int l = 0; l < SennNetwork::kNumLayers; ++l) {
    const auto& layer = net.layers()[l];
    const auto& in = acts[l];
    auto& out = acts[l + 1];
    out.resize(static_cast<std::size_t>(layer.outputs));
    for (int j = 0; j < layer.outputs; ++j) {
      const auto [begin, end] =
          l == 0 ? net.input_block(j) : std::pair<int, int>{0, layer.inputs};
      const double* w = layer.weights.data() + static_cast<std::size_t>(j) * layer.inputs;
      out[j] = std::tanh(layer.biases[j] + dot(w + begin, in.data() + begin, end - begin));
    }
  }
}

double glorot_limit(int fan_in, int fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

}  // namespace

SennNetwork::SennNetwork(int num_targets, int num_steps,
                         std::array<DenseLayer, kNumLayers> layers)
    : num_targets_(num_targets), num_steps_(num_steps), layers_(std::move(layers)) {
  if (num_targets_ < 1 || num_steps_ < 1) {
    throw ValidationError("network needs n >= 1 and m >= 1");
  }
  const auto sizes = layer_sizes();
  for (int l = 0; l < kNumLayers; ++l) {
    const auto& layer = layers_[l];
    if (layer.inputs != sizes[l] || layer.outputs != sizes[l + 1]) {
      throw ValidationError("layer " + std::to_string(l) + " must be " +
                            std::to_string(sizes[l]) + " -> " + std::to_string(sizes[l + 1]) +
                            " for n=" + std::to_string(num_targets_) +
                            ", m=" + std::to_string(num_steps_));
    }
    if (layer.weights.size() != static_cast<std::size_t>(layer.inputs * layer.outputs) ||
        layer.biases.size() != static_cast<std::size_t>(layer.outputs)) {
      throw ValidationError("layer " + std::to_string(l) + " parameter count mismatch");
    }
  }
  const auto& first = layers_[0];
  for (int j = 0; j < first.outputs; ++j) {
    for (int i = 0; i < first.inputs; ++i) {
      if (!connected(j, i) && first.weights[static_cast<std::size_t>(j * first.inputs + i)] != 0.0) {
        throw ValidationError("masked first-layer weight (" + std::to_string(j) + ", " +
                              std::to_string(i) + ") must be zero");
      }
    }
  }
}

std::array<int, SennNetwork::kNumLayers + 1> SennNetwork::layer_sizes() const {
  return {num_steps_ * num_targets_, num_steps_ * block_width(), block_width(), 1};
}

std::pair<int, int> SennNetwork::input_block(int row) const {
  const int s = row / block_width();
  return {s * num_targets_, (s + 1) * num_targets_};
}

bool SennNetwork::connected(int row, int col) const {
  const auto [begin, end] = input_block(row);
  return col >= begin && col < end;
}

std::vector<std::uint8_t> SennNetwork::block_mask() const {
  const auto& first = layers_[0];
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(first.inputs * first.outputs));
  for (int j = 0; j < first.outputs; ++j) {
    for (int i = 0; i < first.inputs; ++i) mask[j * first.inputs + i] = connected(j, i) ? 1 : 0;
  }
  return mask;
}

double SennNetwork::forward(std::span<const double> input) const {
  check_input(*this, input);
  thread_local Activations acts;
  forward_into(*this, input, acts);
  return acts.back()[0];
}

SennNetwork build_senn(int num_targets, int num_steps, Rng& rng) {
  if (num_targets < 1 || num_steps < 1) {
    throw ValidationError("network needs n >= 1 and m >= 1");
  }
  const int h = (num_targets + 3) / 4;
  const std::array<int, 4> sizes{num_steps * num_targets, num_steps * h, h, 1};
  std::array<DenseLayer, SennNetwork::kNumLayers> layers;
  for (int l = 0; l < SennNetwork::kNumLayers; ++l) {
    auto& layer = layers[l];
    layer.inputs = sizes[l];
    layer.outputs = sizes[l + 1];
    layer.weights.assign(static_cast<std::size_t>(layer.inputs * layer.outputs), 0.0);
    layer.biases.assign(static_cast<std::size_t>(layer.outputs), 0.0);
    // First-layer fan counts use the block connectivity: each hidden unit
    // sees n inputs, each input feeds h hidden units.
    const double limit = l == 0 ? glorot_limit(num_targets, h)
                                : glorot_limit(layer.inputs, layer.outputs);
    for (int j = 0; j < layer.outputs; ++j) {
      const int block = j / h;
      for (int i = 0; i < layer.inputs; ++i) {
        if (l == 0 && i / num_targets != block) continue;
        layer.weights[static_cast<std::size_t>(j * layer.inputs + i)] =
            rng.uniform(-limit, limit);
      }
    }
  }
  return SennNetwork(num_targets, num_steps, std::move(layers));
}

std::vector<double> encode_strategy(const Game& game, const MixedStrategy& strategy) {
  const auto cov = coverage_profile(game, strategy);
  return {cov.values().begin(), cov.values().end()};
}

ParameterSet ParameterSet::zeros_like(const SennNetwork& net) {
  ParameterSet p;
  for (int l = 0; l < SennNetwork::kNumLayers; ++l) {
    p.weights[l].assign(net.layers()[l].weights.size(), 0.0);
    p.biases[l].assign(net.layers()[l].biases.size(), 0.0);
  }
  return p;
}

bool ParameterSet::same_shape(const SennNetwork& net) const {
  for (int l = 0; l < SennNetwork::kNumLayers; ++l) {
    if (weights[l].size() != net.layers()[l].weights.size() ||
        biases[l].size() != net.layers()[l].biases.size()) {
      return false;
    }
  }
  return true;
}

LossAndGradient loss_and_gradient(const SennNetwork& net,
                                  std::span<const TrainingExample> batch) {
  if (batch.empty()) throw ValidationError("loss_and_gradient needs a non-empty batch");
  LossAndGradient result{0.0, ParameterSet::zeros_like(net)};
  auto& grad = result.gradients;
  const double scale = 1.0 / static_cast<double>(batch.size());
  Activations acts;
  std::array<std::vector<double>, SennNetwork::kNumLayers + 1> delta;
  for (const auto& ex : batch) {
    check_input(net, ex.input);
    forward_into(net, ex.input, acts);
    const double y = acts.back()[0];
    const double err = y - ex.label;
    result.loss += err * err * scale;
    // dL/dz at the output node.
    delta[SennNetwork::kNumLayers].assign(1, 2.0 * err * scale * (1.0 - y * y));
    for (int l = SennNetwork::kNumLayers - 1; l >= 0; --l) {
      const auto& layer = net.layers()[l];
      const auto& d_out = delta[l + 1];
      const auto& in = acts[l];
      auto& d_in = delta[l];
      d_in.assign(static_cast<std::size_t>(layer.inputs), 0.0);
      for (int j = 0; j < layer.outputs; ++j) {
        const auto [begin, end] =
            l == 0 ? net.input_block(j) : std::pair<int, int>{0, layer.inputs};
        const std::size_t row = static_cast<std::size_t>(j) * layer.inputs;
        grad.biases[l][j] += d_out[j];
        for (int i = begin; i < end; ++i) {
          grad.weights[l][row + i] += d_out[j] * in[i];
          d_in[i] += layer.weights[row + i] * d_out[j];
        }
      }
      if (l > 0) {
        for (int i = 0; i < layer.inputs; ++i) d_in[i] *= 1.0 - in[i] * in[i];
      }
    }
  }
  return result;
}

AdamState AdamState::for_network(const SennNetwork& net, AdamHyper hyper) {
  return {hyper, 0, ParameterSet::zeros_like(net), ParameterSet::zeros_like(net)};
}

void adam_step(SennNetwork& net, AdamState& state, const ParameterSet& gradients) {
  if (!gradients.same_shape(net) || !state.first_moment.same_shape(net) ||
      !state.second_moment.same_shape(net)) {
    throw ValidationError("adam_step: gradient/moment shapes do not match the network");
  }
  const auto& h = state.hyper;
  ++state.step;
  const double c1 = 1.0 - std::pow(h.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(h.beta2, static_cast<double>(state.step));
  auto update = [&](std::vector<double>& param, const std::vector<double>& g,
                    std::vector<double>& m, std::vector<double>& v, auto&& trainable) {
    for (std::size_t i = 0; i < param.size(); ++i) {
      if (!trainable(i)) continue;
      m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g[i];
      v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      param[i] -= h.learning_rate * m_hat / (std::sqrt(v_hat) + h.epsilon);
    }
  };
  auto& layers = net.mutable_layers();
  for (int l = 0; l < SennNetwork::kNumLayers; ++l) {
    const int cols = layers[l].inputs;
    if (l == 0) {
      update(layers[l].weights, gradients.weights[l], state.first_moment.weights[l],
             state.second_moment.weights[l], [&](std::size_t i) {
               return net.connected(static_cast<int>(i) / cols, static_cast<int>(i) % cols);
             });
    } else {
      update(layers[l].weights, gradients.weights[l], state.first_moment.weights[l],
             state.second_moment.weights[l], [](std::size_t) { return true; });
    }
    update(layers[l].biases, gradients.biases[l], state.first_moment.biases[l],
           state.second_moment.biases[l], [](std::size_t) { return true; });
  }
}

namespace {

double dataset_mse(const SennNetwork& net, std::span<const TrainingExample> data) {
  double sum = 0.0;
  for (const auto& ex : data) {
    const double e = net.forward(ex.input) - ex.label;
    sum += e * e;
  }
  return sum / static_cast<double>(data.size());
}

}  // namespace

TrainResult train_senn(SennNetwork net, std::span<const TrainingExample> train_set,
                       std::span<const TrainingExample> val_set, const TrainConfig& config) {
  if (train_set.empty()) throw ConfigError("training set is empty");
  if (val_set.empty()) throw ConfigError("validation set is empty");
  if (config.batch_size < 1 || config.max_epochs < 1 || config.patience < 1) {
    throw ConfigError("batch_size, max_epochs and patience must be positive");
  }
  Rng rng(config.seed);
  std::vector<TrainingExample> pool(train_set.begin(), train_set.end());
  auto state = AdamState::for_network(net, config.adam);
  TrainReport report;
  SennNetwork best = net;
  double best_val = std::numeric_limits<double>::infinity();
  int stale = 0;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    rng.shuffle(pool.begin(), pool.end());
    const std::span<const TrainingExample> all(pool);
    for (std::size_t start = 0; start < pool.size(); start += config.batch_size) {
      const auto len = std::min<std::size_t>(config.batch_size, pool.size() - start);
      const auto step = loss_and_gradient(net, all.subspan(start, len));
      adam_step(net, state, step.gradients);
    }
    const double train_mse = dataset_mse(net, train_set);
    const double val_mse = dataset_mse(net, val_set);
    report.train_loss.push_back(train_mse);
    report.val_loss.push_back(val_mse);
    report.epochs_run = epoch;
    if (val_mse < best_val - config.min_delta) {
      best_val = val_mse;
      best = net;
      stale = 0;
      report.best_epoch = epoch;
      report.improvements.push_back({epoch, train_mse, val_mse});
    } else if (++stale >= config.patience) {
      break;
    }
  }
  report.final_mae = evaluate_mae(best, val_set);
  return {std::move(best), std::move(report)};
}

double evaluate_mae(const SennNetwork& net, std::span<const TrainingExample> dataset) {
  if (dataset.empty()) throw ValidationError("evaluate_mae needs a non-empty dataset");
  double sum = 0.0;
  for (const auto& ex : dataset) sum += std::abs(net.forward(ex.input) - ex.label);
  return sum / static_cast<double>(dataset.size());
}

Evaluator senn_evaluator(std::shared_ptr<const SennNetwork> net, const Game& game) {
  if (!net) throw ValidationError("senn_evaluator needs a network");
  if (net->num_targets() != game.num_targets() || net->num_steps() != game.num_steps()) {
    throw ValidationError("network shape (n=" + std::to_string(net->num_targets()) +
                          ", m=" + std::to_string(net->num_steps()) +
                          ") does not match the game");
  }
  return Evaluator("senn", [net = std::move(net)](const Game& g, const MixedStrategy& s) {
    return net->forward(coverage_profile(g, s).values());
  });
}

}  // namespace ssg

#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "ssg/evaluator.hpp"
#include "ssg/game.hpp"
#include "ssg/rng.hpp"

namespace ssg {

// Fully connected layer, weights row-major (outputs x inputs).
struct DenseLayer {
  int inputs = 0;
  int outputs = 0;
  std::vector<double> weights;
  std::vector<double> biases;
};

// Strategy evaluation network: a four-layer perceptron
//
//   m*n inputs -> m*ceil(n/4) hidden -> ceil(n/4) hidden -> 1 output
//
// whose first layer is block structured: hidden units [s*h, (s+1)*h) only see
// the n coverage inputs of step s (h = ceil(n/4)). The block structure is a
// dense weight matrix with a frozen zero mask. tanh activation everywhere.
class SennNetwork {
 public:
  static constexpr int kNumLayers = 3;

  // Validating constructor used by build() and by the loader.
  SennNetwork(int num_targets, int num_steps, std::array<DenseLayer, kNumLayers> layers);

  int num_targets() const { return num_targets_; }
  int num_steps() const { return num_steps_; }
  int block_width() const { return (num_targets_ + 3) / 4; }
  int input_size() const { return num_targets_ * num_steps_; }

  // [m*n, m*ceil(n/4), ceil(n/4), 1]
  std::array<int, kNumLayers + 1> layer_sizes() const;

  const std::array<DenseLayer, kNumLayers>& layers() const { return layers_; }
  std::array<DenseLayer, kNumLayers>& mutable_layers() { return layers_; }

  // 1 where first-layer weight (row, col) is trainable, 0 where masked.
  bool connected(int row, int col) const;
  std::vector<std::uint8_t> block_mask() const;

  // Input span [begin, end) feeding first-layer hidden unit `row`.
  std::pair<int, int> input_block(int row) const;

  double forward(std::span<const double> input) const;

 private:
  int num_targets_;
  int num_steps_;
  std::array<DenseLayer, kNumLayers> layers_;
};

// Glorot-uniform initialization over the connected weights, zero biases.
SennNetwork build_senn(int num_targets, int num_steps, Rng& rng);

// Step-major coverage vector: position s*n + t holds c_s(t).
std::vector<double> encode_strategy(const Game& game, const MixedStrategy& strategy);

struct TrainingExample {
  std::vector<double> input;
  double label = 0.0;
};

// Parameter-shaped storage (gradients, Adam moments).
struct ParameterSet {
  std::array<std::vector<double>, SennNetwork::kNumLayers> weights;
  std::array<std::vector<double>, SennNetwork::kNumLayers> biases;

  static ParameterSet zeros_like(const SennNetwork& net);
  bool same_shape(const SennNetwork& net) const;
};

struct LossAndGradient {
  double loss = 0.0;  // mean squared error over the batch
  ParameterSet gradients;
};

// MSE and its exact gradient by backpropagation. Masked weights get 0.
LossAndGradient loss_and_gradient(const SennNetwork& net,
                                  std::span<const TrainingExample> batch);

struct AdamHyper {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamHyper hyper;
  std::int64_t step = 0;
  ParameterSet first_moment;
  ParameterSet second_moment;

  static AdamState for_network(const SennNetwork& net, AdamHyper hyper = {});
};

// One bias-corrected Adam update. Masked first-layer weights are never touched.
void adam_step(SennNetwork& net, AdamState& state, const ParameterSet& gradients);

struct TrainConfig {
  AdamHyper adam;
  int batch_size = 32;
  int max_epochs = 500;
  int patience = 20;          // epochs without validation improvement
  double min_delta = 1e-5;    // required validation-MSE improvement
  std::uint64_t seed = 0;     // minibatch shuffling
};

struct TrainSnapshot {
  int epoch = 0;
  double train_mse = 0.0;
  double val_mse = 0.0;
};

struct TrainReport {
  double final_mae = 0.0;  // validation MAE of the returned network
  int epochs_run = 0;
  int best_epoch = 0;
  std::vector<double> train_loss;  // per epoch, full training-set MSE
  std::vector<double> val_loss;    // per epoch
  std::vector<TrainSnapshot> improvements;  // epochs that became the new best
};

struct TrainResult {
  SennNetwork network;
  TrainReport report;
};

// Shuffled minibatch Adam with early stopping on validation MSE; returns the
// best-validation snapshot.
TrainResult train_senn(SennNetwork net, std::span<const TrainingExample> train_set,
                       std::span<const TrainingExample> val_set, const TrainConfig& config);

double evaluate_mae(const SennNetwork& net, std::span<const TrainingExample> dataset);

// NESG fitness: forward(encode_strategy(game, strategy)).
Evaluator senn_evaluator(std::shared_ptr<const SennNetwork> net, const Game& game);

}  // namespace ssg

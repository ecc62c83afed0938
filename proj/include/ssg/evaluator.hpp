#pragma once

#include <functional>
#include <string>
#include <utility>

#include "ssg/behavior.hpp"
#include "ssg/game.hpp"

namespace ssg {

// Fitness function for leader strategies: (game, strategy) -> leader value.
// Implementations must be deterministic and safe to call concurrently.
class Evaluator {
 public:
  using Fn = std::function<double(const Game&, const MixedStrategy&)>;

  Evaluator(std::string name, Fn fn) : name_(std::move(name)), fn_(std::move(fn)) {}

  double operator()(const Game& game, const MixedStrategy& strategy) const {
    return fn_(game, strategy);
  }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  Fn fn_;
};

// Exact evaluation under a known follower model. Rational gives plain EASG,
// any bounded-rationality model gives the EASG_BR oracle.
inline Evaluator exact_evaluator(BehaviorModel model) {
  validate(model);
  return Evaluator("exact:" + format_model(model),
                   [model](const Game& game, const MixedStrategy& strategy) {
                     return exact_leader_value(game, strategy, model);
                   });
}

}  // namespace ssg

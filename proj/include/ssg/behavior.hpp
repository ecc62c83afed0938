#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ssg/game.hpp"

namespace ssg {

// Which probability the anchoring bias flattens.
enum class AnchoringScope {
  // Per-step coverage c_s(t), flattened toward 1/n across targets.
  kStepCoverage,
  // Aggregate attack-success probability P_x, flattened toward 1/2 across the
  // two outcomes {caught, successful}. Sensitivity-run alternative.
  kAttackProbability,
};

struct Rational {};
struct Anchoring {
  double delta = 0.5;
  AnchoringScope scope = AnchoringScope::kStepCoverage;
};
struct Quantal {
  double lambda = 0.8;
};
struct Prospect {
  double gamma = 0.64;
  double theta = 2.25;
  double alpha = 0.88;
  double beta = 0.88;
};

using BehaviorModel = std::variant<Rational, Anchoring, Quantal, Prospect>;

// Throws ValidationError when a parameter is outside its admissible range.
void validate(const BehaviorModel& model);

// "rational", "at", "qr", "pt".
std::string model_name(const BehaviorModel& model);

// Parses the CLI form: `rational`, `at:0.5`, `qr:0.8`, `pt:0.64,2.25,0.88,0.88`.
// A bare name uses the default parameters.
BehaviorModel parse_model(std::string_view text);
std::string format_model(const BehaviorModel& model);

// Follower's reply: a single target for deterministic models, a probability
// vector over targets for quantal response.
struct FollowerResponse {
  int chosen_target = -1;
  std::vector<double> distribution;

  bool is_distribution() const { return chosen_target < 0; }
};

// Index maximizing `follower_values`, ties (within kTolerance) resolved toward
// higher `leader_values`, then the lowest index.
int argmax_leader_tiebreak(std::span<const double> follower_values,
                           std::span<const double> leader_values);

FollowerResponse rational_response(const Game& game, const CoverageProfile& coverage);

// c'_s(t) = c_s(t) (1 - delta) + delta / n.
CoverageProfile at_perceived_coverage(const CoverageProfile& coverage, double delta);

FollowerResponse at_response(const Game& game, const CoverageProfile& coverage,
                             const Anchoring& params);
inline FollowerResponse at_response(const Game& game, const CoverageProfile& coverage,
                                    double delta) {
  return at_response(game, coverage, Anchoring{delta});
}

// Logit choice over targets using the true expected follower payoffs.
FollowerResponse qr_distribution(const Game& game, const CoverageProfile& coverage,
                                 double lambda);

// Numerically stable softmax of lambda * utilities.
std::vector<double> logit_choice(std::span<const double> utilities, double lambda);

// Prospect-theory value of an outcome: C^alpha for gains, -theta (-C)^beta
// for losses.
double pt_value(double outcome, double alpha, double beta, double theta);

// Probability weighting p^g / (p^g + (1-p)^g)^(1/g).
double pt_weight(double p, double gamma);

FollowerResponse pt_response(const Game& game, const CoverageProfile& coverage,
                             const Prospect& params);

FollowerResponse follower_response(const Game& game, const CoverageProfile& coverage,
                                   const BehaviorModel& model);

// Leader's expected payoff when the follower answers `coverage` according to
// `model`. For quantal response this is the expectation over the choice
// distribution. Payoffs always use the true coverage.
double exact_leader_value(const Game& game, const CoverageProfile& coverage,
                          const BehaviorModel& model);
double exact_leader_value(const Game& game, const MixedStrategy& strategy,
                          const BehaviorModel& model);

}  // namespace ssg

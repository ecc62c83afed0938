#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <vector>

namespace ssg {

// Absolute tolerance used for probability sums and tie detection.
inline constexpr double kTolerance = 1e-9;

struct TargetPayoffs {
  double leader_reward = 0.0;    // leader catches the attacker
  double leader_penalty = 0.0;   // attack succeeds
  double follower_reward = 0.0;  // attack succeeds
  double follower_penalty = 0.0; // attacker is caught

  bool operator==(const TargetPayoffs&) const = default;
};

// An m-step security game over n targets with k leader units.
class Game {
 public:
  Game(int num_steps, int num_units, std::vector<TargetPayoffs> payoffs);

  int num_targets() const { return static_cast<int>(payoffs_.size()); }
  int num_steps() const { return num_steps_; }
  int num_units() const { return num_units_; }

  const TargetPayoffs& payoffs(int target) const;
  std::span<const TargetPayoffs> all_payoffs() const { return payoffs_; }

  // True when some target breaks the reward > 0 > penalty sign convention
  // used by generated benchmark games. Such games are still accepted.
  bool nonstandard_payoffs() const { return nonstandard_payoffs_; }

  bool operator==(const Game& o) const {
    return num_steps_ == o.num_steps_ && num_units_ == o.num_units_ &&
           payoffs_ == o.payoffs_;
  }

 private:
  int num_steps_;
  int num_units_;
  std::vector<TargetPayoffs> payoffs_;
  bool nonstandard_payoffs_ = false;
};

// Deterministic allocation of k units over m steps: target(u, s).
class PureStrategy {
 public:
  PureStrategy(int num_units, int num_steps, std::vector<int> allocation);

  int num_units() const { return num_units_; }
  int num_steps() const { return num_steps_; }
  int target(int unit, int step) const {
    return allocation_[static_cast<std::size_t>(unit * num_steps_ + step)];
  }
  // Unit-major: entry u * m + s.
  std::span<const int> allocation() const { return allocation_; }

  bool covers(int target, int step) const;

  // Throws ValidationError if dimensions or indices don't fit `game`.
  void validate_for(const Game& game) const;

  auto operator<=>(const PureStrategy&) const = default;

 private:
  int num_units_;
  int num_steps_;
  std::vector<int> allocation_;
};

struct SupportEntry {
  PureStrategy pure;
  double prob;
};

// Probability distribution over pure strategies. Canonical form: duplicate
// allocations merged (first occurrence keeps its position), probabilities in
// (0, 1], summing to 1.
class MixedStrategy {
 public:
  // Strict: probabilities must already sum to 1 within kTolerance.
  explicit MixedStrategy(std::vector<SupportEntry> support);

  // Scales non-negative weights to sum to 1, then merges duplicates.
  // Zero-weight entries are dropped.
  static MixedStrategy normalized(std::vector<SupportEntry> weighted);

  static MixedStrategy pure(PureStrategy s);

  std::span<const SupportEntry> support() const { return support_; }
  std::size_t size() const { return support_.size(); }
  int num_units() const { return support_.front().pure.num_units(); }
  int num_steps() const { return support_.front().pure.num_steps(); }

  void validate_for(const Game& game) const;

  bool operator==(const MixedStrategy& o) const;

 private:
  struct Trusted {};
  MixedStrategy(Trusted, std::vector<SupportEntry> support)
      : support_(std::move(support)) {}

  std::vector<SupportEntry> support_;
};

// Per-step, per-target protection probabilities c_s(t), step-major.
class CoverageProfile {
 public:
  CoverageProfile(int num_steps, int num_targets, std::vector<double> values);

  int num_steps() const { return num_steps_; }
  int num_targets() const { return num_targets_; }
  double at(int step, int target) const {
    return values_[static_cast<std::size_t>(step * num_targets_ + target)];
  }
  // Entry s * n + t holds c_s(t).
  std::span<const double> values() const { return values_; }
  std::span<const double> step(int s) const {
    return std::span<const double>(values_).subspan(
        static_cast<std::size_t>(s * num_targets_),
        static_cast<std::size_t>(num_targets_));
  }

 private:
  int num_steps_;
  int num_targets_;
  std::vector<double> values_;
};

CoverageProfile coverage_profile(const Game& game, const MixedStrategy& strategy);

// P_x: probability that an attack on `target` goes undetected in every step.
double attack_success_prob(const CoverageProfile& coverage, int target);

double leader_payoff(const Game& game, const CoverageProfile& coverage, int target);
double follower_payoff(const Game& game, const CoverageProfile& coverage, int target);

// Same formulas with P_x supplied directly.
inline double leader_payoff_at(const TargetPayoffs& p, double success_prob) {
  return success_prob * p.leader_penalty + (1.0 - success_prob) * p.leader_reward;
}
inline double follower_payoff_at(const TargetPayoffs& p, double success_prob) {
  return success_prob * p.follower_reward +
         (1.0 - success_prob) * p.follower_penalty;
}

}  // namespace ssg

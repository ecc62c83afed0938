#include "ssg/game.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "ssg/error.hpp"

namespace ssg {

namespace {

void check_target(int target, int n) {
  if (target < 0 || target >= n) {
    throw std::out_of_range("target index " + std::to_string(target) +
                            " outside [0, " + std::to_string(n) + ")");
  }
}

// Collapses duplicate allocations, summing their probabilities.
std::vector<SupportEntry> merge_duplicates(std::vector<SupportEntry> entries) {
  std::vector<SupportEntry> merged;
  merged.reserve(entries.size());
  for (auto& e : entries) {
    auto it = std::find_if(merged.begin(), merged.end(),
                           [&](const SupportEntry& m) { return m.pure == e.pure; });
    if (it != merged.end()) {
      it->prob += e.prob;
    } else {
      merged.push_back(std::move(e));
    }
  }
  return merged;
}

void check_uniform_shape(const std::vector<SupportEntry>& entries) {
  if (entries.empty()) {
    throw ValidationError("mixed strategy support must be non-empty");
  }
  const int k = entries.front().pure.num_units();
  const int m = entries.front().pure.num_steps();
  for (const auto& e : entries) {
    if (e.pure.num_units() != k || e.pure.num_steps() != m) {
      throw ValidationError(
          "mixed strategy support entries must share the same units x steps shape");
    }
  }
}

}  // namespace

Game::Game(int num_steps, int num_units, std::vector<TargetPayoffs> payoffs)
    : num_steps_(num_steps), num_units_(num_units), payoffs_(std::move(payoffs)) {
  if (payoffs_.empty()) throw ValidationError("game needs at least one target (n >= 1)");
  if (num_steps_ < 1) throw ValidationError("game needs at least one step (m >= 1)");
  if (num_units_ < 1) throw ValidationError("game needs at least one unit (k >= 1)");
  for (const auto& p : payoffs_) {
    for (double v : {p.leader_reward, p.leader_penalty, p.follower_reward,
                     p.follower_penalty}) {
      if (!std::isfinite(v)) throw ValidationError("game payoffs must be finite");
    }
    if (!(p.leader_reward > 0.0 && p.leader_penalty < 0.0 &&
          p.follower_reward > 0.0 && p.follower_penalty < 0.0)) {
      nonstandard_payoffs_ = true;
    }
  }
}

const TargetPayoffs& Game::payoffs(int target) const {
  check_target(target, num_targets());
  return payoffs_[static_cast<std::size_t>(target)];
}

PureStrategy::PureStrategy(int num_units, int num_steps, std::vector<int> allocation)
    : num_units_(num_units), num_steps_(num_steps), allocation_(std::move(allocation)) {
  if (num_units_ < 1 || num_steps_ < 1) {
    throw ValidationError("pure strategy needs k >= 1 units and m >= 1 steps");
  }
  if (allocation_.size() != static_cast<std::size_t>(num_units_ * num_steps_)) {
    throw ValidationError("pure strategy allocation must have k * m entries");
  }
  for (int t : allocation_) {
    if (t < 0) throw ValidationError("pure strategy target index must be >= 0");
  }
}

bool PureStrategy::covers(int target, int step) const {
  for (int u = 0; u < num_units_; ++u) {
    if (this->target(u, step) == target) return true;
  }
  return false;
}

void PureStrategy::validate_for(const Game& game) const {
  if (num_units_ != game.num_units() || num_steps_ != game.num_steps()) {
    throw ValidationError("pure strategy shape " + std::to_string(num_units_) + "x" +
                          std::to_string(num_steps_) + " does not match game " +
                          std::to_string(game.num_units()) + "x" +
                          std::to_string(game.num_steps()) + " (units x steps)");
  }
  for (int t : allocation_) {
    if (t >= game.num_targets()) {
      throw ValidationError("pure strategy target index " + std::to_string(t) +
                            " outside [0, " + std::to_string(game.num_targets()) + ")");
    }
  }
}

MixedStrategy::MixedStrategy(std::vector<SupportEntry> support) {
  check_uniform_shape(support);
  double sum = 0.0;
  for (const auto& e : support) {
    if (!(e.prob > 0.0 && e.prob <= 1.0 + kTolerance)) {
      throw ValidationError("mixed strategy probabilities must lie in (0, 1], got " +
                            std::to_string(e.prob));
    }
    sum += e.prob;
  }
  if (std::abs(sum - 1.0) > kTolerance) {
    throw ValidationError("mixed strategy probabilities must sum to 1 (sum invariant), got sum " +
                          std::to_string(sum));
  }
  support_ = merge_duplicates(std::move(support));
}

MixedStrategy MixedStrategy::normalized(std::vector<SupportEntry> weighted) {
  std::erase_if(weighted, [](const SupportEntry& e) { return e.prob == 0.0; });
  check_uniform_shape(weighted);
  double sum = 0.0;
  for (const auto& e : weighted) {
    if (!(e.prob > 0.0) || !std::isfinite(e.prob)) {
      throw ValidationError("mixed strategy weights must be finite and non-negative");
    }
    sum += e.prob;
  }
  for (auto& e : weighted) e.prob /= sum;
  return MixedStrategy(Trusted{}, merge_duplicates(std::move(weighted)));
}

MixedStrategy MixedStrategy::pure(PureStrategy s) {
  std::vector<SupportEntry> v;
  v.push_back({std::move(s), 1.0});
  return MixedStrategy(Trusted{}, std::move(v));
}

void MixedStrategy::validate_for(const Game& game) const {
  for (const auto& e : support_) e.pure.validate_for(game);
}

bool MixedStrategy::operator==(const MixedStrategy& o) const {
  if (support_.size() != o.support_.size()) return false;
  for (std::size_t i = 0; i < support_.size(); ++i) {
    if (support_[i].pure != o.support_[i].pure || support_[i].prob != o.support_[i].prob) {
      return false;
    }
  }
  return true;
}

CoverageProfile::CoverageProfile(int num_steps, int num_targets, std::vector<double> values)
    : num_steps_(num_steps), num_targets_(num_targets), values_(std::move(values)) {
  if (num_steps_ < 1 || num_targets_ < 1) {
    throw ValidationError("coverage profile needs m >= 1 and n >= 1");
  }
  if (values_.size() != static_cast<std::size_t>(num_steps_ * num_targets_)) {
    throw ValidationError("coverage profile must have m * n entries");
  }
  for (double& c : values_) {
    if (!(c >= -kTolerance && c <= 1.0 + kTolerance)) {
      throw ValidationError("coverage entries must lie in [0, 1], got " + std::to_string(c));
    }
    c = std::clamp(c, 0.0, 1.0);
  }
}

CoverageProfile coverage_profile(const Game& game, const MixedStrategy& strategy) {
  strategy.validate_for(game);
  const int n = game.num_targets();
  const int m = game.num_steps();
  const int k = game.num_units();
  std::vector<double> cov(static_cast<std::size_t>(n * m), 0.0);
  // Stamp per (step, target) so a pure strategy counts a target once per step
  // however many units sit on it.
  std::vector<int> stamp(cov.size(), -1);
  int id = 0;
  for (const auto& e : strategy.support()) {
    for (int u = 0; u < k; ++u) {
      for (int s = 0; s < m; ++s) {
        const auto idx = static_cast<std::size_t>(s * n + e.pure.target(u, s));
        if (stamp[idx] != id) {
          stamp[idx] = id;
          cov[idx] += e.prob;
        }
      }
    }
    ++id;
  }
  return CoverageProfile(m, n, std::move(cov));
}

double attack_success_prob(const CoverageProfile& coverage, int target) {
  check_target(target, coverage.num_targets());
  double p = 1.0;
  for (int s = 0; s < coverage.num_steps(); ++s) p *= 1.0 - coverage.at(s, target);
  return p;
}

namespace {
void check_shape(const Game& game, const CoverageProfile& coverage) {
  if (coverage.num_targets() != game.num_targets() ||
      coverage.num_steps() != game.num_steps()) {
    throw ValidationError("coverage profile shape does not match the game");
  }
}
}  // namespace

double leader_payoff(const Game& game, const CoverageProfile& coverage, int target) {
  check_shape(game, coverage);
  return leader_payoff_at(game.payoffs(target), attack_success_prob(coverage, target));
}

double follower_payoff(const Game& game, const CoverageProfile& coverage, int target) {
  check_shape(game, coverage);
  return follower_payoff_at(game.payoffs(target), attack_success_prob(coverage, target));
}

}  // namespace ssg

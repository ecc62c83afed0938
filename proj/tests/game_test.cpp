#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "oracles.hpp"
#include "ssg/error.hpp"
#include "ssg/game.hpp"

using namespace ssg;
using ssg::testing::pure_1step;

namespace {

// Seven hosts, one step, three units (hosts are 1-based in the narrative).
Game fig1_game() {
  std::vector<TargetPayoffs> p(7, {0.0, -0.1, 0.1, -0.5});
  p[0].leader_penalty = p[1].leader_penalty = -1.0;
  p[2].leader_penalty = p[3].leader_penalty = p[4].leader_penalty = -0.3;
  return Game(1, 3, p);
}

MixedStrategy fig1_strategy() {
  return MixedStrategy({{pure_1step(3, {0, 1, 5}), 0.4},
                        {pure_1step(3, {0, 1, 6}), 0.3},
                        {pure_1step(3, {2, 3, 4}), 0.3}});
}

}  // namespace

TEST_CASE("coverage of the seven-host example") {
  const auto cov = coverage_profile(fig1_game(), fig1_strategy());
  CHECK(cov.at(0, 0) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(cov.at(0, 4) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(cov.at(0, 5) == doctest::Approx(0.4).epsilon(1e-12));
  const double expected[] = {0.7, 0.7, 0.3, 0.3, 0.3, 0.4, 0.3};
  for (int t = 0; t < 7; ++t) CHECK(std::abs(cov.at(0, t) - expected[t]) < 1e-12);
}

TEST_CASE("leader payoff at host 5 of the example is -0.21") {
  const auto game = fig1_game();
  const auto cov = coverage_profile(game, fig1_strategy());
  CHECK(std::abs(attack_success_prob(cov, 4) - 0.7) < 1e-12);
  CHECK(std::abs(leader_payoff(game, cov, 4) - (-0.21)) < 1e-12);
  CHECK(game.nonstandard_payoffs());  // zero leader reward
}

TEST_CASE("degenerate mixed strategy covers its target in every step") {
  const Game game(3, 1, std::vector<TargetPayoffs>(4, {0.5, -0.5, 0.5, -0.5}));
  const auto cov =
      coverage_profile(game, MixedStrategy::pure(PureStrategy(1, 3, {0, 0, 0})));
  for (int s = 0; s < 3; ++s) {
    CHECK(cov.at(s, 0) == 1.0);
    for (int t = 1; t < 4; ++t) CHECK(cov.at(s, t) == 0.0);
  }
  CHECK(attack_success_prob(cov, 0) == 0.0);
  CHECK(attack_success_prob(cov, 1) == 1.0);
}

TEST_CASE("duplicate pure strategies merge") {
  const auto sigma = pure_1step(2, {1, 3});
  const MixedStrategy dup({{sigma, 0.5}, {sigma, 0.5}});
  REQUIRE(dup.size() == 1);
  CHECK(dup.support()[0].prob == 1.0);
  const Game game(1, 2, std::vector<TargetPayoffs>(4, {0.5, -0.5, 0.5, -0.5}));
  const auto a = coverage_profile(game, dup);
  const auto b = coverage_profile(game, MixedStrategy::pure(sigma));
  CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
}

TEST_CASE("mixed strategy invariants are enforced") {
  CHECK_THROWS_AS(MixedStrategy({}), ValidationError);
  CHECK_THROWS_AS(MixedStrategy({{pure_1step(1, {0}), 0.9}}), ValidationError);
  CHECK_THROWS_AS(MixedStrategy({{pure_1step(1, {0}), 0.5}, {pure_1step(2, {0, 1}), 0.5}}),
                  ValidationError);
  CHECK_THROWS_AS(PureStrategy(2, 1, {0}), ValidationError);
  CHECK_THROWS_AS(PureStrategy(1, 1, {-1}), ValidationError);
  const Game game(1, 1, std::vector<TargetPayoffs>(2, {0.5, -0.5, 0.5, -0.5}));
  CHECK_THROWS_AS(coverage_profile(game, MixedStrategy::pure(pure_1step(1, {2}))),
                  ValidationError);
  CHECK_THROWS_AS(coverage_profile(game, MixedStrategy::pure(pure_1step(2, {0, 1}))),
                  ValidationError);
}

TEST_CASE("game invariants") {
  CHECK_THROWS_AS(Game(1, 1, {}), ValidationError);
  CHECK_THROWS_AS(Game(0, 1, {{1, -1, 1, -1}}), ValidationError);
  CHECK_THROWS_AS(Game(1, 0, {{1, -1, 1, -1}}), ValidationError);
  CHECK_FALSE(Game(1, 1, {{1, -1, 1, -1}}).nonstandard_payoffs());
  CHECK(Game(1, 1, {{1, 1, 1, -1}}).nonstandard_payoffs());
  // More units than targets is allowed.
  CHECK_NOTHROW(Game(1, 5, {{1, -1, 1, -1}}));
}

TEST_CASE("attack success probability") {
  const CoverageProfile one(1, 1, {0.3});
  CHECK(attack_success_prob(one, 0) == doctest::Approx(0.7));
  const CoverageProfile two(2, 1, {0.5, 0.5});
  CHECK(attack_success_prob(two, 0) == 0.25);
  const CoverageProfile certain(3, 1, {0.2, 1.0, 0.4});
  CHECK(attack_success_prob(certain, 0) == 0.0);
  CHECK_THROWS_AS(attack_success_prob(one, 1), std::out_of_range);
  CHECK_THROWS_AS(attack_success_prob(one, -1), std::out_of_range);
}

TEST_CASE("payoff formulas at the extremes") {
  const Game game(1, 1, {{0.8, -0.6, 0.6, -0.4}});
  const CoverageProfile full(1, 1, {1.0});
  const CoverageProfile none(1, 1, {0.0});
  const CoverageProfile half(1, 1, {0.5});
  CHECK(leader_payoff(game, full, 0) == 0.8);
  CHECK(leader_payoff(game, none, 0) == -0.6);
  CHECK(follower_payoff(game, none, 0) == 0.6);
  CHECK(follower_payoff(game, full, 0) == -0.4);
  CHECK(follower_payoff(game, half, 0) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK_THROWS_AS(leader_payoff(game, half, 1), std::out_of_range);
  CHECK_THROWS_AS(leader_payoff(game, CoverageProfile(1, 2, {0, 0}), 0), ValidationError);
}

TEST_CASE("follower payoff 0.1 agrees with a sampled simulation") {
  // Two targets, one unit, 50/50 between them: P_0 = 0.5.
  const Game game(1, 1, {{0.5, -0.5, 0.6, -0.4}, {0.5, -0.5, 0.6, -0.4}});
  const MixedStrategy s({{pure_1step(1, {0}), 0.5}, {pure_1step(1, {1}), 0.5}});
  const auto cov = coverage_profile(game, s);
  const double analytic = follower_payoff(game, cov, 0);
  CHECK(std::abs(analytic - 0.1) < 1e-12);

  Rng rng(11);
  constexpr int kDraws = 1'000'000;
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    const bool caught = rng.uniform01() < 0.5;  // entry 0 covers target 0
    const double v = caught ? -0.4 : 0.6;
    sum += v;
    sq += v * v;
  }
  const double mean = sum / kDraws;
  const double se = std::sqrt((sq / kDraws - mean * mean) / kDraws);
  CHECK(std::abs(mean - analytic) < 3 * se);
}

TEST_CASE("property: payoffs match Monte Carlo over sampled pure strategies") {
  Rng rng(2024);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(1, 8));
    const int m = static_cast<int>(rng.uniform_int(1, 2));
    const int k = static_cast<int>(rng.uniform_int(1, 3));
    const auto game = testing::random_game(n, m, k, rng);
    const auto strategy = testing::random_mixed(game, 4, rng);
    const auto cov = coverage_profile(game, strategy);
    const int x = static_cast<int>(rng.uniform_index(n));
    const double ul = leader_payoff(game, cov, x);
    const double uf = follower_payoff(game, cov, x);

    constexpr int kDraws = 1'000'000;
    double sl = 0, sl2 = 0, sf = 0, sf2 = 0;
    const auto support = strategy.support();
    const auto& pay = game.payoffs(x);
    for (int i = 0; i < kDraws; ++i) {
      double r = rng.uniform01();
      std::size_t pick = 0;
      while (pick + 1 < support.size() && r >= support[pick].prob) {
        r -= support[pick].prob;
        ++pick;
      }
      bool caught = false;
      for (int s = 0; s < m; ++s) caught = caught || support[pick].pure.covers(x, s);
      const double vl = caught ? pay.leader_reward : pay.leader_penalty;
      const double vf = caught ? pay.follower_penalty : pay.follower_reward;
      sl += vl;
      sl2 += vl * vl;
      sf += vf;
      sf2 += vf * vf;
    }
    const double ml = sl / kDraws;
    const double mf = sf / kDraws;
    const double sel = std::sqrt(std::max(0.0, sl2 / kDraws - ml * ml) / kDraws);
    const double sef = std::sqrt(std::max(0.0, sf2 / kDraws - mf * mf) / kDraws);
    CHECK(std::abs(ml - ul) <= 3 * sel + 1e-9);
    CHECK(std::abs(mf - uf) <= 3 * sef + 1e-9);
  }
}

TEST_CASE("property: coverage is bilinear in mixtures") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto game = testing::random_game(static_cast<int>(rng.uniform_int(2, 10)),
                                           static_cast<int>(rng.uniform_int(1, 3)),
                                           static_cast<int>(rng.uniform_int(1, 4)), rng);
    const auto a = testing::random_mixed(game, 4, rng);
    const auto b = testing::random_mixed(game, 4, rng);
    const double w = rng.uniform01();
    std::vector<SupportEntry> mix;
    for (const auto& e : a.support()) mix.push_back({e.pure, w * e.prob});
    for (const auto& e : b.support()) mix.push_back({e.pure, (1 - w) * e.prob});
    const auto cm = coverage_profile(game, MixedStrategy::normalized(mix));
    const auto ca = coverage_profile(game, a);
    const auto cb = coverage_profile(game, b);
    for (std::size_t i = 0; i < cm.values().size(); ++i) {
      CHECK(std::abs(cm.values()[i] - (w * ca.values()[i] + (1 - w) * cb.values()[i])) < 1e-12);
    }
  }
}

TEST_CASE("property: coverage invariants, payoff bounds and monotonicity") {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(1, 12));
    const int m = static_cast<int>(rng.uniform_int(1, 4));
    const int k = static_cast<int>(rng.uniform_int(1, 5));
    const auto game = testing::random_game(n, m, k, rng);
    const auto cov = coverage_profile(game, testing::random_mixed(game, 6, rng));
    for (int s = 0; s < m; ++s) {
      double sum = 0;
      for (double c : cov.step(s)) {
        CHECK(c >= 0.0);
        CHECK(c <= 1.0);
        sum += c;
      }
      CHECK(sum <= k + 1e-9);
    }
    for (int t = 0; t < n; ++t) {
      const auto& p = game.payoffs(t);
      const double ul = leader_payoff(game, cov, t);
      const double uf = follower_payoff(game, cov, t);
      CHECK(ul >= p.leader_penalty - 1e-12);
      CHECK(ul <= p.leader_reward + 1e-12);
      CHECK(uf >= p.follower_penalty - 1e-12);
      CHECK(uf <= p.follower_reward + 1e-12);
      // Raise one step's coverage of t and the leader can only gain.
      std::vector<double> raised(cov.values().begin(), cov.values().end());
      const int s = static_cast<int>(rng.uniform_index(m));
      auto& c = raised[s * n + t];
      c = c + (1.0 - c) * rng.uniform01();
      CHECK(leader_payoff(game, CoverageProfile(m, n, raised), t) >= ul - 1e-15);
    }
  }
}

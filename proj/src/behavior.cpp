#include "ssg/behavior.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "ssg/error.hpp"

namespace ssg {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

std::vector<double> success_probs(const CoverageProfile& coverage) {
  const int n = coverage.num_targets();
  std::vector<double> p(static_cast<std::size_t>(n), 1.0);
  for (int s = 0; s < coverage.num_steps(); ++s) {
    const auto row = coverage.step(s);
    for (int t = 0; t < n; ++t) p[t] *= 1.0 - row[t];
  }
  return p;
}

void check_shape(const Game& game, const CoverageProfile& coverage) {
  if (coverage.num_targets() != game.num_targets() ||
      coverage.num_steps() != game.num_steps()) {
    throw ValidationError("coverage profile shape does not match the game");
  }
}

FollowerResponse choose_with_probs(const Game& game, std::span<const double> probs) {
  const auto pay = game.all_payoffs();
  std::vector<double> uf(pay.size());
  std::vector<double> ul(pay.size());
  for (std::size_t t = 0; t < pay.size(); ++t) {
    uf[t] = follower_payoff_at(pay[t], probs[t]);
    ul[t] = leader_payoff_at(pay[t], probs[t]);
  }
  return {argmax_leader_tiebreak(uf, ul), {}};
}

double parse_double(std::string_view s, std::string_view what) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("cannot parse " + std::string(what) + " parameter '" +
                      std::string(s) + "'");
  }
  return v;
}

std::vector<double> parse_list(std::string_view s, std::string_view what) {
  std::vector<double> out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(parse_double(s.substr(0, comma), what));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace

void validate(const BehaviorModel& model) {
  std::visit(Overloaded{
                 [](const Rational&) {},
                 [](const Anchoring& a) {
                   if (!(a.delta > 0.0 && a.delta < 1.0)) {
                     throw ValidationError("anchoring delta must lie in (0, 1)");
                   }
                 },
                 [](const Quantal& q) {
                   if (!(q.lambda >= 0.0) || !std::isfinite(q.lambda)) {
                     throw ValidationError("quantal lambda must be finite and >= 0");
                   }
                 },
                 [](const Prospect& p) {
                   if (!(p.gamma > 0.0 && p.gamma <= 1.0)) {
                     throw ValidationError("prospect gamma must lie in (0, 1]");
                   }
                   if (!(p.theta >= 1.0) || !std::isfinite(p.theta)) {
                     throw ValidationError("prospect theta must be >= 1");
                   }
                   if (!(p.alpha > 0.0 && p.alpha <= 1.0) ||
                       !(p.beta > 0.0 && p.beta <= 1.0)) {
                     throw ValidationError("prospect alpha and beta must lie in (0, 1]");
                   }
                 },
             },
             model);
}

std::string model_name(const BehaviorModel& model) {
  return std::visit(Overloaded{
                        [](const Rational&) { return std::string("rational"); },
                        [](const Anchoring&) { return std::string("at"); },
                        [](const Quantal&) { return std::string("qr"); },
                        [](const Prospect&) { return std::string("pt"); },
                    },
                    model);
}

BehaviorModel parse_model(std::string_view text) {
  const auto colon = text.find(':');
  const auto name = text.substr(0, colon);
  const bool has_args = colon != std::string_view::npos;
  const auto args = has_args ? text.substr(colon + 1) : std::string_view{};
  BehaviorModel model;
  if (name == "rational") {
    if (has_args) throw ConfigError("model 'rational' takes no parameters");
    model = Rational{};
  } else if (name == "at") {
    Anchoring a;
    if (has_args) a.delta = parse_double(args, "at");
    model = a;
  } else if (name == "qr") {
    Quantal q;
    if (has_args) q.lambda = parse_double(args, "qr");
    model = q;
  } else if (name == "pt") {
    Prospect p;
    if (has_args) {
      const auto v = parse_list(args, "pt");
      if (v.size() != 4) {
        throw ConfigError("model 'pt' expects gamma,theta,alpha,beta");
      }
      p = {v[0], v[1], v[2], v[3]};
    }
    model = p;
  } else {
    throw ConfigError("unknown behavior model '" + std::string(text) +
                      "' (expected rational | at:D | qr:L | pt:G,T,A,B)");
  }
  validate(model);
  return model;
}

std::string format_model(const BehaviorModel& model) {
  // Shortest round-trip form so "qr:0.8" prints back as written.
  auto num = [](double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
  };
  return std::visit(
      Overloaded{
          [](const Rational&) { return std::string("rational"); },
          [&](const Anchoring& a) { return "at:" + num(a.delta); },
          [&](const Quantal& q) { return "qr:" + num(q.lambda); },
          [&](const Prospect& p) {
            return "pt:" + num(p.gamma) + ',' + num(p.theta) + ',' + num(p.alpha) + ',' +
                   num(p.beta);
          },
      },
      model);
}

int argmax_leader_tiebreak(std::span<const double> follower_values,
                           std::span<const double> leader_values) {
  int best = 0;
  for (int t = 1; t < static_cast<int>(follower_values.size()); ++t) {
    const double df = follower_values[t] - follower_values[best];
    if (df > kTolerance ||
        (df >= -kTolerance && leader_values[t] > leader_values[best] + kTolerance)) {
      best = t;
    }
  }
  return best;
}

FollowerResponse rational_response(const Game& game, const CoverageProfile& coverage) {
  check_shape(game, coverage);
  return choose_with_probs(game, success_probs(coverage));
}

CoverageProfile at_perceived_coverage(const CoverageProfile& coverage, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ValidationError("anchoring delta must lie in (0, 1)");
  }
  const double floor = delta / coverage.num_targets();
  std::vector<double> v(coverage.values().begin(), coverage.values().end());
  for (double& c : v) c = c * (1.0 - delta) + floor;
  return CoverageProfile(coverage.num_steps(), coverage.num_targets(), std::move(v));
}

FollowerResponse at_response(const Game& game, const CoverageProfile& coverage,
                             const Anchoring& params) {
  check_shape(game, coverage);
  if (params.scope == AnchoringScope::kStepCoverage) {
    return rational_response(game, at_perceived_coverage(coverage, params.delta));
  }
  if (!(params.delta > 0.0 && params.delta < 1.0)) {
    throw ValidationError("anchoring delta must lie in (0, 1)");
  }
  auto p = success_probs(coverage);
  for (double& x : p) x = x * (1.0 - params.delta) + params.delta / 2.0;
  return choose_with_probs(game, p);
}

std::vector<double> logit_choice(std::span<const double> utilities, double lambda) {
  std::vector<double> q(utilities.size());
  double peak = -INFINITY;
  for (std::size_t i = 0; i < q.size(); ++i) {
    q[i] = lambda * utilities[i];
    peak = std::max(peak, q[i]);
  }
  double sum = 0.0;
  for (double& x : q) {
    x = std::exp(x - peak);
    sum += x;
  }
  for (double& x : q) x /= sum;
  return q;
}

FollowerResponse qr_distribution(const Game& game, const CoverageProfile& coverage,
                                 double lambda) {
  check_shape(game, coverage);
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ValidationError("quantal lambda must be finite and >= 0");
  }
  const auto p = success_probs(coverage);
  std::vector<double> u(p.size());
  for (int t = 0; t < game.num_targets(); ++t) u[t] = follower_payoff_at(game.payoffs(t), p[t]);
  return {-1, logit_choice(u, lambda)};
}

double pt_value(double outcome, double alpha, double beta, double theta) {
  if (outcome >= 0.0) return std::pow(outcome, alpha);
  return -theta * std::pow(-outcome, beta);
}

double pt_weight(double p, double gamma) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::domain_error("probability weight argument must lie in [0, 1]");
  }
  const double a = std::pow(p, gamma);
  const double b = std::pow(1.0 - p, gamma);
  return a / std::pow(a + b, 1.0 / gamma);
}

FollowerResponse pt_response(const Game& game, const CoverageProfile& coverage,
                             const Prospect& params) {
  check_shape(game, coverage);
  const auto p = success_probs(coverage);
  const auto pay = game.all_payoffs();
  std::vector<double> prospect(p.size());
  std::vector<double> ul(p.size());
  for (std::size_t t = 0; t < p.size(); ++t) {
    const double gain = pt_value(pay[t].follower_reward, params.alpha, params.beta, params.theta);
    const double loss = pt_value(pay[t].follower_penalty, params.alpha, params.beta, params.theta);
    prospect[t] = pt_weight(p[t], params.gamma) * gain +
                  pt_weight(1.0 - p[t], params.gamma) * loss;
    ul[t] = leader_payoff_at(pay[t], p[t]);
  }
  return {argmax_leader_tiebreak(prospect, ul), {}};
}

FollowerResponse follower_response(const Game& game, const CoverageProfile& coverage,
                                   const BehaviorModel& model) {
  validate(model);
  return std::visit(Overloaded{
                        [&](const Rational&) { return rational_response(game, coverage); },
                        [&](const Anchoring& a) { return at_response(game, coverage, a); },
                        [&](const Quantal& q) {
                          return qr_distribution(game, coverage, q.lambda);
                        },
                        [&](const Prospect& p) { return pt_response(game, coverage, p); },
                    },
                    model);
}

double exact_leader_value(const Game& game, const CoverageProfile& coverage,
                          const BehaviorModel& model) {
  const auto response = follower_response(game, coverage, model);
  if (!response.is_distribution()) {
    return leader_payoff(game, coverage, response.chosen_target);
  }
  const auto p = success_probs(coverage);
  double value = 0.0;
  for (int t = 0; t < game.num_targets(); ++t) {
    value += response.distribution[t] * leader_payoff_at(game.payoffs(t), p[t]);
  }
  return value;
}

double exact_leader_value(const Game& game, const MixedStrategy& strategy,
                          const BehaviorModel& model) {
  return exact_leader_value(game, coverage_profile(game, strategy), model);
}

}  // namespace ssg

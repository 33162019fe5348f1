#include "smm/goals.h"

#include <cmath>
#include <cstdlib>
#include <string>

#include "smm/error.h"

namespace smm {
namespace {

void CheckSpec(const GoalSpec& spec, std::span<const Cell> layout) {
  Require(spec.goal_density.size() == layout.size(),
          ErrorCode::kDimensionMismatch,
          "goal density does not match the layout");
  Require(spec.epsilon >= 0.0, ErrorCode::kInvalidArgument,
          "epsilon must be >= 0");
}

// Target mass in each goal's ball, and the gradient of the objective.
double ObjectiveAndGradient(const std::vector<double>& p, const GoalSpec& spec,
                            const std::vector<std::vector<std::size_t>>& balls,
                            std::vector<double>* grad) {
  const std::size_t S = p.size();
  if (grad) grad->assign(S, 0.0);
  double f = 0.0;
  for (std::size_t g = 0; g < S; ++g) {
    const double pg = spec.goal_density[g];
    if (pg == 0.0) continue;
    double mass = 0.0;
    for (std::size_t s : balls[g]) mass += p[s];
    Require(mass > 0.0, ErrorCode::kSupport,
            "target has no mass near goal state " + std::to_string(g));
    f += pg / mass;
    if (grad) {
      const double dg = -pg / (mass * mass);
      for (std::size_t s : balls[g]) (*grad)[s] += dg;
    }
  }
  return f;
}

}  // namespace

double GridDistance(const Cell& a, const Cell& b, GridMetric metric) {
  const int dx = std::abs(a.x - b.x);
  const int dy = std::abs(a.y - b.y);
  return metric == GridMetric::kLInf ? std::max(dx, dy) : dx + dy;
}

std::vector<std::vector<std::size_t>> EpsilonBalls(std::span<const Cell> layout,
                                                   double epsilon,
                                                   GridMetric metric) {
  std::vector<std::vector<std::size_t>> balls(layout.size());
  for (std::size_t s = 0; s < layout.size(); ++s) {
    for (std::size_t t = 0; t < layout.size(); ++t) {
      if (GridDistance(layout[s], layout[t], metric) <= epsilon) {
        balls[s].push_back(t);
      }
    }
  }
  return balls;
}

SmoothedDensity SmoothGoalDensity(const GoalSpec& spec,
                                  std::span<const Cell> layout) {
  CheckSpec(spec, layout);
  const auto balls = EpsilonBalls(layout, spec.epsilon, spec.metric);
  SmoothedDensity out{std::vector<double>(layout.size(), 0.0)};
  for (std::size_t s = 0; s < layout.size(); ++s) {
    for (std::size_t t : balls[s]) out.values[s] += spec.goal_density[t];
  }
  return out;
}

StateMarginal OptimalTarget(const GoalSpec& spec, std::span<const Cell> layout) {
  SmoothedDensity smoothed = SmoothGoalDensity(spec, layout);
  double total = 0.0;
  for (double& v : smoothed.values) {
    v = std::sqrt(v);
    total += v;
  }
  Require(total > 0.0, ErrorCode::kInvalidArgument,
          "smoothed goal density is identically zero");
  return StateMarginal::Normalize(std::move(smoothed.values));
}

double HittingObjective(const StateMarginal& target, const GoalSpec& spec,
                        std::span<const Cell> layout) {
  CheckSpec(spec, layout);
  Require(target.size() == layout.size(), ErrorCode::kDimensionMismatch,
          "target does not match the layout");
  const auto balls = EpsilonBalls(layout, spec.epsilon, spec.metric);
  return ObjectiveAndGradient(target.probs(), spec, balls, nullptr);
}

StateMarginal BruteForceOptimalTarget(const GoalSpec& spec,
                                      std::span<const Cell> layout,
                                      const MirrorDescentOptions& options) {
  CheckSpec(spec, layout);
  Require(layout.size() <= 50, ErrorCode::kInvalidArgument,
          "brute force is limited to 50 states");
  const std::size_t S = layout.size();
  const auto balls = EpsilonBalls(layout, spec.epsilon, spec.metric);
  std::vector<double> p(S, 1.0 / static_cast<double>(S));
  std::vector<double> grad;
  double stationarity = 0.0;
  for (std::size_t step = 0; step < options.max_steps; ++step) {
    ObjectiveAndGradient(p, spec, balls, &grad);
    double mean = 0.0, scale = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      mean += p[s] * grad[s];
      scale = std::max(scale, std::abs(grad[s]));
    }
    stationarity = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      stationarity += p[s] * std::abs(grad[s] - mean);
    }
    if (stationarity <= options.tolerance) {
      return StateMarginal::Normalize(std::move(p));
    }
    // Step normalized by the largest gradient entry keeps the exponent O(1).
    const double eta = options.learning_rate / scale;
    double total = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      p[s] *= std::exp(-eta * (grad[s] - mean));
      total += p[s];
    }
    for (double& x : p) x /= total;
  }
  throw ConvergenceError("mirror descent did not reach stationarity, gap " +
                             std::to_string(stationarity),
                         stationarity);
}

ReachProbability PerEpisodeReachProbability(const TabularMDP& mdp,
                                            const Policy& policy,
                                            const GoalSpec& spec,
                                            std::span<const Cell> layout,
                                            std::size_t goal_state) {
  CheckSpec(spec, layout);
  policy.CheckCompatible(mdp);
  Require(goal_state < layout.size() && layout.size() == mdp.num_states(),
          ErrorCode::kInvalidArgument, "goal state not in the layout");
  const std::size_t S = mdp.num_states();
  const std::size_t A = mdp.num_actions();
  std::vector<bool> in_ball(S, false);
  for (std::size_t s = 0; s < S; ++s) {
    in_ball[s] = GridDistance(layout[s], layout[goal_state], spec.metric) <=
                 spec.epsilon;
  }
  // Forward recursion on the chain where the ball is absorbing.
  std::vector<double> alive(mdp.initial().begin(), mdp.initial().end());
  double absorbed = 0.0;
  const auto T = static_cast<std::size_t>(mdp.horizon());
  for (std::size_t t = 0;; ++t) {
    for (std::size_t s = 0; s < S; ++s) {
      if (in_ball[s]) {
        absorbed += alive[s];
        alive[s] = 0.0;
      }
    }
    if (t + 1 == T) break;
    std::vector<double> next(S, 0.0);
    const auto table = policy.step(t);
    for (std::size_t s = 0; s < S; ++s) {
      if (alive[s] == 0.0) continue;
      for (std::size_t a = 0; a < A; ++a) {
        const double w = alive[s] * table[s * A + a];
        if (w == 0.0) continue;
        const auto row = mdp.row(s, a);
        for (std::size_t n = 0; n < S; ++n) next[n] += w * row[n];
      }
    }
    alive = std::move(next);
  }
  ReachProbability out;
  out.p_any = absorbed;
  const StateMarginal rho = FiniteHorizonMarginal(mdp, policy);
  for (std::size_t s = 0; s < S; ++s) {
    if (in_ball[s]) out.p_uniform_t += rho[s];
  }
  return out;
}

ReachProbability PerEpisodeReachProbability(
    const TabularMDP& mdp, const HistoricalAveragePolicy& policy,
    const GoalSpec& spec, std::span<const Cell> layout,
    std::size_t goal_state) {
  ReachProbability out;
  for (std::size_t i = 0; i < policy.iterates().size(); ++i) {
    const auto r = PerEpisodeReachProbability(mdp, policy.iterates()[i], spec,
                                              layout, goal_state);
    out.p_any += policy.weights()[i] * r.p_any;
    out.p_uniform_t += policy.weights()[i] * r.p_uniform_t;
  }
  return out;
}

HittingEstimate ExpectedHittingEpisodes(const TabularMDP& mdp,
                                        const HistoricalAveragePolicy& policy,
                                        const GoalSpec& spec,
                                        std::span<const Cell> layout,
                                        std::size_t goal_state, Rng& rng,
                                        std::size_t max_episodes) {
  const auto reach =
      PerEpisodeReachProbability(mdp, policy, spec, layout, goal_state);
  Require(reach.p_any > 0.0, ErrorCode::kSupport,
          "goal is never reached; hitting time is infinite");
  HittingEstimate out;
  out.analytic = 1.0 / reach.p_any;
  std::size_t since_last = 0;
  double gap_total = 0.0;
  for (std::size_t e = 0; e < max_episodes; ++e) {
    ++since_last;
    const Trajectory traj = policy.SampleEpisode(mdp, rng);
    bool hit = false;
    for (std::size_t s : traj.states) {
      if (GridDistance(layout[s], layout[goal_state], spec.metric) <=
          spec.epsilon) {
        hit = true;
        break;
      }
    }
    if (hit) {
      gap_total += static_cast<double>(since_last);
      since_last = 0;
      ++out.hits;
    }
  }
  Require(out.hits > 0, ErrorCode::kConvergence,
          "no episode reached the goal within the budget");
  out.monte_carlo = gap_total / static_cast<double>(out.hits);
  return out;
}

}  // namespace smm

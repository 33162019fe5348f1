#ifndef SMM_GOALS_H_
#define SMM_GOALS_H_

#include <cstddef>
#include <span>
#include <vector>

#include "smm/fictitious_play.h"
#include "smm/gridworld.h"

namespace smm {

enum class GridMetric { kLInf, kL1 };

struct GoalSpec {
  StateMarginal goal_density;
  double epsilon = 0.0;
  GridMetric metric = GridMetric::kLInf;
};

// Unnormalized goal mass within epsilon of each state.
struct SmoothedDensity {
  std::vector<double> values;
};

double GridDistance(const Cell& a, const Cell& b, GridMetric metric);

// ball[s] lists the states within epsilon of s (always including s).
std::vector<std::vector<std::size_t>> EpsilonBalls(std::span<const Cell> layout,
                                                   double epsilon,
                                                   GridMetric metric);

SmoothedDensity SmoothGoalDensity(const GoalSpec& spec,
                                  std::span<const Cell> layout);

// p*(s) proportional to sqrt(p_tilde(s)).
StateMarginal OptimalTarget(const GoalSpec& spec, std::span<const Cell> layout);

// sum_g p_g(g) / (target mass within epsilon of g).
double HittingObjective(const StateMarginal& target, const GoalSpec& spec,
                        std::span<const Cell> layout);

struct MirrorDescentOptions {
  std::size_t max_steps = 2'000'000;
  double learning_rate = 0.5;
  double tolerance = 1e-8;
};

// Exponentiated-gradient minimization of the hitting objective on the
// simplex; stops once sum_s p(s) |g(s) - <p, g>| <= tolerance. Throws
// ConvergenceError otherwise.
StateMarginal BruteForceOptimalTarget(const GoalSpec& spec,
                                      std::span<const Cell> layout,
                                      const MirrorDescentOptions& options = {});

struct ReachProbability {
  double p_any = 0.0;
  double p_uniform_t = 0.0;
};

// Exact probability that some state within epsilon of goal_state is visited
// during an episode, and the ball's mass under the finite-horizon marginal.
ReachProbability PerEpisodeReachProbability(const TabularMDP& mdp,
                                            const Policy& policy,
                                            const GoalSpec& spec,
                                            std::span<const Cell> layout,
                                            std::size_t goal_state);
// Episode-level mixture over iterates.
ReachProbability PerEpisodeReachProbability(
    const TabularMDP& mdp, const HistoricalAveragePolicy& policy,
    const GoalSpec& spec, std::span<const Cell> layout, std::size_t goal_state);

struct HittingEstimate {
  double analytic = 0.0;
  double monte_carlo = 0.0;
  std::size_t hits = 0;
};

// Analytic 1 / p_any and the mean gap between successive reaching episodes
// over max_episodes simulated episodes.
HittingEstimate ExpectedHittingEpisodes(const TabularMDP& mdp,
                                        const HistoricalAveragePolicy& policy,
                                        const GoalSpec& spec,
                                        std::span<const Cell> layout,
                                        std::size_t goal_state, Rng& rng,
                                        std::size_t max_episodes);

}  // namespace smm

#endif  // SMM_GOALS_H_

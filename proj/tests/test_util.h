#ifndef SMM_TESTS_TEST_UTIL_H_
#define SMM_TESTS_TEST_UTIL_H_

#include <cmath>
#include <cstddef>
#include <vector>

#include "smm/smm.h"

namespace smm::testing {

// Two states, two actions; action a moves to state a from anywhere.
inline TabularMDP TwoStateSymmetric(int horizon = 2) {
  return TabularMDP(2, 2, {1, 0, 0, 1, 1, 0, 0, 1}, {0.5, 0.5}, horizon);
}

// 1 x n corridor with deterministic moves and no TV cell.
inline Gridworld Corridor(int n, int horizon, double slip = 1.0) {
  GridworldSpec spec;
  for (int x = 0; x < n; ++x) spec.cells.push_back({x, 0});
  spec.slip_success_prob = slip;
  spec.horizon = horizon;
  spec.start_cell = Cell{0, 0};
  return BuildCrossGridworld(spec);
}

inline Gridworld DidacticCross(std::optional<double> xi = std::nullopt) {
  return BuildCrossGridworld(CrossSpec(5, 2, 0.1, xi, 30));
}

inline std::vector<double> RandomSimplex(std::size_t n, Rng& rng) {
  std::vector<double> w(n);
  double sum = 0.0;
  for (double& x : w) {
    x = -std::log(1.0 - rng.Uniform());
    sum += x;
  }
  for (double& x : w) x /= sum;
  return w;
}

// Empirical state frequencies over `episodes` sampled episodes.
inline StateMarginal MonteCarloMarginal(const TabularMDP& mdp,
                                        const Policy& policy,
                                        std::size_t episodes, uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> states;
  states.reserve(episodes * mdp.horizon());
  for (std::size_t e = 0; e < episodes; ++e) {
    const Trajectory t = SampleEpisode(mdp, policy, rng);
    states.insert(states.end(), t.states.begin(), t.states.end());
  }
  return EmpiricalMarginal(states, mdp.num_states());
}

}  // namespace smm::testing

#endif  // SMM_TESTS_TEST_UTIL_H_

#ifndef SMM_MDP_H_
#define SMM_MDP_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace smm {

// Dense row-major matrix; just enough for transition matrices.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data[r * cols + c];
  }
  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }
};

// Finite-horizon MDP with dense transition tensor P[s][a][s'].
class TabularMDP {
 public:
  TabularMDP(std::size_t num_states, std::size_t num_actions,
             std::vector<double> transition, std::vector<double> initial,
             int horizon);

  std::size_t num_states() const { return num_states_; }
  std::size_t num_actions() const { return num_actions_; }
  int horizon() const { return horizon_; }

  double P(std::size_t s, std::size_t a, std::size_t next) const {
    return transition_[(s * num_actions_ + a) * num_states_ + next];
  }
  std::span<const double> row(std::size_t s, std::size_t a) const {
    return {transition_.data() + (s * num_actions_ + a) * num_states_,
            num_states_};
  }
  std::span<const double> initial() const { return initial_; }
  const std::vector<double>& transition() const { return transition_; }

  TabularMDP WithHorizon(int horizon) const;
  TabularMDP WithInitial(std::vector<double> initial) const;

 private:
  std::size_t num_states_;
  std::size_t num_actions_;
  std::vector<double> transition_;
  std::vector<double> initial_;
  int horizon_;
};

// Per-timestep action distributions. One step means stationary.
class Policy {
 public:
  Policy(std::size_t num_states, std::size_t num_actions,
         std::vector<std::vector<double>> steps);

  static Policy Uniform(std::size_t num_states, std::size_t num_actions);
  static Policy Stationary(std::size_t num_states, std::size_t num_actions,
                           std::vector<double> table);
  // actions[t][s] is the action taken at step t in state s.
  static Policy Deterministic(std::size_t num_states, std::size_t num_actions,
                             const std::vector<std::vector<std::size_t>>& actions);

  std::size_t num_states() const { return num_states_; }
  std::size_t num_actions() const { return num_actions_; }
  std::size_t length() const { return steps_.size(); }
  bool is_stationary() const { return steps_.size() == 1; }

  // Table used at 0-based step t; stationary policies ignore t.
  std::span<const double> step(std::size_t t) const {
    const auto& table = steps_[is_stationary() ? 0 : t];
    return table;
  }
  double prob(std::size_t t, std::size_t s, std::size_t a) const {
    return step(t)[s * num_actions_ + a];
  }
  const std::vector<std::vector<double>>& steps() const { return steps_; }

  // Throws on dimension mismatch or a length that is neither 1 nor T.
  void CheckCompatible(const TabularMDP& mdp) const;

  // The first step's table as a stationary policy.
  Policy FirstStep() const;

 private:
  std::size_t num_states_;
  std::size_t num_actions_;
  std::vector<std::vector<double>> steps_;
};

// A uniformly random stochastic policy of the given length (rows drawn from a
// flat Dirichlet), used for random instances and seeded initializations.
Policy RandomPolicy(std::size_t num_states, std::size_t num_actions,
                    std::size_t length, uint64_t seed);

// A random MDP with Dirichlet transition rows and initial distribution.
TabularMDP RandomMDP(std::size_t num_states, std::size_t num_actions,
                     int horizon, uint64_t seed);

struct Trajectory {
  std::vector<std::size_t> states;
  std::vector<std::size_t> actions;
  uint64_t seed = 0;
};

class Rng;

Trajectory SampleEpisode(const TabularMDP& mdp, const Policy& policy,
                         uint64_t seed);
// Same, drawing from a caller-owned stream (seed field left 0).
Trajectory SampleEpisode(const TabularMDP& mdp, const Policy& policy, Rng& rng);

// M[s][s'] = sum_a pi(a|s) P[s][a][s'].
Matrix PolicyTransitionMatrix(const TabularMDP& mdp,
                              std::span<const double> policy_step);

}  // namespace smm

#endif  // SMM_MDP_H_

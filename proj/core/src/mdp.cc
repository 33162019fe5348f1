#include "smm/mdp.h"

#include <cmath>
#include <string>

#include "smm/error.h"
#include "smm/random.h"

namespace smm {
namespace {

constexpr double kRowTol = 1e-12;

void CheckDistribution(std::span<const double> p, const std::string& what) {
  double total = 0.0;
  for (double x : p) {
    Require(x >= 0.0 && std::isfinite(x), ErrorCode::kInvalidArgument,
            what + " has a negative or non-finite entry");
    total += x;
  }
  Require(std::abs(total - 1.0) <= kRowTol, ErrorCode::kInvalidArgument,
          what + " does not sum to 1");
}

std::vector<double> DirichletRow(std::size_t n, Rng& rng) {
  std::vector<double> row(n);
  double total = 0.0;
  for (auto& x : row) {
    double u = rng.Uniform();
    while (u <= 0.0) u = rng.Uniform();
    x = -std::log(u);
    total += x;
  }
  for (auto& x : row) x /= total;
  return row;
}

}  // namespace

TabularMDP::TabularMDP(std::size_t num_states, std::size_t num_actions,
                       std::vector<double> transition,
                       std::vector<double> initial, int horizon)
    : num_states_(num_states),
      num_actions_(num_actions),
      transition_(std::move(transition)),
      initial_(std::move(initial)),
      horizon_(horizon) {
  Require(num_states_ > 0 && num_actions_ > 0, ErrorCode::kInvalidArgument,
          "MDP needs at least one state and one action");
  Require(horizon_ >= 1, ErrorCode::kInvalidArgument, "horizon must be >= 1");
  Require(transition_.size() == num_states_ * num_actions_ * num_states_,
          ErrorCode::kDimensionMismatch, "transition tensor has wrong size");
  Require(initial_.size() == num_states_, ErrorCode::kDimensionMismatch,
          "initial distribution has wrong size");
  for (std::size_t s = 0; s < num_states_; ++s) {
    for (std::size_t a = 0; a < num_actions_; ++a) {
      CheckDistribution(row(s, a), "transition row (" + std::to_string(s) +
                                       "," + std::to_string(a) + ")");
    }
  }
  CheckDistribution(initial_, "initial distribution");
}

TabularMDP TabularMDP::WithHorizon(int horizon) const {
  return TabularMDP(num_states_, num_actions_, transition_, initial_, horizon);
}

TabularMDP TabularMDP::WithInitial(std::vector<double> initial) const {
  return TabularMDP(num_states_, num_actions_, transition_, std::move(initial),
                    horizon_);
}

Policy::Policy(std::size_t num_states, std::size_t num_actions,
               std::vector<std::vector<double>> steps)
    : num_states_(num_states),
      num_actions_(num_actions),
      steps_(std::move(steps)) {
  Require(!steps_.empty(), ErrorCode::kInvalidArgument,
          "policy needs at least one step");
  for (std::size_t t = 0; t < steps_.size(); ++t) {
    Require(steps_[t].size() == num_states_ * num_actions_,
            ErrorCode::kDimensionMismatch, "policy table has wrong size");
    for (std::size_t s = 0; s < num_states_; ++s) {
      CheckDistribution(
          std::span<const double>(steps_[t]).subspan(s * num_actions_,
                                                     num_actions_),
          "policy row (t=" + std::to_string(t) + ", s=" + std::to_string(s) +
              ")");
    }
  }
}

Policy Policy::Uniform(std::size_t num_states, std::size_t num_actions) {
  return Stationary(num_states, num_actions,
                    std::vector<double>(num_states * num_actions,
                                        1.0 / static_cast<double>(num_actions)));
}

Policy Policy::Stationary(std::size_t num_states, std::size_t num_actions,
                          std::vector<double> table) {
  std::vector<std::vector<double>> steps;
  steps.push_back(std::move(table));
  return Policy(num_states, num_actions, std::move(steps));
}

Policy Policy::Deterministic(
    std::size_t num_states, std::size_t num_actions,
    const std::vector<std::vector<std::size_t>>& actions) {
  std::vector<std::vector<double>> steps;
  for (const auto& per_state : actions) {
    Require(per_state.size() == num_states, ErrorCode::kDimensionMismatch,
            "deterministic policy step has wrong size");
    std::vector<double> table(num_states * num_actions, 0.0);
    for (std::size_t s = 0; s < num_states; ++s) {
      Require(per_state[s] < num_actions, ErrorCode::kInvalidArgument,
              "action index out of range");
      table[s * num_actions + per_state[s]] = 1.0;
    }
    steps.push_back(std::move(table));
  }
  return Policy(num_states, num_actions, std::move(steps));
}

void Policy::CheckCompatible(const TabularMDP& mdp) const {
  Require(num_states_ == mdp.num_states() && num_actions_ == mdp.num_actions(),
          ErrorCode::kDimensionMismatch,
          "policy dimensions do not match the MDP");
  Require(steps_.size() == 1 ||
              steps_.size() == static_cast<std::size_t>(mdp.horizon()),
          ErrorCode::kDimensionMismatch,
          "policy length must be 1 or the MDP horizon");
}

Policy Policy::FirstStep() const {
  return Stationary(num_states_, num_actions_, steps_[0]);
}

Policy RandomPolicy(std::size_t num_states, std::size_t num_actions,
                    std::size_t length, uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> steps(length);
  for (auto& table : steps) {
    table.reserve(num_states * num_actions);
    for (std::size_t s = 0; s < num_states; ++s) {
      auto row = DirichletRow(num_actions, rng);
      table.insert(table.end(), row.begin(), row.end());
    }
  }
  return Policy(num_states, num_actions, std::move(steps));
}

TabularMDP RandomMDP(std::size_t num_states, std::size_t num_actions,
                     int horizon, uint64_t seed) {
  Rng rng(seed);
  std::vector<double> transition;
  transition.reserve(num_states * num_actions * num_states);
  for (std::size_t i = 0; i < num_states * num_actions; ++i) {
    auto row = DirichletRow(num_states, rng);
    transition.insert(transition.end(), row.begin(), row.end());
  }
  return TabularMDP(num_states, num_actions, std::move(transition),
                    DirichletRow(num_states, rng), horizon);
}

Trajectory SampleEpisode(const TabularMDP& mdp, const Policy& policy,
                         uint64_t seed) {
  Rng rng(seed);
  Trajectory traj = SampleEpisode(mdp, policy, rng);
  traj.seed = seed;
  return traj;
}

Trajectory SampleEpisode(const TabularMDP& mdp, const Policy& policy,
                         Rng& rng) {
  policy.CheckCompatible(mdp);
  const auto T = static_cast<std::size_t>(mdp.horizon());
  const std::size_t A = mdp.num_actions();
  Trajectory traj;
  traj.states.reserve(T);
  traj.actions.reserve(T);
  std::size_t s = rng.Categorical(mdp.initial());
  for (std::size_t t = 0; t < T; ++t) {
    const std::size_t a =
        rng.Categorical(policy.step(t).subspan(s * A, A));
    traj.states.push_back(s);
    traj.actions.push_back(a);
    if (t + 1 < T) s = rng.Categorical(mdp.row(s, a));
  }
  return traj;
}

Matrix PolicyTransitionMatrix(const TabularMDP& mdp,
                              std::span<const double> policy_step) {
  const std::size_t S = mdp.num_states();
  const std::size_t A = mdp.num_actions();
  Require(policy_step.size() == S * A, ErrorCode::kDimensionMismatch,
          "policy table does not match the MDP");
  Matrix m(S, S);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      const double pa = policy_step[s * A + a];
      if (pa == 0.0) continue;
      const auto row = mdp.row(s, a);
      for (std::size_t n = 0; n < S; ++n) m(s, n) += pa * row[n];
    }
  }
  return m;
}

}  // namespace smm

#ifndef SMM_SOLVERS_H_
#define SMM_SOLVERS_H_

#include <cstddef>
#include <vector>

#include "smm/mdp.h"

namespace smm {

// Reward r[s] or r[s][a]; all entries finite.
class RewardTable {
 public:
  static RewardTable FromStates(std::vector<double> values);
  static RewardTable FromStateActions(std::size_t num_states,
                                      std::size_t num_actions,
                                      std::vector<double> values);
  static RewardTable Zero(std::size_t num_states);

  bool state_only() const { return num_actions_ == 0; }
  std::size_t num_states() const { return num_states_; }
  // 0 for state-only tables.
  std::size_t num_actions() const { return num_actions_; }
  double operator()(std::size_t s, std::size_t a) const {
    return state_only() ? values_[s] : values_[s * num_actions_ + a];
  }
  // State-only tables only.
  double operator[](std::size_t s) const { return values_[s]; }
  const std::vector<double>& values() const { return values_; }

  // this + coef * other; the result is state-action if either operand is.
  RewardTable Plus(const RewardTable& other, double coef,
                   std::size_t num_actions) const;

  void CheckCompatible(const TabularMDP& mdp) const;

 private:
  RewardTable(std::size_t s, std::size_t a, std::vector<double> v);
  std::size_t num_states_;
  std::size_t num_actions_;
  std::vector<double> values_;
};

struct SolveReport {
  Policy policy;
  double value_at_start = 0.0;
  std::size_t iterations = 0;
  double residual = 0.0;
  // values[t][s] for t = 0..T-1 (V at step t+1).
  std::vector<std::vector<double>> values;
};

// Backward induction for max E[sum_{t=1..T} r(s_t, a_t)]. Deterministic
// non-stationary policy; ties go to the lowest action index.
SolveReport FiniteHorizonValueIteration(const TabularMDP& mdp,
                                        const RewardTable& reward);

// Log-sum-exp backups for E[sum r] + temperature * sum_t H[a_t | s_t].
SolveReport SoftValueIteration(const TabularMDP& mdp, const RewardTable& reward,
                               double temperature);

double ExpectedReturn(const TabularMDP& mdp, const Policy& policy,
                      const RewardTable& reward);

// Largest one-step improvement available over the policy at any (t, s).
double BellmanOptimalityResidual(const TabularMDP& mdp, const Policy& policy,
                                 const RewardTable& reward);

}  // namespace smm

#endif  // SMM_SOLVERS_H_

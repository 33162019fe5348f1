#include "smm/solvers.h"

#include <algorithm>
#include <cmath>

#include "smm/error.h"
#include "smm/marginal.h"

namespace smm {
namespace {

// Relative slack under which two Q-values count as tied.
constexpr double kTieTol = 1e-12;

// Q(s,a) = r(s,a) + sum_s' P(s'|s,a) next[s'].
void Backup(const TabularMDP& mdp, const RewardTable& reward,
            const std::vector<double>& next, std::vector<double>& q) {
  const std::size_t S = mdp.num_states();
  const std::size_t A = mdp.num_actions();
  q.assign(S * A, 0.0);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      double v = 0.0;
      const auto row = mdp.row(s, a);
      for (std::size_t n = 0; n < S; ++n) v += row[n] * next[n];
      q[s * A + a] = reward(s, a) + v;
    }
  }
}

double StartValue(const TabularMDP& mdp, const std::vector<double>& v) {
  double total = 0.0;
  for (std::size_t s = 0; s < v.size(); ++s) total += mdp.initial()[s] * v[s];
  return total;
}

}  // namespace

RewardTable::RewardTable(std::size_t s, std::size_t a, std::vector<double> v)
    : num_states_(s), num_actions_(a), values_(std::move(v)) {
  for (double x : values_) {
    Require(std::isfinite(x), ErrorCode::kInvalidArgument,
            "reward table has a non-finite entry");
  }
}

RewardTable RewardTable::FromStates(std::vector<double> values) {
  const std::size_t s = values.size();
  return RewardTable(s, 0, std::move(values));
}

RewardTable RewardTable::FromStateActions(std::size_t num_states,
                                          std::size_t num_actions,
                                          std::vector<double> values) {
  Require(num_actions > 0 && values.size() == num_states * num_actions,
          ErrorCode::kDimensionMismatch, "reward table has wrong size");
  return RewardTable(num_states, num_actions, std::move(values));
}

RewardTable RewardTable::Zero(std::size_t num_states) {
  return FromStates(std::vector<double>(num_states, 0.0));
}

RewardTable RewardTable::Plus(const RewardTable& other, double coef,
                              std::size_t num_actions) const {
  Require(num_states_ == other.num_states_, ErrorCode::kDimensionMismatch,
          "reward tables differ in size");
  if (state_only() && other.state_only()) {
    std::vector<double> v(values_);
    for (std::size_t s = 0; s < v.size(); ++s) v[s] += coef * other.values_[s];
    return FromStates(std::move(v));
  }
  Require((state_only() || num_actions_ == num_actions) &&
              (other.state_only() || other.num_actions_ == num_actions),
          ErrorCode::kDimensionMismatch, "reward tables differ in actions");
  std::vector<double> v(num_states_ * num_actions);
  for (std::size_t s = 0; s < num_states_; ++s) {
    for (std::size_t a = 0; a < num_actions; ++a) {
      v[s * num_actions + a] = (*this)(s, a) + coef * other(s, a);
    }
  }
  return FromStateActions(num_states_, num_actions, std::move(v));
}

void RewardTable::CheckCompatible(const TabularMDP& mdp) const {
  Require(num_states_ == mdp.num_states() &&
              (state_only() || num_actions_ == mdp.num_actions()),
          ErrorCode::kDimensionMismatch, "reward table does not match the MDP");
}

SolveReport FiniteHorizonValueIteration(const TabularMDP& mdp,
                                        const RewardTable& reward) {
  reward.CheckCompatible(mdp);
  const auto T = static_cast<std::size_t>(mdp.horizon());
  const std::size_t S = mdp.num_states();
  const std::size_t A = mdp.num_actions();
  std::vector<std::vector<double>> tables(T, std::vector<double>(S * A, 0.0));
  std::vector<std::vector<double>> values(T);
  std::vector<double> next(S, 0.0), q;
  double residual = 0.0;
  for (std::size_t k = T; k-- > 0;) {
    Backup(mdp, reward, next, q);
    std::vector<double> v(S);
    for (std::size_t s = 0; s < S; ++s) {
      const double* qs = &q[s * A];
      std::size_t best = 0;
      double top = qs[0];
      for (std::size_t a = 1; a < A; ++a) top = std::max(top, qs[a]);
      const double slack = kTieTol * std::max(1.0, std::abs(top));
      while (qs[best] < top - slack) ++best;
      tables[k][s * A + best] = 1.0;
      v[s] = qs[best];
      residual = std::max(residual, top - qs[best]);
    }
    next = v;
    values[k] = std::move(v);
  }
  const double start = StartValue(mdp, values.front());
  return {Policy(S, A, std::move(tables)), start, T, residual,
          std::move(values)};
}

SolveReport SoftValueIteration(const TabularMDP& mdp, const RewardTable& reward,
                               double temperature) {
  Require(temperature > 0.0, ErrorCode::kInvalidArgument,
          "temperature must be positive");
  reward.CheckCompatible(mdp);
  const auto T = static_cast<std::size_t>(mdp.horizon());
  const std::size_t S = mdp.num_states();
  const std::size_t A = mdp.num_actions();
  std::vector<std::vector<double>> tables(T, std::vector<double>(S * A));
  std::vector<std::vector<double>> values(T);
  std::vector<double> next(S, 0.0), q;
  for (std::size_t k = T; k-- > 0;) {
    Backup(mdp, reward, next, q);
    std::vector<double> v(S);
    for (std::size_t s = 0; s < S; ++s) {
      const double* qs = &q[s * A];
      double top = qs[0];
      for (std::size_t a = 1; a < A; ++a) top = std::max(top, qs[a]);
      double z = 0.0;
      for (std::size_t a = 0; a < A; ++a) {
        z += std::exp((qs[a] - top) / temperature);
      }
      v[s] = top + temperature * std::log(z);
      for (std::size_t a = 0; a < A; ++a) {
        tables[k][s * A + a] = std::exp((qs[a] - top) / temperature) / z;
      }
    }
    next = v;
    values[k] = std::move(v);
  }
  const double start = StartValue(mdp, values.front());
  return {Policy(S, A, std::move(tables)), start, T, 0.0, std::move(values)};
}

double ExpectedReturn(const TabularMDP& mdp, const Policy& policy,
                      const RewardTable& reward) {
  reward.CheckCompatible(mdp);
  const auto d = StepOccupancies(mdp, policy);
  const std::size_t S = mdp.num_states();
  const std::size_t A = mdp.num_actions();
  double total = 0.0;
  for (std::size_t t = 0; t < d.size(); ++t) {
    const auto table = policy.step(t);
    for (std::size_t s = 0; s < S; ++s) {
      if (d[t][s] == 0.0) continue;
      double r = 0.0;
      if (reward.state_only()) {
        r = reward[s];
      } else {
        for (std::size_t a = 0; a < A; ++a) r += table[s * A + a] * reward(s, a);
      }
      total += d[t][s] * r;
    }
  }
  return total;
}

double BellmanOptimalityResidual(const TabularMDP& mdp, const Policy& policy,
                                 const RewardTable& reward) {
  policy.CheckCompatible(mdp);
  reward.CheckCompatible(mdp);
  const auto T = static_cast<std::size_t>(mdp.horizon());
  const std::size_t S = mdp.num_states();
  const std::size_t A = mdp.num_actions();
  std::vector<double> next(S, 0.0), q;
  double residual = 0.0;
  for (std::size_t k = T; k-- > 0;) {
    Backup(mdp, reward, next, q);
    const auto table = policy.step(k);
    std::vector<double> v(S, 0.0);
    for (std::size_t s = 0; s < S; ++s) {
      double top = q[s * A];
      for (std::size_t a = 0; a < A; ++a) {
        top = std::max(top, q[s * A + a]);
        v[s] += table[s * A + a] * q[s * A + a];
      }
      residual = std::max(residual, top - v[s]);
    }
    next = std::move(v);
  }
  return residual;
}

}  // namespace smm

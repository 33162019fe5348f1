#include "smm/marginal.h"

#include <cmath>
#include <string>

#include "smm/error.h"

namespace smm {
namespace {

constexpr double kMarginalTol = 1e-10;

}  // namespace

StateMarginal::StateMarginal(std::vector<double> probs)
    : probs_(std::move(probs)) {
  Require(!probs_.empty(), ErrorCode::kInvalidArgument, "marginal is empty");
  double total = 0.0;
  for (double p : probs_) {
    Require(p >= 0.0 && std::isfinite(p), ErrorCode::kInvalidArgument,
            "marginal has a negative or non-finite entry");
    total += p;
  }
  Require(std::abs(total - 1.0) <= kMarginalTol, ErrorCode::kInvalidArgument,
          "marginal does not sum to 1");
}

StateMarginal StateMarginal::Uniform(std::size_t num_states) {
  return StateMarginal(
      std::vector<double>(num_states, 1.0 / static_cast<double>(num_states)));
}

StateMarginal StateMarginal::PointMass(std::size_t num_states, std::size_t s) {
  Require(s < num_states, ErrorCode::kInvalidArgument, "state out of range");
  std::vector<double> p(num_states, 0.0);
  p[s] = 1.0;
  return StateMarginal(std::move(p));
}

StateMarginal StateMarginal::Normalize(std::vector<double> weights) {
  double total = 0.0;
  for (double w : weights) {
    Require(w >= 0.0 && std::isfinite(w), ErrorCode::kInvalidArgument,
            "weights must be nonnegative and finite");
    total += w;
  }
  Require(total > 0.0, ErrorCode::kInvalidArgument, "weights sum to zero");
  for (double& w : weights) w /= total;
  return StateMarginal(std::move(weights));
}

std::vector<std::vector<double>> StepOccupancies(const TabularMDP& mdp,
                                                 const Policy& policy) {
  policy.CheckCompatible(mdp);
  const auto T = static_cast<std::size_t>(mdp.horizon());
  const std::size_t S = mdp.num_states();
  const std::size_t A = mdp.num_actions();
  std::vector<std::vector<double>> d;
  d.reserve(T);
  d.emplace_back(mdp.initial().begin(), mdp.initial().end());
  for (std::size_t t = 0; t + 1 < T; ++t) {
    const auto table = policy.step(t);
    const auto& cur = d.back();
    std::vector<double> next(S, 0.0);
    for (std::size_t s = 0; s < S; ++s) {
      if (cur[s] == 0.0) continue;
      for (std::size_t a = 0; a < A; ++a) {
        const double w = cur[s] * table[s * A + a];
        if (w == 0.0) continue;
        const auto row = mdp.row(s, a);
        for (std::size_t n = 0; n < S; ++n) next[n] += w * row[n];
      }
    }
    d.push_back(std::move(next));
  }
  return d;
}

StateMarginal FiniteHorizonMarginal(const TabularMDP& mdp,
                                    const Policy& policy) {
  const auto d = StepOccupancies(mdp, policy);
  std::vector<double> rho(mdp.num_states(), 0.0);
  for (const auto& dt : d) {
    for (std::size_t s = 0; s < rho.size(); ++s) rho[s] += dt[s];
  }
  const double inv_t = 1.0 / static_cast<double>(d.size());
  for (double& x : rho) x *= inv_t;
  return StateMarginal(std::move(rho));
}

namespace {

// y = m M' for the damped chain.
void DampedStep(const Matrix& chain, std::span<const double> m, double damping,
                std::vector<double>& y) {
  const std::size_t S = chain.rows;
  double mass = 0.0;
  for (double x : m) mass += x;
  const double uniform = damping * mass / static_cast<double>(S);
  y.assign(S, uniform);
  const double keep = 1.0 - damping;
  for (std::size_t s = 0; s < S; ++s) {
    const double w = keep * m[s];
    if (w == 0.0) continue;
    const auto row = chain.row(s);
    for (std::size_t n = 0; n < S; ++n) y[n] += w * row[n];
  }
}

}  // namespace

double StationaryResidual(const Matrix& chain, std::span<const double> m,
                          double damping) {
  std::vector<double> y;
  DampedStep(chain, m, damping, y);
  double r = 0.0;
  for (std::size_t s = 0; s < y.size(); ++s) r += std::abs(y[s] - m[s]);
  return r;
}

StationaryResult StationaryDistribution(const Matrix& chain,
                                        const StationaryOptions& options) {
  Require(chain.rows == chain.cols && chain.rows > 0,
          ErrorCode::kDimensionMismatch, "chain must be square");
  Require(options.damping > 0.0 && options.damping <= 1.0,
          ErrorCode::kInvalidArgument, "damping must be in (0,1]");
  const std::size_t S = chain.rows;
  std::vector<double> m(S, 1.0 / static_cast<double>(S));
  std::vector<double> y;
  double residual = 0.0;
  for (std::size_t it = 0; it < options.max_iter; ++it) {
    DampedStep(chain, m, options.damping, y);
    residual = 0.0;
    for (std::size_t s = 0; s < S; ++s) residual += std::abs(y[s] - m[s]);
    if (residual <= options.tol) {
      return {StateMarginal::Normalize(m), residual, it};
    }
    double total = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      m[s] = 0.5 * (m[s] + y[s]);
      total += m[s];
    }
    for (double& x : m) x /= total;
  }
  throw ConvergenceError("power method did not converge, residual " +
                             std::to_string(residual),
                         residual);
}

StationaryResult StationaryDistribution(const TabularMDP& mdp,
                                        const Policy& policy,
                                        const StationaryOptions& options) {
  Require(policy.is_stationary(), ErrorCode::kInvalidArgument,
          "stationary distribution needs a stationary policy");
  Require(policy.num_states() == mdp.num_states() &&
              policy.num_actions() == mdp.num_actions(),
          ErrorCode::kDimensionMismatch, "policy does not match the MDP");
  return StationaryDistribution(PolicyTransitionMatrix(mdp, policy.step(0)),
                                options);
}

double Entropy(const StateMarginal& m) {
  double h = 0.0;
  for (double p : m.probs()) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

double KlDivergence(const StateMarginal& p, const StateMarginal& q) {
  Require(p.size() == q.size(), ErrorCode::kDimensionMismatch,
          "KL arguments differ in size");
  double kl = 0.0;
  for (std::size_t s = 0; s < p.size(); ++s) {
    if (p[s] == 0.0) continue;
    Require(q[s] > 0.0, ErrorCode::kSupport,
            "state " + std::to_string(s) +
                " has mass under p but none under q");
    kl += p[s] * std::log(p[s] / q[s]);
  }
  return kl < 0.0 ? 0.0 : kl;
}

double TotalVariation(const StateMarginal& p, const StateMarginal& q) {
  Require(p.size() == q.size(), ErrorCode::kDimensionMismatch,
          "TV arguments differ in size");
  double tv = 0.0;
  for (std::size_t s = 0; s < p.size(); ++s) tv += std::abs(p[s] - q[s]);
  return 0.5 * tv;
}

StateMarginal MixtureMarginal(const std::vector<StateMarginal>& components,
                              std::span<const double> prior) {
  Require(!components.empty(), ErrorCode::kInvalidArgument,
          "mixture needs at least one component");
  Require(components.size() == prior.size(), ErrorCode::kDimensionMismatch,
          "prior size differs from the number of components");
  double prior_total = 0.0;
  for (double w : prior) {
    Require(w >= 0.0, ErrorCode::kInvalidArgument, "negative prior weight");
    prior_total += w;
  }
  Require(std::abs(prior_total - 1.0) <= 1e-12, ErrorCode::kInvalidArgument,
          "prior does not sum to 1");
  const std::size_t S = components.front().size();
  std::vector<double> out(S, 0.0);
  for (std::size_t z = 0; z < components.size(); ++z) {
    Require(components[z].size() == S, ErrorCode::kDimensionMismatch,
            "mixture components differ in size");
    for (std::size_t s = 0; s < S; ++s) out[s] += prior[z] * components[z][s];
  }
  return StateMarginal(std::move(out));
}

StateMarginal EmpiricalMarginal(std::span<const std::size_t> states,
                                std::size_t num_states) {
  Require(!states.empty(), ErrorCode::kInvalidArgument,
          "empirical marginal of an empty multiset");
  std::vector<double> counts(num_states, 0.0);
  for (std::size_t s : states) {
    Require(s < num_states, ErrorCode::kInvalidArgument, "state out of range");
    counts[s] += 1.0;
  }
  const double n = static_cast<double>(states.size());
  for (double& c : counts) c /= n;
  return StateMarginal(std::move(counts));
}

}  // namespace smm

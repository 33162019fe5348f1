#include "smm/fictitious_play.h"

#include <cmath>
#include <limits>
#include <string>

#include "play_internal.h"
#include "smm/error.h"

namespace smm {
namespace internal {

StateMarginal IterateMarginal(const TabularMDP& mdp, const Policy& policy,
                              const PlayConfig& config) {
  if (config.marginal_kind == MarginalKind::kStationary) {
    return StationaryDistribution(mdp, policy, config.stationary).marginal;
  }
  return FiniteHorizonMarginal(mdp, policy);
}

Policy BestResponse(const TabularMDP& mdp, const RewardTable& reward,
                    const PlayConfig& config) {
  SolveReport report =
      config.soft_temperature
          ? SoftValueIteration(mdp, reward, *config.soft_temperature)
          : FiniteHorizonValueIteration(mdp, reward);
  if (config.marginal_kind == MarginalKind::kStationary) {
    return report.policy.FirstStep();
  }
  return std::move(report.policy);
}

void HaTracker::Add(const StateMarginal& m) {
  for (std::size_t s = 0; s < sum_.size(); ++s) sum_[s] += m[s];
  marginals_.push_back(m);
}

StateMarginal HaTracker::Mean() const {
  const double n = static_cast<double>(marginals_.size());
  std::vector<double> mean(sum_.size());
  for (std::size_t s = 0; s < mean.size(); ++s) mean[s] = sum_[s] / n;
  return StateMarginal(std::move(mean));
}

StateMarginal HaTracker::Evaluation(const PlayConfig& config) const {
  if (config.ha_weighting == HaWeighting::kUniform) return Mean();
  const auto w = ExponentialWeights(marginals_.size(), config.ha_decay);
  std::vector<double> out(sum_.size(), 0.0);
  for (std::size_t i = 0; i < marginals_.size(); ++i) {
    for (std::size_t s = 0; s < out.size(); ++s) {
      out[s] += w[i] * marginals_[i][s];
    }
  }
  return StateMarginal::Normalize(std::move(out));
}

void SideMasses(const StateMarginal& m, const std::vector<int>& sides,
                double* left, double* right) {
  *left = 0.0;
  *right = 0.0;
  if (sides.empty()) return;
  Require(sides.size() == m.size(), ErrorCode::kDimensionMismatch,
          "side labels do not match the state count");
  for (std::size_t s = 0; s < m.size(); ++s) {
    if (sides[s] < 0) *left += m[s];
    if (sides[s] > 0) *right += m[s];
  }
}

double ExpectedReward(const StateMarginal& m, const RewardTable& reward) {
  double total = 0.0;
  for (std::size_t s = 0; s < m.size(); ++s) {
    if (m[s] > 0.0) total += m[s] * reward[s];
  }
  return total;
}

std::vector<double> ExponentialWeights(std::size_t m, double decay) {
  Require(decay > 0.0 && decay <= 1.0, ErrorCode::kInvalidArgument,
          "HA decay must be in (0,1]");
  std::vector<double> w(m);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    w[i] = std::pow(decay, static_cast<double>(m - 1 - i));
    total += w[i];
  }
  for (double& x : w) x /= total;
  return w;
}

void AppendEpisodes(const TabularMDP& mdp, const Policy& policy,
                    std::size_t count, Rng& rng,
                    std::vector<std::size_t>& out) {
  for (std::size_t e = 0; e < count; ++e) {
    const Trajectory traj = SampleEpisode(mdp, policy, rng);
    out.insert(out.end(), traj.states.begin(), traj.states.end());
  }
}

}  // namespace internal

namespace {

using internal::HaTracker;

enum class Opponent { kHistorical, kGreedy };

FictitiousPlayState RunPlay(const TabularMDP& mdp, const StateMarginal& target,
                            const PlayConfig& config, Opponent opponent) {
  Require(config.iterations >= 1, ErrorCode::kInvalidArgument,
          "iterations must be >= 1");
  Require(target.size() == mdp.num_states(), ErrorCode::kDimensionMismatch,
          "target does not match the MDP");
  Require(config.mode == Mode::kExact || config.episodes_per_iter > 0,
          ErrorCode::kInvalidArgument, "sampled mode needs episodes");
  const std::size_t S = mdp.num_states();
  const double alpha = config.EffectiveAlpha();
  const bool greedy = opponent == Opponent::kGreedy;

  FictitiousPlayState state;
  state.marginal_kind = config.marginal_kind;
  Rng episode_rng(internal::EpisodeSeed(config.seed));
  const Policy init =
      InitialPolicy(mdp, config, internal::InitSeed(config.seed, 0));
  const StateMarginal init_marginal =
      internal::IterateMarginal(mdp, init, config);
  std::vector<std::size_t> last_batch;
  if (config.mode == Mode::kSampled) {
    internal::AppendEpisodes(mdp, init, config.episodes_per_iter, episode_rng,
                             last_batch);
    state.buffer = last_batch;
  }

  HaTracker history(S);
  std::optional<AveragedDensity> averaged;
  for (std::size_t m = 1; m <= config.iterations; ++m) {
    HistogramDensity q = [&] {
      if (config.mode == Mode::kSampled) {
        return FitFromBuffer(greedy ? last_batch : state.buffer, S, alpha);
      }
      if (m == 1) return FitFromMarginal(init_marginal, alpha, config.n_virtual);
      if (greedy) {
        return FitFromMarginal(state.iterate_marginals.back(), alpha,
                               config.n_virtual);
      }
      return FitFromMarginal(history.Mean(), alpha, config.n_virtual);
    }();
    if (averaged) {
      averaged->Add(q);
    } else {
      averaged.emplace(std::vector<HistogramDensity>{q});
    }
    const bool use_average = config.average_densities && !greedy;
    const RewardTable reward =
        use_average ? SmmReward(target, *averaged, config.log_floor)
                    : SmmReward(target, q, config.log_floor);
    state.densities.push_back(std::move(q));

    Policy policy = internal::BestResponse(mdp, reward, config);
    StateMarginal rho = internal::IterateMarginal(mdp, policy, config);
    if (config.mode == Mode::kSampled) {
      last_batch.clear();
      internal::AppendEpisodes(mdp, policy, config.episodes_per_iter,
                               episode_rng, last_batch);
      state.buffer.insert(state.buffer.end(), last_batch.begin(),
                          last_batch.end());
    }
    history.Add(rho);

    IterationMetrics metrics;
    metrics.iteration = m;
    const StateMarginal ha = history.Evaluation(config);
    metrics.entropy_ha = Entropy(ha);
    metrics.kl_to_target = SafeKl(ha, target);
    metrics.objective_value = internal::ExpectedReward(rho, reward);
    internal::SideMasses(rho, config.sides, &metrics.mass_left,
                         &metrics.mass_right);
    state.metrics.push_back(metrics);
    state.iterates.push_back(std::move(policy));
    state.iterate_marginals.push_back(std::move(rho));
  }
  return state;
}

}  // namespace

HistoricalAveragePolicy::HistoricalAveragePolicy(std::vector<Policy> iterates)
    : iterates_(std::move(iterates)) {
  Require(!iterates_.empty(), ErrorCode::kInvalidArgument,
          "historical average needs an iterate");
  for (const auto& p : iterates_) {
    Require(p.num_states() == iterates_[0].num_states() &&
                p.num_actions() == iterates_[0].num_actions(),
            ErrorCode::kDimensionMismatch, "iterates differ in dimensions");
  }
  weights_.assign(iterates_.size(),
                  1.0 / static_cast<double>(iterates_.size()));
}

HistoricalAveragePolicy::HistoricalAveragePolicy(std::vector<Policy> iterates,
                                                 std::vector<double> weights)
    : HistoricalAveragePolicy(std::move(iterates)) {
  weights_ = std::move(weights);
}

HistoricalAveragePolicy HistoricalAveragePolicy::Exponential(
    std::vector<Policy> iterates, double decay) {
  auto w = internal::ExponentialWeights(iterates.size(), decay);
  return HistoricalAveragePolicy(std::move(iterates), std::move(w));
}

std::size_t HistoricalAveragePolicy::SampleIterate(Rng& rng) const {
  return rng.Categorical(weights_);
}

Trajectory HistoricalAveragePolicy::SampleEpisode(const TabularMDP& mdp,
                                                  Rng& rng) const {
  return smm::SampleEpisode(mdp, iterates_[SampleIterate(rng)], rng);
}

StateMarginal HistoricalAveragePolicy::Marginal(const TabularMDP& mdp) const {
  std::vector<double> out(mdp.num_states(), 0.0);
  for (std::size_t i = 0; i < iterates_.size(); ++i) {
    const StateMarginal rho = FiniteHorizonMarginal(mdp, iterates_[i]);
    for (std::size_t s = 0; s < out.size(); ++s) out[s] += weights_[i] * rho[s];
  }
  return StateMarginal::Normalize(std::move(out));
}

RewardTable SmmReward(const StateMarginal& target,
                      std::span<const double> density, double log_floor) {
  Require(target.size() == density.size(), ErrorCode::kDimensionMismatch,
          "target and density differ in size");
  std::vector<double> r(target.size());
  for (std::size_t s = 0; s < r.size(); ++s) {
    if (target[s] > 0.0) {
      Require(density[s] > 0.0, ErrorCode::kSupport,
              "density is zero at state " + std::to_string(s) +
                  " where the target is positive");
      r[s] = std::log(target[s]) - std::log(density[s]);
    } else {
      r[s] = density[s] > 0.0 ? log_floor - std::log(density[s]) : log_floor;
    }
  }
  return RewardTable::FromStates(std::move(r));
}

RewardTable SmmReward(const StateMarginal& target, const HistogramDensity& q,
                      double log_floor) {
  return SmmReward(target, q.probs(), log_floor);
}

RewardTable SmmReward(const StateMarginal& target, const AveragedDensity& q,
                      double log_floor) {
  return SmmReward(target, q.probs(), log_floor);
}

FictitiousPlayState RunFictitiousPlay(const TabularMDP& mdp,
                                      const StateMarginal& target,
                                      const PlayConfig& config) {
  return RunPlay(mdp, target, config, Opponent::kHistorical);
}

FictitiousPlayState RunGreedyAlternation(const TabularMDP& mdp,
                                         const StateMarginal& target,
                                         const PlayConfig& config) {
  return RunPlay(mdp, target, config, Opponent::kGreedy);
}

StateMarginal HistoricalAverageMarginal(const FictitiousPlayState& state,
                                        const TabularMDP& mdp) {
  Require(!state.iterates.empty(), ErrorCode::kInvalidArgument,
          "state has no iterates");
  std::vector<double> sum(mdp.num_states(), 0.0);
  for (const auto& policy : state.iterates) {
    const StateMarginal rho = FiniteHorizonMarginal(mdp, policy);
    for (std::size_t s = 0; s < sum.size(); ++s) sum[s] += rho[s];
  }
  const double n = static_cast<double>(state.iterates.size());
  for (double& x : sum) x /= n;
  return StateMarginal(std::move(sum));
}

double MinmaxObjective(const StateMarginal& rho, const StateMarginal& target,
                       std::span<const double> q) {
  Require(rho.size() == target.size() && rho.size() == q.size(),
          ErrorCode::kDimensionMismatch, "minmax arguments differ in size");
  double total = 0.0;
  for (std::size_t s = 0; s < rho.size(); ++s) {
    if (rho[s] == 0.0) continue;
    Require(target[s] > 0.0, ErrorCode::kSupport,
            "target is zero at visited state " + std::to_string(s));
    Require(q[s] > 0.0, ErrorCode::kSupport,
            "density is zero at visited state " + std::to_string(s));
    total += rho[s] * (std::log(target[s]) - std::log(q[s]));
  }
  return total;
}

MinmaxCheck VerifyMinmaxEquivalence(const TabularMDP& mdp, const Policy& policy,
                                    const StateMarginal& target) {
  const StateMarginal rho = FiniteHorizonMarginal(mdp, policy);
  MinmaxCheck check;
  check.lhs = MinmaxObjective(rho, target, rho.probs());
  const HistogramDensity q = FitFromMarginal(rho, 0.0);
  check.rhs = MinmaxObjective(rho, target, q.probs());
  check.gap = std::abs(check.lhs - check.rhs);
  return check;
}

Policy InitialPolicy(const TabularMDP& mdp, const PlayConfig& config,
                     uint64_t init_seed) {
  if (config.init == InitPolicy::kUniform) {
    return Policy::Uniform(mdp.num_states(), mdp.num_actions());
  }
  const std::size_t length =
      config.marginal_kind == MarginalKind::kStationary
          ? 1
          : static_cast<std::size_t>(mdp.horizon());
  return RandomPolicy(mdp.num_states(), mdp.num_actions(), length, init_seed);
}

double SafeKl(const StateMarginal& p, const StateMarginal& q) {
  for (std::size_t s = 0; s < p.size(); ++s) {
    if (p[s] > 0.0 && q[s] == 0.0) {
      return std::numeric_limits<double>::infinity();
    }
  }
  return KlDivergence(p, q);
}

}  // namespace smm

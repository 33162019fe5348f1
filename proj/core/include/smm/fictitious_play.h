#ifndef SMM_FICTITIOUS_PLAY_H_
#define SMM_FICTITIOUS_PLAY_H_

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "smm/density.h"
#include "smm/marginal.h"
#include "smm/mdp.h"
#include "smm/random.h"
#include "smm/solvers.h"

namespace smm {

enum class Mode { kExact, kSampled };

// Which marginal an iterate is judged by. In stationary mode each iterate is
// the first-step table of the horizon-T solution and marginals come from the
// power method.
enum class MarginalKind { kFiniteHorizon, kStationary };

enum class HaWeighting { kUniform, kExponential };

enum class InitPolicy { kUniform, kRandom };

inline const double kDefaultLogFloor = std::log(1e-12);

struct PlayConfig {
  std::size_t iterations = 100;
  Mode mode = Mode::kExact;
  std::size_t episodes_per_iter = 10;
  // Defaults: 0 in exact mode, 1 in sampled mode.
  std::optional<double> alpha;
  std::optional<double> n_virtual;
  uint64_t seed = 0;
  // false: reward uses only the latest density.
  bool average_densities = true;
  HaWeighting ha_weighting = HaWeighting::kUniform;
  double ha_decay = 0.9;
  MarginalKind marginal_kind = MarginalKind::kFiniteHorizon;
  InitPolicy init = InitPolicy::kUniform;
  // MaxEnt-RL inner solver when set; hard value iteration otherwise.
  std::optional<double> soft_temperature;
  double log_floor = kDefaultLogFloor;
  // Per-state -1/0/+1 labels for the mass_left/mass_right metrics.
  std::vector<int> sides;
  StationaryOptions stationary;

  double EffectiveAlpha() const {
    return alpha.value_or(mode == Mode::kExact ? 0.0 : 1.0);
  }
};

struct IterationMetrics {
  std::size_t iteration = 0;
  double entropy_ha = 0.0;
  double kl_to_target = 0.0;
  // Expected pseudo-reward of the new iterate, sum_s rho_m(s) r_m(s).
  double objective_value = 0.0;
  double mass_left = 0.0;
  double mass_right = 0.0;
};

// Mixture over iterates, one iterate drawn per episode.
class HistoricalAveragePolicy {
 public:
  explicit HistoricalAveragePolicy(std::vector<Policy> iterates);
  // Weight of iterate i (1-based) proportional to decay^(m - i).
  static HistoricalAveragePolicy Exponential(std::vector<Policy> iterates,
                                             double decay);

  const std::vector<Policy>& iterates() const { return iterates_; }
  const std::vector<double>& weights() const { return weights_; }

  std::size_t SampleIterate(Rng& rng) const;
  Trajectory SampleEpisode(const TabularMDP& mdp, Rng& rng) const;
  // Weighted mean of the iterates' finite-horizon marginals.
  StateMarginal Marginal(const TabularMDP& mdp) const;

 private:
  HistoricalAveragePolicy(std::vector<Policy> iterates,
                          std::vector<double> weights);
  std::vector<Policy> iterates_;
  std::vector<double> weights_;
};

struct FictitiousPlayState {
  std::vector<Policy> iterates;
  std::vector<HistogramDensity> densities;
  std::vector<StateMarginal> iterate_marginals;
  std::vector<std::size_t> buffer;
  std::vector<IterationMetrics> metrics;
  MarginalKind marginal_kind = MarginalKind::kFiniteHorizon;
};

// log p*(s) - log q(s); log p* is replaced by log_floor where p*(s) = 0.
RewardTable SmmReward(const StateMarginal& target,
                      std::span<const double> density,
                      double log_floor = kDefaultLogFloor);
RewardTable SmmReward(const StateMarginal& target, const HistogramDensity& q,
                      double log_floor = kDefaultLogFloor);
RewardTable SmmReward(const StateMarginal& target, const AveragedDensity& q,
                      double log_floor = kDefaultLogFloor);

FictitiousPlayState RunFictitiousPlay(const TabularMDP& mdp,
                                      const StateMarginal& target,
                                      const PlayConfig& config);

// Density fit to the latest iterate only; policy answers the latest density.
FictitiousPlayState RunGreedyAlternation(const TabularMDP& mdp,
                                         const StateMarginal& target,
                                         const PlayConfig& config);

// Mean of the iterates' finite-horizon marginals.
StateMarginal HistoricalAverageMarginal(const FictitiousPlayState& state,
                                        const TabularMDP& mdp);

struct MinmaxCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
};

// E_rho[log p* - log rho] against min_q E_rho[log p* - log q], the latter
// evaluated at the tabular fit q = rho.
MinmaxCheck VerifyMinmaxEquivalence(const TabularMDP& mdp, const Policy& policy,
                                    const StateMarginal& target);

// E_rho[log p* - log q] for a candidate density q.
double MinmaxObjective(const StateMarginal& rho, const StateMarginal& target,
                       std::span<const double> q);

// Policy used before the first iterate; shared with the SM4 loop so that a
// single-component mixture starts from the same policy.
Policy InitialPolicy(const TabularMDP& mdp, const PlayConfig& config,
                     uint64_t init_seed);

// KL(p || q) or +inf on a support violation.
double SafeKl(const StateMarginal& p, const StateMarginal& q);

}  // namespace smm

#endif  // SMM_FICTITIOUS_PLAY_H_

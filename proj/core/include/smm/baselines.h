#ifndef SMM_BASELINES_H_
#define SMM_BASELINES_H_

#include <cstdint>
#include <string>
#include <vector>

#include "smm/fictitious_play.h"

namespace smm {

// Visit statistics. n(s, a) only counts steps that have a successor, so
// sum_{s'} n(s, a, s') = n(s, a) exactly.
class VisitCounts {
 public:
  VisitCounts(std::size_t num_states, std::size_t num_actions);

  void AddTrajectory(const Trajectory& traj);
  // Expected counts of `episodes` episodes under the policy.
  void AddExpectedEpisodes(const TabularMDP& mdp, const Policy& policy,
                           double episodes);
  // Expected counts of `episodes` length-T stretches started from the
  // stationary distribution mu of a stationary policy.
  void AddStationaryEpisodes(const TabularMDP& mdp, const Policy& policy,
                             const StateMarginal& mu, double episodes);

  std::size_t num_states() const { return num_states_; }
  std::size_t num_actions() const { return num_actions_; }
  double state(std::size_t s) const { return state_[s]; }
  double state_action(std::size_t s, std::size_t a) const {
    return state_action_[s * num_actions_ + a];
  }
  double transition(std::size_t s, std::size_t a, std::size_t n) const {
    return transition_[(s * num_actions_ + a) * num_states_ + n];
  }
  double total() const { return total_; }

  static VisitCounts FromStateCounts(std::vector<double> counts,
                                     std::size_t num_actions);

 private:
  void AddTransition(std::size_t s, std::size_t a, std::size_t n, double w);

  std::size_t num_states_;
  std::size_t num_actions_;
  std::vector<double> state_;
  std::vector<double> state_action_;
  std::vector<double> transition_;
  double total_ = 0.0;
};

// Fixed Gaussian embedding e[s] in R^k.
class RandomEmbedding {
 public:
  RandomEmbedding(std::size_t num_states, std::size_t dim, uint64_t seed);

  std::size_t num_states() const { return num_states_; }
  std::size_t dim() const { return dim_; }
  uint64_t seed() const { return seed_; }
  std::span<const double> operator[](std::size_t s) const {
    return {table_.data() + s * dim_, dim_};
  }

 private:
  std::size_t num_states_;
  std::size_t dim_;
  uint64_t seed_;
  std::vector<double> table_;
};

// Transition model table T[s][a][s'].
struct TransitionModel {
  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  std::vector<double> probs;

  std::span<const double> row(std::size_t s, std::size_t a) const {
    return {probs.data() + (s * num_actions + a) * num_states, num_states};
  }
};

TransitionModel ExactTransitionModel(const TabularMDP& mdp);
// (n(s,a,s') + beta / |S|) / (n(s,a) + beta).
TransitionModel FitTransitionModel(const VisitCounts& counts, double beta);

// -log((n(s) + alpha) / (N + alpha |S|)).
RewardTable CountBonus(const VisitCounts& counts, double alpha);
// 1 / (n(s) + alpha).
RewardTable PseudocountBonus(const VisitCounts& counts, double alpha);
// Variance of the next-state coordinates under the model, per (s, a).
// coords holds `dims` numbers per state.
RewardTable ForwardModelBonus(const TransitionModel& model,
                              std::span<const double> coords,
                              std::size_t dims = 2);
// E_{s' ~ P(.|s,a)}[-log p_hat(a | s, s')] with
// p_hat(a | s, s') proportional to n(s,a,s') + beta P(s'|s,a) / |A|.
// With empty counts this is the uniform-data-policy posterior.
RewardTable InverseModelBonus(const TabularMDP& mdp, const VisitCounts& counts,
                              double beta);
// ||predictor[s] - e[s]||^2 with predictor[s] = e[s] on visited states and 0
// elsewhere.
RewardTable RndBonus(const RandomEmbedding& embedding,
                     const VisitCounts& counts);

enum class BonusKind { kCount, kPseudocount, kForward, kInverse, kRnd };

const char* BonusKindName(BonusKind kind);
BonusKind ParseBonusKind(const std::string& name);
inline constexpr BonusKind kAllBonusKinds[] = {
    BonusKind::kCount, BonusKind::kPseudocount, BonusKind::kForward,
    BonusKind::kInverse, BonusKind::kRnd};

struct IntrinsicConfig {
  // iterations, mode, episodes_per_iter, seed, marginal_kind, ha weighting,
  // sides and init are read from here.
  PlayConfig play;
  bool use_historical_average = false;
  double bonus_coef = 1.0;
  double count_alpha = 1.0;
  double model_beta = 1.0;
  std::size_t embed_dim = 8;
  // Two coordinates per state; required for the forward-model bonus.
  std::vector<double> coords;
  // For the KL metric; uniform when unset.
  std::optional<StateMarginal> target;
};

// Alternates bonus computation and RL to convergence. The metrics'
// entropy_ha holds the entropy of the evaluation marginal: the historical
// average when use_historical_average is set, else the latest iterate.
FictitiousPlayState RunIntrinsicLoop(const TabularMDP& mdp, BonusKind kind,
                                     const RewardTable& extrinsic,
                                     const IntrinsicConfig& config);

// Evaluation marginal of a finished intrinsic run, judged by the run's
// marginal kind.
StateMarginal HistoricalAverageEvaluation(const FictitiousPlayState& state,
                                          const PlayConfig& play);

}  // namespace smm

#endif  // SMM_BASELINES_H_

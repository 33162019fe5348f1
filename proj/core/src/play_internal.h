#ifndef SMM_PLAY_INTERNAL_H_
#define SMM_PLAY_INTERNAL_H_

// Pieces shared by the fictitious-play, SM4 and intrinsic-bonus loops. Kept
// in one place so a single-component SM4 run does exactly the same floating
// point work as plain fictitious play.

#include <vector>

#include "smm/fictitious_play.h"

namespace smm::internal {

inline uint64_t EpisodeSeed(uint64_t seed) { return DeriveSeed(seed, 1); }
inline uint64_t InitSeed(uint64_t seed, std::size_t component) {
  return component == 0 ? DeriveSeed(seed, 2) : DeriveSeed(seed, 100 + component);
}
inline uint64_t SkillSeed(uint64_t seed) { return DeriveSeed(seed, 3); }

StateMarginal IterateMarginal(const TabularMDP& mdp, const Policy& policy,
                              const PlayConfig& config);

// Best response to a reward under the configured solver and marginal kind.
Policy BestResponse(const TabularMDP& mdp, const RewardTable& reward,
                    const PlayConfig& config);

// Running historical average of iterate marginals.
class HaTracker {
 public:
  explicit HaTracker(std::size_t num_states) : sum_(num_states, 0.0) {}
  void Add(const StateMarginal& m);
  std::size_t size() const { return marginals_.size(); }
  // Plain mean (used for density fitting).
  StateMarginal Mean() const;
  // Mean under the configured evaluation weighting.
  StateMarginal Evaluation(const PlayConfig& config) const;

 private:
  std::vector<double> sum_;
  std::vector<StateMarginal> marginals_;
};

// Mass on the -1 and +1 sides of the labelling; zero when sides is empty.
void SideMasses(const StateMarginal& m, const std::vector<int>& sides,
                double* left, double* right);

double ExpectedReward(const StateMarginal& m, const RewardTable& reward);

std::vector<double> ExponentialWeights(std::size_t m, double decay);

void AppendEpisodes(const TabularMDP& mdp, const Policy& policy,
                    std::size_t count, Rng& rng,
                    std::vector<std::size_t>& out);

}  // namespace smm::internal

#endif  // SMM_PLAY_INTERNAL_H_

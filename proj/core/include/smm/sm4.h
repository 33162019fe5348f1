#ifndef SMM_SM4_H_
#define SMM_SM4_H_

#include <cstddef>
#include <span>
#include <vector>

#include "smm/fictitious_play.h"

namespace smm {

// Table over (z, s); each state's column sums to 1 over z.
struct PosteriorTable {
  std::size_t num_skills = 0;
  std::size_t num_states = 0;
  std::vector<double> values;  // values[z * num_states + s]

  double operator()(std::size_t z, std::size_t s) const {
    return values[z * num_states + s];
  }
};

struct SkillSample {
  std::size_t z = 0;
  std::size_t s = 0;
};

// Bayes' rule on the mixture. Throws if some state has zero mixture mass.
PosteriorTable ExactPosterior(const std::vector<StateMarginal>& components,
                              std::span<const double> prior);

// (count(z, s) + alpha) / (count(s) + n alpha).
PosteriorTable FitDiscriminator(std::span<const SkillSample> buffer,
                                std::size_t num_skills, std::size_t num_states,
                                double alpha);

// log p*(s) - log q_z(s) + log d(z|s) - log p(z).
RewardTable Sm4Reward(std::size_t z, const StateMarginal& target,
                      std::span<const double> density_z,
                      const PosteriorTable& discriminator,
                      std::span<const double> prior,
                      double log_floor = kDefaultLogFloor);

// E_buffer[log p(z|s)] - E_buffer[log d(z|s)].
double JensenGap(std::span<const SkillSample> buffer,
                 const PosteriorTable& fitted, const PosteriorTable& exact);
// Same with a count table c[z * S + s] standing in for the buffer.
double JensenGap(std::span<const double> counts, const PosteriorTable& fitted,
                 const PosteriorTable& exact);

// Posterior of the empirical per-skill distributions in a buffer, i.e. the
// Bayes-optimal discriminator for that buffer.
PosteriorTable EmpiricalPosterior(std::span<const SkillSample> buffer,
                                  std::size_t num_skills,
                                  std::size_t num_states);

enum class DiscriminatorMode { kExact, kFitted };
// kDefault: every skill collects in exact mode, one sampled skill in sampled
// mode.
enum class Collection { kDefault, kAllSkills, kSingleSkill };

struct Sm4Config {
  PlayConfig play;
  std::size_t num_skills = 2;
  DiscriminatorMode discriminator = DiscriminatorMode::kExact;
  Collection collection = Collection::kDefault;
};

struct MixtureState {
  std::size_t num_skills = 0;
  std::vector<double> prior;
  std::vector<std::vector<Policy>> component_policies;  // [z][iteration]
  std::vector<std::vector<HistogramDensity>> component_densities;
  std::vector<std::vector<StateMarginal>> component_marginals;
  PosteriorTable discriminator;  // latest
  std::vector<SkillSample> buffer;
  std::vector<IterationMetrics> metrics;  // mixture level
  // entropy of each skill's historical-average marginal, [iteration][z]
  std::vector<std::vector<double>> component_entropy;
  // Fitted mode only: Jensen gap of each iteration's discriminator.
  std::vector<double> jensen_gaps;
};

MixtureState RunSm4(const TabularMDP& mdp, const StateMarginal& target,
                    const Sm4Config& config);

// Historical-average marginal of each skill (finite-horizon marginals).
std::vector<StateMarginal> ComponentAverageMarginals(const MixtureState& state,
                                                     const TabularMDP& mdp);

}  // namespace smm

#endif  // SMM_SM4_H_

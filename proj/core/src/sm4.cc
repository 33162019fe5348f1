#include "smm/sm4.h"

#include <cmath>
#include <optional>
#include <string>

#include "play_internal.h"
#include "smm/error.h"

namespace smm {
namespace {

// Bayes posterior; states without mixture mass fall back to the prior when
// allow_empty is set.
PosteriorTable Posterior(const std::vector<StateMarginal>& components,
                         std::span<const double> prior, bool allow_empty) {
  Require(!components.empty() && components.size() == prior.size(),
          ErrorCode::kDimensionMismatch,
          "posterior needs one prior weight per component");
  const std::size_t n = components.size();
  const std::size_t S = components[0].size();
  PosteriorTable table{n, S, std::vector<double>(n * S, 0.0)};
  for (std::size_t s = 0; s < S; ++s) {
    double total = 0.0;
    for (std::size_t z = 0; z < n; ++z) {
      Require(components[z].size() == S, ErrorCode::kDimensionMismatch,
              "components differ in size");
      total += prior[z] * components[z][s];
    }
    if (total <= 0.0) {
      Require(allow_empty, ErrorCode::kSupport,
              "mixture has zero mass at state " + std::to_string(s));
      for (std::size_t z = 0; z < n; ++z) table.values[z * S + s] = prior[z];
      continue;
    }
    for (std::size_t z = 0; z < n; ++z) {
      table.values[z * S + s] = prior[z] * components[z][s] / total;
    }
  }
  return table;
}

// Smoothed conditional frequencies from a count table.
PosteriorTable DiscriminatorFromCounts(std::span<const double> counts,
                                       std::size_t n, std::size_t S,
                                       double alpha) {
  PosteriorTable table{n, S, std::vector<double>(n * S, 0.0)};
  for (std::size_t s = 0; s < S; ++s) {
    double total = 0.0;
    for (std::size_t z = 0; z < n; ++z) total += counts[z * S + s];
    const double denom = total + static_cast<double>(n) * alpha;
    for (std::size_t z = 0; z < n; ++z) {
      table.values[z * S + s] =
          denom > 0.0 ? (counts[z * S + s] + alpha) / denom
                      : 1.0 / static_cast<double>(n);
    }
  }
  return table;
}

std::vector<double> BufferCounts(std::span<const SkillSample> buffer,
                                 std::size_t n, std::size_t S) {
  std::vector<double> counts(n * S, 0.0);
  for (const auto& sample : buffer) {
    Require(sample.z < n && sample.s < S, ErrorCode::kInvalidArgument,
            "buffer entry out of range");
    counts[sample.z * S + sample.s] += 1.0;
  }
  return counts;
}

}  // namespace

PosteriorTable ExactPosterior(const std::vector<StateMarginal>& components,
                              std::span<const double> prior) {
  return Posterior(components, prior, /*allow_empty=*/false);
}

PosteriorTable FitDiscriminator(std::span<const SkillSample> buffer,
                                std::size_t num_skills, std::size_t num_states,
                                double alpha) {
  Require(!buffer.empty() || alpha > 0.0, ErrorCode::kInvalidArgument,
          "empty buffer needs alpha > 0");
  Require(alpha >= 0.0, ErrorCode::kInvalidArgument, "alpha must be >= 0");
  return DiscriminatorFromCounts(BufferCounts(buffer, num_skills, num_states),
                                 num_skills, num_states, alpha);
}

PosteriorTable EmpiricalPosterior(std::span<const SkillSample> buffer,
                                  std::size_t num_skills,
                                  std::size_t num_states) {
  return FitDiscriminator(buffer, num_skills, num_states, 0.0);
}

RewardTable Sm4Reward(std::size_t z, const StateMarginal& target,
                      std::span<const double> density_z,
                      const PosteriorTable& discriminator,
                      std::span<const double> prior, double log_floor) {
  Require(z < prior.size() && discriminator.num_skills == prior.size() &&
              discriminator.num_states == target.size(),
          ErrorCode::kDimensionMismatch, "SM4 reward arguments disagree");
  Require(prior[z] > 0.0, ErrorCode::kInvalidArgument,
          "skill has zero prior mass");
  std::vector<double> r = SmmReward(target, density_z, log_floor).values();
  const double log_prior = std::log(prior[z]);
  for (std::size_t s = 0; s < r.size(); ++s) {
    const double d = discriminator(z, s);
    double log_d;
    if (d > 0.0) {
      log_d = std::log(d);
    } else {
      Require(target[s] == 0.0, ErrorCode::kSupport,
              "discriminator is zero at state " + std::to_string(s) +
                  " where the target is positive");
      log_d = log_floor;
    }
    r[s] += log_d - log_prior;
  }
  return RewardTable::FromStates(std::move(r));
}

double JensenGap(std::span<const double> counts, const PosteriorTable& fitted,
                 const PosteriorTable& exact) {
  Require(fitted.num_skills == exact.num_skills &&
              fitted.num_states == exact.num_states &&
              counts.size() == fitted.values.size(),
          ErrorCode::kDimensionMismatch, "Jensen gap tables disagree");
  double total = 0.0, weight = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0.0) continue;
    Require(fitted.values[i] > 0.0 && exact.values[i] > 0.0,
            ErrorCode::kSupport, "Jensen gap evaluated where a table is zero");
    total += counts[i] * (std::log(exact.values[i]) - std::log(fitted.values[i]));
    weight += counts[i];
  }
  return weight > 0.0 ? total / weight : 0.0;
}

double JensenGap(std::span<const SkillSample> buffer,
                 const PosteriorTable& fitted, const PosteriorTable& exact) {
  return JensenGap(BufferCounts(buffer, fitted.num_skills, fitted.num_states),
                   fitted, exact);
}

MixtureState RunSm4(const TabularMDP& mdp, const StateMarginal& target,
                    const Sm4Config& config) {
  const PlayConfig& play = config.play;
  const std::size_t n = config.num_skills;
  const std::size_t S = mdp.num_states();
  Require(n >= 1, ErrorCode::kInvalidArgument, "need at least one skill");
  Require(play.iterations >= 1, ErrorCode::kInvalidArgument,
          "iterations must be >= 1");
  Require(target.size() == S, ErrorCode::kDimensionMismatch,
          "target does not match the MDP");
  Require(play.mode == Mode::kExact || play.episodes_per_iter > 0,
          ErrorCode::kInvalidArgument, "sampled mode needs episodes");
  const double alpha = play.EffectiveAlpha();
  const bool sampled = play.mode == Mode::kSampled;
  const bool single_skill =
      config.collection == Collection::kSingleSkill ||
      (config.collection == Collection::kDefault && sampled);
  const double n_virtual =
      play.n_virtual.value_or(10.0 * static_cast<double>(S));

  MixtureState state;
  state.num_skills = n;
  state.prior.assign(n, 1.0 / static_cast<double>(n));
  state.component_policies.resize(n);
  state.component_densities.resize(n);
  state.component_marginals.resize(n);

  Rng episode_rng(internal::EpisodeSeed(play.seed));
  Rng skill_rng(internal::SkillSeed(play.seed));

  std::vector<StateMarginal> init_marginals;
  std::vector<std::vector<std::size_t>> buffers(n);
  for (std::size_t z = 0; z < n; ++z) {
    const Policy init =
        InitialPolicy(mdp, play, internal::InitSeed(play.seed, z));
    init_marginals.push_back(internal::IterateMarginal(mdp, init, play));
    if (sampled) {
      internal::AppendEpisodes(mdp, init, play.episodes_per_iter, episode_rng,
                               buffers[z]);
      for (std::size_t s : buffers[z]) state.buffer.push_back({z, s});
    }
  }

  // data[z] tracks the marginals of iterates whose data was collected; eval[z]
  // tracks every iterate. They coincide under all-skill collection.
  std::vector<internal::HaTracker> data(n, internal::HaTracker(S));
  std::vector<internal::HaTracker> eval(n, internal::HaTracker(S));
  std::vector<std::optional<AveragedDensity>> averaged(n);

  for (std::size_t m = 1; m <= play.iterations; ++m) {
    std::vector<StateMarginal> data_means;
    std::vector<double> data_weight(n);
    for (std::size_t z = 0; z < n; ++z) {
      data_means.push_back(data[z].size() == 0 ? init_marginals[z]
                                               : data[z].Mean());
      data_weight[z] = static_cast<double>(std::max<std::size_t>(data[z].size(), 1));
      HistogramDensity q =
          sampled ? FitFromBuffer(buffers[z], S, alpha)
                  : FitFromMarginal(data_means[z], alpha, play.n_virtual);
      if (averaged[z]) {
        averaged[z]->Add(q);
      } else {
        averaged[z].emplace(std::vector<HistogramDensity>{q});
      }
      state.component_densities[z].push_back(std::move(q));
    }

    PosteriorTable d;
    if (config.discriminator == DiscriminatorMode::kExact) {
      // Bayes on the fitted (smoothed) component densities.
      std::vector<StateMarginal> fitted;
      for (std::size_t z = 0; z < n; ++z) {
        fitted.push_back(
            StateMarginal::Normalize(state.component_densities[z].back().probs()));
      }
      d = Posterior(fitted, state.prior, /*allow_empty=*/true);
    } else {
      std::vector<double> counts;
      if (sampled) {
        counts = BufferCounts(state.buffer, n, S);
      } else {
        counts.assign(n * S, 0.0);
        for (std::size_t z = 0; z < n; ++z) {
          for (std::size_t s = 0; s < S; ++s) {
            counts[z * S + s] = n_virtual * data_weight[z] * data_means[z][s];
          }
        }
      }
      d = DiscriminatorFromCounts(counts, n, S, alpha);
      std::vector<double> totals(n, 0.0);
      double grand = 0.0;
      for (std::size_t z = 0; z < n; ++z) {
        for (std::size_t s = 0; s < S; ++s) totals[z] += counts[z * S + s];
        grand += totals[z];
      }
      for (double& w : totals) w /= grand;
      std::vector<StateMarginal> empirical;
      for (std::size_t z = 0; z < n; ++z) {
        std::vector<double> row(counts.begin() + z * S,
                                counts.begin() + (z + 1) * S);
        empirical.push_back(totals[z] > 0.0 ? StateMarginal::Normalize(row)
                                            : StateMarginal::Uniform(S));
      }
      const PosteriorTable bayes = Posterior(empirical, totals, true);
      state.jensen_gaps.push_back(JensenGap(counts, d, bayes));
    }

    // Synchronous update: every skill answers the tables fixed above.
    std::vector<RewardTable> rewards;
    std::vector<StateMarginal> rhos;
    for (std::size_t z = 0; z < n; ++z) {
      const auto density = play.average_densities
                               ? averaged[z]->probs()
                               : state.component_densities[z].back().probs();
      rewards.push_back(
          Sm4Reward(z, target, density, d, state.prior, play.log_floor));
      Policy policy = internal::BestResponse(mdp, rewards[z], play);
      rhos.push_back(internal::IterateMarginal(mdp, policy, play));
      state.component_policies[z].push_back(std::move(policy));
    }

    std::vector<bool> collects(n, !single_skill);
    if (single_skill) collects[skill_rng.Categorical(state.prior)] = true;
    for (std::size_t z = 0; z < n; ++z) {
      eval[z].Add(rhos[z]);
      if (!collects[z]) continue;
      data[z].Add(rhos[z]);
      if (sampled) {
        std::vector<std::size_t> batch;
        internal::AppendEpisodes(mdp, state.component_policies[z].back(),
                                 play.episodes_per_iter, episode_rng, batch);
        buffers[z].insert(buffers[z].end(), batch.begin(), batch.end());
        for (std::size_t s : batch) state.buffer.push_back({z, s});
      }
    }
    state.discriminator = std::move(d);

    std::vector<StateMarginal> ha;
    std::vector<double> entropies;
    for (std::size_t z = 0; z < n; ++z) {
      ha.push_back(eval[z].Evaluation(play));
      entropies.push_back(Entropy(ha.back()));
    }
    const StateMarginal mixture_ha = MixtureMarginal(ha, state.prior);
    const StateMarginal mixture_rho = MixtureMarginal(rhos, state.prior);
    IterationMetrics metrics;
    metrics.iteration = m;
    metrics.entropy_ha = Entropy(mixture_ha);
    metrics.kl_to_target = SafeKl(mixture_ha, target);
    double objective = 0.0;
    for (std::size_t z = 0; z < n; ++z) {
      objective += state.prior[z] * internal::ExpectedReward(rhos[z], rewards[z]);
    }
    metrics.objective_value = objective;
    internal::SideMasses(mixture_rho, play.sides, &metrics.mass_left,
                         &metrics.mass_right);
    state.metrics.push_back(metrics);
    state.component_entropy.push_back(std::move(entropies));
    for (std::size_t z = 0; z < n; ++z) {
      state.component_marginals[z].push_back(std::move(rhos[z]));
    }
  }
  return state;
}

std::vector<StateMarginal> ComponentAverageMarginals(const MixtureState& state,
                                                     const TabularMDP& mdp) {
  std::vector<StateMarginal> out;
  for (const auto& policies : state.component_policies) {
    out.push_back(HistoricalAveragePolicy(policies).Marginal(mdp));
  }
  return out;
}

}  // namespace smm

#include "smm/baselines.h"

#include <cmath>
#include <string>

#include "play_internal.h"
#include "smm/error.h"

namespace smm {

VisitCounts::VisitCounts(std::size_t num_states, std::size_t num_actions)
    : num_states_(num_states),
      num_actions_(num_actions),
      state_(num_states, 0.0),
      state_action_(num_states * num_actions, 0.0),
      transition_(num_states * num_actions * num_states, 0.0) {}

void VisitCounts::AddTransition(std::size_t s, std::size_t a, std::size_t n,
                                double w) {
  state_action_[s * num_actions_ + a] += w;
  transition_[(s * num_actions_ + a) * num_states_ + n] += w;
}

void VisitCounts::AddTrajectory(const Trajectory& traj) {
  Require(traj.states.size() == traj.actions.size(),
          ErrorCode::kDimensionMismatch, "trajectory lengths differ");
  for (std::size_t t = 0; t < traj.states.size(); ++t) {
    const std::size_t s = traj.states[t];
    Require(s < num_states_ && traj.actions[t] < num_actions_,
            ErrorCode::kInvalidArgument, "trajectory entry out of range");
    state_[s] += 1.0;
    total_ += 1.0;
    if (t + 1 < traj.states.size()) {
      AddTransition(s, traj.actions[t], traj.states[t + 1], 1.0);
    }
  }
}

void VisitCounts::AddExpectedEpisodes(const TabularMDP& mdp,
                                      const Policy& policy, double episodes) {
  const auto d = StepOccupancies(mdp, policy);
  const std::size_t A = num_actions_;
  for (std::size_t t = 0; t < d.size(); ++t) {
    const auto table = policy.step(t);
    for (std::size_t s = 0; s < num_states_; ++s) {
      const double w = episodes * d[t][s];
      if (w == 0.0) continue;
      state_[s] += w;
      total_ += w;
      if (t + 1 == d.size()) continue;
      for (std::size_t a = 0; a < A; ++a) {
        const double wa = w * table[s * A + a];
        if (wa == 0.0) continue;
        const auto row = mdp.row(s, a);
        for (std::size_t n = 0; n < num_states_; ++n) {
          if (row[n] > 0.0) AddTransition(s, a, n, wa * row[n]);
        }
      }
    }
  }
}

void VisitCounts::AddStationaryEpisodes(const TabularMDP& mdp,
                                        const Policy& policy,
                                        const StateMarginal& mu,
                                        double episodes) {
  Require(policy.is_stationary(), ErrorCode::kInvalidArgument,
          "stationary counts need a stationary policy");
  const double T = mdp.horizon();
  const std::size_t A = num_actions_;
  const auto table = policy.step(0);
  for (std::size_t s = 0; s < num_states_; ++s) {
    const double w = episodes * mu[s];
    if (w == 0.0) continue;
    state_[s] += T * w;
    total_ += T * w;
    for (std::size_t a = 0; a < A; ++a) {
      const double wa = (T - 1.0) * w * table[s * A + a];
      if (wa == 0.0) continue;
      const auto row = mdp.row(s, a);
      for (std::size_t n = 0; n < num_states_; ++n) {
        if (row[n] > 0.0) AddTransition(s, a, n, wa * row[n]);
      }
    }
  }
}

VisitCounts VisitCounts::FromStateCounts(std::vector<double> counts,
                                         std::size_t num_actions) {
  VisitCounts v(counts.size(), num_actions);
  for (std::size_t s = 0; s < counts.size(); ++s) {
    Require(counts[s] >= 0.0, ErrorCode::kInvalidArgument,
            "counts must be nonnegative");
    v.state_[s] = counts[s];
    v.total_ += counts[s];
  }
  return v;
}

RandomEmbedding::RandomEmbedding(std::size_t num_states, std::size_t dim,
                                 uint64_t seed)
    : num_states_(num_states), dim_(dim), seed_(seed),
      table_(num_states * dim) {
  Require(dim > 0, ErrorCode::kInvalidArgument, "embedding dim must be > 0");
  Rng rng(seed);
  for (double& x : table_) x = rng.Normal();
}

TransitionModel ExactTransitionModel(const TabularMDP& mdp) {
  return {mdp.num_states(), mdp.num_actions(), mdp.transition()};
}

TransitionModel FitTransitionModel(const VisitCounts& counts, double beta) {
  Require(beta >= 0.0, ErrorCode::kInvalidArgument, "beta must be >= 0");
  const std::size_t S = counts.num_states();
  const std::size_t A = counts.num_actions();
  TransitionModel model{S, A, std::vector<double>(S * A * S)};
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      const double denom = counts.state_action(s, a) + beta;
      Require(denom > 0.0, ErrorCode::kInvalidArgument,
              "no data for (" + std::to_string(s) + "," + std::to_string(a) +
                  ") and beta = 0");
      for (std::size_t n = 0; n < S; ++n) {
        model.probs[(s * A + a) * S + n] =
            (counts.transition(s, a, n) + beta / static_cast<double>(S)) /
            denom;
      }
    }
  }
  return model;
}

RewardTable CountBonus(const VisitCounts& counts, double alpha) {
  const std::size_t S = counts.num_states();
  const double denom = counts.total() + alpha * static_cast<double>(S);
  std::vector<double> b(S);
  for (std::size_t s = 0; s < S; ++s) {
    const double p = (counts.state(s) + alpha) / denom;
    Require(p > 0.0, ErrorCode::kSupport,
            "state " + std::to_string(s) + " unvisited with alpha = 0");
    b[s] = -std::log(p);
  }
  return RewardTable::FromStates(std::move(b));
}

RewardTable PseudocountBonus(const VisitCounts& counts, double alpha) {
  std::vector<double> b(counts.num_states());
  for (std::size_t s = 0; s < b.size(); ++s) {
    const double n = counts.state(s) + alpha;
    Require(n > 0.0, ErrorCode::kSupport,
            "state " + std::to_string(s) + " unvisited with alpha = 0");
    b[s] = 1.0 / n;
  }
  return RewardTable::FromStates(std::move(b));
}

RewardTable ForwardModelBonus(const TransitionModel& model,
                              std::span<const double> coords,
                              std::size_t dims) {
  const std::size_t S = model.num_states;
  const std::size_t A = model.num_actions;
  Require(dims > 0 && coords.size() == S * dims, ErrorCode::kDimensionMismatch,
          "coordinate table does not match the model");
  std::vector<double> b(S * A);
  std::vector<double> mean(dims);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      const auto row = model.row(s, a);
      std::fill(mean.begin(), mean.end(), 0.0);
      for (std::size_t n = 0; n < S; ++n) {
        for (std::size_t k = 0; k < dims; ++k) {
          mean[k] += row[n] * coords[n * dims + k];
        }
      }
      double var = 0.0;
      for (std::size_t n = 0; n < S; ++n) {
        if (row[n] == 0.0) continue;
        double sq = 0.0;
        for (std::size_t k = 0; k < dims; ++k) {
          const double diff = coords[n * dims + k] - mean[k];
          sq += diff * diff;
        }
        var += row[n] * sq;
      }
      b[s * A + a] = var;
    }
  }
  return RewardTable::FromStateActions(S, A, std::move(b));
}

RewardTable InverseModelBonus(const TabularMDP& mdp, const VisitCounts& counts,
                              double beta) {
  const std::size_t S = mdp.num_states();
  const std::size_t A = mdp.num_actions();
  Require(counts.num_states() == S && counts.num_actions() == A,
          ErrorCode::kDimensionMismatch, "counts do not match the MDP");
  Require(beta >= 0.0, ErrorCode::kInvalidArgument, "beta must be >= 0");
  const double prior = beta / static_cast<double>(A);
  std::vector<double> b(S * A, 0.0);
  std::vector<double> weight(A);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t n = 0; n < S; ++n) {
      double total = 0.0;
      bool reachable = false;
      for (std::size_t a = 0; a < A; ++a) {
        weight[a] = counts.transition(s, a, n) + prior * mdp.P(s, a, n);
        total += weight[a];
        reachable = reachable || mdp.P(s, a, n) > 0.0;
      }
      if (!reachable) continue;
      Require(total > 0.0, ErrorCode::kSupport,
              "transition " + std::to_string(s) + "->" + std::to_string(n) +
                  " unseen and no smoothing");
      for (std::size_t a = 0; a < A; ++a) {
        const double p = mdp.P(s, a, n);
        if (p == 0.0) continue;
        Require(weight[a] > 0.0, ErrorCode::kSupport,
                "inverse model gives zero mass to a possible action at " +
                    std::to_string(s) + "->" + std::to_string(n));
        b[s * A + a] -= p * std::log(weight[a] / total);
      }
    }
  }
  return RewardTable::FromStateActions(S, A, std::move(b));
}

RewardTable RndBonus(const RandomEmbedding& embedding,
                     const VisitCounts& counts) {
  Require(embedding.num_states() == counts.num_states(),
          ErrorCode::kDimensionMismatch, "embedding does not match counts");
  std::vector<double> b(counts.num_states(), 0.0);
  for (std::size_t s = 0; s < b.size(); ++s) {
    if (counts.state(s) > 0.0) continue;
    for (double x : embedding[s]) b[s] += x * x;
  }
  return RewardTable::FromStates(std::move(b));
}

const char* BonusKindName(BonusKind kind) {
  switch (kind) {
    case BonusKind::kCount: return "count";
    case BonusKind::kPseudocount: return "pseudocount";
    case BonusKind::kForward: return "forward";
    case BonusKind::kInverse: return "inverse";
    case BonusKind::kRnd: return "rnd";
  }
  return "unknown";
}

BonusKind ParseBonusKind(const std::string& name) {
  for (BonusKind kind : kAllBonusKinds) {
    if (name == BonusKindName(kind)) return kind;
  }
  Fail(ErrorCode::kConfig, "unknown bonus kind '" + name + "'");
}

namespace {

void AddIterateData(const TabularMDP& mdp, const Policy& policy,
                    const StateMarginal& rho, const PlayConfig& play,
                    Rng& rng, VisitCounts& counts) {
  const double episodes = static_cast<double>(play.episodes_per_iter);
  if (play.mode == Mode::kSampled) {
    for (std::size_t e = 0; e < play.episodes_per_iter; ++e) {
      counts.AddTrajectory(SampleEpisode(mdp, policy, rng));
    }
  } else if (play.marginal_kind == MarginalKind::kStationary) {
    counts.AddStationaryEpisodes(mdp, policy, rho, episodes);
  } else {
    counts.AddExpectedEpisodes(mdp, policy, episodes);
  }
}

// Per-step average reward of the iterate.
double IterateObjective(const TabularMDP& mdp, const Policy& policy,
                        const StateMarginal& rho, const RewardTable& reward,
                        const PlayConfig& play) {
  if (play.marginal_kind == MarginalKind::kFiniteHorizon) {
    return ExpectedReturn(mdp, policy, reward) / mdp.horizon();
  }
  const std::size_t A = mdp.num_actions();
  const auto table = policy.step(0);
  double total = 0.0;
  for (std::size_t s = 0; s < rho.size(); ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      total += rho[s] * table[s * A + a] * reward(s, a);
    }
  }
  return total;
}

}  // namespace

FictitiousPlayState RunIntrinsicLoop(const TabularMDP& mdp, BonusKind kind,
                                     const RewardTable& extrinsic,
                                     const IntrinsicConfig& config) {
  const PlayConfig& play = config.play;
  const std::size_t S = mdp.num_states();
  const std::size_t A = mdp.num_actions();
  Require(play.iterations >= 1, ErrorCode::kInvalidArgument,
          "iterations must be >= 1");
  Require(play.episodes_per_iter > 0, ErrorCode::kInvalidArgument,
          "episodes_per_iter must be > 0");
  extrinsic.CheckCompatible(mdp);
  if (kind == BonusKind::kForward) {
    Require(config.coords.size() == 2 * S, ErrorCode::kInvalidArgument,
            "forward-model bonus needs two coordinates per state");
  }
  const StateMarginal target =
      config.target.value_or(StateMarginal::Uniform(S));
  Require(target.size() == S, ErrorCode::kDimensionMismatch,
          "target does not match the MDP");

  Rng rng(internal::EpisodeSeed(play.seed));
  const RandomEmbedding embedding(S, config.embed_dim,
                                  DeriveSeed(play.seed, 4));
  VisitCounts counts(S, A);
  {
    const Policy init = InitialPolicy(mdp, play, internal::InitSeed(play.seed, 0));
    const StateMarginal rho = internal::IterateMarginal(mdp, init, play);
    AddIterateData(mdp, init, rho, play, rng, counts);
  }

  FictitiousPlayState state;
  state.marginal_kind = play.marginal_kind;
  internal::HaTracker history(S);
  for (std::size_t m = 1; m <= play.iterations; ++m) {
    RewardTable bonus = [&] {
      switch (kind) {
        case BonusKind::kCount: return CountBonus(counts, config.count_alpha);
        case BonusKind::kPseudocount:
          return PseudocountBonus(counts, config.count_alpha);
        case BonusKind::kForward:
          return ForwardModelBonus(FitTransitionModel(counts, config.model_beta),
                                   config.coords);
        case BonusKind::kInverse:
          return InverseModelBonus(mdp, counts, config.model_beta);
        case BonusKind::kRnd: return RndBonus(embedding, counts);
      }
      Fail(ErrorCode::kInvalidArgument, "unknown bonus kind");
    }();
    const RewardTable reward = extrinsic.Plus(bonus, config.bonus_coef, A);
    Policy policy = internal::BestResponse(mdp, reward, play);
    StateMarginal rho = internal::IterateMarginal(mdp, policy, play);
    AddIterateData(mdp, policy, rho, play, rng, counts);
    history.Add(rho);

    IterationMetrics metrics;
    metrics.iteration = m;
    const StateMarginal eval =
        config.use_historical_average ? history.Evaluation(play) : rho;
    metrics.entropy_ha = Entropy(eval);
    metrics.kl_to_target = SafeKl(eval, target);
    metrics.objective_value = IterateObjective(mdp, policy, rho, reward, play);
    internal::SideMasses(rho, play.sides, &metrics.mass_left,
                         &metrics.mass_right);
    state.metrics.push_back(metrics);
    state.iterates.push_back(std::move(policy));
    state.iterate_marginals.push_back(std::move(rho));
  }
  return state;
}

StateMarginal HistoricalAverageEvaluation(const FictitiousPlayState& state,
                                          const PlayConfig& play) {
  Require(!state.iterate_marginals.empty(), ErrorCode::kInvalidArgument,
          "state has no iterates");
  internal::HaTracker history(state.iterate_marginals.front().size());
  for (const auto& rho : state.iterate_marginals) history.Add(rho);
  return history.Evaluation(play);
}

}  // namespace smm

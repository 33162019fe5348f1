#include <gtest/gtest.h>

#include <cmath>

#include "smm/smm.h"
#include "test_util.h"

namespace smm {
namespace {

std::vector<SkillSample> SampleSkills(const std::vector<StateMarginal>& comps,
                                      std::size_t n, uint64_t seed) {
  Rng rng(seed);
  std::vector<SkillSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t z = rng.UniformIndex(comps.size());
    out.push_back({z, rng.Categorical(comps[z].probs())});
  }
  return out;
}

TEST(ExactPosteriorTest, Examples) {
  const std::vector<double> prior = {0.5, 0.5};
  const PosteriorTable p =
      ExactPosterior({StateMarginal({0.8, 0.2}), StateMarginal({0.2, 0.8})}, prior);
  EXPECT_NEAR(p(0, 0), 0.8, 1e-15);
  EXPECT_NEAR(p(1, 0), 0.2, 1e-15);

  const std::vector<double> skewed = {0.3, 0.7};
  const StateMarginal same({0.1, 0.6, 0.3});
  const PosteriorTable q = ExactPosterior({same, same}, skewed);
  for (std::size_t s = 0; s < 3; ++s) {
    EXPECT_NEAR(q(0, s), 0.3, 1e-15);
    EXPECT_NEAR(q(1, s), 0.7, 1e-15);
  }

  const PosteriorTable d =
      ExactPosterior({StateMarginal({1, 0}), StateMarginal({0, 1})}, prior);
  EXPECT_EQ(d(0, 0), 1.0);
  EXPECT_EQ(d(1, 1), 1.0);
  EXPECT_EQ(d(1, 0), 0.0);
}

TEST(ExactPosteriorTest, ZeroMixtureMassIsAnError) {
  const std::vector<double> prior = {0.5, 0.5};
  EXPECT_THROW(ExactPosterior({StateMarginal({1, 0, 0}), StateMarginal({0, 1, 0})},
                              prior),
               Error);
}

TEST(ExactPosteriorTest, ColumnsSumToOne) {
  Rng rng(6);
  for (int i = 0; i < 100; ++i) {
    std::vector<StateMarginal> comps;
    for (int z = 0; z < 4; ++z) comps.emplace_back(testing::RandomSimplex(7, rng));
    const auto prior = testing::RandomSimplex(4, rng);
    const PosteriorTable p = ExactPosterior(comps, prior);
    for (std::size_t s = 0; s < 7; ++s) {
      double sum = 0.0;
      for (std::size_t z = 0; z < 4; ++z) sum += p(z, s);
      EXPECT_NEAR(sum, 1.0, 1e-10);
    }
  }
}

TEST(FitDiscriminatorTest, Examples) {
  const std::vector<SkillSample> split = {{0, 0}, {1, 0}};
  const PosteriorTable a = FitDiscriminator(split, 2, 1, 0.0);
  EXPECT_EQ(a(0, 0), 0.5);
  EXPECT_EQ(a(1, 0), 0.5);
  const std::vector<SkillSample> one = {{0, 0}, {0, 0}, {0, 0}};
  const PosteriorTable b = FitDiscriminator(one, 2, 1, 0.0);
  EXPECT_EQ(b(0, 0), 1.0);
  EXPECT_EQ(b(1, 0), 0.0);
  const PosteriorTable c = FitDiscriminator(one, 2, 1, 1.0);
  EXPECT_NEAR(c(0, 0), 4.0 / 5.0, 1e-15);
  EXPECT_THROW(FitDiscriminator(std::vector<SkillSample>{}, 2, 3, 0.0), Error);
}

TEST(FitDiscriminatorTest, LargeBufferMatchesPosterior) {
  const std::vector<StateMarginal> comps = {StateMarginal({0.6, 0.3, 0.1}),
                                            StateMarginal({0.1, 0.2, 0.7})};
  const std::vector<double> prior = {0.5, 0.5};
  const PosteriorTable exact = ExactPosterior(comps, prior);
  const auto buffer = SampleSkills(comps, 200000, 11);
  const PosteriorTable fit = FitDiscriminator(buffer, 2, 3, 0.0);
  for (std::size_t s = 0; s < 3; ++s) {
    const double tv =
        0.5 * (std::abs(fit(0, s) - exact(0, s)) + std::abs(fit(1, s) - exact(1, s)));
    EXPECT_LE(tv, 0.02);
  }
}

TEST(Sm4RewardTest, HandArithmetic) {
  const std::vector<double> q = {0.25, 0.75};
  const std::vector<double> prior = {0.5, 0.5};
  PosteriorTable d{2, 2, {0.8, 0.2, 0.2, 0.8}};
  const RewardTable r = Sm4Reward(0, StateMarginal({0.5, 0.5}), q, d, prior);
  EXPECT_NEAR(r[0], 1.163151, 1e-6);
  EXPECT_NEAR(r[1], -1.321756, 1e-6);
}

TEST(Sm4RewardTest, UniformEverythingIsZero) {
  const std::vector<double> q = {0.5, 0.5};
  const std::vector<double> prior = {0.5, 0.5};
  PosteriorTable d{2, 2, {0.5, 0.5, 0.5, 0.5}};
  for (std::size_t z = 0; z < 2; ++z) {
    const RewardTable r = Sm4Reward(z, StateMarginal::Uniform(2), q, d, prior);
    for (double x : r.values()) EXPECT_EQ(x, 0.0);
  }
}

TEST(Sm4RewardTest, SingleSkillIsSmmReward) {
  const std::vector<double> q = {0.2, 0.5, 0.3};
  const std::vector<double> prior = {1.0};
  PosteriorTable d{1, 3, {1.0, 1.0, 1.0}};
  const StateMarginal target({0.6, 0.4, 0.0});
  EXPECT_EQ(Sm4Reward(0, target, q, d, prior).values(),
            SmmReward(target, q).values());
}

TEST(Sm4RewardTest, ZeroTermsAreErrors) {
  const std::vector<double> prior = {0.5, 0.5};
  PosteriorTable d{2, 2, {1.0, 0.0, 0.0, 1.0}};
  const std::vector<double> q = {0.5, 0.5};
  EXPECT_THROW(Sm4Reward(0, StateMarginal::Uniform(2), q, d, prior), Error);
  const std::vector<double> q0 = {1.0, 0.0};
  PosteriorTable flat{2, 2, {0.5, 0.5, 0.5, 0.5}};
  EXPECT_THROW(Sm4Reward(0, StateMarginal::Uniform(2), q0, flat, prior), Error);
}

TEST(JensenGapTest, Examples) {
  const std::vector<StateMarginal> comps = {StateMarginal({0.7, 0.2, 0.1}),
                                            StateMarginal({0.1, 0.3, 0.6})};
  // Balanced skills so the empirical prior is exactly uniform.
  Rng rng(2);
  std::vector<SkillSample> buffer;
  for (std::size_t i = 0; i < 5000; ++i) {
    const std::size_t z = i % 2;
    buffer.push_back({z, rng.Categorical(comps[z].probs())});
  }
  const PosteriorTable exact = EmpiricalPosterior(buffer, 2, 3);
  EXPECT_NEAR(JensenGap(buffer, exact, exact), 0.0, 1e-15);

  PosteriorTable flat{2, 3, std::vector<double>(6, 0.5)};
  // Empirical mutual information between z and s.
  std::vector<double> joint(6, 0.0), ps(3, 0.0);
  for (const auto& x : buffer) {
    joint[x.z * 3 + x.s] += 1.0 / buffer.size();
    ps[x.s] += 1.0 / buffer.size();
  }
  double mi = 0.0;
  for (std::size_t z = 0; z < 2; ++z) {
    for (std::size_t s = 0; s < 3; ++s) {
      const double j = joint[z * 3 + s];
      if (j > 0) mi += j * std::log(j / (0.5 * ps[s]));
    }
  }
  EXPECT_NEAR(JensenGap(buffer, flat, exact), mi, 1e-12);
  EXPECT_GT(mi, 0.0);

  PosteriorTable perturbed = exact;
  for (std::size_t s = 0; s < 3; ++s) {
    const double shift = 0.05 * (s + 1);
    perturbed.values[s] = std::min(0.99, exact(0, s) + shift);
    perturbed.values[3 + s] = 1.0 - perturbed.values[s];
  }
  EXPECT_GT(JensenGap(buffer, perturbed, exact), 0.0);
}

TEST(JensenGapTest, CountsMatchBuffer) {
  const std::vector<SkillSample> buffer = {{0, 0}, {0, 1}, {1, 1}, {1, 1}, {0, 2}};
  std::vector<double> counts(6, 0.0);
  for (const auto& x : buffer) counts[x.z * 3 + x.s] += 1.0;
  const PosteriorTable exact = EmpiricalPosterior(buffer, 2, 3);
  const PosteriorTable fit = FitDiscriminator(buffer, 2, 3, 1.0);
  EXPECT_NEAR(JensenGap(buffer, fit, exact), JensenGap(counts, fit, exact), 1e-15);
  EXPECT_GE(JensenGap(buffer, fit, exact), 0.0);
}

TEST(RunSm4Test, SingleSkillMatchesFictitiousPlayBitwise) {
  const Gridworld w = testing::DidacticCross(0.5);
  const StateMarginal target = StateMarginal::Uniform(w.mdp.num_states());
  for (Mode mode : {Mode::kExact, Mode::kSampled}) {
    for (DiscriminatorMode disc : {DiscriminatorMode::kExact, DiscriminatorMode::kFitted}) {
      Sm4Config c;
      c.num_skills = 1;
      c.discriminator = disc;
      c.play.iterations = 30;
      c.play.mode = mode;
      c.play.seed = 5;
      c.play.init = InitPolicy::kRandom;
      const auto sm4 = RunSm4(w.mdp, target, c);
      const auto fp = RunFictitiousPlay(w.mdp, target, c.play);
      ASSERT_EQ(sm4.metrics.size(), fp.metrics.size());
      for (std::size_t i = 0; i < fp.metrics.size(); ++i) {
        EXPECT_EQ(sm4.metrics[i].entropy_ha, fp.metrics[i].entropy_ha);
        EXPECT_EQ(sm4.metrics[i].kl_to_target, fp.metrics[i].kl_to_target);
        EXPECT_EQ(sm4.metrics[i].objective_value, fp.metrics[i].objective_value);
      }
    }
  }
}

TEST(RunSm4Test, TwoStateComponentsSpecialize) {
  const TabularMDP mdp = testing::TwoStateSymmetric();
  for (uint64_t seed = 0; seed < 4; ++seed) {
    Sm4Config c;
    c.num_skills = 2;
    c.play.iterations = 1000;
    c.play.seed = seed;
    c.play.init = InitPolicy::kRandom;
    const auto st = RunSm4(mdp, StateMarginal::Uniform(2), c);
    const auto comps = ComponentAverageMarginals(st, mdp);
    EXPECT_LT((comps[0][0] - 0.5) * (comps[1][0] - 0.5), 0.0) << "seed " << seed;
    const StateMarginal mix = MixtureMarginal(comps, st.prior);
    EXPECT_NEAR(mix[0], 0.5, 1e-3) << "seed " << seed;
  }
}

TEST(RunSm4Test, MixtureMarginalIsExact) {
  const Gridworld w = testing::DidacticCross();
  const StateMarginal target = StateMarginal::Uniform(w.mdp.num_states());
  Sm4Config c;
  c.num_skills = 3;
  c.play.iterations = 20;
  c.play.init = InitPolicy::kRandom;
  const auto st = RunSm4(w.mdp, target, c);
  const auto comps = ComponentAverageMarginals(st, w.mdp);
  const StateMarginal mix = MixtureMarginal(comps, st.prior);
  // Sampling z and then an iterate uniformly is one flat mixture over all
  // z x m policies when the prior is uniform.
  std::vector<Policy> pooled;
  for (const auto& row : st.component_policies) {
    pooled.insert(pooled.end(), row.begin(), row.end());
  }
  const StateMarginal flat = HistoricalAveragePolicy(pooled).Marginal(w.mdp);
  for (std::size_t s = 0; s < w.mdp.num_states(); ++s) {
    EXPECT_NEAR(mix[s], flat[s], 1e-12);
  }
  EXPECT_NEAR(st.metrics.back().kl_to_target, KlDivergence(mix, target), 1e-12);
  double sum = 0.0;
  for (double p : st.prior) sum += p;
  EXPECT_NEAR(sum, 1.0, 1e-15);
}

TEST(RunSm4Test, FittedDiscriminatorsRespectJensenBound) {
  const Gridworld w = testing::DidacticCross(0.5);
  for (Mode mode : {Mode::kExact, Mode::kSampled}) {
    Sm4Config c;
    c.num_skills = 3;
    c.discriminator = DiscriminatorMode::kFitted;
    c.play.iterations = 25;
    c.play.mode = mode;
    c.play.init = InitPolicy::kRandom;
    const auto st = RunSm4(w.mdp, StateMarginal::Uniform(w.mdp.num_states()), c);
    ASSERT_EQ(st.jensen_gaps.size(), 25u);
    for (double g : st.jensen_gaps) EXPECT_GE(g, -1e-10);
    for (std::size_t s = 0; s < w.mdp.num_states(); ++s) {
      double sum = 0.0;
      for (std::size_t z = 0; z < 3; ++z) sum += st.discriminator(z, s);
      EXPECT_NEAR(sum, 1.0, 1e-10);
    }
  }
}

TEST(RunSm4Test, CollectionModesFillBuffer) {
  const Gridworld w = testing::DidacticCross();
  Sm4Config c;
  c.num_skills = 2;
  c.play.iterations = 4;
  c.play.mode = Mode::kSampled;
  c.play.episodes_per_iter = 3;
  c.collection = Collection::kAllSkills;
  const auto all = RunSm4(w.mdp, StateMarginal::Uniform(15), c);
  c.collection = Collection::kSingleSkill;
  const auto single = RunSm4(w.mdp, StateMarginal::Uniform(15), c);
  EXPECT_GT(all.buffer.size(), single.buffer.size());
  for (const auto& x : all.buffer) EXPECT_LT(x.z, 2u);
}

}  // namespace
}  // namespace smm

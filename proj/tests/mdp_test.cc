#include <gtest/gtest.h>

#include <cmath>

#include "smm/smm.h"
#include "test_util.h"

namespace smm {
namespace {

using testing::Corridor;
using testing::DidacticCross;

void ExpectRowsNormalized(const TabularMDP& mdp) {
  for (std::size_t s = 0; s < mdp.num_states(); ++s) {
    for (std::size_t a = 0; a < mdp.num_actions(); ++a) {
      double sum = 0.0;
      for (double p : mdp.row(s, a)) {
        EXPECT_GE(p, 0.0);
        sum += p;
      }
      EXPECT_NEAR(sum, 1.0, 1e-12) << "s=" << s << " a=" << a;
    }
  }
}

TEST(TabularMdpTest, RejectsBadRows) {
  EXPECT_THROW(TabularMDP(1, 1, {0.5}, {1.0}, 1), Error);
  EXPECT_THROW(TabularMDP(1, 1, {1.0}, {0.9}, 1), Error);
  EXPECT_THROW(TabularMDP(1, 1, {1.0}, {1.0}, 0), Error);
  EXPECT_THROW(TabularMDP(2, 1, {1.0, 0.0}, {1.0, 0.0}, 1), Error);
}

TEST(GridworldTest, SingleCellStaysPut) {
  GridworldSpec spec;
  spec.cells = {{0, 0}};
  const Gridworld w = BuildCrossGridworld(spec);
  ASSERT_EQ(w.mdp.num_states(), 1u);
  ASSERT_EQ(w.mdp.num_actions(), 4u);
  for (std::size_t a = 0; a < 4; ++a) EXPECT_EQ(w.mdp.P(0, a, 0), 1.0);
}

TEST(GridworldTest, CorridorDeterministicRightMove) {
  const Gridworld w = Corridor(3, 5);
  EXPECT_EQ(w.mdp.P(0, kRight, 1), 1.0);
  EXPECT_EQ(w.mdp.P(0, kLeft, 0), 1.0);  // wall: stay
  EXPECT_EQ(w.mdp.P(2, kRight, 2), 1.0);
  EXPECT_EQ(w.mdp.P(1, kUp, 1), 1.0);
}

TEST(GridworldTest, PlusIntersectionRowsMatchHandTable) {
  // Arm length 5 in all directions, slip 0.1, xi = 0.5 at the center. The
  // center has four open neighbors; the noisy branch picks uniformly among
  // them and the center itself.
  const Gridworld w = BuildCrossGridworld(CrossSpec(5, 0.1, 0.5, 30));
  ASSERT_EQ(w.mdp.num_states(), 21u);
  const std::size_t c = *w.StateOf({5, 5});
  const std::size_t up = *w.StateOf({5, 4});
  const std::size_t down = *w.StateOf({5, 6});
  const std::size_t left = *w.StateOf({4, 5});
  const std::size_t right = *w.StateOf({6, 5});
  const std::size_t neighbor[4] = {up, down, left, right};
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t d = 0; d < 4; ++d) {
      const double ordinary = (d == a ? 0.1 : 0.0) + 0.9 / 4.0;
      EXPECT_NEAR(w.mdp.P(c, a, neighbor[d]), 0.5 * ordinary + 0.5 * 0.2,
                  1e-15)
          << "a=" << a << " d=" << d;
    }
    EXPECT_NEAR(w.mdp.P(c, a, c), 0.5 * 0.2, 1e-15);
  }
}

TEST(GridworldTest, OrdinarySlipIncludesCommandedAction) {
  const Gridworld w = BuildCrossGridworld(CrossSpec(5, 0.1, std::nullopt, 30));
  // Left end of the horizontal arm: up, down and left hit walls.
  const std::size_t end = *w.StateOf({0, 5});
  const std::size_t next = *w.StateOf({1, 5});
  EXPECT_NEAR(w.mdp.P(end, kRight, next), 0.1 + 0.9 / 4.0, 1e-15);
  EXPECT_NEAR(w.mdp.P(end, kRight, end), 3 * 0.9 / 4.0, 1e-15);
  EXPECT_NEAR(w.mdp.P(end, kUp, next), 0.9 / 4.0, 1e-15);
}

TEST(GridworldTest, ZeroXiMatchesOrdinaryDynamics) {
  const Gridworld with_tv = BuildCrossGridworld(CrossSpec(4, 3, 0.3, 0.0, 10));
  GridworldSpec plain = CrossSpec(4, 3, 0.3, std::nullopt, 10);
  plain.noisy_tv_cell.reset();
  const Gridworld without = BuildCrossGridworld(plain);
  EXPECT_EQ(with_tv.mdp.transition(), without.mdp.transition());
}

TEST(GridworldTest, RowsNormalizedAcrossSpecs) {
  for (double slip : {0.0, 0.1, 0.7, 1.0}) {
    for (double xi : {0.0, 0.3, 1.0}) {
      ExpectRowsNormalized(BuildCrossGridworld(CrossSpec(3, 2, slip, xi, 5)).mdp);
    }
  }
  for (int halls = 1; halls <= 4; ++halls) {
    ExpectRowsNormalized(BuildRadialHallGridworld(halls, 4, 0.1, 10).mdp);
  }
}

TEST(GridworldTest, ConstructionIsBitwiseDeterministic) {
  const auto a = BuildCrossGridworld(CrossSpec(5, 2, 0.1, 0.37, 30));
  const auto b = BuildCrossGridworld(CrossSpec(5, 2, 0.1, 0.37, 30));
  EXPECT_EQ(a.mdp.transition(), b.mdp.transition());
  EXPECT_EQ(std::vector<double>(a.mdp.initial().begin(), a.mdp.initial().end()),
            std::vector<double>(b.mdp.initial().begin(), b.mdp.initial().end()));
}

TEST(GridworldTest, RejectsDisconnectedLayout) {
  GridworldSpec spec;
  spec.cells = {{0, 0}, {2, 0}};
  EXPECT_THROW(BuildCrossGridworld(spec), Error);
}

TEST(GridworldTest, RejectsXiWithoutTvCell) {
  GridworldSpec spec;
  spec.cells = {{0, 0}, {1, 0}};
  spec.noisy_tv_xi = 0.5;
  EXPECT_THROW(BuildCrossGridworld(spec), Error);
}

TEST(GridworldTest, RejectsOutOfRangeParameters) {
  GridworldSpec spec;
  spec.cells = {{0, 0}, {1, 0}};
  spec.slip_success_prob = 1.5;
  EXPECT_THROW(BuildCrossGridworld(spec), Error);
  spec.slip_success_prob = 0.5;
  spec.noisy_tv_cell = Cell{3, 3};
  EXPECT_THROW(BuildCrossGridworld(spec), Error);
}

TEST(RadialHallTest, StateCounts) {
  EXPECT_EQ(BuildRadialHallGridworld(1, 1, 0.1, 5).mdp.num_states(), 2u);
  EXPECT_EQ(BuildRadialHallGridworld(3, 10, 0.1, 5).mdp.num_states(), 31u);
  EXPECT_EQ(BuildRadialHallGridworld(3, 50, 0.1, 5).mdp.num_states(), 151u);
  EXPECT_THROW(BuildRadialHallGridworld(0, 3, 0.1, 5), Error);
  EXPECT_THROW(BuildRadialHallGridworld(2, 0, 0.1, 5), Error);
}

TEST(SampleEpisodeTest, SingleStateRepeats) {
  const TabularMDP mdp(1, 2, {1.0, 1.0}, {1.0}, 7);
  const Trajectory t = SampleEpisode(mdp, Policy::Uniform(1, 2), 3);
  EXPECT_EQ(t.states, std::vector<std::size_t>(7, 0));
  EXPECT_EQ(t.actions.size(), 7u);
}

TEST(SampleEpisodeTest, DeterministicTwoCycle) {
  const TabularMDP mdp(2, 1, {0, 1, 1, 0}, {1, 0}, 4);
  const Trajectory t = SampleEpisode(mdp, Policy::Uniform(2, 1), 11);
  EXPECT_EQ(t.states, (std::vector<std::size_t>{0, 1, 0, 1}));
}

TEST(SampleEpisodeTest, ReproducibleGivenSeed) {
  const Gridworld w = DidacticCross(0.5);
  const Policy pi = RandomPolicy(w.mdp.num_states(), 4, 30, 5);
  const Trajectory a = SampleEpisode(w.mdp, pi, 1234);
  const Trajectory b = SampleEpisode(w.mdp, pi, 1234);
  EXPECT_EQ(a.states, b.states);
  EXPECT_EQ(a.actions, b.actions);
  EXPECT_EQ(a.seed, 1234u);
}

TEST(SampleEpisodeTest, RejectsIncompatiblePolicy) {
  const TabularMDP mdp = testing::TwoStateSymmetric();
  EXPECT_THROW(SampleEpisode(mdp, Policy::Uniform(3, 2), 0), Error);
  EXPECT_THROW(SampleEpisode(mdp, RandomPolicy(2, 2, 5, 0), 0), Error);
}

TEST(SampleEpisodeTest, FrequenciesMatchExactMarginal) {
  GridworldSpec spec = CrossSpec(5, 2, 0.1, std::nullopt, 30);
  spec.start_cell.reset();  // uniform start spreads mass over the cross
  const Gridworld w = BuildCrossGridworld(spec);
  const Policy pi = Policy::Uniform(w.mdp.num_states(), 4);
  const StateMarginal mc = testing::MonteCarloMarginal(w.mdp, pi, 100000, 42);
  EXPECT_LE(TotalVariation(mc, FiniteHorizonMarginal(w.mdp, pi)), 0.01);
}

TEST(PolicyTransitionMatrixTest, DeterministicIsPermutationLike) {
  const Gridworld w = Corridor(4, 3);
  std::vector<double> right(4 * 4, 0.0);
  for (std::size_t s = 0; s < 4; ++s) right[s * 4 + kRight] = 1.0;
  const Matrix m = PolicyTransitionMatrix(w.mdp, right);
  for (std::size_t s = 0; s < 4; ++s) {
    for (std::size_t n = 0; n < 4; ++n) {
      EXPECT_TRUE(m(s, n) == 0.0 || m(s, n) == 1.0);
    }
    EXPECT_EQ(m(s, std::min<std::size_t>(s + 1, 3)), 1.0);
  }
}

TEST(PolicyTransitionMatrixTest, UniformDynamicsGiveHalfMatrix) {
  const TabularMDP mdp(2, 2, std::vector<double>(8, 0.5), {0.5, 0.5}, 1);
  const Matrix m = PolicyTransitionMatrix(mdp, Policy::Uniform(2, 2).step(0));
  for (double x : m.data) EXPECT_EQ(x, 0.5);
}

TEST(PolicyTransitionMatrixTest, MatchesTripleLoop) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const TabularMDP mdp = RandomMDP(4, 3, 2, seed);
    const Policy pi = RandomPolicy(4, 3, 1, seed + 100);
    const Matrix m = PolicyTransitionMatrix(mdp, pi.step(0));
    for (std::size_t s = 0; s < 4; ++s) {
      double row = 0.0;
      for (std::size_t n = 0; n < 4; ++n) {
        double expect = 0.0;
        for (std::size_t a = 0; a < 3; ++a) {
          expect += pi.prob(0, s, a) * mdp.P(s, a, n);
        }
        EXPECT_NEAR(m(s, n), expect, 1e-15);
        row += m(s, n);
      }
      EXPECT_NEAR(row, 1.0, 1e-12);
    }
  }
}

TEST(PolicyTransitionMatrixTest, RejectsWrongSize) {
  const TabularMDP mdp = testing::TwoStateSymmetric();
  EXPECT_THROW(PolicyTransitionMatrix(mdp, std::vector<double>(3, 1.0)), Error);
}

TEST(PolicyTest, FactoriesAndCompatibility) {
  const TabularMDP mdp = testing::TwoStateSymmetric(3);
  EXPECT_NO_THROW(Policy::Uniform(2, 2).CheckCompatible(mdp));
  EXPECT_NO_THROW(RandomPolicy(2, 2, 3, 1).CheckCompatible(mdp));
  EXPECT_THROW(RandomPolicy(2, 2, 2, 1).CheckCompatible(mdp), Error);
  const Policy d = Policy::Deterministic(2, 2, {{1, 0}, {0, 0}, {1, 1}});
  EXPECT_EQ(d.prob(0, 0, 1), 1.0);
  EXPECT_EQ(d.prob(2, 1, 1), 1.0);
  EXPECT_EQ(d.FirstStep().steps()[0], d.steps()[0]);
  EXPECT_THROW(Policy(2, 2, {{0.5, 0.5, 0.7, 0.3 + 1e-9}}), Error);
}

TEST(RngTest, DeterministicStreams) {
  Rng a(7), b(7);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.NextU64(), b.NextU64());
  EXPECT_NE(DeriveSeed(1, 1), DeriveSeed(1, 2));
  EXPECT_NE(DeriveSeed(1, 1), DeriveSeed(2, 1));
  Rng c(3);
  const std::vector<double> w = {0.0, 1.0, 0.0};
  for (int i = 0; i < 50; ++i) EXPECT_EQ(c.Categorical(w), 1u);
}

TEST(ConfigTextTest, RoundTripPreservesSpec) {
  GridworldSpec spec = CrossSpec(3, 1, 0.123456789, 0.25, 17);
  const GridworldSpec back = ParseGridworldSpec(SerializeGridworldSpec(spec));
  EXPECT_EQ(back.slip_success_prob, spec.slip_success_prob);
  EXPECT_EQ(back.noisy_tv_xi, spec.noisy_tv_xi);
  EXPECT_EQ(back.noisy_tv_cell, spec.noisy_tv_cell);
  EXPECT_EQ(back.start_cell, spec.start_cell);
  EXPECT_EQ(back.horizon, spec.horizon);
  auto sorted = [](std::vector<Cell> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  EXPECT_EQ(sorted(back.cells), sorted(spec.cells));
  EXPECT_EQ(SerializeGridworldSpec(back), SerializeGridworldSpec(spec));
}

TEST(ConfigTextTest, ParsesCommentsAndLayout) {
  const GridworldSpec spec = ParseGridworldSpec(
      "// a tiny map\n"
      "slip_success_prob = 1\n"
      "; another comment\n"
      "horizon = 4\n"
      "layout:\n"
      "#.#\n"
      "S.T\n");
  EXPECT_EQ(spec.cells.size(), 4u);
  EXPECT_EQ(spec.slip_success_prob, 1.0);
  EXPECT_EQ(spec.horizon, 4);
  EXPECT_EQ(spec.start_cell, (Cell{0, 1}));
  EXPECT_EQ(spec.noisy_tv_cell, (Cell{2, 1}));
}

TEST(ConfigTextTest, RejectsDuplicatesAndGarbage) {
  EXPECT_THROW(ParseGridworldSpec("horizon = 3\nhorizon = 4\nlayout:\n..\n"),
               Error);
  EXPECT_THROW(ParseGridworldSpec("horizon = x\nlayout:\n..\n"), Error);
  EXPECT_THROW(ParseGridworldSpec("horizon = 3\n"), Error);
  EXPECT_THROW(ParseGridworldSpec("horizon 3\nlayout:\n..\n"), Error);
  EXPECT_THROW(ParseGridworldSpec("layout:\nTT\n"), Error);
}

}  // namespace
}  // namespace smm

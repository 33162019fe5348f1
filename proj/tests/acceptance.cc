// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <string>

#include "lab/experiment.h"
#include "smm/smm.h"

namespace smm {
namespace {

namespace fs = std::filesystem;
using lab::DefaultConfig;
using lab::Kind;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* format, double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, x);
  return buf;
}

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

Gridworld DidacticCross(std::optional<double> xi = std::nullopt) {
  return BuildCrossGridworld(CrossSpec(5, 2, 0.1, xi, 30));
}

Outcome Ac1() {
  const auto start = std::chrono::steady_clock::now();
  const auto runs = lab::RunVerifyProp1(DefaultConfig(Kind::kVerifyProp1), nullptr);
  double worst = 0.0;
  for (const auto& r : runs) worst = std::max(worst, r.check.gap);
  const double t = Seconds(start);
  return {runs.size() == 100 && worst <= 1e-10 && t < 5.0,
          "instances=" + std::to_string(runs.size()) + " max_gap=" +
              Fmt("%.3g", worst) + " time_s=" + Fmt("%.2f", t)};
}

Outcome Ac2() {
  const auto start = std::chrono::steady_clock::now();
  const auto runs = lab::RunGoalTarget(DefaultConfig(Kind::kGoalTarget), nullptr);
  std::map<double, double> worst_gap;
  std::map<double, int> beaten;
  for (const auto& r : runs) {
    worst_gap[r.epsilon] = std::max(worst_gap[r.epsilon], r.linf_gap);
    beaten[r.epsilon] += r.f_sqrt_rule > r.min_f_random * (1.0 + 1e-12);
  }
  bool ok = runs.size() == 100;
  std::string detail;
  for (const auto& [eps, gap] : worst_gap) {
    ok = ok && gap <= 1e-4 && beaten[eps] == 0;
    detail += "eps=" + Fmt("%g", eps) + ": max_linf=" + Fmt("%.3g", gap) +
              " random_beats_rule=" + std::to_string(beaten[eps]) + "/50; ";
  }
  const double t = Seconds(start);
  return {ok && t < 30.0, detail + "time_s=" + Fmt("%.2f", t)};
}

Outcome Ac3() {
  Rng rng(303);
  std::vector<Cell> corridor;
  for (int x = 0; x < 6; ++x) corridor.push_back({x, 0});
  int violations = 0;
  for (uint64_t i = 0; i < 100; ++i) {
    const TabularMDP mdp = RandomMDP(6, 3, 1 + i % 15, DeriveSeed(303, i));
    const Policy pi = RandomPolicy(6, 3, mdp.horizon(), DeriveSeed(304, i));
    const std::size_t goal = rng.UniformIndex(6);
    const GoalSpec spec{StateMarginal::PointMass(6, goal), static_cast<double>(i % 3)};
    const ReachProbability r = PerEpisodeReachProbability(mdp, pi, spec, corridor, goal);
    violations += r.p_any < r.p_uniform_t;
  }

  const Gridworld w = DidacticCross();
  const std::size_t S = w.mdp.num_states();
  PlayConfig play;
  play.iterations = 100;
  const auto st = RunFictitiousPlay(w.mdp, StateMarginal::Uniform(S), play);
  const HistoricalAveragePolicy ha(st.iterates);
  const GoalSpec far{StateMarginal::PointMass(S, 0), 0.0};
  Rng sampler(305);
  const HittingEstimate h =
      ExpectedHittingEpisodes(w.mdp, ha, far, w.cells, 0, sampler, 10000);
  const double rel = std::abs(h.monte_carlo - h.analytic) / h.analytic;
  return {violations == 0 && rel <= 0.1,
          "reach_bound_violations=" + std::to_string(violations) +
              "/100 hitting_analytic=" + Fmt("%.4f", h.analytic) +
              " hitting_mc=" + Fmt("%.4f", h.monte_carlo) +
              " rel_err=" + Fmt("%.4f", rel)};
}

Outcome Ac4() {
  const Gridworld w = DidacticCross(0.5);
  const std::size_t S = w.mdp.num_states();
  const Policy pi = RandomPolicy(S, 4, 30, 404);
  const StateMarginal exact = FiniteHorizonMarginal(w.mdp, pi);
  Rng rng(405);
  std::vector<std::size_t> states;
  for (int e = 0; e < 100000; ++e) {
    const Trajectory t = SampleEpisode(w.mdp, pi, rng);
    states.insert(states.end(), t.states.begin(), t.states.end());
  }
  const double tv = TotalVariation(exact, EmpiricalMarginal(states, S));

  double worst = 0.0;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const Policy stat = RandomPolicy(S, 4, 1, DeriveSeed(406, seed));
    StationaryOptions opts;
    opts.tol = 1e-12;
    const auto r = StationaryDistribution(w.mdp, stat, opts);
    const Matrix chain = PolicyTransitionMatrix(w.mdp, stat.step(0));
    worst = std::max(worst, StationaryResidual(chain, r.marginal.probs(), opts.damping));
  }
  return {tv <= 0.01 && worst <= 1e-10,
          "tv=" + Fmt("%.5f", tv) + " max_stationary_residual=" + Fmt("%.3g", worst)};
}

Outcome Ac5() {
  const auto start = std::chrono::steady_clock::now();
  const auto runs = lab::RunOscillation(DefaultConfig(Kind::kOscillation), nullptr);
  double greedy_rate = 1.0, smm_kl = 0.0;
  for (const auto& r : runs) {
    if (r.method == "greedy") greedy_rate = std::min(greedy_rate, r.alternation_rate);
    if (r.method == "smm") smm_kl = std::max(smm_kl, r.final_kl);
  }
  const double t = Seconds(start);
  return {greedy_rate >= 0.8 && smm_kl <= 0.05 && t < 120.0,
          "greedy_alternation=" + Fmt("%.3f", greedy_rate) +
              " fp_final_kl=" + Fmt("%.5f", smm_kl) + " time_s=" + Fmt("%.2f", t)};
}

Outcome Ac6() {
  const auto start = std::chrono::steady_clock::now();
  const lab::ExperimentConfig c = DefaultConfig(Kind::kStochasticitySweep);
  const auto points = lab::RunStochasticitySweep(c, nullptr);
  // Mean over seeds per (method, xi).
  std::map<std::string, std::map<double, double>> mean;
  for (const auto& p : points) {
    mean[p.method][p.xi] += p.entropy / static_cast<double>(c.seeds.size());
  }
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& [xi, h] : mean["smm"]) {
    lo = std::min(lo, h);
    hi = std::max(hi, h);
  }
  bool monotone = true;
  std::string inverse;
  double prev = INFINITY;
  for (const auto& [xi, h] : mean["inverse"]) {
    monotone = monotone && h <= prev;
    prev = h;
    inverse += Fmt("%.4f", h) + " ";
  }
  const double t = Seconds(start);
  return {hi - lo <= 0.1 && monotone && t < 300.0,
          "smm_range=" + Fmt("%.5f", hi - lo) + " inverse_by_xi=[ " + inverse +
              "] inverse_nonincreasing=" + (monotone ? "yes" : "no") +
              " time_s=" + Fmt("%.2f", t)};
}

Outcome Ac7() {
  const auto runs = lab::RunHaAblation(DefaultConfig(Kind::kHaAblation), nullptr);
  int violations = 0;
  std::map<std::string, std::pair<double, double>> sums;
  for (const auto& r : runs) {
    violations += r.ha_entropy < r.final_entropy - 1e-9;
    sums[r.method].first += r.ha_entropy;
    sums[r.method].second += r.final_entropy;
  }
  int kinds_ok = 0;
  for (const auto& [m, s] : sums) kinds_ok += s.first >= s.second;
  return {violations == 0 && kinds_ok >= 4 && sums.size() == 5,
          "runs=" + std::to_string(runs.size()) +
              " violations=" + std::to_string(violations) +
              " kinds_with_ha_ge_final=" + std::to_string(kinds_ok) + "/" +
              std::to_string(sums.size())};
}

bool SameMetrics(const std::vector<IterationMetrics>& a,
                 const std::vector<IterationMetrics>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].entropy_ha != b[i].entropy_ha || a[i].kl_to_target != b[i].kl_to_target ||
        a[i].objective_value != b[i].objective_value ||
        a[i].mass_left != b[i].mass_left || a[i].mass_right != b[i].mass_right) {
      return false;
    }
  }
  return true;
}

Outcome Ac8() {
  const Gridworld w = DidacticCross();
  const std::size_t S = w.mdp.num_states();
  const StateMarginal target = StateMarginal::Uniform(S);

  bool identical = true;
  for (Mode mode : {Mode::kExact, Mode::kSampled}) {
    for (uint64_t seed = 0; seed < 4; ++seed) {
      Sm4Config c;
      c.num_skills = 1;
      c.play.iterations = 50;
      c.play.mode = mode;
      c.play.seed = seed;
      c.play.init = InitPolicy::kRandom;
      c.play.sides = LeftRightSides(w);
      c.discriminator =
          mode == Mode::kExact ? DiscriminatorMode::kExact : DiscriminatorMode::kFitted;
      identical = identical && SameMetrics(RunSm4(w.mdp, target, c).metrics,
                                           RunFictitiousPlay(w.mdp, target, c.play).metrics);
    }
  }

  double linearity = 0.0, min_gap = INFINITY;
  for (std::size_t n : {2, 4}) {
    for (Mode mode : {Mode::kExact, Mode::kSampled}) {
      Sm4Config c;
      c.num_skills = n;
      c.discriminator = DiscriminatorMode::kFitted;
      c.play.iterations = 30;
      c.play.mode = mode;
      c.play.init = InitPolicy::kRandom;
      const MixtureState st = RunSm4(w.mdp, target, c);
      for (double g : st.jensen_gaps) min_gap = std::min(min_gap, g);
      const StateMarginal mix =
          MixtureMarginal(ComponentAverageMarginals(st, w.mdp), st.prior);
      std::vector<Policy> pooled;
      for (const auto& row : st.component_policies) {
        pooled.insert(pooled.end(), row.begin(), row.end());
      }
      const StateMarginal flat = HistoricalAveragePolicy(pooled).Marginal(w.mdp);
      for (std::size_t s = 0; s < S; ++s) {
        linearity = std::max(linearity, std::abs(mix[s] - flat[s]));
      }
    }
  }

  const lab::ExperimentConfig ablation = DefaultConfig(Kind::kSm4Ablation);
  const auto runs = lab::RunSm4Ablation(ablation, nullptr);
  std::map<std::size_t, double> mean_kl;
  for (const auto& r : runs) {
    mean_kl[r.skills] += r.final_kl / static_cast<double>(ablation.seeds.size());
  }
  bool ordered = true;
  double prev = INFINITY;
  std::string kls;
  for (const auto& [n, kl] : mean_kl) {
    ordered = ordered && kl <= prev;
    prev = kl;
    kls += "n" + std::to_string(n) + "=" + Fmt("%.5f", kl) + " ";
  }
  return {identical && linearity <= 1e-12 && min_gap >= -1e-10 && ordered,
          std::string("n1_bit_identical=") + (identical ? "yes" : "no") +
              " linearity=" + Fmt("%.3g", linearity) +
              " min_jensen_gap=" + Fmt("%.3g", min_gap) + " mean_final_kl: " + kls +
              "nonincreasing=" + (ordered ? "yes" : "no")};
}

Outcome Ac9() {
  const auto start = std::chrono::steady_clock::now();
  const fs::path root = fs::temp_directory_path() / "smm_acceptance_determinism";
  fs::remove_all(root);
  std::size_t csvs = 0, differing = 0;
  for (Kind k : lab::kAllKinds) {
    std::map<std::string, std::string> first;
    for (int pass = 0; pass < 2; ++pass) {
      lab::ExperimentConfig c = DefaultConfig(k);
      c.out_dir = (root / (std::string(lab::KindName(k)) + std::to_string(pass))).string();
      const lab::RunManifest m = lab::Run(c);
      for (const auto& rel : m.artifacts) {
        if (fs::path(rel).extension() != ".csv") continue;
        const std::string bytes = ReadTextFile((fs::path(c.out_dir) / rel).string());
        if (pass == 0) {
          first[rel] = bytes;
        } else {
          ++csvs;
          auto it = first.find(rel);
          differing += it == first.end() || it->second != bytes;
        }
      }
    }
  }
  fs::remove_all(root);
  const double t = Seconds(start);
  return {csvs > 0 && differing == 0 && t < 600.0,
          "csv_files=" + std::to_string(csvs) +
              " differing=" + std::to_string(differing) +
              " two_suite_runs_s=" + Fmt("%.2f", t)};
}

}  // namespace
}  // namespace smm

int main() {
  using Check = std::function<smm::Outcome()>;
  const std::pair<const char*, Check> checks[] = {
      {"AC1", smm::Ac1}, {"AC2", smm::Ac2}, {"AC3", smm::Ac3},
      {"AC4", smm::Ac4}, {"AC5", smm::Ac5}, {"AC6", smm::Ac6},
      {"AC7", smm::Ac7}, {"AC8", smm::Ac8}, {"AC9", smm::Ac9}};
  int failed = 0;
  for (const auto& [name, check] : checks) {
    smm::Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %s %s\n", name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}

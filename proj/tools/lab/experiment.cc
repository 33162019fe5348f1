#include "lab/experiment.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

#ifndef SMM_VERSION
#define SMM_VERSION "unknown"
#endif

namespace smm::lab {
namespace {

namespace fs = std::filesystem;

constexpr const char* kKindNames[] = {
    "marginal-heatmap", "oscillation",  "stochasticity-sweep", "sm4-ablation",
    "ha-ablation",      "goal-target",  "verify-prop1"};

const std::set<std::string> kConfigKeys = {
    "kind",      "methods",   "iterations",    "seeds",
    "xi_grid",   "skills",    "instances",     "mode",
    "episodes_per_iter",      "init",          "discriminator",
    "marginal",  "states",    "actions",       "epsilon",
    "slip_success_prob",      "xi",            "horizon"};

const std::set<std::string> kGridworldKeys = {"slip_success_prob", "xi",
                                              "horizon"};

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitList(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double ToDouble(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  Require(used == text.size() && used > 0, ErrorCode::kConfig,
          "bad number for '" + key + "': " + text);
  return v;
}

uint64_t ToCount(const std::string& key, const std::string& text) {
  Require(!text.empty() && text.find_first_not_of("0123456789") ==
                               std::string::npos,
          ErrorCode::kConfig,
          "expected a nonnegative integer for '" + key + "': " + text);
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    Fail(ErrorCode::kConfig, "integer out of range for '" + key + "'");
  }
}

std::string JoinDoubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += FormatDouble(v[i]);
  }
  return out;
}

template <typename T>
std::string JoinInts(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

std::string JoinStrings(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += v[i];
  }
  return out;
}

bool IsBonusMethod(const std::string& m) {
  return m == "count" || m == "pseudocount" || m == "forward" ||
         m == "inverse" || m == "rnd";
}

GridworldSpec DidacticCross() {
  return CrossSpec(5, 2, 0.1, std::nullopt, 30);
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Results keep index
// order; the lowest-index exception is rethrown.
template <typename T>
std::vector<T> ParallelMap(std::size_t n, std::size_t jobs,
                           const std::function<T(std::size_t)>& fn) {
  std::vector<std::optional<T>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(jobs, n));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<T> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::vector<double> Dirichlet(std::size_t n, Rng& rng) {
  std::vector<double> w(n);
  double sum = 0.0;
  for (double& x : w) {
    x = -std::log(1.0 - rng.Uniform());
    sum += x;
  }
  for (double& x : w) x /= sum;
  return w;
}

Gridworld BuildWorld(const GridworldSpec& env, std::optional<double> xi) {
  GridworldSpec spec = env;
  if (xi) spec.noisy_tv_xi = *xi;
  return BuildCrossGridworld(spec);
}

PlayConfig MakePlay(const ExperimentConfig& c, const Gridworld& w,
                    uint64_t seed) {
  PlayConfig p;
  p.iterations = c.iterations;
  p.mode = c.mode;
  p.episodes_per_iter = c.episodes_per_iter;
  p.seed = seed;
  p.init = c.init;
  p.marginal_kind = c.marginal_kind;
  p.sides = LeftRightSides(w);
  return p;
}

struct MethodResult {
  StateMarginal evaluated;
  std::vector<IterationMetrics> metrics;
};

// SMM is evaluated through its historical average; greedy, maxent and the
// bonus baselines through their final policy.
MethodResult RunMethod(const std::string& method, const Gridworld& w,
                       const ExperimentConfig& c, uint64_t seed) {
  const TabularMDP& mdp = w.mdp;
  const std::size_t S = mdp.num_states();
  const StateMarginal target = StateMarginal::Uniform(S);
  const PlayConfig play = MakePlay(c, w, seed);
  if (method == "smm") {
    auto st = RunFictitiousPlay(mdp, target, play);
    return {HistoricalAverageEvaluation(st, play), std::move(st.metrics)};
  }
  if (method == "greedy") {
    auto st = RunGreedyAlternation(mdp, target, play);
    return {st.iterate_marginals.back(), std::move(st.metrics)};
  }
  if (method == "maxent") {
    const SolveReport r = SoftValueIteration(mdp, RewardTable::Zero(S), 1.0);
    StateMarginal rho =
        c.marginal_kind == MarginalKind::kStationary
            ? StationaryDistribution(mdp, r.policy.FirstStep(), play.stationary)
                  .marginal
            : FiniteHorizonMarginal(mdp, r.policy);
    IterationMetrics m;
    m.iteration = 1;
    m.entropy_ha = Entropy(rho);
    m.kl_to_target = SafeKl(rho, target);
    for (std::size_t s = 0; s < S; ++s) {
      if (play.sides[s] < 0) m.mass_left += rho[s];
      if (play.sides[s] > 0) m.mass_right += rho[s];
    }
    return {std::move(rho), {m}};
  }
  IntrinsicConfig ic;
  ic.play = play;
  ic.coords = w.Coordinates();
  auto st = RunIntrinsicLoop(mdp, ParseBonusKind(method),
                             RewardTable::Zero(S), ic);
  return {st.iterate_marginals.back(), std::move(st.metrics)};
}

std::string SeedTag(uint64_t seed) { return "seed" + std::to_string(seed); }

}  // namespace

const char* KindName(Kind kind) {
  return kKindNames[static_cast<int>(kind)];
}

Kind ParseKind(const std::string& name) {
  for (Kind k : kAllKinds) {
    if (name == KindName(k)) return k;
  }
  Fail(ErrorCode::kConfig, "unknown experiment kind: " + name);
}

bool IsKnownMethod(const std::string& name) {
  return name == "smm" || name == "greedy" || name == "maxent" ||
         IsBonusMethod(name);
}

ExperimentConfig DefaultConfig(Kind kind) {
  ExperimentConfig c;
  c.kind = kind;
  c.env = DidacticCross();
  c.seeds = {0};
  c.out_dir = std::string("out/") + KindName(kind);
  switch (kind) {
    case Kind::kMarginalHeatmap:
      c.env.noisy_tv_xi = 1.0;
      c.methods = {"smm", "count", "forward", "inverse", "rnd"};
      c.iterations = 100;
      break;
    case Kind::kOscillation:
      c.methods = {"smm", "greedy"};
      c.iterations = 200;
      break;
    case Kind::kStochasticitySweep:
      c.methods = {"smm", "inverse", "forward", "count", "maxent"};
      c.xi_grid = {0.0, 0.25, 0.5, 0.75, 1.0};
      c.iterations = 100;
      c.marginal_kind = MarginalKind::kStationary;
      break;
    case Kind::kSm4Ablation:
      c.skills = {1, 2, 4};
      c.seeds = {0, 1, 2, 3};
      c.iterations = 200;
      c.init = InitPolicy::kRandom;
      break;
    case Kind::kHaAblation:
      c.methods = {"count", "pseudocount", "forward", "inverse", "rnd"};
      c.seeds = {0, 1, 2, 3};
      c.iterations = 50;
      c.mode = Mode::kSampled;
      c.init = InitPolicy::kRandom;
      break;
    case Kind::kGoalTarget:
      c.instances = 50;
      c.states = 10;
      c.epsilons = {0.0, 1.0};
      break;
    case Kind::kVerifyProp1:
      c.instances = 100;
      c.states = 6;
      c.actions = 3;
      break;
  }
  return c;
}

ExperimentConfig ParseExperimentConfig(Kind kind, const std::string& text) {
  const ConfigText parsed = ParseConfigText(text);
  ExperimentConfig c = DefaultConfig(kind);
  for (const auto& [key, value] : parsed.values) {
    Require(kConfigKeys.count(key) > 0, ErrorCode::kConfig,
            "unknown config key: " + key);
  }
  const auto& v = parsed.values;
  auto get = [&](const char* key) -> std::optional<std::string> {
    auto it = v.find(key);
    if (it == v.end()) return std::nullopt;
    return it->second;
  };
  if (auto s = get("kind")) {
    Require(ParseKind(*s) == kind, ErrorCode::kConfig,
            "config kind '" + *s + "' does not match " + KindName(kind));
  }
  if (auto s = get("methods")) c.methods = SplitList(*s);
  if (auto s = get("iterations")) c.iterations = ToCount("iterations", *s);
  if (auto s = get("seeds")) {
    c.seeds.clear();
    for (const auto& item : SplitList(*s)) {
      c.seeds.push_back(ToCount("seeds", item));
    }
  }
  if (auto s = get("xi_grid")) {
    c.xi_grid.clear();
    for (const auto& item : SplitList(*s)) {
      c.xi_grid.push_back(ToDouble("xi_grid", item));
    }
  }
  if (auto s = get("skills")) {
    c.skills.clear();
    for (const auto& item : SplitList(*s)) {
      c.skills.push_back(ToCount("skills", item));
    }
  }
  if (auto s = get("instances")) c.instances = ToCount("instances", *s);
  if (auto s = get("mode")) {
    Require(*s == "exact" || *s == "sampled", ErrorCode::kConfig,
            "mode must be exact or sampled");
    c.mode = *s == "exact" ? Mode::kExact : Mode::kSampled;
  }
  if (auto s = get("episodes_per_iter")) {
    c.episodes_per_iter = ToCount("episodes_per_iter", *s);
  }
  if (auto s = get("init")) {
    Require(*s == "uniform" || *s == "random", ErrorCode::kConfig,
            "init must be uniform or random");
    c.init = *s == "uniform" ? InitPolicy::kUniform : InitPolicy::kRandom;
  }
  if (auto s = get("discriminator")) {
    Require(*s == "exact" || *s == "fitted", ErrorCode::kConfig,
            "discriminator must be exact or fitted");
    c.discriminator =
        *s == "exact" ? DiscriminatorMode::kExact : DiscriminatorMode::kFitted;
  }
  if (auto s = get("marginal")) {
    Require(*s == "finite" || *s == "stationary", ErrorCode::kConfig,
            "marginal must be finite or stationary");
    c.marginal_kind = *s == "finite" ? MarginalKind::kFiniteHorizon
                                     : MarginalKind::kStationary;
  }
  if (auto s = get("states")) c.states = ToCount("states", *s);
  if (auto s = get("actions")) c.actions = ToCount("actions", *s);
  if (auto s = get("epsilon")) {
    c.epsilons.clear();
    for (const auto& item : SplitList(*s)) {
      c.epsilons.push_back(ToDouble("epsilon", item));
    }
  }

  // Environment: the config's own layout, or the kind's default layout with
  // any gridworld keys applied on top.
  ConfigText env_text;
  if (!parsed.layout.empty()) {
    env_text.layout = parsed.layout;
  } else {
    env_text = ParseConfigText(SerializeGridworldSpec(c.env));
  }
  for (const auto& key : kGridworldKeys) {
    if (auto s = get(key.c_str())) env_text.values[key] = *s;
  }
  c.env = GridworldSpecFromConfig(env_text);
  return c;
}

std::string CanonicalConfigText(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "kind = " << KindName(c.kind) << "\n";
  out << "methods = " << JoinStrings(c.methods) << "\n";
  out << "iterations = " << c.iterations << "\n";
  out << "seeds = " << JoinInts(c.seeds) << "\n";
  out << "xi_grid = " << JoinDoubles(c.xi_grid) << "\n";
  out << "skills = " << JoinInts(c.skills) << "\n";
  out << "instances = " << c.instances << "\n";
  out << "mode = " << (c.mode == Mode::kExact ? "exact" : "sampled") << "\n";
  out << "episodes_per_iter = " << c.episodes_per_iter << "\n";
  out << "init = " << (c.init == InitPolicy::kUniform ? "uniform" : "random")
      << "\n";
  out << "discriminator = "
      << (c.discriminator == DiscriminatorMode::kExact ? "exact" : "fitted")
      << "\n";
  out << "marginal = "
      << (c.marginal_kind == MarginalKind::kFiniteHorizon ? "finite"
                                                          : "stationary")
      << "\n";
  out << "states = " << c.states << "\n";
  out << "actions = " << c.actions << "\n";
  out << "epsilon = " << JoinDoubles(c.epsilons) << "\n";
  out << SerializeGridworldSpec(c.env);
  return out.str();
}

uint64_t Fnv1a64(const std::string& bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void Validate(const ExperimentConfig& c) {
  Require(!c.seeds.empty(), ErrorCode::kConfig, "seeds must be nonempty");
  Require(c.iterations >= 1, ErrorCode::kConfig, "iterations must be >= 1");
  Require(c.jobs >= 1, ErrorCode::kConfig, "jobs must be >= 1");
  for (const auto& m : c.methods) {
    Require(IsKnownMethod(m), ErrorCode::kConfig, "unknown method: " + m);
  }
  const bool uses_methods =
      c.kind == Kind::kMarginalHeatmap || c.kind == Kind::kOscillation ||
      c.kind == Kind::kStochasticitySweep || c.kind == Kind::kHaAblation;
  if (uses_methods) {
    Require(!c.methods.empty(), ErrorCode::kConfig, "methods must be nonempty");
  } else {
    Require(c.methods.empty(), ErrorCode::kConfig,
            std::string("methods are not used by ") + KindName(c.kind));
  }
  if (c.kind == Kind::kHaAblation) {
    for (const auto& m : c.methods) {
      Require(IsBonusMethod(m), ErrorCode::kConfig,
              "ha-ablation takes bonus methods only, got " + m);
    }
  }
  if (c.mode == Mode::kSampled) {
    Require(c.episodes_per_iter >= 1, ErrorCode::kConfig,
            "episodes_per_iter must be >= 1");
  }
  switch (c.kind) {
    case Kind::kStochasticitySweep:
      Require(!c.xi_grid.empty(), ErrorCode::kConfig, "xi_grid is empty");
      for (double xi : c.xi_grid) {
        Require(xi >= 0.0 && xi <= 1.0, ErrorCode::kConfig,
                "xi_grid values must lie in [0, 1]");
      }
      Require(c.env.noisy_tv_cell.has_value(), ErrorCode::kConfig,
              "stochasticity-sweep needs a TV cell in the layout");
      break;
    case Kind::kSm4Ablation:
      Require(!c.skills.empty(), ErrorCode::kConfig, "skills is empty");
      for (auto n : c.skills) {
        Require(n >= 1, ErrorCode::kConfig, "skills must be >= 1");
      }
      break;
    case Kind::kGoalTarget:
      Require(c.instances >= 1, ErrorCode::kConfig, "instances must be >= 1");
      Require(c.states >= 1 && c.states <= 50, ErrorCode::kConfig,
              "goal-target states must lie in [1, 50]");
      Require(!c.epsilons.empty(), ErrorCode::kConfig, "epsilon is empty");
      for (double e : c.epsilons) {
        Require(e >= 0.0, ErrorCode::kConfig, "epsilon must be >= 0");
      }
      break;
    case Kind::kVerifyProp1:
      Require(c.instances >= 1, ErrorCode::kConfig, "instances must be >= 1");
      Require(c.states >= 1 && c.actions >= 1, ErrorCode::kConfig,
              "states and actions must be >= 1");
      break;
    default:
      break;
  }
  // Builds the environment once so layout errors surface before any run.
  BuildCrossGridworld(c.env);
}

std::string RunManifest::ToJson() const {
  nlohmann::ordered_json j;
  j["kind"] = kind;
  j["config_hash"] = config_hash;
  j["artifacts"] = artifacts;
  j["versions"] = versions;
  j["timings_s"] = timings_s;
  return j.dump(2) + "\n";
}

ArtifactSink::ArtifactSink(std::string out_dir) : out_dir_(std::move(out_dir)) {}

void ArtifactSink::Write(const std::string& relative_path,
                         const std::string& contents) {
  const fs::path dir(out_dir_);
  if (!fs::exists(dir)) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    Require(!ec, ErrorCode::kIo, "cannot create " + out_dir_);
    created_dir_ = true;
  }
  const fs::path path = dir / relative_path;
  const bool existed = fs::exists(path);
  try {
    WriteTextFile(path.string(), contents);
  } catch (...) {
    std::error_code ec;
    if (!existed && fs::is_regular_file(path, ec)) fs::remove(path, ec);
    throw;
  }
  written_.push_back(relative_path);
}

void ArtifactSink::Abort() {
  std::error_code ec;
  for (const auto& rel : written_) fs::remove(fs::path(out_dir_) / rel, ec);
  written_.clear();
  if (created_dir_) fs::remove(out_dir_, ec);
}

double AlternationRate(const std::vector<IterationMetrics>& metrics,
                       std::size_t burn_in) {
  std::size_t flips = 0, pairs = 0;
  for (std::size_t i = burn_in + 1; i < metrics.size(); ++i) {
    const double a = metrics[i - 1].mass_left - metrics[i - 1].mass_right;
    const double b = metrics[i].mass_left - metrics[i].mass_right;
    ++pairs;
    if (a * b < 0.0) ++flips;
  }
  return pairs == 0 ? 0.0 : static_cast<double>(flips) / pairs;
}

std::vector<HeatmapRun> RunMarginalHeatmap(const ExperimentConfig& c,
                                           ArtifactSink* sink) {
  const Gridworld w = BuildCrossGridworld(c.env);
  const std::size_t cells = c.methods.size() * c.seeds.size();
  auto runs = ParallelMap<HeatmapRun>(cells, c.jobs, [&](std::size_t i) {
    const std::string& method = c.methods[i / c.seeds.size()];
    const uint64_t seed = c.seeds[i % c.seeds.size()];
    MethodResult r = RunMethod(method, w, c, seed);
    return HeatmapRun{method, seed, std::move(r.evaluated),
                      std::move(r.metrics)};
  });
  if (sink) {
    for (const auto& r : runs) {
      const std::string tag = r.method + "_" + SeedTag(r.seed);
      sink->Write("metrics_" + tag + ".csv", MetricsCsv(r.metrics).ToString());
      sink->Write("marginal_" + tag + ".csv", MarginalCsv(r.marginal).ToString());
      HeatmapOptions opts;
      opts.title = r.method + " (seed " + std::to_string(r.seed) + ")";
      sink->Write("heatmap_" + tag + ".svg",
                  RenderHeatmapSvg(r.marginal, w.cells, opts));
    }
  }
  return runs;
}

std::vector<OscillationRun> RunOscillation(const ExperimentConfig& c,
                                           ArtifactSink* sink) {
  const Gridworld w = BuildCrossGridworld(c.env);
  const std::size_t cells = c.methods.size() * c.seeds.size();
  auto runs = ParallelMap<OscillationRun>(cells, c.jobs, [&](std::size_t i) {
    const std::string& method = c.methods[i / c.seeds.size()];
    const uint64_t seed = c.seeds[i % c.seeds.size()];
    MethodResult r = RunMethod(method, w, c, seed);
    OscillationRun out;
    out.method = method;
    out.seed = seed;
    out.alternation_rate = AlternationRate(r.metrics, 10);
    out.final_kl = r.metrics.back().kl_to_target;
    out.metrics = std::move(r.metrics);
    return out;
  });
  if (sink) {
    CsvTable summary({"method", "seed", "alternation_rate", "final_kl[nats]"});
    for (const auto& r : runs) {
      sink->Write("trace_" + r.method + "_" + SeedTag(r.seed) + ".csv",
                  MetricsCsv(r.metrics).ToString());
      summary.AddRow({r.method, std::to_string(r.seed),
                      FormatDouble(r.alternation_rate),
                      FormatDouble(r.final_kl)});
    }
    sink->Write("oscillation_summary.csv", summary.ToString());
  }
  return runs;
}

std::vector<SweepPoint> RunStochasticitySweep(const ExperimentConfig& c,
                                              ArtifactSink* sink) {
  const std::size_t per_method = c.xi_grid.size() * c.seeds.size();
  const std::size_t cells = c.methods.size() * per_method;
  auto points = ParallelMap<SweepPoint>(cells, c.jobs, [&](std::size_t i) {
    SweepPoint p;
    p.method = c.methods[i / per_method];
    p.xi = c.xi_grid[(i % per_method) / c.seeds.size()];
    p.seed = c.seeds[i % c.seeds.size()];
    const Gridworld w = BuildWorld(c.env, p.xi);
    p.entropy = Entropy(RunMethod(p.method, w, c, p.seed).evaluated);
    return p;
  });
  if (sink) {
    for (const auto& method : c.methods) {
      CsvTable table({"xi", "seed", "entropy[nats]"});
      for (const auto& p : points) {
        if (p.method != method) continue;
        table.AddRow({FormatDouble(p.xi), std::to_string(p.seed),
                      FormatDouble(p.entropy)});
      }
      sink->Write("sweep_" + method + ".csv", table.ToString());
    }
  }
  return points;
}

std::vector<Sm4Run> RunSm4Ablation(const ExperimentConfig& c,
                                   ArtifactSink* sink) {
  const Gridworld w = BuildCrossGridworld(c.env);
  const StateMarginal target = StateMarginal::Uniform(w.mdp.num_states());
  struct Result {
    Sm4Run run;
    std::vector<std::vector<double>> component_entropy;
    std::vector<StateMarginal> components;
  };
  const std::size_t cells = c.skills.size() * c.seeds.size();
  auto results = ParallelMap<Result>(cells, c.jobs, [&](std::size_t i) {
    Sm4Config sc;
    sc.play = MakePlay(c, w, c.seeds[i % c.seeds.size()]);
    sc.num_skills = c.skills[i / c.seeds.size()];
    sc.discriminator = c.discriminator;
    MixtureState st = RunSm4(w.mdp, target, sc);
    Result out;
    out.run.skills = sc.num_skills;
    out.run.seed = sc.play.seed;
    out.run.final_kl = st.metrics.back().kl_to_target;
    out.run.final_entropy = st.metrics.back().entropy_ha;
    out.run.min_jensen_gap =
        st.jensen_gaps.empty()
            ? 0.0
            : *std::min_element(st.jensen_gaps.begin(), st.jensen_gaps.end());
    out.run.metrics = std::move(st.metrics);
    out.component_entropy = std::move(st.component_entropy);
    out.components = ComponentAverageMarginals(st, w.mdp);
    return out;
  });
  if (sink) {
    CsvTable summary({"skills", "seed", "final_kl[nats]", "final_entropy[nats]",
                      "min_jensen_gap[nats]"});
    for (const auto& r : results) {
      const std::string tag =
          "n" + std::to_string(r.run.skills) + "_" + SeedTag(r.run.seed);
      sink->Write("sm4_" + tag + "_metrics.csv",
                  MetricsCsv(r.run.metrics).ToString());
      std::vector<std::string> header = {"iteration"};
      for (std::size_t z = 0; z < r.run.skills; ++z) {
        header.push_back("entropy_z" + std::to_string(z) + "[nats]");
      }
      CsvTable per_z(header);
      for (std::size_t m = 0; m < r.component_entropy.size(); ++m) {
        std::vector<std::string> row = {std::to_string(m + 1)};
        for (double h : r.component_entropy[m]) row.push_back(FormatDouble(h));
        per_z.AddRow(std::move(row));
      }
      sink->Write("sm4_" + tag + "_components.csv", per_z.ToString());
      for (std::size_t z = 0; z < r.components.size(); ++z) {
        HeatmapOptions opts;
        opts.title = "skill " + std::to_string(z) + " of " +
                     std::to_string(r.run.skills);
        sink->Write("sm4_" + tag + "_z" + std::to_string(z) + ".svg",
                    RenderHeatmapSvg(r.components[z], w.cells, opts));
      }
      summary.AddRow({std::to_string(r.run.skills), std::to_string(r.run.seed),
                      FormatDouble(r.run.final_kl),
                      FormatDouble(r.run.final_entropy),
                      FormatDouble(r.run.min_jensen_gap)});
    }
    sink->Write("sm4_summary.csv", summary.ToString());
  }
  std::vector<Sm4Run> runs;
  for (auto& r : results) runs.push_back(std::move(r.run));
  return runs;
}

std::vector<HaRun> RunHaAblation(const ExperimentConfig& c,
                                 ArtifactSink* sink) {
  const Gridworld w = BuildCrossGridworld(c.env);
  const std::size_t S = w.mdp.num_states();
  struct Result {
    HaRun run;
    std::vector<IterationMetrics> metrics;
  };
  const std::size_t cells = c.methods.size() * c.seeds.size();
  auto results = ParallelMap<Result>(cells, c.jobs, [&](std::size_t i) {
    IntrinsicConfig ic;
    ic.play = MakePlay(c, w, c.seeds[i % c.seeds.size()]);
    ic.use_historical_average = true;
    ic.coords = w.Coordinates();
    const std::string& method = c.methods[i / c.seeds.size()];
    auto st = RunIntrinsicLoop(w.mdp, ParseBonusKind(method),
                               RewardTable::Zero(S), ic);
    Result out;
    out.run.method = method;
    out.run.seed = ic.play.seed;
    out.run.final_entropy = Entropy(st.iterate_marginals.back());
    out.run.ha_entropy = Entropy(HistoricalAverageEvaluation(st, ic.play));
    out.metrics = std::move(st.metrics);
    return out;
  });
  if (sink) {
    CsvTable summary(
        {"method", "seed", "final_entropy[nats]", "ha_entropy[nats]"});
    for (const auto& r : results) {
      sink->Write("ha_" + r.run.method + "_" + SeedTag(r.run.seed) + ".csv",
                  MetricsCsv(r.metrics).ToString());
      summary.AddRow({r.run.method, std::to_string(r.run.seed),
                      FormatDouble(r.run.final_entropy),
                      FormatDouble(r.run.ha_entropy)});
    }
    sink->Write("ha_ablation.csv", summary.ToString());
  }
  std::vector<HaRun> runs;
  for (auto& r : results) runs.push_back(std::move(r.run));
  return runs;
}

std::vector<GoalInstance> RunGoalTarget(const ExperimentConfig& c,
                                        ArtifactSink* sink) {
  const std::size_t per_seed = c.instances * c.epsilons.size();
  const std::size_t cells = c.seeds.size() * per_seed;
  auto out = ParallelMap<GoalInstance>(cells, c.jobs, [&](std::size_t i) {
    const uint64_t seed = c.seeds[i / per_seed];
    const std::size_t instance = (i % per_seed) / c.epsilons.size();
    const double epsilon = c.epsilons[i % c.epsilons.size()];
    // The instance stream ignores epsilon so both radii share p_g.
    Rng rng(DeriveSeed(seed, 1000 + instance));
    const std::size_t n =
        c.states <= 2 ? c.states : 2 + rng.UniformIndex(c.states - 1);
    std::vector<Cell> layout;
    for (std::size_t s = 0; s < n; ++s) {
      layout.push_back({static_cast<int>(s), 0});
    }
    GoalSpec spec{StateMarginal(Dirichlet(n, rng)), epsilon, GridMetric::kLInf};
    GoalInstance g;
    g.instance = c.seeds.size() > 1 ? i / c.epsilons.size() : instance;
    g.epsilon = epsilon;
    g.goal = spec.goal_density.probs();
    g.smoothed = SmoothGoalDensity(spec, layout).values;
    const StateMarginal sqrt_rule = OptimalTarget(spec, layout);
    const StateMarginal brute = BruteForceOptimalTarget(spec, layout);
    g.sqrt_rule = sqrt_rule.probs();
    g.brute_force = brute.probs();
    g.f_sqrt_rule = HittingObjective(sqrt_rule, spec, layout);
    g.f_brute_force = HittingObjective(brute, spec, layout);
    for (std::size_t s = 0; s < n; ++s) {
      g.linf_gap = std::max(g.linf_gap, std::abs(g.sqrt_rule[s] - g.brute_force[s]));
    }
    g.min_f_random = std::numeric_limits<double>::infinity();
    Rng probe(DeriveSeed(seed, 5000 + instance));
    for (int k = 0; k < 100; ++k) {
      const StateMarginal q(Dirichlet(n, probe));
      g.min_f_random = std::min(g.min_f_random, HittingObjective(q, spec, layout));
    }
    return g;
  });
  if (sink) {
    CsvTable densities({"instance", "epsilon", "state", "p_goal", "p_smoothed",
                        "p_sqrt_rule", "p_brute_force"});
    CsvTable summary({"instance", "epsilon", "states", "F_sqrt_rule",
                      "F_brute_force", "min_F_random", "linf_gap"});
    for (const auto& g : out) {
      for (std::size_t s = 0; s < g.goal.size(); ++s) {
        densities.AddRow({std::to_string(g.instance), FormatDouble(g.epsilon),
                          std::to_string(s), FormatDouble(g.goal[s]),
                          FormatDouble(g.smoothed[s]),
                          FormatDouble(g.sqrt_rule[s]),
                          FormatDouble(g.brute_force[s])});
      }
      summary.AddRow({std::to_string(g.instance), FormatDouble(g.epsilon),
                      std::to_string(g.goal.size()),
                      FormatDouble(g.f_sqrt_rule),
                      FormatDouble(g.f_brute_force),
                      FormatDouble(g.min_f_random), FormatDouble(g.linf_gap)});
    }
    sink->Write("goal_densities.csv", densities.ToString());
    sink->Write("goal_summary.csv", summary.ToString());
  }
  return out;
}

std::vector<Prop1Instance> RunVerifyProp1(const ExperimentConfig& c,
                                          ArtifactSink* sink) {
  const std::size_t cells = c.seeds.size() * c.instances;
  const int horizon = c.env.horizon;
  auto out = ParallelMap<Prop1Instance>(cells, c.jobs, [&](std::size_t i) {
    const uint64_t seed = c.seeds[i / c.instances];
    const uint64_t base = DeriveSeed(seed, 2000 + i % c.instances);
    const TabularMDP mdp =
        RandomMDP(c.states, c.actions, horizon, DeriveSeed(base, 1));
    const Policy policy = RandomPolicy(c.states, c.actions,
                                       static_cast<std::size_t>(horizon),
                                       DeriveSeed(base, 2));
    Rng rng(DeriveSeed(base, 3));
    const StateMarginal target(Dirichlet(c.states, rng));
    return Prop1Instance{i, VerifyMinmaxEquivalence(mdp, policy, target)};
  });
  if (sink) {
    CsvTable table({"instance", "lhs[nats]", "rhs[nats]", "gap[nats]"});
    for (const auto& p : out) {
      table.AddRow({std::to_string(p.instance), FormatDouble(p.check.lhs),
                    FormatDouble(p.check.rhs), FormatDouble(p.check.gap)});
    }
    sink->Write("prop1_gaps.csv", table.ToString());
  }
  return out;
}

RunManifest Run(const ExperimentConfig& config) {
  Validate(config);
  const auto t0 = std::chrono::steady_clock::now();
  ArtifactSink sink(config.out_dir);
  RunManifest manifest;
  manifest.kind = KindName(config.kind);
  char hash[17];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(
                    Fnv1a64(CanonicalConfigText(config))));
  manifest.config_hash = hash;
  manifest.versions["smm"] = SMM_VERSION;
  manifest.versions["compiler"] = __VERSION__;
  manifest.versions["cxx_standard"] = std::to_string(__cplusplus);
  try {
    sink.Write("config.cfg", CanonicalConfigText(config));
    switch (config.kind) {
      case Kind::kMarginalHeatmap: RunMarginalHeatmap(config, &sink); break;
      case Kind::kOscillation: RunOscillation(config, &sink); break;
      case Kind::kStochasticitySweep:
        RunStochasticitySweep(config, &sink);
        break;
      case Kind::kSm4Ablation: RunSm4Ablation(config, &sink); break;
      case Kind::kHaAblation: RunHaAblation(config, &sink); break;
      case Kind::kGoalTarget: RunGoalTarget(config, &sink); break;
      case Kind::kVerifyProp1: RunVerifyProp1(config, &sink); break;
    }
    manifest.artifacts = sink.written();
    manifest.timings_s["total"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    WriteTextFile((fs::path(config.out_dir) / "manifest.json").string(),
                  manifest.ToJson());
  } catch (...) {
    sink.Abort();
    throw;
  }
  return manifest;
}

}  // namespace smm::lab

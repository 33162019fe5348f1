#ifndef SMM_LAB_EXPERIMENT_H_
#define SMM_LAB_EXPERIMENT_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "smm/smm.h"

namespace smm::lab {

enum class Kind {
  kMarginalHeatmap,
  kOscillation,
  kStochasticitySweep,
  kSm4Ablation,
  kHaAblation,
  kGoalTarget,
  kVerifyProp1,
};

inline constexpr Kind kAllKinds[] = {
    Kind::kMarginalHeatmap, Kind::kOscillation, Kind::kStochasticitySweep,
    Kind::kSm4Ablation,     Kind::kHaAblation,  Kind::kGoalTarget,
    Kind::kVerifyProp1};

const char* KindName(Kind kind);
Kind ParseKind(const std::string& name);

// Methods: smm, greedy, maxent and the bonus kinds (count, pseudocount,
// forward, inverse, rnd).
bool IsKnownMethod(const std::string& name);

struct ExperimentConfig {
  Kind kind = Kind::kOscillation;
  GridworldSpec env;
  std::vector<std::string> methods;
  std::size_t iterations = 100;
  std::vector<uint64_t> seeds;
  std::vector<double> xi_grid;
  std::vector<std::size_t> skills;
  std::size_t instances = 100;
  Mode mode = Mode::kExact;
  std::size_t episodes_per_iter = 10;
  InitPolicy init = InitPolicy::kUniform;
  DiscriminatorMode discriminator = DiscriminatorMode::kExact;
  MarginalKind marginal_kind = MarginalKind::kFiniteHorizon;
  std::size_t states = 6;
  std::size_t actions = 3;
  std::vector<double> epsilons;
  std::size_t jobs = 1;
  std::string out_dir;
};

ExperimentConfig DefaultConfig(Kind kind);

// Applies "key = value" lines on top of the kind's defaults. A "kind" key,
// if present, must agree with `kind`. Unknown keys are errors.
ExperimentConfig ParseExperimentConfig(Kind kind, const std::string& text);

// Stable text form; jobs and out_dir are excluded.
std::string CanonicalConfigText(const ExperimentConfig& config);
uint64_t Fnv1a64(const std::string& bytes);

void Validate(const ExperimentConfig& config);

struct RunManifest {
  std::string kind;
  std::string config_hash;  // 16 hex digits
  std::vector<std::string> artifacts;  // relative to out_dir
  std::map<std::string, std::string> versions;
  std::map<std::string, double> timings_s;
  std::string ToJson() const;
};

// Collects files under one output directory and removes them on Abort().
class ArtifactSink {
 public:
  explicit ArtifactSink(std::string out_dir);
  void Write(const std::string& relative_path, const std::string& contents);
  void Abort();
  const std::vector<std::string>& written() const { return written_; }
  const std::string& out_dir() const { return out_dir_; }

 private:
  std::string out_dir_;
  bool created_dir_ = false;
  std::vector<std::string> written_;
};

struct OscillationRun {
  std::string method;
  uint64_t seed = 0;
  double alternation_rate = 0.0;
  double final_kl = 0.0;
  std::vector<IterationMetrics> metrics;
};

struct SweepPoint {
  std::string method;
  double xi = 0.0;
  uint64_t seed = 0;
  double entropy = 0.0;  // stationary entropy of the evaluated policy
};

struct Sm4Run {
  std::size_t skills = 0;
  uint64_t seed = 0;
  double final_kl = 0.0;
  double final_entropy = 0.0;
  double min_jensen_gap = 0.0;  // 0 when no fitted discriminator
  std::vector<IterationMetrics> metrics;
};

struct HaRun {
  std::string method;
  uint64_t seed = 0;
  double final_entropy = 0.0;
  double ha_entropy = 0.0;
};

struct GoalInstance {
  std::size_t instance = 0;
  double epsilon = 0.0;
  std::vector<double> goal, smoothed, sqrt_rule, brute_force;
  double f_sqrt_rule = 0.0;
  double f_brute_force = 0.0;
  double linf_gap = 0.0;
  double min_f_random = 0.0;  // smallest F over random simplex points
};

struct Prop1Instance {
  std::size_t instance = 0;
  MinmaxCheck check;
};

struct HeatmapRun {
  std::string method;
  uint64_t seed = 0;
  StateMarginal marginal;
  std::vector<IterationMetrics> metrics;
};

std::vector<HeatmapRun> RunMarginalHeatmap(const ExperimentConfig& config,
                                           ArtifactSink* sink);
std::vector<OscillationRun> RunOscillation(const ExperimentConfig& config,
                                           ArtifactSink* sink);
std::vector<SweepPoint> RunStochasticitySweep(const ExperimentConfig& config,
                                              ArtifactSink* sink);
std::vector<Sm4Run> RunSm4Ablation(const ExperimentConfig& config,
                                   ArtifactSink* sink);
std::vector<HaRun> RunHaAblation(const ExperimentConfig& config,
                                 ArtifactSink* sink);
std::vector<GoalInstance> RunGoalTarget(const ExperimentConfig& config,
                                        ArtifactSink* sink);
std::vector<Prop1Instance> RunVerifyProp1(const ExperimentConfig& config,
                                          ArtifactSink* sink);

// Fraction of consecutive iterations after `burn_in` where
// mass_left - mass_right changes sign.
double AlternationRate(const std::vector<IterationMetrics>& metrics,
                       std::size_t burn_in);

// Validates, runs the kind, writes CSVs, SVGs and manifest.json into
// config.out_dir. Files written before a failure are removed.
RunManifest Run(const ExperimentConfig& config);

}  // namespace smm::lab

#endif  // SMM_LAB_EXPERIMENT_H_

#ifndef SMM_MARGINAL_H_
#define SMM_MARGINAL_H_

#include <cstddef>
#include <span>
#include <vector>

#include "smm/mdp.h"

namespace smm {

// Probability vector over states; also used for targets p*(s).
class StateMarginal {
 public:
  // Throws unless nonnegative and summing to 1 within 1e-10.
  explicit StateMarginal(std::vector<double> probs);

  static StateMarginal Uniform(std::size_t num_states);
  static StateMarginal PointMass(std::size_t num_states, std::size_t s);
  // Normalizes a nonnegative vector with positive total.
  static StateMarginal Normalize(std::vector<double> weights);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t s) const { return probs_[s]; }
  const std::vector<double>& probs() const { return probs_; }

 private:
  std::vector<double> probs_;
};

// d_1 = p0, d_{t+1} = d_t M_t; returns d_1..d_T.
std::vector<std::vector<double>> StepOccupancies(const TabularMDP& mdp,
                                                 const Policy& policy);

// (1/T) sum_t d_t.
StateMarginal FiniteHorizonMarginal(const TabularMDP& mdp,
                                    const Policy& policy);

struct StationaryOptions {
  double damping = 1e-6;
  double tol = 1e-10;
  std::size_t max_iter = 20'000'000;
};

struct StationaryResult {
  StateMarginal marginal;
  double residual = 0.0;  // ||m M' - m||_1
  std::size_t iterations = 0;
};

// Fixed point of M' = (1 - damping) M + damping U by power iteration. The
// iteration runs on the lazy chain (I + M') / 2, which shares M''s fixed
// points but is aperiodic. Throws ConvergenceError after max_iter.
StationaryResult StationaryDistribution(const TabularMDP& mdp,
                                        const Policy& policy,
                                        const StationaryOptions& options = {});
StationaryResult StationaryDistribution(const Matrix& chain,
                                        const StationaryOptions& options = {});

// Residual ||m M' - m||_1 of a candidate under the damped chain.
double StationaryResidual(const Matrix& chain, std::span<const double> m,
                          double damping);

double Entropy(const StateMarginal& m);

// Throws a support error naming the first state with p > 0 and q = 0.
double KlDivergence(const StateMarginal& p, const StateMarginal& q);

double TotalVariation(const StateMarginal& p, const StateMarginal& q);

StateMarginal MixtureMarginal(const std::vector<StateMarginal>& components,
                              std::span<const double> prior);

StateMarginal EmpiricalMarginal(std::span<const std::size_t> states,
                                std::size_t num_states);

}  // namespace smm

#endif  // SMM_MARGINAL_H_

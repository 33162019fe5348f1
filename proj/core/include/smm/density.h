#ifndef SMM_DENSITY_H_
#define SMM_DENSITY_H_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "smm/marginal.h"

namespace smm {

// Smoothed histogram q(s) = (counts[s] + alpha) / (sum counts + alpha |S|).
class HistogramDensity {
 public:
  HistogramDensity(std::vector<double> counts, double alpha);

  std::size_t num_states() const { return counts_.size(); }
  double alpha() const { return alpha_; }
  const std::vector<double>& counts() const { return counts_; }
  double prob(std::size_t s) const { return probs_[s]; }
  const std::vector<double>& probs() const { return probs_; }

 private:
  std::vector<double> counts_;
  double alpha_;
  std::vector<double> probs_;
};

// Equal-weight mean of member densities.
class AveragedDensity {
 public:
  explicit AveragedDensity(std::vector<HistogramDensity> members);

  void Add(HistogramDensity member);
  std::size_t size() const { return members_.size(); }
  std::size_t num_states() const { return members_.front().num_states(); }
  const std::vector<HistogramDensity>& members() const { return members_; }
  double prob(std::size_t s) const {
    return sum_[s] / static_cast<double>(members_.size());
  }
  std::vector<double> probs() const;

 private:
  std::vector<HistogramDensity> members_;
  std::vector<double> sum_;
};

// Counts m * n_virtual; n_virtual defaults to 10 |S|. alpha = 0 returns the
// marginal itself.
HistogramDensity FitFromMarginal(const StateMarginal& m, double alpha,
                                 std::optional<double> n_virtual = {});

HistogramDensity FitFromBuffer(std::span<const std::size_t> states,
                               std::size_t num_states, double alpha);

// Throws when the probability is zero.
double LogProb(const HistogramDensity& d, std::size_t s);
double LogProb(const AveragedDensity& d, std::size_t s);

AveragedDensity AverageDensities(std::vector<HistogramDensity> members);

}  // namespace smm

#endif  // SMM_DENSITY_H_

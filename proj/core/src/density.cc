#include "smm/density.h"

#include <cmath>
#include <string>

#include "smm/error.h"

namespace smm {
namespace {

double CheckedLog(double p, std::size_t s) {
  Require(p > 0.0, ErrorCode::kSupport,
          "density has zero mass at state " + std::to_string(s));
  return std::log(p);
}

}  // namespace

HistogramDensity::HistogramDensity(std::vector<double> counts, double alpha)
    : counts_(std::move(counts)), alpha_(alpha) {
  Require(!counts_.empty(), ErrorCode::kInvalidArgument, "density is empty");
  Require(alpha_ >= 0.0 && std::isfinite(alpha_), ErrorCode::kInvalidArgument,
          "smoothing alpha must be >= 0");
  double total = 0.0;
  for (double c : counts_) {
    Require(c >= 0.0 && std::isfinite(c), ErrorCode::kInvalidArgument,
            "counts must be nonnegative");
    total += c;
  }
  const double denom = total + alpha_ * static_cast<double>(counts_.size());
  Require(denom > 0.0, ErrorCode::kInvalidArgument,
          "density needs data or alpha > 0");
  probs_.resize(counts_.size());
  for (std::size_t s = 0; s < counts_.size(); ++s) {
    probs_[s] = (counts_[s] + alpha_) / denom;
  }
}

AveragedDensity::AveragedDensity(std::vector<HistogramDensity> members) {
  Require(!members.empty(), ErrorCode::kInvalidArgument,
          "averaged density needs a member");
  for (auto& m : members) Add(std::move(m));
}

void AveragedDensity::Add(HistogramDensity member) {
  if (members_.empty()) {
    sum_.assign(member.num_states(), 0.0);
  } else {
    Require(member.num_states() == num_states(), ErrorCode::kDimensionMismatch,
            "averaged density members differ in size");
  }
  for (std::size_t s = 0; s < sum_.size(); ++s) sum_[s] += member.prob(s);
  members_.push_back(std::move(member));
}

std::vector<double> AveragedDensity::probs() const {
  std::vector<double> p(sum_.size());
  for (std::size_t s = 0; s < p.size(); ++s) p[s] = prob(s);
  return p;
}

HistogramDensity FitFromMarginal(const StateMarginal& m, double alpha,
                                 std::optional<double> n_virtual) {
  if (alpha == 0.0) return HistogramDensity(m.probs(), 0.0);
  const double n = n_virtual.value_or(10.0 * static_cast<double>(m.size()));
  Require(n > 0.0, ErrorCode::kInvalidArgument, "n_virtual must be positive");
  std::vector<double> counts(m.probs());
  for (double& c : counts) c *= n;
  return HistogramDensity(std::move(counts), alpha);
}

HistogramDensity FitFromBuffer(std::span<const std::size_t> states,
                               std::size_t num_states, double alpha) {
  Require(!states.empty() || alpha > 0.0, ErrorCode::kInvalidArgument,
          "empty buffer needs alpha > 0");
  std::vector<double> counts(num_states, 0.0);
  for (std::size_t s : states) {
    Require(s < num_states, ErrorCode::kInvalidArgument, "state out of range");
    counts[s] += 1.0;
  }
  return HistogramDensity(std::move(counts), alpha);
}

double LogProb(const HistogramDensity& d, std::size_t s) {
  Require(s < d.num_states(), ErrorCode::kInvalidArgument,
          "state out of range");
  return CheckedLog(d.prob(s), s);
}

double LogProb(const AveragedDensity& d, std::size_t s) {
  Require(s < d.num_states(), ErrorCode::kInvalidArgument,
          "state out of range");
  return CheckedLog(d.prob(s), s);
}

AveragedDensity AverageDensities(std::vector<HistogramDensity> members) {
  return AveragedDensity(std::move(members));
}

}  // namespace smm

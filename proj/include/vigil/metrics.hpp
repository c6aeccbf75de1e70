#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <utility>

#include "vigil/errors.hpp"

namespace vigil::metrics {

struct ConfusionCounts {
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;
  long long tn = 0;

  long long total() const { return tp + fp + fn + tn; }
};

// Standard 2x2 counts over (truth, predicted) pairs. EmptyInput on [].
ConfusionCounts confusion(std::span<const std::pair<bool, bool>> pairs);

// 100*(tp+tn)/total, percent rounded to 2 decimals.
double accuracy(const ConfusionCounts& counts);

// 100*(u + 0.5n)/t. DomainError when u+n > t, t <= 0, or counts negative.
double preference_score(long long u, long long n, long long t);

// Same functional form as preference_score.
double detection_rate(long long u, long long n, long long t);

struct LatencyHistogram {
  // Half-open bins [0,8), [8,14), [14,20), [20,26), [26,inf).
  static constexpr std::array<double, 5> kBinEdges{0.0, 8.0, 14.0, 20.0, 26.0};

  std::array<std::size_t, 5> counts{};
  std::size_t sample_count = 0;
  double min_s = 0.0;
  double max_s = 0.0;
  double mean_s = 0.0;

  // Percent of samples strictly below bound_s, rounded to 2 decimals.
  double pct_within(double bound_s) const;
};

LatencyHistogram latency_histogram(std::span<const double> samples_s);

}  // namespace vigil::metrics

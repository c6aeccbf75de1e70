#include "vigil/metrics.hpp"

#include <cmath>

namespace vigil::metrics {

namespace {

// Percent = 100 * num / den rounded to 2 decimals, evaluated in long double so
// integer count ratios land on exact hundredths.
double percent2(long double num, long double den) {
  return static_cast<double>(std::roundl(10000.0L * num / den)) / 100.0;
}

}  // namespace

ConfusionCounts confusion(std::span<const std::pair<bool, bool>> pairs) {
  if (pairs.empty()) throw EmptyInput("confusion needs at least one pair");
  ConfusionCounts c;
  for (const auto& [truth, predicted] : pairs) {
    if (truth && predicted) ++c.tp;
    else if (!truth && predicted) ++c.fp;
    else if (truth && !predicted) ++c.fn;
    else ++c.tn;
  }
  return c;
}

double accuracy(const ConfusionCounts& counts) {
  const long long total = counts.total();
  if (total <= 0) throw EmptyInput("accuracy needs a non-empty confusion matrix");
  return percent2(static_cast<long double>(counts.tp + counts.tn),
                  static_cast<long double>(total));
}

double preference_score(long long u, long long n, long long t) {
  if (t <= 0) throw DomainError("total count must be positive");
  if (u < 0 || n < 0) throw DomainError("counts must be non-negative");
  if (u + n > t) throw DomainError("u + n must not exceed t");
  // u + 0.5n == (2u + n)/2, kept rational until the final rounding
  return percent2(static_cast<long double>(2 * u + n),
                  static_cast<long double>(2 * t));
}

double detection_rate(long long u, long long n, long long t) {
  return preference_score(u, n, t);
}

double LatencyHistogram::pct_within(double bound_s) const {
  if (sample_count == 0) return 0.0;
  // counts are binned, so recover the share from bin edges when the bound is
  // a bin edge; callers use 8 and 14.
  std::size_t within = 0;
  for (std::size_t b = 0; b < counts.size(); ++b) {
    if (kBinEdges[b] >= bound_s) break;
    const double upper =
        b + 1 < kBinEdges.size() ? kBinEdges[b + 1] : bound_s;
    if (upper <= bound_s) within += counts[b];
  }
  return static_cast<double>(
             std::roundl(10000.0L * static_cast<long double>(within) /
                         static_cast<long double>(sample_count))) /
         100.0;
}

LatencyHistogram latency_histogram(std::span<const double> samples_s) {
  if (samples_s.empty()) throw EmptyInput("latency histogram needs samples");
  LatencyHistogram h;
  h.sample_count = samples_s.size();
  double sum = 0.0;
  bool first = true;
  for (double s : samples_s) {
    if (!(s >= 0.0)) throw DomainError("latency samples must be >= 0");
    if (first || s < h.min_s) h.min_s = s;
    if (first || s > h.max_s) h.max_s = s;
    first = false;
    sum += s;
    std::size_t bin = 0;
    for (std::size_t b = h.kBinEdges.size(); b-- > 0;) {
      if (s >= h.kBinEdges[b]) {
        bin = b;
        break;
      }
    }
    ++h.counts[bin];
  }
  h.mean_s = sum / static_cast<double>(h.sample_count);
  return h;
}

}  // namespace vigil::metrics

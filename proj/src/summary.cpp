#include "xdeval/summary.hpp"

#include <cmath>

#include "xdeval/errors.hpp"

namespace xdeval {

MetricSummary summarize(const std::vector<double>& values) {
  if (values.empty()) {
    throw EmptySample("summarize requires at least one value");
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw ValidationError("summarize requires finite values");
    }
  }
  MetricSummary s;
  s.count = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.count);
  double sq = 0.0;
  for (double v : values) {
    const double d = v - s.mean;
    sq += d * d;
  }
  s.variance = sq / static_cast<double>(s.count);
  if (s.variance < 0.0) s.variance = 0.0;
  s.std = std::sqrt(s.variance);
  return s;
}

}  // namespace xdeval

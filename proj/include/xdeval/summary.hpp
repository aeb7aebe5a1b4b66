#pragma once

#include <cstddef>
#include <vector>

namespace xdeval {

// Mean with population variance (divide by count). Reported tables use the
// "mean +- variance" form; std is kept alongside since either spread measure
// may be wanted.
struct MetricSummary {
  double mean = 0.0;
  double variance = 0.0;
  double std = 0.0;
  std::size_t count = 0;
};

// Two-pass mean / population variance. Throws EmptySample on an empty list.
MetricSummary summarize(const std::vector<double>& values);

}  // namespace xdeval

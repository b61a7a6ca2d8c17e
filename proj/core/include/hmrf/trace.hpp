#pragma once

#include <cstdint>
#include <vector>

namespace hmrf {

/// Seeded sequence of sampled scalars. `steps[k]` is the chain position at
/// which `values[k]` was recorded; entries with steps[k] <= burn_in are
/// discarded by post-burn-in summaries.
struct ChainTrace {
  std::uint64_t seed = 0;
  std::int64_t burn_in = 0;
  std::vector<std::int64_t> steps;
  std::vector<double> values;

  void push(std::int64_t step, double value) {
    steps.push_back(step);
    values.push_back(value);
  }

  double post_burn_in_mean() const;
  double post_burn_in_sd() const;
};

}  // namespace hmrf

#include "hmrf/trace.hpp"

#include <cmath>

namespace hmrf {

double ChainTrace::post_burn_in_mean() const {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (steps[k] > burn_in) {
      sum += values[k];
      ++n;
    }
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

double ChainTrace::post_burn_in_sd() const {
  const double m = post_burn_in_mean();
  double ss = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (steps[k] > burn_in) {
      ss += (values[k] - m) * (values[k] - m);
      ++n;
    }
  }
  return n < 2 ? 0.0 : std::sqrt(ss / static_cast<double>(n - 1));
}

}  // namespace hmrf

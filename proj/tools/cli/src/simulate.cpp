#include "hmrf_cli/simulate.hpp"

#include <cmath>

#include "hmrf/block_gibbs.hpp"
#include "hmrf/errors.hpp"
#include "hmrf/rng.hpp"

namespace hmrf::cli {

std::pair<SpinField, ObservedField> simulate_hmrf(const HmrfParams& params, const LatticeDims& dims,
                                                  std::uint64_t seed, int sweeps) {
  dims.validate();
  if (sweeps < 0) throw ArgumentError("sweeps must be nonnegative");
  if (!(params.emission.sigma2 >= 0.0) || !std::isfinite(params.emission.sigma2)) {
    throw ArgumentError("sigma2 must be nonnegative and finite");
  }
  const Rng root(seed);
  Rng hidden_rng = root.split(stream::kHiddenField);
  Rng emission_rng = root.split(stream::kEmission);

  const BlockGibbsSampler sampler(dims, params.coupling);
  SpinField z = sampler.initial_field(hidden_rng);
  for (int s = 0; s < sweeps; ++s) sampler.sweep(z, hidden_rng);

  const double sd = std::sqrt(params.emission.sigma2);
  std::vector<double> y(z.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double mean = params.emission.mean_of(z[static_cast<int>(i)]);
    y[i] = sd > 0.0 ? emission_rng.normal(mean, sd) : mean;
  }
  return {std::move(z), ObservedField(dims, std::move(y))};
}

}  // namespace hmrf::cli

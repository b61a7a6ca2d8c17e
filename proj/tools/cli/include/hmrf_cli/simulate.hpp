#pragma once

#include <cstdint>
#include <utility>

#include "hmrf/lattice.hpp"
#include "hmrf/params.hpp"

namespace hmrf::cli {

inline constexpr int kDefaultSimulationSweeps = 5000;

/// Hidden field from `sweeps` prior block-Gibbs sweeps started at a random
/// field, then y_i ~ N(mu_{z_i}, sigma2) independently. A zero variance is
/// allowed here and yields y_i = mu_{z_i} exactly.
std::pair<SpinField, ObservedField> simulate_hmrf(const HmrfParams& params, const LatticeDims& dims,
                                                  std::uint64_t seed, int sweeps = kDefaultSimulationSweeps);

}  // namespace hmrf::cli

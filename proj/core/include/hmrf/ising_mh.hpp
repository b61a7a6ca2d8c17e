#pragma once

// Single-site Metropolis-Hastings for the Ising prior exp(beta * S(z)).

#include <cstdint>
#include <optional>

#include "hmrf/lattice.hpp"
#include "hmrf/rng.hpp"
#include "hmrf/trace.hpp"

namespace hmrf {

/// min(1, exp(-2 beta (a_i - d_i))) for flipping `site` of a single-frame field,
/// where a_i / d_i count neighbors agreeing / disagreeing with z_i.
double flip_acceptance(const SpinField& z, int site, double beta);

/// One proposal with explicit draws: flip `site` iff u <= flip_acceptance.
/// Returns whether the flip was accepted.
bool mh_update(SpinField& z, double beta, int site, double u);

/// One proposal. Draw order: site first, then u.
bool mh_update(SpinField& z, double beta, Rng& rng);

enum class IsingInit { random_uniform, all_plus, provided };

struct IsingRunConfig {
  LatticeDims dims{};
  double beta = 0.0;
  std::int64_t total_updates = 1;
  std::uint64_t seed = 0;
  std::int64_t record_every = 1;
  IsingInit init = IsingInit::random_uniform;
  std::optional<SpinField> initial_field;  ///< required when init == provided

  void validate() const;
};

struct IsingRun {
  SpinField field;
  ChainTrace trace;  ///< S(z) at update 0 and every record_every updates
  std::int64_t accepted = 0;
  double sweeps = 0.0;  ///< total_updates / site count
};

IsingRun simulate_ising(const IsingRunConfig& config);

}  // namespace hmrf

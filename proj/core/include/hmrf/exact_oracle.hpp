#pragma once

// Brute-force enumeration over every spin configuration of a small lattice.
//
// State encoding used by the distribution helpers: bit k of the state index is
// set when global site k holds +1.

#include <cstdint>
#include <vector>

#include "hmrf/lattice.hpp"
#include "hmrf/params.hpp"

namespace hmrf {

inline constexpr int kMaxExactSites = 20;

/// Exact moments of the sufficient statistics under the prior Gibbs law
/// exp(beta * T1 + alpha * T2) / psi. One statistic (S) for a single frame,
/// two (T1, T2) otherwise.
struct ExactMoments {
  double log_partition = 0.0;
  std::vector<double> mean_stats;
  std::vector<std::vector<double>> covariance;
};

struct ExactPosterior {
  std::vector<double> marginals_plus;     ///< P(Z_i = +1 | Y), per global site
  std::vector<double> mean_stats_given_y; ///< E[T1 | Y] (and E[T2 | Y])
};

/// `workers` only changes wall time: chunks are reduced in a fixed order.
ExactMoments exact_prior_moments(const LatticeDims& dims, const Coupling& coupling, int workers = 1);

ExactPosterior exact_posterior(const ObservedField& y, const HmrfParams& params, int workers = 1);

/// target_stats - E[stats]: the exact gradient of the coupling log-likelihood.
std::vector<double> exact_score(const LatticeDims& dims, const Coupling& coupling,
                                const std::vector<double>& target_stats);

/// Probability of every configuration under the prior Gibbs law.
std::vector<double> exact_gibbs_distribution(const LatticeDims& dims, const Coupling& coupling);

/// Probability of every configuration under the posterior P(Z | Y, params).
std::vector<double> exact_posterior_distribution(const ObservedField& y, const HmrfParams& params);

/// Encodes a field as a state index (bit k set iff site k is +1).
std::uint64_t state_index(const SpinField& z);

}  // namespace hmrf

#pragma once

// Coupling estimation for an observed spin field by a Metropolis-Hastings
// chain on beta whose target is the pseudo-likelihood
//   PL(beta | z) = prod_i exp(z_i beta s_i) / (2 cosh(beta s_i)),
// with s_i the sum of the spatial neighbors of site i.

#include <array>
#include <cstdint>
#include <vector>

#include "hmrf/lattice.hpp"
#include "hmrf/rng.hpp"
#include "hmrf/trace.hpp"

namespace hmrf {

/// log(2 cosh x), stable for large |x|.
double log_two_cosh(double x);

/// Log pseudo-likelihood of a single-frame field as a function of beta.
///
/// The neighbor sums never change while beta moves, so the field is reduced
/// once to sum_i z_i s_i and a histogram of |s_i|; each evaluation is then O(1).
class PseudoLikelihood {
 public:
  explicit PseudoLikelihood(const SpinField& z);

  double log_pl(double beta) const;
  /// d/dbeta log PL = sum_i s_i (z_i - tanh(beta s_i)).
  double score(double beta) const;

  double mean_spin() const noexcept { return mean_spin_; }
  int site_count() const noexcept { return site_count_; }

 private:
  long agreement_ = 0;            // sum_i z_i s_i
  std::array<long, 5> abs_hist_{};  // number of sites with |s_i| = k
  double mean_spin_ = 0.0;
  int site_count_ = 0;
};

/// Convenience wrapper over PseudoLikelihood.
double log_pseudo_likelihood(const SpinField& z, double beta);

struct PlChainConfig {
  double init_beta = 0.0;
  double proposal_sd = 1.0;
  int n_total = 1000;
  int burn_in = 500;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PlStep {
  double beta = 0.0;
  bool accepted = false;
};

/// One MH move with explicit draws: proposal beta' and uniform u.
PlStep pl_mh_step(double beta_t, double proposal, double u, const PseudoLikelihood& pl);

/// One MH move. Draw order: proposal ~ N(beta_t, sd^2), then u.
PlStep pl_mh_step(double beta_t, const PseudoLikelihood& pl, double proposal_sd, Rng& rng);

inline constexpr double kSparseStateThreshold = 0.95;

struct PlChainResult {
  PlChainConfig config;
  double beta_hat = 0.0;  ///< mean of beta^{m+1} .. beta^{n}
  double beta_sd = 0.0;   ///< post-burn-in standard deviation
  ChainTrace trace;       ///< beta^0 .. beta^n
  std::vector<bool> accepted;  ///< per step 1..n
  bool suspect_sparse_state = false;  ///< |mean spin| > kSparseStateThreshold
};

PlChainResult run_pl_chain(const PseudoLikelihood& pl, const PlChainConfig& config);

/// Runs one independent chain per config; `workers` changes wall time only.
std::vector<PlChainResult> estimate_beta(const SpinField& z, const std::vector<PlChainConfig>& configs,
                                         int workers = 1);

}  // namespace hmrf

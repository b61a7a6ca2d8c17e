#pragma once

// 2x2 block Gibbs sampling for the spatial and spatio-temporal models.
//
// The unnormalized log density of a configuration is
//   beta * T1(z) + alpha * T2(z) [+ sum_i log g(y_i | z_i) in posterior mode],
// and each block is redrawn jointly from its exact conditional given the rest
// of the field. A sweep visits frames in ascending order and, inside a frame,
// blocks in row-major order of their anchors.

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "hmrf/lattice.hpp"
#include "hmrf/params.hpp"
#include "hmrf/rng.hpp"

namespace hmrf {

enum class GibbsMode { posterior, prior };

struct GibbsRunConfig {
  int sweeps_total = 10000;
  int burn_in = 5000;
  std::uint64_t seed = 0;
  GibbsMode mode = GibbsMode::posterior;
  bool record_trace = false;  ///< keep (T1, T2) of every retained sweep
  int batches = 50;           ///< batch count for batch-means standard errors

  void validate() const;
  int retained() const noexcept { return sweeps_total - burn_in; }
};

/// Joint conditional of the 2^|block| configurations of `block` in `frame`.
/// Entry s is the probability that sites[k] = +1 exactly for the bits k set in s.
/// Throws ArgumentError in posterior mode when `y` is null.
std::vector<double> block_conditional(const Block& block, const SpinField& z, int frame, const HmrfParams& params,
                                      GibbsMode mode, const ObservedField* y);

class BlockGibbsSampler {
 public:
  /// Prior (Gibbs distribution) sampler.
  BlockGibbsSampler(const LatticeDims& dims, const Coupling& coupling);
  /// Posterior P(Z | Y, params) sampler.
  BlockGibbsSampler(const ObservedField& y, const HmrfParams& params);

  GibbsMode mode() const noexcept { return mode_; }
  const LatticeDims& dims() const noexcept { return dims_; }
  const std::vector<Block>& blocks() const noexcept { return blocks_; }

  std::vector<double> block_conditional(const SpinField& z, const Block& block, int frame) const;

  /// Redraws every block of every frame once (inverse-CDF with one uniform per block).
  void sweep(SpinField& z, Rng& rng) const;

  /// Posterior: sign of the per-site emission log-odds. Prior: uniform random.
  SpinField initial_field(Rng& rng) const;

 private:
  // Unnormalized log weights of the block states, written to `out`.
  void block_log_weights(const SpinField& z, const Block& block, int frame, std::array<double, 16>& out) const;

  GibbsMode mode_;
  LatticeDims dims_;
  Coupling coupling_;
  std::vector<Block> blocks_;
  std::vector<double> half_log_odds_;  // posterior only, per global site
};

/// Batch-means standard error of the mean of `xs` with up to `batches` batches.
double batch_means_se(const std::vector<double>& xs, int batches);

struct PosteriorEstimates {
  double e_t1 = 0.0;  ///< E[T1 | Y]; equals E[S | Y] for a single frame
  std::optional<double> e_t2;
  std::vector<double> marginals_plus;  ///< P(Z = +1 | Y) per (frame, site)
  double se_t1 = 0.0;
  std::optional<double> se_t2;
  std::vector<std::array<double, 2>> trace;  ///< (T1, T2) per retained sweep, when recorded
};

struct PriorMoments {
  std::vector<double> mean_stats;               ///< E[T1] (, E[T2])
  std::vector<std::vector<double>> covariance;  ///< sample covariance
  std::vector<double> mean_se;
  std::vector<std::vector<double>> covariance_se;
  std::vector<std::array<double, 2>> trace;
};

PosteriorEstimates estimate_posterior(const ObservedField& y, const HmrfParams& params, const GibbsRunConfig& config);

PriorMoments estimate_prior_moments(const LatticeDims& dims, const Coupling& coupling, const GibbsRunConfig& config);

}  // namespace hmrf

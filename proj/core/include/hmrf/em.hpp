#pragma once

// EM estimation for the hidden MRF with Gaussian emissions.
//
// E-step: posterior expectations of the lattice statistics and per-site
// marginals at the current parameters. M-step: closed-form emission updates
// from the marginals, then Newton-Raphson on the couplings, where each NR step
// re-estimates the prior moments at the current couplings. The two halves of
// the M-step never read each other's parameters.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "hmrf/block_gibbs.hpp"
#include "hmrf/lattice.hpp"
#include "hmrf/params.hpp"

namespace hmrf {

/// Responsibility-weighted class means. Throws DegenerateDataError when a class
/// carries zero total responsibility.
std::pair<double, double> m_step_means(const ObservedField& y, const std::vector<double>& marginals_plus);

/// Responsibility-weighted mean squared deviation from the given means.
/// Throws DegenerateDataError when the result is not positive.
double m_step_variance(const ObservedField& y, const std::vector<double>& marginals_plus, double mu_plus,
                       double mu_minus);

/// Prior-side ingredients of an NR step: E[stats] and Cov[stats].
struct CouplingMoments {
  std::vector<double> mean_stats;
  std::vector<std::vector<double>> covariance;
};

/// Variance below `flat_factor * E_total^2` marks a flat score.
inline constexpr double kFlatVarianceFactor = 1e-8;
inline constexpr double kMaxHessianCondition = 1e8;

/// beta + clamp((target - E[S]) / Var[S], +-step_cap), or nullopt when the
/// variance is flat.
std::optional<double> nr_update_spatial(double beta, double target, const CouplingMoments& prior, double step_cap,
                                        int edges);

/// Joint (beta, alpha) step solving Cov * delta = target - E[stats], clamped
/// per component. nullopt when the covariance is singular, ill-conditioned or flat.
std::optional<Coupling> nr_update_st(const Coupling& theta, double target_t1, double target_t2,
                                     const CouplingMoments& prior, double step_cap, int edges);

enum class EmStatus { converged, max_iters, nr_diverged };

const char* to_string(EmStatus status);

/// Source of posterior and prior moments. `exact` enumerates and is limited
/// to kMaxExactSites sites.
enum class MomentBackend { gibbs, exact };

struct EmConfig {
  int max_em_iters = 100;
  double em_tol = 1e-3;
  double nr_tol = 1e-3;
  int nr_max_iters = 50;
  double nr_step_cap = 0.5;
  GibbsRunConfig posterior_gibbs{10000, 5000, 0, GibbsMode::posterior};
  GibbsRunConfig prior_gibbs{1000, 200, 0, GibbsMode::prior};
  std::optional<HmrfParams> init_params;
  /// Use the previous iteration's means in the variance update.
  bool paper_literal_sigma = false;
  /// Reuse the same chain seeds at every EM iteration and NR step, so the
  /// Monte-Carlo noise does not move between iterations.
  bool common_random_numbers = true;
  MomentBackend backend = MomentBackend::gibbs;

  void validate() const;
};

/// Mean +- SD for the class means, population variance, zero couplings.
/// Throws DegenerateDataError on constant data.
HmrfParams default_init(const ObservedField& y);

struct EmIteration {
  HmrfParams params;             ///< parameters after this iteration
  int nr_steps = 0;
  double e_t1 = 0.0;             ///< posterior target used by the NR loop
  std::optional<double> e_t2;
  double se_t1 = 0.0;
  std::optional<double> se_t2;
};

struct EmResult {
  HmrfParams params;
  std::vector<HmrfParams> param_trace;  ///< initial parameters first
  std::vector<EmIteration> iterations;
  SpinField restored_field;             ///< marginal > 1/2 -> +1, from the last E-step
  std::vector<double> marginals_plus;
  EmStatus status = EmStatus::max_iters;
};

/// Single-frame fit of (mu_plus, mu_minus, sigma2, beta).
EmResult fit_spatial(const ObservedField& y, const EmConfig& config);

/// Multi-frame fit of (mu_plus, mu_minus, sigma2, beta, alpha).
EmResult fit_st(const ObservedField& y, const EmConfig& config);

struct ScorePoint {
  double beta = 0.0;
  double score = 0.0;  ///< E[S | Y] - E_beta[S]
  double mc_se = 0.0;
};

/// Score curve of beta for a single-frame field. The posterior target is
/// computed once at `fixed`; prior moments are re-estimated at every grid
/// point with seeds derived from `prior.seed` and the point index.
std::vector<ScorePoint> score_scan(const ObservedField& y, const HmrfParams& fixed, const std::vector<double>& grid,
                                   const GibbsRunConfig& posterior, const GibbsRunConfig& prior, int workers = 1);

}  // namespace hmrf

#include "hmrf/em.hpp"

#include <algorithm>
#include <cmath>

#include "hmrf/errors.hpp"
#include "hmrf/exact_oracle.hpp"
#include "hmrf/parallel.hpp"
#include "hmrf/rng.hpp"

namespace hmrf {
namespace {

void check_marginals(const ObservedField& y, const std::vector<double>& p) {
  if (p.size() != y.size()) throw ArgumentError("marginal count does not match the observations");
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) throw ArgumentError("marginals must lie in [0, 1]");
  }
}

double clamp_step(double delta, double cap) { return std::clamp(delta, -cap, cap); }

// E-step output in a backend-neutral form.
struct PosteriorSummary {
  std::vector<double> marginals_plus;
  double e_t1 = 0.0;
  double e_t2 = 0.0;
  double se_t1 = 0.0;
  double se_t2 = 0.0;
};

PosteriorSummary posterior_summary(const ObservedField& y, const HmrfParams& params, const EmConfig& config,
                                   int iteration) {
  const bool temporal = y.dims().frames > 1;
  PosteriorSummary out;
  if (config.backend == MomentBackend::exact) {
    auto post = exact_posterior(y, params);
    out.marginals_plus = std::move(post.marginals_plus);
    out.e_t1 = post.mean_stats_given_y[0];
    if (temporal) out.e_t2 = post.mean_stats_given_y[1];
    return out;
  }
  GibbsRunConfig g = config.posterior_gibbs;
  if (!config.common_random_numbers) g.seed = Rng::derive_seed(g.seed, static_cast<std::uint64_t>(iteration));
  auto est = estimate_posterior(y, params, g);
  out.marginals_plus = std::move(est.marginals_plus);
  out.e_t1 = est.e_t1;
  out.se_t1 = est.se_t1;
  if (temporal) {
    out.e_t2 = *est.e_t2;
    out.se_t2 = *est.se_t2;
  }
  return out;
}

CouplingMoments prior_moments(const LatticeDims& dims, const Coupling& coupling, const EmConfig& config,
                              int iteration, int step) {
  if (config.backend == MomentBackend::exact) {
    auto m = exact_prior_moments(dims, coupling);
    return {std::move(m.mean_stats), std::move(m.covariance)};
  }
  GibbsRunConfig g = config.prior_gibbs;
  if (!config.common_random_numbers) {
    g.seed = Rng::derive_seed(Rng::derive_seed(g.seed, static_cast<std::uint64_t>(iteration)),
                              static_cast<std::uint64_t>(step));
  }
  auto m = estimate_prior_moments(dims, coupling, g);
  return {std::move(m.mean_stats), std::move(m.covariance)};
}

SpinField threshold(const LatticeDims& dims, const std::vector<double>& marginals) {
  SpinField z(dims);
  for (std::size_t i = 0; i < marginals.size(); ++i) z[static_cast<int>(i)] = marginals[i] > 0.5 ? Spin{1} : Spin{-1};
  return z;
}

EmResult fit(const ObservedField& y, const EmConfig& config) {
  config.validate();
  const LatticeDims& dims = y.dims();
  const bool temporal = dims.frames > 1;
  const int edges = edge_count(dims) * dims.frames;

  EmResult result;
  HmrfParams params = config.init_params ? *config.init_params : default_init(y);
  params.emission.validate();
  if (!temporal) params.coupling.alpha = 0.0;
  result.param_trace.push_back(params);

  for (int it = 1; it <= config.max_em_iters; ++it) {
    const PosteriorSummary post = posterior_summary(y, params, config, it);
    result.marginals_plus = post.marginals_plus;

    EmIteration record;
    record.e_t1 = post.e_t1;
    record.se_t1 = post.se_t1;
    if (temporal) {
      record.e_t2 = post.e_t2;
      record.se_t2 = post.se_t2;
    }

    // Coupling half of the M-step: reads only couplings and statistics.
    Coupling theta = params.coupling;
    bool nr_converged = false;
    bool diverged = false;
    for (int step = 1; step <= config.nr_max_iters; ++step) {
      record.nr_steps = step;
      const CouplingMoments prior = prior_moments(dims, theta, config, it, step);
      double size = 0.0;
      if (temporal) {
        const auto next = nr_update_st(theta, post.e_t1, post.e_t2, prior, config.nr_step_cap, edges);
        if (!next) {
          diverged = true;
          break;
        }
        size = std::hypot(next->beta - theta.beta, next->alpha - theta.alpha);
        theta = *next;
      } else {
        const auto next = nr_update_spatial(theta.beta, post.e_t1, prior, config.nr_step_cap, edges);
        if (!next) {
          diverged = true;
          break;
        }
        size = std::fabs(*next - theta.beta);
        theta.beta = *next;
      }
      if (size < config.nr_tol) {
        nr_converged = true;
        break;
      }
    }
    if (diverged || !nr_converged) {
      record.params = params;
      result.iterations.push_back(record);
      result.status = EmStatus::nr_diverged;
      break;
    }

    // Emission half: reads only y and the marginals.
    Emission emission = params.emission;
    const auto [mu_plus, mu_minus] = m_step_means(y, post.marginals_plus);
    if (config.paper_literal_sigma) {
      emission.sigma2 = m_step_variance(y, post.marginals_plus, emission.mu_plus, emission.mu_minus);
    } else {
      emission.sigma2 = m_step_variance(y, post.marginals_plus, mu_plus, mu_minus);
    }
    emission.mu_plus = mu_plus;
    emission.mu_minus = mu_minus;

    const HmrfParams next{emission, theta};
    const auto a = params.as_array();
    const auto b = next.as_array();
    double increment = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) increment = std::max(increment, std::fabs(b[k] - a[k]));

    params = next;
    record.params = params;
    result.iterations.push_back(record);
    result.param_trace.push_back(params);
    if (increment < config.em_tol) {
      result.status = EmStatus::converged;
      break;
    }
  }
  result.params = params;
  result.restored_field = threshold(dims, result.marginals_plus);
  return result;
}

}  // namespace

std::pair<double, double> m_step_means(const ObservedField& y, const std::vector<double>& marginals_plus) {
  check_marginals(y, marginals_plus);
  double w_plus = 0.0;
  double w_minus = 0.0;
  double s_plus = 0.0;
  double s_minus = 0.0;
  for (std::size_t i = 0; i < marginals_plus.size(); ++i) {
    const double p = marginals_plus[i];
    const double v = y[static_cast<int>(i)];
    w_plus += p;
    w_minus += 1.0 - p;
    s_plus += p * v;
    s_minus += (1.0 - p) * v;
  }
  if (!(w_plus > 0.0)) throw DegenerateDataError("class +1 has zero total responsibility");
  if (!(w_minus > 0.0)) throw DegenerateDataError("class -1 has zero total responsibility");
  return {s_plus / w_plus, s_minus / w_minus};
}

double m_step_variance(const ObservedField& y, const std::vector<double>& marginals_plus, double mu_plus,
                       double mu_minus) {
  check_marginals(y, marginals_plus);
  double acc = 0.0;
  for (std::size_t i = 0; i < marginals_plus.size(); ++i) {
    const double p = marginals_plus[i];
    const double v = y[static_cast<int>(i)];
    acc += p * (v - mu_plus) * (v - mu_plus) + (1.0 - p) * (v - mu_minus) * (v - mu_minus);
  }
  const double sigma2 = acc / static_cast<double>(y.size());
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw DegenerateDataError("emission variance collapsed to zero");
  return sigma2;
}

std::optional<double> nr_update_spatial(double beta, double target, const CouplingMoments& prior, double step_cap,
                                        int edges) {
  if (prior.mean_stats.empty() || prior.covariance.empty()) throw ArgumentError("spatial NR step needs one statistic");
  const double var = prior.covariance[0][0];
  const double e = static_cast<double>(edges);
  if (!(var >= kFlatVarianceFactor * e * e)) return std::nullopt;
  return beta + clamp_step((target - prior.mean_stats[0]) / var, step_cap);
}

std::optional<Coupling> nr_update_st(const Coupling& theta, double target_t1, double target_t2,
                                     const CouplingMoments& prior, double step_cap, int edges) {
  if (prior.mean_stats.size() != 2 || prior.covariance.size() != 2) {
    throw ArgumentError("spatio-temporal NR step needs two statistics");
  }
  const double a = prior.covariance[0][0];
  const double b = prior.covariance[0][1];
  const double d = prior.covariance[1][1];
  const double e = static_cast<double>(edges);
  if (!(std::max(a, d) >= kFlatVarianceFactor * e * e)) return std::nullopt;
  const double det = a * d - b * b;
  if (!(det > 0.0)) return std::nullopt;
  const double half_trace = 0.5 * (a + d);
  const double radius = std::sqrt(0.25 * (a - d) * (a - d) + b * b);
  const double lo = half_trace - radius;
  const double hi = half_trace + radius;
  if (!(lo > 0.0) || hi / lo > kMaxHessianCondition) return std::nullopt;
  const double g1 = target_t1 - prior.mean_stats[0];
  const double g2 = target_t2 - prior.mean_stats[1];
  const double d_beta = (d * g1 - b * g2) / det;
  const double d_alpha = (a * g2 - b * g1) / det;
  return Coupling{theta.beta + clamp_step(d_beta, step_cap), theta.alpha + clamp_step(d_alpha, step_cap)};
}

const char* to_string(EmStatus status) {
  switch (status) {
    case EmStatus::converged:
      return "converged";
    case EmStatus::max_iters:
      return "max_iters";
    case EmStatus::nr_diverged:
      return "nr_diverged";
  }
  return "unknown";
}

void EmConfig::validate() const {
  if (max_em_iters < 1) throw ArgumentError("max_em_iters must be at least 1");
  if (!(em_tol > 0.0) || !(nr_tol > 0.0)) throw ArgumentError("tolerances must be positive");
  if (nr_max_iters < 1) throw ArgumentError("nr_max_iters must be at least 1");
  if (!(nr_step_cap > 0.0)) throw ArgumentError("nr_step_cap must be positive");
  if (posterior_gibbs.mode != GibbsMode::posterior) throw ArgumentError("posterior_gibbs must be in posterior mode");
  if (prior_gibbs.mode != GibbsMode::prior) throw ArgumentError("prior_gibbs must be in prior mode");
  posterior_gibbs.validate();
  prior_gibbs.validate();
}

HmrfParams default_init(const ObservedField& y) {
  const double m = y.mean();
  const double v = y.variance();
  if (!(v > 0.0)) throw DegenerateDataError("observations are constant; supply initial parameters");
  const double sd = std::sqrt(v);
  return {{m + sd, m - sd, v}, {0.0, 0.0}};
}

EmResult fit_spatial(const ObservedField& y, const EmConfig& config) {
  if (y.dims().frames != 1) throw ArgumentError("fit_spatial expects a single-frame field");
  return fit(y, config);
}

EmResult fit_st(const ObservedField& y, const EmConfig& config) {
  if (y.dims().frames < 2) throw ArgumentError("fit_st expects at least two frames");
  return fit(y, config);
}

std::vector<ScorePoint> score_scan(const ObservedField& y, const HmrfParams& fixed, const std::vector<double>& grid,
                                   const GibbsRunConfig& posterior, const GibbsRunConfig& prior, int workers) {
  if (grid.empty()) throw ArgumentError("score scan needs at least one grid point");
  if (y.dims().frames != 1) throw ArgumentError("score scan expects a single-frame field");
  posterior.validate();
  prior.validate();
  if (prior.mode != GibbsMode::prior) throw ArgumentError("score scan prior config must be in prior mode");
  const PosteriorEstimates post = estimate_posterior(y, fixed, posterior);
  std::vector<ScorePoint> out(grid.size());
  parallel_for(grid.size(), workers, [&](std::size_t i) {
    GibbsRunConfig g = prior;
    g.seed = Rng::derive_seed(Rng::derive_seed(prior.seed, stream::kScanPoint), i);
    const PriorMoments m = estimate_prior_moments(y.dims(), {grid[i], 0.0}, g);
    out[i].beta = grid[i];
    out[i].score = post.e_t1 - m.mean_stats[0];
    out[i].mc_se = std::hypot(post.se_t1, m.mean_se[0]);
  });
  return out;
}

}  // namespace hmrf

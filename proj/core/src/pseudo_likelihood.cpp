#include "hmrf/pseudo_likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "hmrf/errors.hpp"
#include "hmrf/parallel.hpp"

namespace hmrf {

double log_two_cosh(double x) {
  const double a = std::fabs(x);
  return a + std::log1p(std::exp(-2.0 * a));
}

PseudoLikelihood::PseudoLikelihood(const SpinField& z) {
  if (z.dims().frames != 1) throw ArgumentError("pseudo-likelihood expects a single-frame field");
  const int n = z.dims().frame_size();
  for (int i = 0; i < n; ++i) {
    const int s = neighbor_sum(z, 0, i);
    agreement_ += z[i] * s;
    ++abs_hist_[static_cast<std::size_t>(std::abs(s))];
  }
  mean_spin_ = z.mean_spin();
  site_count_ = n;
}

double PseudoLikelihood::log_pl(double beta) const {
  double value = beta * static_cast<double>(agreement_);
  for (std::size_t k = 1; k < abs_hist_.size(); ++k) {
    value -= static_cast<double>(abs_hist_[k]) * log_two_cosh(beta * static_cast<double>(k));
  }
  value -= static_cast<double>(abs_hist_[0]) * std::log(2.0);
  return value;
}

double PseudoLikelihood::score(double beta) const {
  double value = static_cast<double>(agreement_);
  for (std::size_t k = 1; k < abs_hist_.size(); ++k) {
    const double kk = static_cast<double>(k);
    value -= static_cast<double>(abs_hist_[k]) * kk * std::tanh(beta * kk);
  }
  return value;
}

double log_pseudo_likelihood(const SpinField& z, double beta) { return PseudoLikelihood(z).log_pl(beta); }

void PlChainConfig::validate() const {
  if (!(proposal_sd > 0.0)) throw ArgumentError("proposal_sd must be positive");
  if (n_total < 1) throw ArgumentError("n_total must be at least 1");
  if (burn_in < 0 || burn_in >= n_total) throw ArgumentError("burn_in must lie in [0, n_total)");
}

PlStep pl_mh_step(double beta_t, double proposal, double u, const PseudoLikelihood& pl) {
  const double log_ratio = pl.log_pl(proposal) - pl.log_pl(beta_t);
  const double alpha = log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
  if (u <= alpha) return {proposal, true};
  return {beta_t, false};
}

PlStep pl_mh_step(double beta_t, const PseudoLikelihood& pl, double proposal_sd, Rng& rng) {
  const double proposal = rng.normal(beta_t, proposal_sd);
  const double u = rng.uniform();
  return pl_mh_step(beta_t, proposal, u, pl);
}

PlChainResult run_pl_chain(const PseudoLikelihood& pl, const PlChainConfig& config) {
  config.validate();
  Rng rng(config.seed);
  PlChainResult out;
  out.config = config;
  out.trace.seed = config.seed;
  out.trace.burn_in = config.burn_in;
  out.trace.steps.reserve(static_cast<std::size_t>(config.n_total) + 1);
  out.trace.values.reserve(static_cast<std::size_t>(config.n_total) + 1);
  out.accepted.reserve(static_cast<std::size_t>(config.n_total));
  double beta = config.init_beta;
  out.trace.push(0, beta);
  for (int t = 1; t <= config.n_total; ++t) {
    const PlStep step = pl_mh_step(beta, pl, config.proposal_sd, rng);
    beta = step.beta;
    out.trace.push(t, beta);
    out.accepted.push_back(step.accepted);
  }
  out.beta_hat = out.trace.post_burn_in_mean();
  out.beta_sd = out.trace.post_burn_in_sd();
  out.suspect_sparse_state = std::fabs(pl.mean_spin()) > kSparseStateThreshold;
  return out;
}

std::vector<PlChainResult> estimate_beta(const SpinField& z, const std::vector<PlChainConfig>& configs, int workers) {
  if (configs.empty()) throw ArgumentError("at least one chain configuration is required");
  for (const auto& c : configs) c.validate();
  const PseudoLikelihood pl(z);
  std::vector<PlChainResult> results(configs.size());
  parallel_for(configs.size(), workers, [&](std::size_t i) { results[i] = run_pl_chain(pl, configs[i]); });
  return results;
}

}  // namespace hmrf

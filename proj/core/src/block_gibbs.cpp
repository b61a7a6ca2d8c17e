#include "hmrf/block_gibbs.hpp"

#include <algorithm>
#include <cmath>

#include "hmrf/errors.hpp"

namespace hmrf {
namespace {

// Log weights of every configuration of `b`:
//   sum_k z_k h_k + beta * sum_{inner edges} z_a z_b,
// where h_k gathers the boundary, temporal and emission contributions of site k.
void fill_log_weights(const Block& b, const SpinField& z, int frame, const Coupling& c,
                      const std::array<double, 4>& emission_field, std::array<double, 16>& out) {
  const LatticeDims& d = z.dims();
  const int fs = d.frame_size();
  const int base = frame * fs;
  std::array<double, 4> h{};
  for (int k = 0; k < b.size; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    int boundary = 0;
    for (int nb : b.boundary_of(k)) boundary += z[base + nb];
    int temporal = 0;
    const int site = b.sites[uk];
    if (frame > 0) temporal += z[base - fs + site];
    if (frame + 1 < d.frames) temporal += z[base + fs + site];
    h[uk] = c.beta * boundary + c.alpha * temporal + emission_field[uk];
  }
  const int states = 1 << b.size;
  for (int s = 0; s < states; ++s) {
    double e = 0.0;
    for (int k = 0; k < b.size; ++k) e += ((s >> k) & 1) ? h[static_cast<std::size_t>(k)] : -h[static_cast<std::size_t>(k)];
    int inner = 0;
    for (int j = 0; j < b.edge_count; ++j) {
      const auto [a, q] = b.inner_edges[static_cast<std::size_t>(j)];
      inner += (((s >> a) ^ (s >> q)) & 1) ? -1 : 1;
    }
    out[static_cast<std::size_t>(s)] = e + c.beta * inner;
  }
}

std::vector<double> normalize(const std::array<double, 16>& logw, int states) {
  double mx = logw[0];
  for (int s = 1; s < states; ++s) mx = std::max(mx, logw[static_cast<std::size_t>(s)]);
  std::vector<double> p(static_cast<std::size_t>(states));
  double total = 0.0;
  for (int s = 0; s < states; ++s) {
    p[static_cast<std::size_t>(s)] = std::exp(logw[static_cast<std::size_t>(s)] - mx);
    total += p[static_cast<std::size_t>(s)];
  }
  for (auto& v : p) v /= total;
  return p;
}

void check_frame(const LatticeDims& d, int frame) {
  if (frame < 0 || frame >= d.frames) throw ArgumentError("frame index out of range");
}

// Sample covariance (n - 1 denominator) of the columns of `samples`.
double sample_cov(const std::vector<std::array<double, 2>>& samples, int a, int b, double ma, double mb) {
  if (samples.size() < 2) return 0.0;
  double acc = 0.0;
  for (const auto& x : samples) acc += (x[static_cast<std::size_t>(a)] - ma) * (x[static_cast<std::size_t>(b)] - mb);
  return acc / static_cast<double>(samples.size() - 1);
}

}  // namespace

void GibbsRunConfig::validate() const {
  if (sweeps_total < 1) throw ArgumentError("sweeps_total must be at least 1");
  if (burn_in < 0 || burn_in >= sweeps_total) throw ArgumentError("burn_in must lie in [0, sweeps_total)");
  if (batches < 1) throw ArgumentError("batches must be at least 1");
}

std::vector<double> block_conditional(const Block& block, const SpinField& z, int frame, const HmrfParams& params,
                                      GibbsMode mode, const ObservedField* y) {
  check_frame(z.dims(), frame);
  std::array<double, 4> field{};
  if (mode == GibbsMode::posterior) {
    if (y == nullptr) throw ArgumentError("posterior block conditional requires observations");
    if (y->dims() != z.dims()) throw ArgumentError("observations and field have different shapes");
    params.emission.validate();
    const int base = frame * z.dims().frame_size();
    for (int k = 0; k < block.size; ++k) {
      field[static_cast<std::size_t>(k)] = 0.5 * params.emission.log_odds((*y)[base + block.sites[static_cast<std::size_t>(k)]]);
    }
  }
  Coupling c = params.coupling;
  if (z.dims().frames == 1) c.alpha = 0.0;
  std::array<double, 16> logw{};
  fill_log_weights(block, z, frame, c, field, logw);
  return normalize(logw, 1 << block.size);
}

BlockGibbsSampler::BlockGibbsSampler(const LatticeDims& dims, const Coupling& coupling)
    : mode_(GibbsMode::prior), dims_(dims), coupling_(coupling), blocks_(block_partition(dims)) {
  if (dims_.frames == 1) coupling_.alpha = 0.0;
}

BlockGibbsSampler::BlockGibbsSampler(const ObservedField& y, const HmrfParams& params)
    : mode_(GibbsMode::posterior), dims_(y.dims()), coupling_(params.coupling), blocks_(block_partition(y.dims())) {
  params.emission.validate();
  if (dims_.frames == 1) coupling_.alpha = 0.0;
  half_log_odds_.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    half_log_odds_[i] = 0.5 * params.emission.log_odds(y[static_cast<int>(i)]);
  }
}

void BlockGibbsSampler::block_log_weights(const SpinField& z, const Block& block, int frame,
                                          std::array<double, 16>& out) const {
  std::array<double, 4> field{};
  if (mode_ == GibbsMode::posterior) {
    const std::size_t base = static_cast<std::size_t>(frame) * static_cast<std::size_t>(dims_.frame_size());
    for (int k = 0; k < block.size; ++k) {
      field[static_cast<std::size_t>(k)] = half_log_odds_[base + static_cast<std::size_t>(block.sites[static_cast<std::size_t>(k)])];
    }
  }
  fill_log_weights(block, z, frame, coupling_, field, out);
}

std::vector<double> BlockGibbsSampler::block_conditional(const SpinField& z, const Block& block, int frame) const {
  check_frame(dims_, frame);
  std::array<double, 16> logw{};
  block_log_weights(z, block, frame, logw);
  return normalize(logw, 1 << block.size);
}

void BlockGibbsSampler::sweep(SpinField& z, Rng& rng) const {
  if (z.dims() != dims_) throw ArgumentError("field shape does not match the sampler");
  std::array<double, 16> w{};
  const int fs = dims_.frame_size();
  for (int t = 0; t < dims_.frames; ++t) {
    const int base = t * fs;
    for (const Block& b : blocks_) {
      block_log_weights(z, b, t, w);
      const int states = 1 << b.size;
      double mx = w[0];
      for (int s = 1; s < states; ++s) mx = std::max(mx, w[static_cast<std::size_t>(s)]);
      double total = 0.0;
      for (int s = 0; s < states; ++s) {
        total += std::exp(w[static_cast<std::size_t>(s)] - mx);
        w[static_cast<std::size_t>(s)] = total;  // running CDF, unnormalized
      }
      const double target = rng.uniform() * total;
      int pick = states - 1;
      for (int s = 0; s < states; ++s) {
        if (w[static_cast<std::size_t>(s)] > target) {
          pick = s;
          break;
        }
      }
      for (int k = 0; k < b.size; ++k) {
        z[base + b.sites[static_cast<std::size_t>(k)]] = ((pick >> k) & 1) ? Spin{1} : Spin{-1};
      }
    }
  }
}

SpinField BlockGibbsSampler::initial_field(Rng& rng) const {
  if (mode_ == GibbsMode::prior) return SpinField::random(dims_, rng);
  SpinField z(dims_);
  for (std::size_t i = 0; i < half_log_odds_.size(); ++i) {
    z[static_cast<int>(i)] = half_log_odds_[i] >= 0.0 ? Spin{1} : Spin{-1};
  }
  return z;
}

double batch_means_se(const std::vector<double>& xs, int batches) {
  const auto n = static_cast<int>(xs.size());
  const int b = std::min(batches, n);
  if (b < 2) return 0.0;
  const int m = n / b;
  std::vector<double> means(static_cast<std::size_t>(b), 0.0);
  for (int i = 0; i < b; ++i) {
    for (int j = 0; j < m; ++j) means[static_cast<std::size_t>(i)] += xs[static_cast<std::size_t>(i * m + j)];
    means[static_cast<std::size_t>(i)] /= m;
  }
  double grand = 0.0;
  for (double v : means) grand += v;
  grand /= b;
  double ss = 0.0;
  for (double v : means) ss += (v - grand) * (v - grand);
  return std::sqrt(ss / (b - 1) / b);
}

PosteriorEstimates estimate_posterior(const ObservedField& y, const HmrfParams& params, const GibbsRunConfig& config) {
  config.validate();
  if (config.mode != GibbsMode::posterior) throw ArgumentError("estimate_posterior needs a posterior-mode config");
  const BlockGibbsSampler sampler(y, params);
  Rng rng(config.seed);
  SpinField z = sampler.initial_field(rng);
  const bool temporal = y.dims().frames > 1;
  const int retained = config.retained();
  std::vector<double> t1s;
  std::vector<double> t2s;
  t1s.reserve(static_cast<std::size_t>(retained));
  if (temporal) t2s.reserve(static_cast<std::size_t>(retained));
  std::vector<long> plus_count(y.size(), 0);
  PosteriorEstimates out;
  for (int sweep = 1; sweep <= config.sweeps_total; ++sweep) {
    sampler.sweep(z, rng);
    if (sweep <= config.burn_in) continue;
    const auto t1 = static_cast<double>(spatial_stat(z));
    const auto t2 = temporal ? static_cast<double>(temporal_stat(z)) : 0.0;
    t1s.push_back(t1);
    if (temporal) t2s.push_back(t2);
    for (std::size_t i = 0; i < plus_count.size(); ++i) plus_count[i] += z[static_cast<int>(i)] > 0;
    if (config.record_trace) out.trace.push_back({t1, t2});
  }
  const auto r = static_cast<double>(retained);
  out.marginals_plus.resize(y.size());
  for (std::size_t i = 0; i < plus_count.size(); ++i) out.marginals_plus[i] = static_cast<double>(plus_count[i]) / r;
  double sum = 0.0;
  for (double v : t1s) sum += v;
  out.e_t1 = sum / r;
  out.se_t1 = batch_means_se(t1s, config.batches);
  if (temporal) {
    sum = 0.0;
    for (double v : t2s) sum += v;
    out.e_t2 = sum / r;
    out.se_t2 = batch_means_se(t2s, config.batches);
  }
  return out;
}

PriorMoments estimate_prior_moments(const LatticeDims& dims, const Coupling& coupling, const GibbsRunConfig& config) {
  config.validate();
  if (config.mode != GibbsMode::prior) throw ArgumentError("estimate_prior_moments needs a prior-mode config");
  const BlockGibbsSampler sampler(dims, coupling);
  Rng rng(config.seed);
  SpinField z = sampler.initial_field(rng);
  const int k = dims.frames > 1 ? 2 : 1;
  std::vector<std::array<double, 2>> samples;
  samples.reserve(static_cast<std::size_t>(config.retained()));
  for (int sweep = 1; sweep <= config.sweeps_total; ++sweep) {
    sampler.sweep(z, rng);
    if (sweep <= config.burn_in) continue;
    samples.push_back({static_cast<double>(spatial_stat(z)), k == 2 ? static_cast<double>(temporal_stat(z)) : 0.0});
  }
  PriorMoments out;
  out.mean_stats.assign(static_cast<std::size_t>(k), 0.0);
  for (const auto& x : samples) {
    for (int i = 0; i < k; ++i) out.mean_stats[static_cast<std::size_t>(i)] += x[static_cast<std::size_t>(i)];
  }
  for (auto& m : out.mean_stats) m /= static_cast<double>(samples.size());
  out.covariance.assign(static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(k), 0.0));
  out.covariance_se = out.covariance;
  out.mean_se.assign(static_cast<std::size_t>(k), 0.0);
  std::vector<double> column(samples.size());
  for (int a = 0; a < k; ++a) {
    const double ma = out.mean_stats[static_cast<std::size_t>(a)];
    for (std::size_t j = 0; j < samples.size(); ++j) column[j] = samples[j][static_cast<std::size_t>(a)];
    out.mean_se[static_cast<std::size_t>(a)] = batch_means_se(column, config.batches);
    for (int b = a; b < k; ++b) {
      const double mb = out.mean_stats[static_cast<std::size_t>(b)];
      const double cov = sample_cov(samples, a, b, ma, mb);
      out.covariance[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = cov;
      out.covariance[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = cov;
      for (std::size_t j = 0; j < samples.size(); ++j) {
        column[j] = (samples[j][static_cast<std::size_t>(a)] - ma) * (samples[j][static_cast<std::size_t>(b)] - mb);
      }
      const double se = batch_means_se(column, config.batches);
      out.covariance_se[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = se;
      out.covariance_se[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = se;
    }
  }
  if (config.record_trace) out.trace = std::move(samples);
  return out;
}

}  // namespace hmrf

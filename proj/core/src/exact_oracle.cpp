#include "hmrf/exact_oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "hmrf/errors.hpp"
#include "hmrf/parallel.hpp"

namespace hmrf {
namespace {

// Flattened model: spatial neighbor lists over global sites, the temporal
// partner sites, and an optional per-site emission field h_k such that the
// emission log-density is sum_k z_k h_k up to a constant.
struct EnumerationModel {
  int n = 0;
  int stat_count = 1;
  double beta = 0.0;
  double alpha = 0.0;
  std::vector<std::array<int, 4>> spatial;
  std::vector<int> spatial_count;
  std::vector<std::array<int, 2>> temporal;
  std::vector<int> temporal_count;
  std::vector<double> field;  // empty for the prior
};

EnumerationModel make_model(const LatticeDims& dims, const Coupling& coupling) {
  dims.validate();
  const int n = dims.site_count();
  if (n > kMaxExactSites) {
    throw CapacityError("exact enumeration supports at most " + std::to_string(kMaxExactSites) +
                        " sites, lattice has " + std::to_string(n));
  }
  EnumerationModel m;
  m.n = n;
  m.stat_count = dims.frames > 1 ? 2 : 1;
  m.beta = coupling.beta;
  m.alpha = dims.frames > 1 ? coupling.alpha : 0.0;
  m.spatial.resize(static_cast<std::size_t>(n));
  m.spatial_count.assign(static_cast<std::size_t>(n), 0);
  m.temporal.resize(static_cast<std::size_t>(n));
  m.temporal_count.assign(static_cast<std::size_t>(n), 0);
  const int fs = dims.frame_size();
  for (int k = 0; k < n; ++k) {
    const int t = k / fs;
    const int i = k % fs;
    const auto uk = static_cast<std::size_t>(k);
    for (int nb : neighbors(i, dims)) m.spatial[uk][static_cast<std::size_t>(m.spatial_count[uk]++)] = t * fs + nb;
    if (t > 0) m.temporal[uk][static_cast<std::size_t>(m.temporal_count[uk]++)] = k - fs;
    if (t + 1 < dims.frames) m.temporal[uk][static_cast<std::size_t>(m.temporal_count[uk]++)] = k + fs;
  }
  return m;
}

struct Accumulator {
  double max_energy = -std::numeric_limits<double>::infinity();
  double weight = 0.0;
  std::array<double, 2> first{};
  std::array<double, 3> second{};  // T1T1, T1T2, T2T2
  std::vector<double> plus;         // per-site weight of +1, only when tracked

  void rescale(double factor) {
    weight *= factor;
    for (auto& v : first) v *= factor;
    for (auto& v : second) v *= factor;
    for (auto& v : plus) v *= factor;
  }

  void add(double energy, double t1, double t2, const std::vector<int>& z) {
    if (energy > max_energy) {
      rescale(std::exp(max_energy - energy));
      max_energy = energy;
    }
    const double w = std::exp(energy - max_energy);
    weight += w;
    first[0] += w * t1;
    first[1] += w * t2;
    second[0] += w * t1 * t1;
    second[1] += w * t1 * t2;
    second[2] += w * t2 * t2;
    if (!plus.empty()) {
      for (std::size_t k = 0; k < plus.size(); ++k) {
        if (z[k] > 0) plus[k] += w;
      }
    }
  }

  void merge(const Accumulator& other) {
    if (other.weight == 0.0) return;
    if (other.max_energy > max_energy) {
      rescale(std::exp(max_energy - other.max_energy));
      max_energy = other.max_energy;
    }
    const double f = std::exp(other.max_energy - max_energy);
    weight += f * other.weight;
    for (std::size_t i = 0; i < first.size(); ++i) first[i] += f * other.first[i];
    for (std::size_t i = 0; i < second.size(); ++i) second[i] += f * other.second[i];
    for (std::size_t i = 0; i < plus.size(); ++i) plus[i] += f * other.plus[i];
  }
};

// Visits every state whose high bits equal `chunk`, in Gray-code order over
// the low `low_bits` bits, with incrementally maintained statistics.
template <class Visit>
void walk_chunk(const EnumerationModel& m, int low_bits, std::uint64_t chunk, Visit&& visit) {
  std::vector<int> z(static_cast<std::size_t>(m.n), -1);
  std::uint64_t state = chunk << low_bits;
  for (int k = 0; k < m.n; ++k) {
    if ((state >> k) & 1ULL) z[static_cast<std::size_t>(k)] = 1;
  }
  long t1 = 0;
  long t2 = 0;
  double em = 0.0;
  for (int k = 0; k < m.n; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    for (int j = 0; j < m.spatial_count[uk]; ++j) {
      const int nb = m.spatial[uk][static_cast<std::size_t>(j)];
      if (nb > k) t1 += z[uk] * z[static_cast<std::size_t>(nb)];
    }
    for (int j = 0; j < m.temporal_count[uk]; ++j) {
      const int nb = m.temporal[uk][static_cast<std::size_t>(j)];
      if (nb > k) t2 += z[uk] * z[static_cast<std::size_t>(nb)];
    }
    if (!m.field.empty()) em += z[uk] * m.field[uk];
  }
  auto energy = [&] { return m.beta * static_cast<double>(t1) + m.alpha * static_cast<double>(t2) + em; };
  visit(state, energy(), t1, t2, z);
  const std::uint64_t count = 1ULL << low_bits;
  for (std::uint64_t i = 1; i < count; ++i) {
    const int k = std::countr_zero(i);
    const auto uk = static_cast<std::size_t>(k);
    const int old = z[uk];
    int ssum = 0;
    for (int j = 0; j < m.spatial_count[uk]; ++j) ssum += z[static_cast<std::size_t>(m.spatial[uk][static_cast<std::size_t>(j)])];
    int tsum = 0;
    for (int j = 0; j < m.temporal_count[uk]; ++j) tsum += z[static_cast<std::size_t>(m.temporal[uk][static_cast<std::size_t>(j)])];
    t1 -= 2L * old * ssum;
    t2 -= 2L * old * tsum;
    if (!m.field.empty()) em -= 2.0 * old * m.field[uk];
    z[uk] = -old;
    state ^= (1ULL << k);
    visit(state, energy(), t1, t2, z);
  }
}

Accumulator accumulate(const EnumerationModel& m, bool track_sites, int workers) {
  const int high_bits = std::min(m.n, 4);
  const int low_bits = m.n - high_bits;
  const std::size_t chunks = std::size_t{1} << high_bits;
  std::vector<Accumulator> parts(chunks);
  auto run = [&](std::size_t c) {
    Accumulator& acc = parts[c];
    if (track_sites) acc.plus.assign(static_cast<std::size_t>(m.n), 0.0);
    walk_chunk(m, low_bits, c, [&](std::uint64_t, double e, long t1, long t2, const std::vector<int>& z) {
      acc.add(e, static_cast<double>(t1), static_cast<double>(t2), z);
    });
  };
  parallel_for(chunks, workers, run);
  Accumulator total;
  if (track_sites) total.plus.assign(static_cast<std::size_t>(m.n), 0.0);
  for (const auto& p : parts) total.merge(p);
  return total;
}

std::vector<double> energies_to_distribution(const EnumerationModel& m) {
  std::vector<double> energy(std::size_t{1} << m.n);
  walk_chunk(m, m.n, 0, [&](std::uint64_t state, double e, long, long, const std::vector<int>&) { energy[state] = e; });
  const double mx = *std::max_element(energy.begin(), energy.end());
  double total = 0.0;
  for (auto& e : energy) {
    e = std::exp(e - mx);
    total += e;
  }
  for (auto& e : energy) e /= total;
  return energy;
}

void attach_emission(EnumerationModel& m, const ObservedField& y, const Emission& emission) {
  emission.validate();
  m.field.resize(static_cast<std::size_t>(m.n));
  for (int k = 0; k < m.n; ++k) m.field[static_cast<std::size_t>(k)] = 0.5 * emission.log_odds(y[k]);
}

}  // namespace

ExactMoments exact_prior_moments(const LatticeDims& dims, const Coupling& coupling, int workers) {
  const auto m = make_model(dims, coupling);
  const auto acc = accumulate(m, false, workers);
  ExactMoments out;
  // log psi = max + log(sum exp(E - max))
  out.log_partition = acc.max_energy + std::log(acc.weight);
  const int k = m.stat_count;
  out.mean_stats.resize(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) out.mean_stats[static_cast<std::size_t>(i)] = acc.first[static_cast<std::size_t>(i)] / acc.weight;
  out.covariance.assign(static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(k), 0.0));
  const double e1 = out.mean_stats[0];
  out.covariance[0][0] = acc.second[0] / acc.weight - e1 * e1;
  if (k == 2) {
    const double e2 = out.mean_stats[1];
    out.covariance[0][1] = out.covariance[1][0] = acc.second[1] / acc.weight - e1 * e2;
    out.covariance[1][1] = acc.second[2] / acc.weight - e2 * e2;
  }
  return out;
}

ExactPosterior exact_posterior(const ObservedField& y, const HmrfParams& params, int workers) {
  auto m = make_model(y.dims(), params.coupling);
  attach_emission(m, y, params.emission);
  const auto acc = accumulate(m, true, workers);
  ExactPosterior out;
  out.marginals_plus.resize(static_cast<std::size_t>(m.n));
  for (int k = 0; k < m.n; ++k) {
    out.marginals_plus[static_cast<std::size_t>(k)] = acc.plus[static_cast<std::size_t>(k)] / acc.weight;
  }
  out.mean_stats_given_y.push_back(acc.first[0] / acc.weight);
  if (m.stat_count == 2) out.mean_stats_given_y.push_back(acc.first[1] / acc.weight);
  return out;
}

std::vector<double> exact_score(const LatticeDims& dims, const Coupling& coupling,
                                const std::vector<double>& target_stats) {
  const auto moments = exact_prior_moments(dims, coupling);
  if (target_stats.size() != moments.mean_stats.size()) {
    throw ArgumentError("target statistic count does not match the model");
  }
  std::vector<double> score(target_stats.size());
  for (std::size_t i = 0; i < score.size(); ++i) score[i] = target_stats[i] - moments.mean_stats[i];
  return score;
}

std::vector<double> exact_gibbs_distribution(const LatticeDims& dims, const Coupling& coupling) {
  return energies_to_distribution(make_model(dims, coupling));
}

std::vector<double> exact_posterior_distribution(const ObservedField& y, const HmrfParams& params) {
  auto m = make_model(y.dims(), params.coupling);
  attach_emission(m, y, params.emission);
  return energies_to_distribution(m);
}

std::uint64_t state_index(const SpinField& z) {
  if (z.size() > 63) throw CapacityError("field too large to encode as a state index");
  std::uint64_t s = 0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    if (z[static_cast<int>(k)] > 0) s |= (1ULL << k);
  }
  return s;
}

}  // namespace hmrf

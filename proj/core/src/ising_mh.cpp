#include "hmrf/ising_mh.hpp"

#include <algorithm>
#include <cmath>

#include "hmrf/errors.hpp"

namespace hmrf {

namespace {

void require_single_frame(const SpinField& z) {
  if (z.dims().frames != 1) throw ArgumentError("Ising sampler expects a single-frame field");
}

void require_site(const SpinField& z, int site) {
  if (site < 0 || site >= z.dims().frame_size()) throw ArgumentError("site index out of range");
}

}  // namespace

double flip_acceptance(const SpinField& z, int site, double beta) {
  require_single_frame(z);
  require_site(z, site);
  // a_i - d_i = z_i * (sum of neighbors)
  const int balance = z[site] * neighbor_sum(z, 0, site);
  return std::min(1.0, std::exp(-2.0 * beta * balance));
}

bool mh_update(SpinField& z, double beta, int site, double u) {
  if (u <= flip_acceptance(z, site, beta)) {
    z.flip(site);
    return true;
  }
  return false;
}

bool mh_update(SpinField& z, double beta, Rng& rng) {
  const int site = rng.index(z.dims().frame_size());
  const double u = rng.uniform();
  return mh_update(z, beta, site, u);
}

void IsingRunConfig::validate() const {
  dims.validate();
  if (dims.frames != 1) throw ArgumentError("Ising simulation is single-frame");
  if (total_updates < 1) throw ArgumentError("total_updates must be at least 1");
  if (record_every < 1) throw ArgumentError("record_every must be at least 1");
  if (init == IsingInit::provided) {
    if (!initial_field || initial_field->dims() != dims) {
      throw ArgumentError("provided initial field missing or of the wrong size");
    }
  }
}

IsingRun simulate_ising(const IsingRunConfig& config) {
  config.validate();
  Rng rng(config.seed);
  IsingRun run;
  switch (config.init) {
    case IsingInit::random_uniform:
      run.field = SpinField::random(config.dims, rng);
      break;
    case IsingInit::all_plus:
      run.field = SpinField(config.dims, 1);
      break;
    case IsingInit::provided:
      run.field = *config.initial_field;
      break;
  }
  SpinField& z = run.field;
  const int n = config.dims.frame_size();
  run.trace.seed = config.seed;
  long s = spatial_stat(z, 0);
  run.trace.push(0, static_cast<double>(s));
  for (std::int64_t step = 1; step <= config.total_updates; ++step) {
    const int site = rng.index(n);
    const double u = rng.uniform();
    const int local = z[site] * neighbor_sum(z, 0, site);
    if (u <= std::min(1.0, std::exp(-2.0 * config.beta * local))) {
      z.flip(site);
      s -= 2L * local;
      ++run.accepted;
    }
    if (step % config.record_every == 0) run.trace.push(step, static_cast<double>(s));
  }
  run.sweeps = static_cast<double>(config.total_updates) / n;
  return run;
}

}  // namespace hmrf

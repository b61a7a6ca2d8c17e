#include "hmrf_cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "hmrf/block_gibbs.hpp"
#include "hmrf/em.hpp"
#include "hmrf/errors.hpp"
#include "hmrf/exact_oracle.hpp"
#include "hmrf/ising_mh.hpp"
#include "hmrf/pseudo_likelihood.hpp"
#include "hmrf/rng.hpp"
#include "hmrf_cli/field_io.hpp"
#include "hmrf_cli/manifest.hpp"
#include "hmrf_cli/simulate.hpp"
#include "json.hpp"

namespace hmrf::cli {
namespace {

using nlohmann::json;

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

void write_json(const std::string& path, const json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

json params_json(const HmrfParams& p, bool temporal) {
  json j{{"mu_plus", p.emission.mu_plus},
         {"mu_minus", p.emission.mu_minus},
         {"sigma2", p.emission.sigma2},
         {"beta", p.coupling.beta}};
  if (temporal) j["alpha"] = p.coupling.alpha;
  return j;
}

json matrix_json(const std::vector<std::vector<double>>& m) {
  json j = json::array();
  for (const auto& row : m) j.push_back(row);
  return j;
}

// Shared state of one invocation.
struct Context {
  std::ostream& out;
  int workers = 1;
  std::string command_line;
};

// Collects manifest fields while a command runs and writes the manifest last.
class ManifestScope {
 public:
  ManifestScope(const Context& ctx, json config) {
    manifest_.command = ctx.command_line;
    manifest_.config = std::move(config);
    manifest_.started = utc_now();
  }
  void seed(std::uint64_t s) {
    manifest_.seed = s;
    manifest_.has_seed = true;
  }
  void input(const std::string& p) { manifest_.inputs.push_back(p); }
  void output(const std::string& p) { manifest_.outputs.push_back(p); }
  void finish(const std::string& primary) {
    manifest_.finished = utc_now();
    manifest_.write(primary + ".manifest.json");
  }

 private:
  RunManifest manifest_;
};

// ---- simulate ----------------------------------------------------------

struct IsingOpts {
  int rows = 0, cols = 0;
  double beta = 0.0;
  std::int64_t updates = 0;
  std::uint64_t seed = 0;
  std::int64_t record_every = 0;
  std::string init = "random";
  std::string output, trace;
};

int cmd_simulate_ising(const Context& ctx, const IsingOpts& o) {
  IsingRunConfig config;
  config.dims = {o.rows, o.cols, 1};
  config.beta = o.beta;
  config.total_updates = o.updates;
  config.seed = o.seed;
  config.record_every = o.record_every > 0 ? o.record_every : static_cast<std::int64_t>(o.rows) * o.cols;
  config.init = o.init == "plus" ? IsingInit::all_plus : IsingInit::random_uniform;
  const std::string trace_path = o.trace.empty() ? o.output + ".trace.csv" : o.trace;

  ManifestScope manifest(ctx, {{"rows", o.rows},
                               {"cols", o.cols},
                               {"beta", o.beta},
                               {"updates", o.updates},
                               {"record_every", config.record_every},
                               {"init", o.init}});
  manifest.seed(o.seed);
  const IsingRun run = simulate_ising(config);
  write_spin_field(o.output, run.field);
  {
    auto csv = open_output(trace_path);
    csv << "update,S\n";
    for (std::size_t k = 0; k < run.trace.values.size(); ++k) {
      csv << run.trace.steps[k] << ',' << static_cast<long>(run.trace.values[k]) << '\n';
    }
  }
  manifest.output(o.output);
  manifest.output(trace_path);
  manifest.finish(o.output);
  ctx.out << "sweeps " << run.sweeps << ", accepted " << run.accepted << ", final S "
          << static_cast<long>(run.trace.values.back()) << '\n';
  return kExitOk;
}

struct HmrfSimOpts {
  int rows = 0, cols = 0, frames = 1;
  double mu_plus = 1.0, mu_minus = -1.0, sigma2 = 1.0, beta = 0.0, alpha = 0.0;
  int sweeps = kDefaultSimulationSweeps;
  std::uint64_t seed = 0;
  std::string output, hidden;
};

int cmd_simulate_hmrf(const Context& ctx, const HmrfSimOpts& o, bool temporal) {
  const LatticeDims dims{o.rows, o.cols, temporal ? o.frames : 1};
  if (temporal && dims.frames < 2) throw ArgumentError("st-hmrf needs at least two frames");
  const HmrfParams params{{o.mu_plus, o.mu_minus, o.sigma2}, {o.beta, temporal ? o.alpha : 0.0}};
  const std::string hidden_path = o.hidden.empty() ? o.output + ".hidden.lat" : o.hidden;

  json config{{"rows", dims.rows}, {"cols", dims.cols}, {"frames", dims.frames}, {"sweeps", o.sweeps},
              {"params", params_json(params, temporal)}};
  ManifestScope manifest(ctx, config);
  manifest.seed(o.seed);
  const auto [z, y] = simulate_hmrf(params, dims, o.seed, o.sweeps);
  write_observed_field(o.output, y);
  write_spin_field(hidden_path, z);
  manifest.output(o.output);
  manifest.output(hidden_path);
  manifest.finish(o.output);
  ctx.out << "hidden mean spin " << fixed4(z.mean_spin()) << ", T1/edges "
          << fixed4(static_cast<double>(spatial_stat(z)) / (edge_count(dims) * dims.frames)) << '\n';
  return kExitOk;
}

// ---- estimate ----------------------------------------------------------

struct PlOpts {
  std::string input, output;
  std::vector<double> inits{-2.0, 4.0, 8.0};
  int n = 1000, burn_in = 500;
  double proposal_sd = 1.0;
  std::uint64_t seed = 0;
};

int cmd_estimate_pl(const Context& ctx, const PlOpts& o) {
  ManifestScope manifest(ctx, {{"inits", o.inits}, {"n", o.n}, {"burnin", o.burn_in}, {"proposal_sd", o.proposal_sd}});
  manifest.seed(o.seed);
  manifest.input(o.input);
  const SpinField z = read_spin_field(o.input);
  const std::uint64_t chain_root = Rng::derive_seed(o.seed, stream::kPlChain);
  std::vector<PlChainConfig> configs;
  for (std::size_t k = 0; k < o.inits.size(); ++k) {
    PlChainConfig c;
    c.init_beta = o.inits[k];
    c.proposal_sd = o.proposal_sd;
    c.n_total = o.n;
    c.burn_in = o.burn_in;
    c.seed = Rng::derive_seed(chain_root, k);
    configs.push_back(c);
  }
  const auto results = estimate_beta(z, configs, ctx.workers);

  json chains = json::array();
  for (std::size_t k = 0; k < results.size(); ++k) {
    const auto& r = results[k];
    const auto accepted = std::count(r.accepted.begin(), r.accepted.end(), true);
    chains.push_back({{"init", r.config.init_beta},
                      {"seed", r.config.seed},
                      {"beta_hat", r.beta_hat},
                      {"beta_sd", r.beta_sd},
                      {"acceptance_rate", static_cast<double>(accepted) / static_cast<double>(r.config.n_total)},
                      {"suspect_sparse_state", r.suspect_sparse_state}});
    const std::string trace_path = o.output + ".chain" + std::to_string(k) + ".csv";
    auto csv = open_output(trace_path);
    csv << "step,beta,accepted\n";
    char buf[64];
    for (std::size_t t = 0; t < r.trace.values.size(); ++t) {
      std::snprintf(buf, sizeof buf, "%.17g", r.trace.values[t]);
      csv << r.trace.steps[t] << ',' << buf << ',' << (t == 0 ? 0 : static_cast<int>(r.accepted[t - 1])) << '\n';
    }
    manifest.output(trace_path);
  }
  const json result{{"schema_version", kSchemaVersion},
                    {"command", "estimate pl-beta"},
                    {"rows", z.dims().rows},
                    {"cols", z.dims().cols},
                    {"mean_spin", z.mean_spin()},
                    {"n", o.n},
                    {"burnin", o.burn_in},
                    {"chains", chains}};
  write_json(o.output, result);
  manifest.output(o.output);
  manifest.finish(o.output);

  ctx.out << "init      beta_hat\n";
  for (const auto& r : results) {
    ctx.out << fixed4(r.config.init_beta) << "  " << fixed4(r.beta_hat)
            << (r.suspect_sparse_state ? "  (suspect sparse state)" : "") << '\n';
  }
  return kExitOk;
}

struct EmOpts {
  std::string input, output, restored;
  std::vector<double> init;
  std::uint64_t seed = 0;
  int max_iters = 100, nr_max_iters = 50;
  double em_tol = 1e-3, nr_tol = 1e-3, step_cap = 0.5;
  int post_sweeps = 10000, post_burn_in = 5000, prior_sweeps = 1000, prior_burn_in = 200;
  bool paper_literal_sigma = false;
  bool independent_draws = false;
};

int cmd_estimate_em(const Context& ctx, const EmOpts& o, bool temporal) {
  EmConfig config;
  config.max_em_iters = o.max_iters;
  config.em_tol = o.em_tol;
  config.nr_tol = o.nr_tol;
  config.nr_max_iters = o.nr_max_iters;
  config.nr_step_cap = o.step_cap;
  config.posterior_gibbs = {o.post_sweeps, o.post_burn_in, Rng::derive_seed(o.seed, stream::kPosteriorChain),
                            GibbsMode::posterior};
  config.prior_gibbs = {o.prior_sweeps, o.prior_burn_in, Rng::derive_seed(o.seed, stream::kPriorChain),
                        GibbsMode::prior};
  config.paper_literal_sigma = o.paper_literal_sigma;
  config.common_random_numbers = !o.independent_draws;
  const std::size_t want = temporal ? 5 : 4;
  if (!o.init.empty()) {
    if (o.init.size() != want) throw ArgumentError("--init needs " + std::to_string(want) + " values");
    config.init_params = HmrfParams{{o.init[0], o.init[1], o.init[2]}, {o.init[3], temporal ? o.init[4] : 0.0}};
  }
  const std::string restored_path = o.restored.empty() ? o.output + ".restored.lat" : o.restored;

  json echo{{"max_iters", o.max_iters},       {"em_tol", o.em_tol},
            {"nr_tol", o.nr_tol},             {"nr_max_iters", o.nr_max_iters},
            {"step_cap", o.step_cap},         {"post_sweeps", o.post_sweeps},
            {"post_burnin", o.post_burn_in},  {"prior_sweeps", o.prior_sweeps},
            {"prior_burnin", o.prior_burn_in}, {"paper_literal_sigma", o.paper_literal_sigma},
            {"common_random_numbers", config.common_random_numbers}};
  if (!o.init.empty()) echo["init"] = o.init;
  ManifestScope manifest(ctx, echo);
  manifest.seed(o.seed);
  manifest.input(o.input);
  const ObservedField y = read_observed_field(o.input);
  const EmResult r = temporal ? fit_st(y, config) : fit_spatial(y, config);

  json trace = json::array();
  for (const auto& p : r.param_trace) trace.push_back(params_json(p, temporal));
  json iterations = json::array();
  for (const auto& it : r.iterations) {
    json j{{"nr_steps", it.nr_steps}, {"e_t1", it.e_t1}, {"se_t1", it.se_t1}};
    if (it.e_t2) j["e_t2"] = *it.e_t2;
    if (it.se_t2) j["se_t2"] = *it.se_t2;
    iterations.push_back(j);
  }
  const json result{{"schema_version", kSchemaVersion},
                    {"command", temporal ? "estimate st-hmrf" : "estimate hmrf"},
                    {"status", to_string(r.status)},
                    {"params", params_json(r.params, temporal)},
                    {"em_iterations", r.iterations.size()},
                    {"trace", trace},
                    {"iterations", iterations}};
  write_json(o.output, result);
  write_spin_field(restored_path, r.restored_field);
  manifest.output(o.output);
  manifest.output(restored_path);
  manifest.finish(o.output);

  const auto a = r.params.as_array();
  ctx.out << "status " << to_string(r.status) << " after " << r.iterations.size() << " iterations\n"
          << "mu_plus " << fixed4(a[0]) << "  mu_minus " << fixed4(a[1]) << "  sigma2 " << fixed4(a[2]) << "  beta "
          << fixed4(a[3]);
  if (temporal) ctx.out << "  alpha " << fixed4(a[4]);
  ctx.out << '\n';
  return r.status == EmStatus::nr_diverged ? kExitNrDiverged : kExitOk;
}

// ---- gibbs -------------------------------------------------------------

struct GibbsOpts {
  std::string input, output, trace;
  int rows = 0, cols = 0, frames = 1;
  double mu_plus = 1.0, mu_minus = -1.0, sigma2 = 1.0, beta = 0.0, alpha = 0.0;
  int sweeps = 10000, burn_in = 5000, batches = 50;
  std::uint64_t seed = 0;
};

void write_stat_trace(const std::string& path, const std::vector<std::array<double, 2>>& trace, bool temporal) {
  auto csv = open_output(path);
  csv << (temporal ? "sweep,T1,T2\n" : "sweep,T1\n");
  for (std::size_t k = 0; k < trace.size(); ++k) {
    csv << k + 1 << ',' << static_cast<long>(trace[k][0]);
    if (temporal) csv << ',' << static_cast<long>(trace[k][1]);
    csv << '\n';
  }
}

int cmd_gibbs(const Context& ctx, const GibbsOpts& o, GibbsMode mode) {
  GibbsRunConfig config{o.sweeps, o.burn_in, o.seed, mode, !o.trace.empty(), o.batches};
  json echo{{"sweeps", o.sweeps}, {"burnin", o.burn_in}, {"batches", o.batches}, {"beta", o.beta}, {"alpha", o.alpha}};
  json result{{"schema_version", kSchemaVersion}};
  if (mode == GibbsMode::posterior) {
    echo["mu_plus"] = o.mu_plus;
    echo["mu_minus"] = o.mu_minus;
    echo["sigma2"] = o.sigma2;
  } else {
    echo["rows"] = o.rows;
    echo["cols"] = o.cols;
    echo["frames"] = o.frames;
  }
  ManifestScope manifest(ctx, echo);
  manifest.seed(o.seed);
  bool temporal = false;
  if (mode == GibbsMode::posterior) {
    manifest.input(o.input);
    const ObservedField y = read_observed_field(o.input);
    temporal = y.dims().frames > 1;
    const HmrfParams params{{o.mu_plus, o.mu_minus, o.sigma2}, {o.beta, o.alpha}};
    const PosteriorEstimates e = estimate_posterior(y, params, config);
    result["command"] = "gibbs posterior";
    result["e_t1"] = e.e_t1;
    result["se_t1"] = e.se_t1;
    if (e.e_t2) {
      result["e_t2"] = *e.e_t2;
      result["se_t2"] = *e.se_t2;
    }
    result["marginals_plus"] = e.marginals_plus;
    if (config.record_trace) write_stat_trace(o.trace, e.trace, temporal);
    ctx.out << "E[T1|Y] " << fixed4(e.e_t1) << " (se " << fixed4(e.se_t1) << ")\n";
  } else {
    const LatticeDims dims{o.rows, o.cols, o.frames};
    dims.validate();
    temporal = dims.frames > 1;
    const PriorMoments m = estimate_prior_moments(dims, {o.beta, o.alpha}, config);
    result["command"] = "gibbs prior";
    result["mean_stats"] = m.mean_stats;
    result["mean_se"] = m.mean_se;
    result["covariance"] = matrix_json(m.covariance);
    result["covariance_se"] = matrix_json(m.covariance_se);
    if (config.record_trace) write_stat_trace(o.trace, m.trace, temporal);
    ctx.out << "E[T1] " << fixed4(m.mean_stats[0]) << " (se " << fixed4(m.mean_se[0]) << ")\n";
  }
  write_json(o.output, result);
  manifest.output(o.output);
  if (config.record_trace) manifest.output(o.trace);
  manifest.finish(o.output);
  return kExitOk;
}

// ---- score-scan, oracle ------------------------------------------------

struct ScanOpts {
  std::string input, output;
  double mu_plus = 1.0, mu_minus = -1.0, sigma2 = 1.0, beta = 0.0;
  double grid_min = -2.0, grid_max = 2.0, grid_step = 0.1;
  int post_sweeps = 10000, post_burn_in = 5000, prior_sweeps = 1000, prior_burn_in = 200;
  std::uint64_t seed = 0;
};

std::vector<double> make_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw ArgumentError("grid needs grid-max >= grid-min and a positive step");
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> grid;
  for (long k = 0; k < n; ++k) grid.push_back(lo + static_cast<double>(k) * step);
  return grid;
}

int cmd_score_scan(const Context& ctx, const ScanOpts& o) {
  const auto grid = make_grid(o.grid_min, o.grid_max, o.grid_step);
  ManifestScope manifest(ctx, {{"mu_plus", o.mu_plus},
                               {"mu_minus", o.mu_minus},
                               {"sigma2", o.sigma2},
                               {"beta", o.beta},
                               {"grid_min", o.grid_min},
                               {"grid_max", o.grid_max},
                               {"grid_step", o.grid_step},
                               {"post_sweeps", o.post_sweeps},
                               {"post_burnin", o.post_burn_in},
                               {"prior_sweeps", o.prior_sweeps},
                               {"prior_burnin", o.prior_burn_in}});
  manifest.seed(o.seed);
  manifest.input(o.input);
  const ObservedField y = read_observed_field(o.input);
  const GibbsRunConfig post{o.post_sweeps, o.post_burn_in, Rng::derive_seed(o.seed, stream::kPosteriorChain),
                            GibbsMode::posterior};
  const GibbsRunConfig prior{o.prior_sweeps, o.prior_burn_in, Rng::derive_seed(o.seed, stream::kPriorChain),
                             GibbsMode::prior};
  const auto points = score_scan(y, {{o.mu_plus, o.mu_minus, o.sigma2}, {o.beta, 0.0}}, grid, post, prior, ctx.workers);
  {
    auto csv = open_output(o.output);
    csv << "beta,score,mc_se\n";
    char buf[96];
    for (const auto& p : points) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.beta, p.score, p.mc_se);
      csv << buf;
    }
  }
  manifest.output(o.output);
  manifest.finish(o.output);
  ctx.out << points.size() << " grid points written\n";
  return kExitOk;
}

struct OracleOpts {
  int rows = 0, cols = 0, frames = 1;
  double beta = 0.0, alpha = 0.0;
  std::string output;
};

int cmd_oracle(const Context& ctx, const OracleOpts& o) {
  const LatticeDims dims{o.rows, o.cols, o.frames};
  ManifestScope manifest(ctx, {{"rows", o.rows}, {"cols", o.cols}, {"frames", o.frames}, {"beta", o.beta},
                               {"alpha", o.alpha}});
  const ExactMoments m = exact_prior_moments(dims, {o.beta, o.alpha}, ctx.workers);
  const json result{{"schema_version", kSchemaVersion},
                    {"command", "oracle"},
                    {"log_partition", m.log_partition},
                    {"mean_stats", m.mean_stats},
                    {"covariance", matrix_json(m.covariance)}};
  if (o.output.empty()) {
    ctx.out << result.dump(2) << '\n';
    return kExitOk;
  }
  write_json(o.output, result);
  manifest.output(o.output);
  manifest.finish(o.output);
  return kExitOk;
}

// ---- wiring ------------------------------------------------------------

void add_dims(CLI::App* app, int& rows, int& cols) {
  app->add_option("--rows", rows, "Lattice rows")->required()->check(CLI::PositiveNumber);
  app->add_option("--cols", cols, "Lattice columns")->required()->check(CLI::PositiveNumber);
}

void add_emission(CLI::App* app, double& mu_plus, double& mu_minus, double& sigma2) {
  app->add_option("--mu-plus", mu_plus, "Emission mean of +1 sites")->capture_default_str();
  app->add_option("--mu-minus", mu_minus, "Emission mean of -1 sites")->capture_default_str();
  app->add_option("--sigma2", sigma2, "Emission variance")->capture_default_str();
}

void add_seed(CLI::App* app, std::uint64_t& seed) {
  app->add_option("--seed", seed, "Random seed (required)")->required();
}

std::string join_args(int argc, const char* const* argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i > 0) s += ' ';
    s += argv[i];
  }
  return s;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Markov random field simulation and estimation", "hmrf"};
  app.require_subcommand(1);
  app.fallthrough();
  int workers = 1;
  app.add_option("--parallel", workers, "Worker threads for independent chains and grid points")
      ->envname("HMRF_PARALLEL")
      ->check(CLI::PositiveNumber);

  std::function<int(const Context&)> action;

  auto* simulate = app.add_subcommand("simulate", "Simulate spin fields and observations");
  simulate->require_subcommand(1);
  IsingOpts ising;
  auto* sim_ising = simulate->add_subcommand("ising", "Single-site Metropolis-Hastings Ising simulation");
  add_dims(sim_ising, ising.rows, ising.cols);
  sim_ising->add_option("--beta", ising.beta, "Coupling")->required();
  sim_ising->add_option("--updates", ising.updates, "Single-site proposals")->required()->check(CLI::PositiveNumber);
  sim_ising->add_option("--record-every", ising.record_every, "Trace stride in updates (default: one sweep)");
  sim_ising->add_option("--init", ising.init, "Initial field")->check(CLI::IsMember({"random", "plus"}))->capture_default_str();
  sim_ising->add_option("--trace", ising.trace, "Trace CSV path (default: <output>.trace.csv)");
  sim_ising->add_option("-o,--output", ising.output, "Output lattice file")->required();
  add_seed(sim_ising, ising.seed);
  sim_ising->callback([&] { action = [&](const Context& c) { return cmd_simulate_ising(c, ising); }; });

  HmrfSimOpts hsim;
  auto setup_hmrf_sim = [&](CLI::App* sub, bool temporal) {
    add_dims(sub, hsim.rows, hsim.cols);
    if (temporal) {
      sub->add_option("--frames", hsim.frames, "Number of frames")->required()->check(CLI::PositiveNumber);
      sub->add_option("--alpha", hsim.alpha, "Temporal coupling")->required();
    }
    add_emission(sub, hsim.mu_plus, hsim.mu_minus, hsim.sigma2);
    sub->add_option("--beta", hsim.beta, "Spatial coupling")->required();
    sub->add_option("--sweeps", hsim.sweeps, "Block Gibbs sweeps for the hidden field")->capture_default_str();
    sub->add_option("--hidden", hsim.hidden, "Hidden field path (default: <output>.hidden.lat)");
    sub->add_option("-o,--output", hsim.output, "Observation file")->required();
    add_seed(sub, hsim.seed);
    sub->callback([&, temporal] { action = [&, temporal](const Context& c) { return cmd_simulate_hmrf(c, hsim, temporal); }; });
  };
  setup_hmrf_sim(simulate->add_subcommand("hmrf", "Simulate a spatial hidden MRF"), false);
  setup_hmrf_sim(simulate->add_subcommand("st-hmrf", "Simulate a spatio-temporal hidden MRF"), true);

  auto* estimate = app.add_subcommand("estimate", "Estimate model parameters");
  estimate->require_subcommand(1);
  PlOpts pl;
  auto* est_pl = estimate->add_subcommand("pl-beta", "Pseudo-likelihood MCMC estimate of beta");
  est_pl->add_option("--input", pl.input, "Spin lattice file")->required();
  est_pl->add_option("--inits", pl.inits, "Initial betas, comma separated")->delimiter(',')->allow_extra_args(false);
  est_pl->add_option("--n", pl.n, "Chain length")->capture_default_str();
  est_pl->add_option("--burnin", pl.burn_in, "Burn-in steps")->capture_default_str();
  est_pl->add_option("--proposal-sd", pl.proposal_sd, "Random-walk proposal SD")->capture_default_str();
  est_pl->add_option("-o,--output", pl.output, "Result JSON")->required();
  add_seed(est_pl, pl.seed);
  est_pl->callback([&] { action = [&](const Context& c) { return cmd_estimate_pl(c, pl); }; });

  EmOpts em;
  auto setup_em = [&](CLI::App* sub, bool temporal) {
    sub->add_option("--input", em.input, "Observation file")->required();
    sub->add_option("--init", em.init,
                    temporal ? "Initial mu_plus,mu_minus,sigma2,beta,alpha" : "Initial mu_plus,mu_minus,sigma2,beta")
        ->delimiter(',')
        ->allow_extra_args(false);
    sub->add_option("--max-iters", em.max_iters, "EM iteration cap")->capture_default_str();
    sub->add_option("--em-tol", em.em_tol, "Largest parameter increment at convergence")->capture_default_str();
    sub->add_option("--nr-tol", em.nr_tol, "Newton-Raphson step tolerance")->capture_default_str();
    sub->add_option("--nr-max-iters", em.nr_max_iters, "Newton-Raphson step cap")->capture_default_str();
    sub->add_option("--step-cap", em.step_cap, "Largest coupling change per NR step")->capture_default_str();
    sub->add_option("--post-sweeps", em.post_sweeps, "Posterior sweeps per E-step")->capture_default_str();
    sub->add_option("--post-burnin", em.post_burn_in, "Posterior burn-in")->capture_default_str();
    sub->add_option("--prior-sweeps", em.prior_sweeps, "Prior sweeps per NR step")->capture_default_str();
    sub->add_option("--prior-burnin", em.prior_burn_in, "Prior burn-in")->capture_default_str();
    sub->add_flag("--paper-literal-sigma", em.paper_literal_sigma, "Use the previous means in the variance update");
    sub->add_flag("--independent-draws", em.independent_draws, "Fresh chain seeds at every iteration");
    sub->add_option("--restored", em.restored, "Restored field path (default: <output>.restored.lat)");
    sub->add_option("-o,--output", em.output, "Result JSON")->required();
    add_seed(sub, em.seed);
    sub->callback([&, temporal] { action = [&, temporal](const Context& c) { return cmd_estimate_em(c, em, temporal); }; });
  };
  setup_em(estimate->add_subcommand("hmrf", "EM fit of the spatial hidden MRF"), false);
  setup_em(estimate->add_subcommand("st-hmrf", "EM fit of the spatio-temporal hidden MRF"), true);

  auto* gibbs = app.add_subcommand("gibbs", "Block Gibbs moment estimates");
  gibbs->require_subcommand(1);
  GibbsOpts g;
  auto setup_gibbs_common = [&](CLI::App* sub) {
    sub->add_option("--beta", g.beta, "Spatial coupling")->capture_default_str();
    sub->add_option("--alpha", g.alpha, "Temporal coupling")->capture_default_str();
    sub->add_option("--sweeps", g.sweeps, "Total sweeps")->capture_default_str();
    sub->add_option("--burnin", g.burn_in, "Burn-in sweeps")->capture_default_str();
    sub->add_option("--batches", g.batches, "Batches for standard errors")->capture_default_str();
    sub->add_option("--trace", g.trace, "Retained-sweep statistic CSV");
    sub->add_option("-o,--output", g.output, "Result JSON")->required();
    add_seed(sub, g.seed);
  };
  auto* g_post = gibbs->add_subcommand("posterior", "Posterior expectations given observations");
  g_post->add_option("--input", g.input, "Observation file")->required();
  add_emission(g_post, g.mu_plus, g.mu_minus, g.sigma2);
  setup_gibbs_common(g_post);
  g_post->callback([&] { action = [&](const Context& c) { return cmd_gibbs(c, g, GibbsMode::posterior); }; });
  auto* g_prior = gibbs->add_subcommand("prior", "Prior moments of the lattice statistics");
  add_dims(g_prior, g.rows, g.cols);
  g_prior->add_option("--frames", g.frames, "Number of frames")->capture_default_str()->check(CLI::PositiveNumber);
  setup_gibbs_common(g_prior);
  g_prior->callback([&] { action = [&](const Context& c) { return cmd_gibbs(c, g, GibbsMode::prior); }; });

  ScanOpts scan;
  auto* sc = app.add_subcommand("score-scan", "Score curve of beta on a grid");
  sc->add_option("--input", scan.input, "Observation file")->required();
  add_emission(sc, scan.mu_plus, scan.mu_minus, scan.sigma2);
  sc->add_option("--beta", scan.beta, "Coupling used for the posterior target")->capture_default_str();
  sc->add_option("--grid-min", scan.grid_min)->capture_default_str();
  sc->add_option("--grid-max", scan.grid_max)->capture_default_str();
  sc->add_option("--grid-step", scan.grid_step)->capture_default_str();
  sc->add_option("--post-sweeps", scan.post_sweeps)->capture_default_str();
  sc->add_option("--post-burnin", scan.post_burn_in)->capture_default_str();
  sc->add_option("--prior-sweeps", scan.prior_sweeps)->capture_default_str();
  sc->add_option("--prior-burnin", scan.prior_burn_in)->capture_default_str();
  sc->add_option("-o,--output", scan.output, "Scan CSV")->required();
  add_seed(sc, scan.seed);
  sc->callback([&] { action = [&](const Context& c) { return cmd_score_scan(c, scan); }; });

  OracleOpts orc;
  auto* oracle = app.add_subcommand("oracle", "Exact prior moments by enumeration");
  add_dims(oracle, orc.rows, orc.cols);
  oracle->add_option("--frames", orc.frames)->capture_default_str()->check(CLI::PositiveNumber);
  oracle->add_option("--beta", orc.beta)->required();
  oracle->add_option("--alpha", orc.alpha)->capture_default_str();
  oracle->add_option("-o,--output", orc.output, "Result JSON (default: stdout)");
  oracle->callback([&] { action = [&](const Context& c) { return cmd_oracle(c, orc); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  const Context ctx{out, workers, join_args(argc, argv)};
  try {
    return action(ctx);
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CapacityError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const DegenerateDataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"hmrf"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace hmrf::cli

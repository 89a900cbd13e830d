#include "uplink/cli.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "uplink/analytic.hpp"
#include "uplink/config_io.hpp"
#include "uplink/specfun.hpp"

namespace uplink::cli {

namespace {

using io::format_number;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Loaded {
  NetworkConfig config;
  std::string digest;
};

Loaded load(const Request& r) {
  if (r.config_path.empty()) {
    const NetworkSpec spec = default_spec();
    return {validate(spec), "default"};
  }
  io::LoadedConfig loaded = io::load_config(r.config_path);
  NetworkConfig config = validate(loaded.spec);
  if (r.tier >= config.tiers.size()) {
    throw UsageError("--tier " + std::to_string(r.tier) + " out of range for " +
                     std::to_string(config.tiers.size()) + " tier(s)");
  }
  return {std::move(config), loaded.digest};
}

void check_iterations(std::size_t iterations, const char* flag) {
  if (iterations < 100) {
    throw UsageError(std::string(flag) + " must be at least 100, got " +
                     std::to_string(iterations));
  }
}

std::vector<std::string> operator+(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// Writes `body` to the output target plus a manifest sidecar for files.
void emit(const Request& r, const std::string& digest, const std::string& body, std::ostream& out) {
  if (r.output == "-") {
    out << body;
    return;
  }
  std::ofstream file(r.output, std::ios::binary);
  if (!file) throw UsageError("cannot write output file " + r.output);
  file << body;
  io::RunManifest manifest;
  manifest.command = r.command;
  manifest.config_digest = digest;
  manifest.seed = r.seed;
  manifest.iterations = r.iterations;
  manifest.tier = r.tier;
  manifest.workers = r.workers;
  manifest.timestamp = io::utc_timestamp();
  std::ofstream sidecar(r.output + ".manifest.json", std::ios::binary);
  if (!sidecar) throw UsageError("cannot write manifest for " + r.output);
  sidecar << io::manifest_json(manifest);
}

montecarlo::SimulationReport simulate(const NetworkConfig& config, const Request& r,
                                      std::size_t iterations) {
  montecarlo::EstimateOptions options;
  options.iterations = iterations;
  options.seed = r.seed;
  options.workers = r.workers;
  auto report = montecarlo::estimate_metrics(config, r.tier, options);
  if (report.discard_rate() > 0.5 || report.sinr_outage.n_samples == 0) {
    throw InfeasibleError(std::to_string(report.discarded) + " of " +
                          std::to_string(report.realizations) +
                          " realizations never saturated; the configuration is infeasible");
  }
  return report;
}

std::vector<std::string> ci_cells(const montecarlo::SimulationReport& s) {
  return {format_number(s.truncation_outage.half_width_95),
          format_number(s.sinr_outage.half_width_95),
          format_number(s.total_outage.half_width_95),
          format_number(s.spectral_efficiency.half_width_95),
          format_number(s.effective_spectral_efficiency.half_width_95),
          format_number(s.mean_tx_power.half_width_95)};
}

std::vector<std::string> sim_metric_cells(const montecarlo::SimulationReport& s) {
  return {format_number(s.truncation_outage.mean),   format_number(s.sinr_outage.mean),
          format_number(s.total_outage.mean),        format_number(s.spectral_efficiency.mean),
          format_number(s.effective_spectral_efficiency.mean),
          format_number(s.mean_tx_power.mean)};
}

const std::vector<std::string> kCiColumns = {"O_p_ci95",    "O_s_ci95",        "O_t_ci95",
                                             "R_nats_ci95", "R_eff_nats_ci95", "E_P_w_ci95"};

int cmd_analyze(const Request& r, std::ostream& out) {
  const Loaded l = load(r);
  std::string body = io::csv_line(io::kConfigColumns + io::kMetricColumns);
  for (std::size_t t = 0; t < l.config.tiers.size(); ++t) {
    body += io::csv_line(io::config_cells(l.config, t) +
                         io::metric_cells(analytic::full_report(l.config, t)));
  }
  emit(r, l.digest, body, out);
  return kOk;
}

int cmd_simulate(const Request& r, std::ostream& out) {
  check_iterations(r.iterations, "--iterations");
  const Loaded l = load(r);
  const auto s = simulate(l.config, r, r.iterations);
  std::string body = io::csv_line(io::kConfigColumns + io::kMetricColumns + kCiColumns +
                                  std::vector<std::string>{"realizations", "discarded"});
  body += io::csv_line(io::config_cells(l.config, r.tier) + sim_metric_cells(s) + ci_cells(s) +
                       std::vector<std::string>{std::to_string(s.realizations),
                                                std::to_string(s.discarded)});
  emit(r, l.digest, body, out);
  return kOk;
}

int cmd_validate(const Request& r, std::ostream& out, std::ostream& err) {
  check_iterations(r.iterations, "--iterations");
  const Loaded l = load(r);
  const MetricsReport a = analytic::full_report(l.config, r.tier);
  const auto s = simulate(l.config, r, r.iterations);
  const auto comparisons = compare_reports(a, s);
  std::string body = io::csv_line(
      {"metric", "analytic", "simulated", "ci95", "gap", "gap_in_ci", "agrees"});
  for (const auto& c : comparisons) {
    body += io::csv_line({c.metric, format_number(c.analytic), format_number(c.simulated),
                          format_number(c.ci_half_width), format_number(c.gap),
                          c.gap_in_ci ? "true" : "false", c.agrees ? "true" : "false"});
  }
  emit(r, l.digest, body, out);
  const int code = validation_exit_code(comparisons);
  if (code != kOk) err << "validate: analytic and simulated metrics disagree\n";
  return code;
}

std::vector<std::string> sweep_header() {
  return std::vector<std::string>{"point"} + io::kConfigColumns + io::kMetricColumns +
         std::vector<std::string>{"objective", "error"};
}

std::string sweep_rows(const NetworkConfig& config, const Request& r,
                       const optimize::SweepResult& s) {
  std::string body;
  for (std::size_t i = 0; i < s.parameter_values.size(); ++i) {
    const NetworkConfig c = with_cutoff(config, r.tier, dbm_to_watts(s.parameter_values[i]));
    std::vector<std::string> cells = std::vector<std::string>{std::to_string(i)} +
                                     io::config_cells(c, r.tier);
    if (s.reports[i]) {
      cells = cells + io::metric_cells(*s.reports[i]) +
              std::vector<std::string>{
                  format_number(optimize::objective_value(*s.reports[i], r.objective)), ""};
    } else {
      cells = cells + std::vector<std::string>(io::kMetricColumns.size() + 1, "") +
              std::vector<std::string>{s.errors[i]};
    }
    body += io::csv_line(cells);
  }
  return body;
}

int cmd_sweep(const Request& r, std::ostream& out, std::ostream& err) {
  const Loaded l = load(r);
  const auto s = optimize::sweep(l.config, r.tier, r.grid, r.objective, {}, r.workers);
  std::string body = io::csv_line(sweep_header()) + sweep_rows(l.config, r, s);
  const NetworkConfig best = with_cutoff(l.config, r.tier, dbm_to_watts(s.argopt));
  body += io::csv_line(std::vector<std::string>{"*"} + io::config_cells(best, r.tier) +
                       io::metric_cells(*s.reports[s.opt_index]) +
                       std::vector<std::string>{format_number(s.opt_value), ""});
  emit(r, l.digest, body, out);
  if (s.failures() > 0) err << "sweep: " << s.failures() << " grid point(s) failed\n";
  return kOk;
}

int cmd_optimize(const Request& r, std::ostream& out, std::ostream& err) {
  if (r.confirm_iterations > 0) check_iterations(r.confirm_iterations, "--confirm-iterations");
  const Loaded l = load(r);
  const auto s = optimize::sweep(l.config, r.tier, r.grid, r.objective, {}, r.workers);
  auto [lo, hi] = s.bracket();
  if (r.lo_dbm) lo = *r.lo_dbm;
  if (r.hi_dbm) hi = *r.hi_dbm;
  if (lo == hi) {
    lo = s.argopt;
    hi = s.argopt + r.tol_db;
  }
  const auto opt = optimize::refine_optimum(l.config, r.tier, r.objective, lo, hi, r.tol_db);
  const NetworkConfig best = validate(with_cutoff(l.config, r.tier, dbm_to_watts(opt.rho_o_dbm)));
  const MetricsReport report = analytic::full_report(best, r.tier);

  std::vector<std::string> header = sweep_header();
  std::vector<std::string> confirm_cells;
  if (r.confirm_iterations > 0) {
    header = header + std::vector<std::string>{"mc_O_t", "mc_O_t_ci95", "mc_R_eff_nats",
                                               "mc_R_eff_nats_ci95"};
    const auto sim = simulate(best, r, r.confirm_iterations);
    confirm_cells = {format_number(sim.total_outage.mean),
                     format_number(sim.total_outage.half_width_95),
                     format_number(sim.effective_spectral_efficiency.mean),
                     format_number(sim.effective_spectral_efficiency.half_width_95)};
  }
  std::string body = io::csv_line(header);
  std::string rows = sweep_rows(l.config, r, s);
  if (!confirm_cells.empty()) {
    // Grid rows leave the confirmation columns empty.
    std::string padded;
    std::istringstream lines(rows);
    for (std::string line; std::getline(lines, line);) padded += line + ",,,,\n";
    rows = padded;
  }
  body += rows;
  body += io::csv_line(std::vector<std::string>{"*"} + io::config_cells(best, r.tier) +
                       io::metric_cells(report) +
                       std::vector<std::string>{format_number(opt.value), ""} + confirm_cells);
  emit(r, l.digest, body, out);
  if (opt.grid_fallback) err << "optimize: objective not unimodal in bracket; used a grid scan\n";
  return kOk;
}

}  // namespace

std::vector<MetricComparison> compare_reports(const MetricsReport& a,
                                              const montecarlo::SimulationReport& s) {
  auto compare = [](std::string name, double analytic, const montecarlo::EstimateWithCI& e,
                    double tolerance) {
    MetricComparison c;
    c.metric = std::move(name);
    c.analytic = analytic;
    c.simulated = e.mean;
    c.ci_half_width = e.half_width_95;
    c.gap = std::abs(analytic - e.mean);
    c.gap_in_ci = e.contains(analytic);
    c.agrees = c.gap_in_ci || c.gap <= tolerance;
    return c;
  };
  return {compare("O_p", a.truncation_outage, s.truncation_outage, 0.02),
          compare("O_s", a.sinr_outage, s.sinr_outage, 0.02),
          compare("R_nats", a.spectral_efficiency, s.spectral_efficiency,
                  0.03 * std::abs(a.spectral_efficiency))};
}

int validation_exit_code(const std::vector<MetricComparison>& comparisons) {
  for (const auto& c : comparisons) {
    if (!c.agrees) return kMismatch;
  }
  return kOk;
}

int execute(const Request& r, std::ostream& out, std::ostream& err) {
  try {
    if (r.command == "analyze") return cmd_analyze(r, out);
    if (r.command == "simulate") return cmd_simulate(r, out);
    if (r.command == "validate") return cmd_validate(r, out, err);
    if (r.command == "sweep") return cmd_sweep(r, out, err);
    if (r.command == "optimize") return cmd_optimize(r, out, err);
    err << "unknown command '" << r.command << "'\n";
    return kUsage;
  } catch (const ValidationError& e) {
    err << "invalid configuration:\n";
    for (const auto& issue : e.issues()) err << "  " << issue.field << ": " << issue.message << "\n";
    return kUsage;
  } catch (const io::ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const optimize::BracketError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const InfeasibleError& e) {
    err << "infeasible simulation: " << e.what() << "\n";
    return kInfeasible;
  } catch (const specfun::NonConvergenceError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Uplink outage, power and rate analysis for Poisson cellular networks", "uplinkpc"};
  app.require_subcommand(1, 1);
  Request r;
  r.workers = std::max(1u, std::thread::hardware_concurrency());
  std::string objective = "total-outage";

  auto common = [&](CLI::App* sub, bool seeded) {
    sub->add_option("--config", r.config_path, "JSON config (built-in defaults when omitted)");
    sub->add_option("--tier", r.tier, "tagged tier index")->capture_default_str();
    sub->add_option("--output", r.output, "output CSV path, - for stdout")->capture_default_str();
    sub->add_option("--workers", r.workers, "worker threads")->check(CLI::PositiveNumber);
    if (seeded) {
      sub->add_option("--seed", r.seed, "RNG seed")->capture_default_str();
      sub->add_option("--iterations", r.iterations, "Monte Carlo realizations")
          ->capture_default_str();
    }
  };
  auto gridded = [&](CLI::App* sub) {
    sub->add_option("--from", r.grid.from_dbm, "first rho_o (dBm)")->capture_default_str();
    sub->add_option("--to", r.grid.to_dbm, "last rho_o (dBm)")->capture_default_str();
    sub->add_option("--steps", r.grid.steps, "grid points")->capture_default_str();
    sub->add_option("--objective", objective, "total-outage or effective-rate")
        ->check(CLI::IsMember({"total-outage", "effective-rate"}))
        ->capture_default_str();
  };

  common(app.add_subcommand("analyze", "analytic metrics for every tier"), false);
  common(app.add_subcommand("simulate", "Monte Carlo estimates with 95% intervals"), true);
  common(app.add_subcommand("validate", "compare analytic and Monte Carlo metrics"), true);
  auto* sweep = app.add_subcommand("sweep", "analytic rho_o sweep");
  common(sweep, false);
  gridded(sweep);
  auto* opt = app.add_subcommand("optimize", "optimal rho_o by sweep and golden section");
  common(opt, true);
  gridded(opt);
  opt->add_option("--lo", r.lo_dbm, "bracket lower end (dBm); default from the sweep");
  opt->add_option("--hi", r.hi_dbm, "bracket upper end (dBm); default from the sweep");
  opt->add_option("--tol", r.tol_db, "bracket width at convergence (dB)")->capture_default_str();
  opt->add_option("--confirm-iterations", r.confirm_iterations,
                  "Monte Carlo realizations to confirm rho_o*, 0 to skip")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  r.command = app.get_subcommands().front()->get_name();
  r.objective = objective == "effective-rate" ? optimize::Objective::kEffectiveRate
                                              : optimize::Objective::kTotalOutage;
  return execute(r, out, err);
}

}  // namespace uplink::cli

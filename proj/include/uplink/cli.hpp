#pragma once

// The uplinkpc command line: analyze | simulate | validate | sweep | optimize.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "uplink/montecarlo.hpp"
#include "uplink/optimize.hpp"

namespace uplink::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,          // bad flags, unreadable or invalid config
  kNumeric = 3,        // quadrature non-convergence and other numeric failures
  kInfeasible = 4,     // more than half the realizations failed to saturate
  kMismatch = 5,       // validate found disagreement
};

struct Request {
  std::string command;
  std::string config_path;
  std::size_t tier = 0;
  std::string output = "-";  // "-" writes to the given stream and skips the manifest
  std::uint64_t seed = 1;
  std::size_t iterations = 10000;
  unsigned workers = 1;
  optimize::GridSpec grid;
  std::optional<double> lo_dbm;
  std::optional<double> hi_dbm;
  double tol_db = 0.01;
  optimize::Objective objective = optimize::Objective::kTotalOutage;
  std::size_t confirm_iterations = 0;  // optimize: Monte Carlo check of rho_o*
};

struct MetricComparison {
  std::string metric;
  double analytic = 0.0;
  double simulated = 0.0;
  double ci_half_width = 0.0;
  double gap = 0.0;        // |analytic - simulated|
  bool gap_in_ci = false;  // analytic inside the simulated 95% interval
  bool agrees = false;     // inside the interval or within the fixed tolerance
};

/// O_p and O_s agree within the CI or 0.02 absolute; R within the CI or 3%.
std::vector<MetricComparison> compare_reports(const MetricsReport& analytic,
                                              const montecarlo::SimulationReport& simulated);
int validation_exit_code(const std::vector<MetricComparison>& comparisons);

/// Runs one verb; never throws. `out` receives results when output is "-".
int execute(const Request& request, std::ostream& out, std::ostream& err);

/// Parses argv and runs the verb.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace uplink::cli

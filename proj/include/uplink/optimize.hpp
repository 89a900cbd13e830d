#pragma once

// Cutoff-threshold sweeps and the search for the optimal rho_o. All work is
// on the analytic objective; rho_o is handled in dBm throughout.

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "uplink/analytic.hpp"
#include "uplink/model.hpp"

namespace uplink::optimize {

enum class Objective {
  kTotalOutage,    // minimize O_t
  kEffectiveRate,  // maximize (1 - O_p) R
};

/// Objective values closer than this are ties, resolved toward smaller rho_o.
inline constexpr double kTieTolerance = 1e-12;

/// The raw metric (O_t or R_eff) from a report.
double objective_value(const MetricsReport& report, Objective objective);

/// True when `candidate` beats `incumbent` by more than the tie tolerance.
bool strictly_better(double candidate, double incumbent, Objective objective);

/// Evaluates only the metrics the objective needs.
double evaluate_objective(const NetworkConfig& config, std::size_t tier, double rho_o_dbm,
                          Objective objective, const analytic::Options& options = {});

struct GridSpec {
  double from_dbm = -120.0;
  double to_dbm = -40.0;
  std::size_t steps = 81;

  /// Evenly spaced values including both ends. Throws on from >= to or steps < 2.
  std::vector<double> values() const;
};

struct SweepResult {
  Objective objective = Objective::kTotalOutage;
  std::vector<double> parameter_values;                // rho_o in dBm
  std::vector<std::optional<MetricsReport>> reports;   // empty where the point failed
  std::vector<std::string> errors;                     // message per failed point
  std::size_t opt_index = 0;
  double argopt = 0.0;
  double opt_value = 0.0;

  std::size_t failures() const;
  /// [values[i-1], values[i+1]] around the optimum, clamped to the grid.
  std::pair<double, double> bracket() const;
};

/// full_report at every grid point. A failed point is recorded, not fatal;
/// throws std::runtime_error only when every point fails.
SweepResult sweep(const NetworkConfig& config, std::size_t tier, const GridSpec& grid,
                  Objective objective, const analytic::Options& options = {},
                  unsigned workers = 1);

struct Optimum {
  double rho_o_dbm = 0.0;
  double value = 0.0;       // objective value at rho_o_dbm
  bool grid_fallback = false;  // golden section found the bracket not unimodal
  std::size_t evaluations = 0;
};

class BracketError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ScalarMinimum {
  double x = 0.0;
  double value = 0.0;
  bool grid_fallback = false;
  std::size_t evaluations = 0;
};

/// Golden-section minimization of f on [lo, hi] to bracket width `tol`.
/// Returns lo when f is flat (within kTieTolerance) at the first four probes.
/// If the evaluated points ever rise and then fall, f is not unimodal and a
/// scan at tol / 2 spacing replaces the search. The result is the best point
/// evaluated, ties going to the smaller x.
ScalarMinimum golden_minimize(const std::function<double(double)>& f, double lo, double hi,
                              double tol);

/// Golden-section search on [lo, hi] dBm to width `tol` dB. A flat objective
/// returns `lo`. A non-unimodal objective switches to a scan at tol / 2 spacing.
/// Throws BracketError when lo >= hi or tol <= 0.
Optimum refine_optimum(const NetworkConfig& config, std::size_t tier, Objective objective,
                       double lo_dbm, double hi_dbm, double tol_db,
                       const analytic::Options& options = {});

}  // namespace uplink::optimize

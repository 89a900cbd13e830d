#pragma once

// Configuration data model shared by the analytic and Monte Carlo paths.
// Everything inside NetworkConfig is SI: watts, meters, BS per square meter.
// Boundary units (dBm, dB, BS/km^2, km) only appear in NetworkSpec.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace uplink {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

double dbm_to_watts(double dbm);
/// Throws std::domain_error for watts <= 0.
double watts_to_dbm(double watts);
double db_to_linear(double db);
double linear_to_db(double linear);

struct TierConfig {
  double lambda = 0.0;  // BS per m^2
  double rho_o = 0.0;   // W, mean received power every active uplink maintains
  double theta = 1.0;   // linear SINR threshold
  double eta = 4.0;     // path-loss exponent
};

struct NetworkConfig {
  std::vector<TierConfig> tiers;
  double p_max = 1.0;        // W; kUnbounded for a non-binding power constraint
  double noise = 0.0;        // W
  double rho_min = 0.0;      // W; receiver sensitivity, only constrains rho_o
  double window_side = 20e3;  // m
  double guard_margin = 0.0;  // m

  double total_intensity() const;
  bool common_exponent() const;
  bool unbounded_power() const { return std::isinf(p_max); }
};

/// A config as written by a user, in boundary units.
struct TierSpec {
  double lambda_per_km2 = 2.0;
  double rho_o_dbm = -70.0;
  double theta_db = 0.0;
  double eta = 4.0;
};

struct NetworkSpec {
  std::vector<TierSpec> tiers;
  double p_max_watts = 1.0;  // may be +inf
  double noise_dbm = -90.0;  // may be -inf (noise-free)
  double rho_min_dbm = -std::numeric_limits<double>::infinity();
  double window_km = 20.0;
  std::optional<double> guard_km;  // defaults to default_guard_margin()
};

struct ValidationIssue {
  std::string field;  // e.g. "tiers[1].eta"
  std::string message;
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<ValidationIssue> issues);
  const std::vector<ValidationIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<ValidationIssue> issues_;
};

/// Every violated invariant of an SI config; empty when valid.
std::vector<ValidationIssue> find_issues(const NetworkConfig& config);

/// Throws ValidationError listing every violated invariant.
NetworkConfig validate(const NetworkConfig& config);

/// Converts boundary units to SI, fills the guard margin default, and validates.
NetworkConfig validate(const NetworkSpec& spec);

/// 5 * max_k (P_u / rho_o^(k))^(1/eta_k), capped at window_side / 4.
double default_guard_margin(const NetworkConfig& config);

/// Default single tier scenario: 2 BS/km^2, P_u = 1 W, rho_o = -70 dBm,
/// sigma^2 = -90 dBm, theta = 0 dB, eta = 4, 20 km window.
NetworkSpec default_spec();

/// Copy of config with tier `tier` using cutoff `rho_o_watts`.
NetworkConfig with_cutoff(const NetworkConfig& config, std::size_t tier, double rho_o_watts);

struct MetricsReport {
  double truncation_outage = 0.0;              // O_p
  double sinr_outage = 0.0;                    // O_s, conditional on active
  double total_outage = 0.0;                   // O_p + (1 - O_p) O_s
  double spectral_efficiency = 0.0;            // nats/s/Hz, conditional on active
  double effective_spectral_efficiency = 0.0;  // (1 - O_p) R
  double mean_tx_power = 0.0;                  // W

  /// Builds a report whose composite fields hold exactly by construction.
  static MetricsReport compose(double truncation_outage, double sinr_outage,
                               double spectral_efficiency, double mean_tx_power);
};

double total_outage(double truncation_outage, double sinr_outage);
double effective_rate(double truncation_outage, double spectral_efficiency);

}  // namespace uplink

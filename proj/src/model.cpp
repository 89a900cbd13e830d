#include "uplink/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace uplink {

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watts_to_dbm(double watts) {
  if (!(watts > 0.0)) throw std::domain_error("watts_to_dbm: power must be positive");
  return 10.0 * std::log10(watts) + 30.0;
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double linear_to_db(double linear) {
  if (!(linear > 0.0)) throw std::domain_error("linear_to_db: value must be positive");
  return 10.0 * std::log10(linear);
}

double NetworkConfig::total_intensity() const {
  double sum = 0.0;
  for (const auto& tier : tiers) sum += tier.lambda;
  return sum;
}

bool NetworkConfig::common_exponent() const {
  return std::all_of(tiers.begin(), tiers.end(),
                     [this](const TierConfig& t) { return t.eta == tiers.front().eta; });
}

namespace {

std::string join_issues(const std::vector<ValidationIssue>& issues) {
  std::string text = "invalid configuration:";
  for (const auto& issue : issues) text += "\n  " + issue.field + ": " + issue.message;
  return text;
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

ValidationError::ValidationError(std::vector<ValidationIssue> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

std::vector<ValidationIssue> find_issues(const NetworkConfig& config) {
  std::vector<ValidationIssue> issues;
  auto add = [&issues](std::string field, std::string message) {
    issues.push_back({std::move(field), std::move(message)});
  };

  if (config.tiers.empty()) add("tiers", "at least one tier is required");
  if (!(config.p_max > 0.0)) add("p_max", "maximum transmit power must be positive");
  if (!(std::isfinite(config.noise) && config.noise >= 0.0)) {
    add("noise", "noise power must be finite and nonnegative");
  }
  if (!(std::isfinite(config.rho_min) && config.rho_min >= 0.0)) {
    add("rho_min", "receiver sensitivity must be finite and nonnegative");
  }
  if (!finite_positive(config.window_side)) {
    add("window_side", "simulation window must be positive");
  }
  if (!(std::isfinite(config.guard_margin) && config.guard_margin >= 0.0)) {
    add("guard_margin", "guard margin must be finite and nonnegative");
  }

  for (std::size_t k = 0; k < config.tiers.size(); ++k) {
    const auto& tier = config.tiers[k];
    const std::string path = "tiers[" + std::to_string(k) + "].";
    if (!finite_positive(tier.lambda)) add(path + "lambda", "BS intensity must be positive");
    if (!finite_positive(tier.rho_o)) {
      add(path + "rho_o", "cutoff threshold must be positive");
    } else if (!(tier.rho_o > config.rho_min)) {
      add(path + "rho_o", "cutoff threshold must exceed the receiver sensitivity");
    }
    if (!finite_positive(tier.theta)) add(path + "theta", "SINR threshold must be positive");
    if (!(std::isfinite(tier.eta) && tier.eta > 2.0)) {
      add(path + "eta", "path-loss exponent must exceed 2");
    }
  }
  return issues;
}

NetworkConfig validate(const NetworkConfig& config) {
  auto issues = find_issues(config);
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return config;
}

double default_guard_margin(const NetworkConfig& config) {
  double reach = 0.0;
  for (const auto& tier : config.tiers) {
    reach = std::max(reach, std::pow(config.p_max / tier.rho_o, 1.0 / tier.eta));
  }
  return std::min(5.0 * reach, config.window_side / 4.0);
}

NetworkConfig validate(const NetworkSpec& spec) {
  NetworkConfig config;
  config.p_max = spec.p_max_watts;
  config.noise = std::isinf(spec.noise_dbm) && spec.noise_dbm < 0 ? 0.0
                                                                   : dbm_to_watts(spec.noise_dbm);
  config.rho_min = std::isinf(spec.rho_min_dbm) && spec.rho_min_dbm < 0
                       ? 0.0
                       : dbm_to_watts(spec.rho_min_dbm);
  config.window_side = spec.window_km * 1e3;
  for (const auto& t : spec.tiers) {
    config.tiers.push_back({t.lambda_per_km2 / 1e6, dbm_to_watts(t.rho_o_dbm),
                            db_to_linear(t.theta_db), t.eta});
  }
  config.guard_margin = spec.guard_km ? *spec.guard_km * 1e3 : 0.0;

  auto issues = find_issues(config);
  static const std::map<std::string, std::string> kBoundaryNames = {
      {"lambda", "lambda_per_km2"}, {"rho_o", "rho_o_dbm"},     {"theta", "theta_db"},
      {"p_max", "p_max_watts"},     {"noise", "noise_dbm"},     {"rho_min", "rho_min_dbm"},
      {"window_side", "window_km"}, {"guard_margin", "guard_km"}};
  for (auto& issue : issues) {
    const auto dot = issue.field.rfind('.');
    const std::string prefix = dot == std::string::npos ? "" : issue.field.substr(0, dot + 1);
    const std::string leaf = dot == std::string::npos ? issue.field : issue.field.substr(dot + 1);
    if (auto it = kBoundaryNames.find(leaf); it != kBoundaryNames.end()) {
      issue.field = prefix + it->second;
    }
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));

  if (!spec.guard_km) config.guard_margin = default_guard_margin(config);
  return config;
}

NetworkSpec default_spec() {
  NetworkSpec spec;
  spec.tiers.push_back(TierSpec{});
  return spec;
}

NetworkConfig with_cutoff(const NetworkConfig& config, std::size_t tier, double rho_o_watts) {
  NetworkConfig copy = config;
  copy.tiers.at(tier).rho_o = rho_o_watts;
  return copy;
}

double total_outage(double truncation_outage, double sinr_outage) {
  return truncation_outage + (1.0 - truncation_outage) * sinr_outage;
}

double effective_rate(double truncation_outage, double spectral_efficiency) {
  return (1.0 - truncation_outage) * spectral_efficiency;
}

MetricsReport MetricsReport::compose(double truncation_outage, double sinr_outage,
                                     double spectral_efficiency, double mean_tx_power) {
  MetricsReport report;
  report.truncation_outage = truncation_outage;
  report.sinr_outage = sinr_outage;
  report.total_outage = uplink::total_outage(truncation_outage, sinr_outage);
  report.spectral_efficiency = spectral_efficiency;
  report.effective_spectral_efficiency = effective_rate(truncation_outage, spectral_efficiency);
  report.mean_tx_power = mean_tx_power;
  return report;
}

}  // namespace uplink

#pragma once

// Config files, CSV cells and run manifests.
//
// A config file is a JSON object in boundary units:
//   {"tiers": [{"lambda_per_km2": 2, "rho_o_dbm": -70, "theta_db": 0, "eta": 4}],
//    "p_max_watts": 1, "noise_dbm": -90, "rho_min_dbm": "-inf",
//    "window_km": 20, "guard_km": 2}
// "tiers" and each tier's lambda_per_km2 and rho_o_dbm are required; other
// keys default to the NetworkSpec values. p_max_watts accepts "inf" and
// noise_dbm / rho_min_dbm accept "-inf". Unknown keys are rejected.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "uplink/model.hpp"

namespace uplink::io {

inline constexpr std::string_view kToolVersion = "1.0.0";

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct LoadedConfig {
  NetworkSpec spec;
  std::string digest;  // SHA-256 of the canonical (sorted-key) JSON
};

LoadedConfig parse_config(std::string_view text);
/// Throws ConfigError for unreadable files as well as malformed content.
LoadedConfig load_config(const std::filesystem::path& path);

std::string sha256_hex(std::string_view data);

/// 12 significant digits; "inf", "-inf" and "nan" for non-finite values.
std::string format_number(double value);

/// CSV line from already formatted cells, quoting where needed.
std::string csv_line(const std::vector<std::string>& cells);

/// The fixed descriptive columns of every result row.
inline const std::vector<std::string> kConfigColumns = {
    "tier", "rho_o_dbm", "lambda_per_km2", "eta", "theta_db", "p_max_w", "noise_dbm"};
inline const std::vector<std::string> kMetricColumns = {"O_p",    "O_s",        "O_t",
                                                        "R_nats", "R_eff_nats", "E_P_w"};

/// Cells for kConfigColumns, converted back to boundary units.
std::vector<std::string> config_cells(const NetworkConfig& config, std::size_t tier);
/// Cells for kMetricColumns.
std::vector<std::string> metric_cells(const MetricsReport& report);

struct RunManifest {
  std::string command;
  std::string config_digest;
  std::uint64_t seed = 0;
  std::size_t iterations = 0;
  std::size_t tier = 0;
  unsigned workers = 1;
  std::string tool_version{kToolVersion};
  std::string timestamp;  // UTC, ISO 8601
};

std::string utc_timestamp();
std::string manifest_json(const RunManifest& manifest);

}  // namespace uplink::io

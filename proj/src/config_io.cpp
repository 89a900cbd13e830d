#include "uplink/config_io.hpp"

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

namespace uplink::io {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

void reject_unknown(const json& object, const std::set<std::string>& allowed,
                    const std::string& prefix) {
  for (const auto& [key, value] : object.items()) {
    if (!allowed.contains(key)) throw ConfigError(prefix + key, "unknown key");
  }
}

// A number, or one of the listed infinity spellings.
double read_number(const json& object, const std::string& key, const std::string& field,
                   double fallback, bool allow_pos_inf = false, bool allow_neg_inf = false) {
  if (!object.contains(key)) return fallback;
  const json& v = object.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (allow_pos_inf && (s == "inf" || s == "+inf" || s == "Infinity")) return kInf;
    if (allow_neg_inf && (s == "-inf" || s == "-Infinity")) return -kInf;
  }
  std::string expected = "expected a number";
  if (allow_pos_inf) expected += " or \"inf\"";
  if (allow_neg_inf) expected += " or \"-inf\"";
  throw ConfigError(field, expected + ", got " + v.dump());
}

double require_number(const json& object, const std::string& key, const std::string& field) {
  if (!object.contains(key)) throw ConfigError(field, "required key is missing");
  return read_number(object, key, field, 0.0);
}

std::string format_dbm(double watts) {
  return watts > 0.0 ? format_number(watts_to_dbm(watts)) : "-inf";
}

}  // namespace

LoadedConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("", "config must be a JSON object");
  reject_unknown(root,
                 {"tiers", "p_max_watts", "noise_dbm", "rho_min_dbm", "window_km", "guard_km"}, "");

  LoadedConfig loaded;
  NetworkSpec& spec = loaded.spec;
  if (!root.contains("tiers")) throw ConfigError("tiers", "required key is missing");
  const json& tiers = root.at("tiers");
  if (!tiers.is_array() || tiers.empty()) {
    throw ConfigError("tiers", "expected a nonempty array of tier objects");
  }
  for (std::size_t i = 0; i < tiers.size(); ++i) {
    const std::string prefix = "tiers[" + std::to_string(i) + "].";
    const json& t = tiers[i];
    if (!t.is_object()) throw ConfigError("tiers[" + std::to_string(i) + "]", "expected an object");
    reject_unknown(t, {"lambda_per_km2", "rho_o_dbm", "theta_db", "eta"}, prefix);
    TierSpec tier;
    tier.lambda_per_km2 = require_number(t, "lambda_per_km2", prefix + "lambda_per_km2");
    tier.rho_o_dbm = require_number(t, "rho_o_dbm", prefix + "rho_o_dbm");
    tier.theta_db = read_number(t, "theta_db", prefix + "theta_db", tier.theta_db);
    tier.eta = read_number(t, "eta", prefix + "eta", tier.eta);
    spec.tiers.push_back(tier);
  }
  spec.p_max_watts = read_number(root, "p_max_watts", "p_max_watts", spec.p_max_watts, true);
  spec.noise_dbm = read_number(root, "noise_dbm", "noise_dbm", spec.noise_dbm, false, true);
  spec.rho_min_dbm = read_number(root, "rho_min_dbm", "rho_min_dbm", spec.rho_min_dbm, false, true);
  spec.window_km = read_number(root, "window_km", "window_km", spec.window_km);
  if (root.contains("guard_km")) spec.guard_km = read_number(root, "guard_km", "guard_km", 0.0);

  loaded.digest = sha256_hex(root.dump());
  return loaded;
}

LoadedConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot read config file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < length; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", digest[i]);
    hex += byte;
  }
  return hex;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.12g", value);
  return buffer;
}

std::string csv_line(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    const std::string& cell = cells[i];
    if (cell.find_first_of(",\"\n") == std::string::npos) {
      line += cell;
      continue;
    }
    line += '"';
    for (char ch : cell) {
      if (ch == '"') line += '"';
      line += ch;
    }
    line += '"';
  }
  return line + '\n';
}

std::vector<std::string> config_cells(const NetworkConfig& config, std::size_t tier) {
  const TierConfig& t = config.tiers.at(tier);
  return {std::to_string(tier),
          format_dbm(t.rho_o),
          format_number(t.lambda * 1e6),
          format_number(t.eta),
          format_number(linear_to_db(t.theta)),
          format_number(config.p_max),
          format_dbm(config.noise)};
}

std::vector<std::string> metric_cells(const MetricsReport& r) {
  return {format_number(r.truncation_outage),   format_number(r.sinr_outage),
          format_number(r.total_outage),        format_number(r.spectral_efficiency),
          format_number(r.effective_spectral_efficiency), format_number(r.mean_tx_power)};
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buffer;
}

std::string manifest_json(const RunManifest& m) {
  const json j = {{"command", m.command},   {"config_digest", m.config_digest},
                  {"seed", m.seed},         {"iterations", m.iterations},
                  {"tier", m.tier},         {"workers", m.workers},
                  {"tool_version", m.tool_version}, {"timestamp", m.timestamp}};
  return j.dump(2) + "\n";
}

}  // namespace uplink::io

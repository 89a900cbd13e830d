#pragma once

// Closed-form and quadrature evaluation of the uplink metrics under truncated
// channel-inversion power control: transmit-power statistics, truncation
// outage, per-tier interference Laplace transforms, SINR outage and ergodic
// spectral efficiency. Interferers are modeled as independent PPPs whose
// mean received power at the tagged BS is below their own tier's cutoff.
//
// Three evaluation routes exist:
//   kSingleTier        one tier, intensity lambda
//   kCommonExponent    K tiers sharing eta; nearest-BS association over the
//                      superposed PPP of intensity Lambda = sum lambda_k
//   kDistinctExponent  per-tier eta_k with best-link (min r^eta_k) association;
//                      fractional moments of the transmit power by quadrature
// kAuto picks the most specific route that applies.
//
// Where the distinct-exponent expressions admit two readings:
//   * the distinct-exponent truncation outage uses the tagged tier's cutoff in
//     every term of the exponent, matching the normalization of the
//     transmit-power density, not a per-tier cutoff;
//   * the distinct-exponent interference uses E[P_k^(2/eta_j)], with eta_j the
//     observing tier's exponent, in both the outage and the rate expressions.

#include <cstddef>
#include <vector>

#include "uplink/model.hpp"
#include "uplink/specfun.hpp"

namespace uplink::analytic {

enum class Route { kAuto, kSingleTier, kCommonExponent, kDistinctExponent };

struct Options {
  Route route = Route::kAuto;
  /// Use the eta = 4 closed forms (arctan) where they exist.
  bool closed_forms = true;
  specfun::QuadratureSpec quadrature{};
};

/// Route actually used for `config` under `requested`. Throws
/// std::invalid_argument when the requested route does not apply.
Route resolve_route(const NetworkConfig& config, Route requested);

/// Transmit power of a generic active UE served by tier `tier`.
class TxPowerDistribution {
 public:
  TxPowerDistribution(const NetworkConfig& config, std::size_t tier,
                      Route route = Route::kAuto);

  Route route() const { return route_; }
  std::size_t tier() const { return tier_; }
  double max_power() const { return config_.p_max; }

  /// Density per watt on [0, P_u]; +inf at x = 0. Throws std::domain_error
  /// outside [0, P_u].
  double pdf(double x) const;
  double cdf(double x) const;
  /// E[P^alpha]; closed form with the incomplete gamma function for shared
  /// exponents, quadrature otherwise.
  double moment(double alpha, const specfun::QuadratureSpec& quadrature = {}) const;

 private:
  struct Term {
    double lambda;
    double eta;
  };

  // sum_b pi lambda_b (x / rho_o)^(2 / eta_b); the shared-exponent routes
  // collapse this to one term pi Lambda (x / rho_o)^(2 / eta).
  double area_exponent(double x) const;
  double normalizer() const;  // 1 - exp(-area_exponent(P_u))

  NetworkConfig config_;
  std::size_t tier_;
  Route route_;
  double rho_o_;
  std::vector<Term> terms_;
};

double truncation_outage(const NetworkConfig& config, std::size_t tier,
                         const Options& options = {});

/// L_{I_k}(s) of the interference from tier `source` seen by a BS of tier
/// `observing`, with s in 1/W.
double interference_lt(const NetworkConfig& config, std::size_t observing,
                       std::size_t source, double s, const Options& options = {});

double sinr_outage(const NetworkConfig& config, std::size_t tier,
                   const Options& options = {});

/// E[ln(1 + SINR)] of an active link in nats/s/Hz.
double spectral_efficiency(const NetworkConfig& config, std::size_t tier,
                           const Options& options = {});

MetricsReport full_report(const NetworkConfig& config, std::size_t tier,
                          const Options& options = {});

}  // namespace uplink::analytic

#include "uplink/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace uplink::analytic {

namespace {

using std::numbers::pi;

// 1 - exp(-c), exact near zero and equal to 1 for c = inf.
double one_minus_exp(double c) { return -std::expm1(-c); }

// gamma(2, c) / (1 - exp(-c)): the truncation-corrected E[P^(2/eta)] factor.
double truncation_factor(double c) {
  return specfun::lower_incomplete_gamma(2.0, c) / one_minus_exp(c);
}

double tail_integral(double eta, double a, const Options& options) {
  return options.closed_forms ? specfun::tail_interference_integral(eta, a)
                              : specfun::tail_interference_integral_quadrature(eta, a);
}

void check_tier(const NetworkConfig& config, std::size_t tier) {
  if (tier >= config.tiers.size()) {
    throw std::out_of_range("tier index " + std::to_string(tier) + " out of range");
  }
}

// P{SINR > x} = exp(-exponent(x)) for the tagged tier j:
//   exponent(x) = x sigma^2 / rho_j
//               + sum_k coef_k x^(2/eta) J(eta, (x rho_k / rho_j)^(-1/eta)).
class SurvivalExponent {
 public:
  SurvivalExponent(const NetworkConfig& config, std::size_t j, const Options& options)
      : options_(options) {
    check_tier(config, j);
    const Route route = resolve_route(config, options.route);
    const auto& tagged = config.tiers[j];
    eta_ = tagged.eta;
    noise_coef_ = config.noise / tagged.rho_o;

    switch (route) {
      case Route::kSingleTier: {
        const double c = pi * tagged.lambda * std::pow(config.p_max / tagged.rho_o, 2.0 / eta_);
        terms_.push_back({2.0 * truncation_factor(c), 1.0});
        break;
      }
      case Route::kCommonExponent: {
        const double total = config.total_intensity();
        for (const auto& source : config.tiers) {
          const double ratio = source.rho_o / tagged.rho_o;
          const double c = pi * total * std::pow(config.p_max / source.rho_o, 2.0 / eta_);
          const double coef = std::pow(ratio, 2.0 / eta_) * 2.0 * source.lambda *
                              truncation_factor(c) / total;
          terms_.push_back({coef, ratio});
        }
        break;
      }
      case Route::kDistinctExponent: {
        const double alpha = 2.0 / eta_;
        for (std::size_t k = 0; k < config.tiers.size(); ++k) {
          const auto& source = config.tiers[k];
          const double moment = TxPowerDistribution(config, k, Route::kDistinctExponent)
                                    .moment(alpha, options.quadrature);
          const double coef =
              2.0 * pi * source.lambda * std::pow(tagged.rho_o, -alpha) * moment;
          terms_.push_back({coef, source.rho_o / tagged.rho_o});
        }
        break;
      }
      case Route::kAuto:
        break;
    }
  }

  double interference(std::size_t k, double x) const {
    if (x == 0.0) return 0.0;
    const auto& term = terms_[k];
    const double lower = std::pow(x * term.rho_ratio, -1.0 / eta_);
    return term.coef * std::pow(x, 2.0 / eta_) * tail_integral(eta_, lower, options_);
  }

  double operator()(double x) const {
    double value = x * noise_coef_;
    for (std::size_t k = 0; k < terms_.size(); ++k) value += interference(k, x);
    return value;
  }

 private:
  struct Term {
    double coef;
    double rho_ratio;  // rho_o^(k) / rho_o^(j)
  };

  Options options_;
  double eta_ = 4.0;
  double noise_coef_ = 0.0;
  std::vector<Term> terms_;
};

}  // namespace

Route resolve_route(const NetworkConfig& config, Route requested) {
  if (config.tiers.empty()) throw std::invalid_argument("config has no tiers");
  switch (requested) {
    case Route::kAuto:
      if (config.tiers.size() == 1) return Route::kSingleTier;
      return config.common_exponent() ? Route::kCommonExponent : Route::kDistinctExponent;
    case Route::kSingleTier:
      if (config.tiers.size() != 1) {
        throw std::invalid_argument("single-tier route needs exactly one tier");
      }
      return requested;
    case Route::kCommonExponent:
      if (!config.common_exponent()) {
        throw std::invalid_argument("common-exponent route needs equal path-loss exponents");
      }
      return requested;
    case Route::kDistinctExponent:
      return requested;
  }
  return requested;
}

TxPowerDistribution::TxPowerDistribution(const NetworkConfig& config, std::size_t tier,
                                         Route route)
    : config_(config), tier_(tier), route_(resolve_route(config, route)) {
  check_tier(config, tier);
  rho_o_ = config.tiers[tier].rho_o;
  if (route_ == Route::kDistinctExponent) {
    for (const auto& t : config.tiers) terms_.push_back({t.lambda, t.eta});
  } else {
    terms_.push_back({config.total_intensity(), config.tiers.front().eta});
  }
}

double TxPowerDistribution::area_exponent(double x) const {
  double sum = 0.0;
  for (const auto& term : terms_) sum += pi * term.lambda * std::pow(x / rho_o_, 2.0 / term.eta);
  return sum;
}

double TxPowerDistribution::normalizer() const {
  return one_minus_exp(area_exponent(config_.p_max));
}

double TxPowerDistribution::pdf(double x) const {
  if (!(x >= 0.0 && x <= config_.p_max)) {
    throw std::domain_error("tx power pdf evaluated outside [0, P_u]");
  }
  if (x == 0.0) return std::numeric_limits<double>::infinity();
  double numerator = 0.0;
  for (const auto& term : terms_) {
    numerator += 2.0 * pi * term.lambda * std::pow(x, 2.0 / term.eta - 1.0) /
                 (term.eta * std::pow(rho_o_, 2.0 / term.eta));
  }
  return numerator * std::exp(-area_exponent(x)) / normalizer();
}

double TxPowerDistribution::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  if (x >= config_.p_max) return 1.0;
  return one_minus_exp(area_exponent(x)) / normalizer();
}

double TxPowerDistribution::moment(double alpha,
                                   const specfun::QuadratureSpec& quadrature) const {
  if (!(alpha > 0.0)) throw std::domain_error("moment order must be positive");

  if (route_ != Route::kDistinctExponent) {
    const double eta = terms_.front().eta;
    const double area = pi * terms_.front().lambda;
    const double shape = alpha * eta / 2.0;
    const double c = area * std::pow(config_.p_max / rho_o_, 2.0 / eta);
    const double scale = std::exp(alpha * std::log(rho_o_) - shape * std::log(area));
    return scale * specfun::lower_incomplete_gamma(shape + 1.0, c) / one_minus_exp(c);
  }

  // Substitute x = rho_o u^m with m = max eta_b / 2, which removes the
  // x^(2/eta_b - 1) endpoint singularity, then rescale u by 1 / (pi Lambda).
  double m = 0.0;
  for (const auto& term : terms_) m = std::max(m, term.eta / 2.0);
  const double scale = 1.0 / (pi * config_.total_intensity());
  auto integrand = [this, m, alpha, scale](double w) {
    const double u = scale * w;
    double density = 0.0;
    double exponent = 0.0;
    for (const auto& term : terms_) {
      const double power = 2.0 * m / term.eta;
      density += 2.0 * pi * term.lambda * m / term.eta * std::pow(u, power - 1.0);
      exponent += pi * term.lambda * std::pow(u, power);
    }
    return std::pow(u, m * alpha) * density * std::exp(-exponent);
  };

  double integral = 0.0;
  if (config_.unbounded_power()) {
    integral = specfun::integrate_semi_infinite(integrand, 0.0, quadrature);
  } else {
    const double upper = std::pow(config_.p_max / rho_o_, 1.0 / m) / scale;
    integral = specfun::integrate(integrand, 0.0, upper, quadrature);
  }
  return std::pow(rho_o_, alpha) * scale * integral / normalizer();
}

double truncation_outage(const NetworkConfig& config, std::size_t tier, const Options& options) {
  check_tier(config, tier);
  const Route route = resolve_route(config, options.route);
  const double rho = config.tiers[tier].rho_o;
  double exponent = 0.0;
  if (route == Route::kDistinctExponent) {
    for (const auto& t : config.tiers) {
      exponent += pi * t.lambda * std::pow(config.p_max / rho, 2.0 / t.eta);
    }
  } else {
    const double eta = config.tiers.front().eta;
    exponent = pi * config.total_intensity() * std::pow(config.p_max / rho, 2.0 / eta);
  }
  return std::exp(-exponent);
}

double interference_lt(const NetworkConfig& config, std::size_t observing, std::size_t source,
                       double s, const Options& options) {
  check_tier(config, observing);
  check_tier(config, source);
  if (!(s >= 0.0)) throw std::domain_error("Laplace variable must be nonnegative");
  if (s == 0.0) return 1.0;
  const Route route = resolve_route(config, options.route);
  const double eta = config.tiers[observing].eta;
  const auto& src = config.tiers[source];
  const double moment =
      TxPowerDistribution(config, source, route).moment(2.0 / eta, options.quadrature);
  const double lower = std::pow(s * src.rho_o, -1.0 / eta);
  return std::exp(-2.0 * pi * src.lambda * std::pow(s, 2.0 / eta) * moment *
                  tail_integral(eta, lower, options));
}

double sinr_outage(const NetworkConfig& config, std::size_t tier, const Options& options) {
  check_tier(config, tier);
  const Route route = resolve_route(config, options.route);
  const auto& t = config.tiers[tier];
  if (route == Route::kSingleTier && options.closed_forms && t.eta == 4.0) {
    const double c = pi * t.lambda * std::sqrt(config.p_max / t.rho_o);
    const double root = std::sqrt(t.theta);
    return one_minus_exp(t.theta * config.noise / t.rho_o +
                         root * truncation_factor(c) * std::atan(root));
  }
  const SurvivalExponent exponent(config, tier, options);
  return one_minus_exp(exponent(t.theta));
}

double spectral_efficiency(const NetworkConfig& config, std::size_t tier,
                           const Options& options) {
  const SurvivalExponent exponent(config, tier, options);
  return specfun::integrate_semi_infinite(
      [&exponent](double x) { return std::exp(-exponent(x)) / (1.0 + x); }, 0.0,
      options.quadrature);
}

MetricsReport full_report(const NetworkConfig& config, std::size_t tier,
                          const Options& options) {
  const double op = truncation_outage(config, tier, options);
  const double os = sinr_outage(config, tier, options);
  const double rate = spectral_efficiency(config, tier, options);
  const double power =
      TxPowerDistribution(config, tier, options.route).moment(1.0, options.quadrature);
  return MetricsReport::compose(op, os, rate, power);
}

}  // namespace uplink::analytic

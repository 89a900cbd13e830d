#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "uplink/analytic.hpp"

using namespace uplink;
using namespace uplink::analytic;
using std::numbers::pi;

namespace {

NetworkConfig single_tier(double lambda_per_km2, double rho_dbm, double p_max, double noise_w,
                          double theta = 1.0, double eta = 4.0) {
  NetworkConfig c;
  c.tiers.push_back({lambda_per_km2 / 1e6, dbm_to_watts(rho_dbm), theta, eta});
  c.p_max = p_max;
  c.noise = noise_w;
  return c;
}

NetworkConfig reference_config() { return single_tier(2.0, -70.0, 1.0, dbm_to_watts(-90.0)); }

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

Options generic() {
  Options o;
  o.closed_forms = false;
  return o;
}

Options forced(Route route) {
  Options o;
  o.route = route;
  return o;
}

}  // namespace

TEST_CASE("route resolution") {
  auto c = reference_config();
  CHECK(resolve_route(c, Route::kAuto) == Route::kSingleTier);
  c.tiers.push_back(c.tiers.front());
  CHECK(resolve_route(c, Route::kAuto) == Route::kCommonExponent);
  CHECK_THROWS_AS(resolve_route(c, Route::kSingleTier), std::invalid_argument);
  c.tiers[1].eta = 3.5;
  CHECK(resolve_route(c, Route::kAuto) == Route::kDistinctExponent);
  CHECK_THROWS_AS(resolve_route(c, Route::kCommonExponent), std::invalid_argument);
  CHECK_THROWS_AS(truncation_outage(c, 2), std::out_of_range);
}

TEST_CASE("transmit power density: normalization and support") {
  const auto c = reference_config();
  const TxPowerDistribution dist(c, 0);
  CHECK(dist.cdf(c.p_max) == 1.0);
  CHECK(dist.cdf(0.0) == 0.0);
  CHECK(std::isinf(dist.pdf(0.0)));
  CHECK_THROWS_AS(dist.pdf(1.5), std::domain_error);
  CHECK_THROWS_AS(dist.pdf(-1e-3), std::domain_error);

  // Independent normalization check: substitute x = P_u v^2 so the x^(-1/2)
  // singularity disappears, then integrate the density numerically.
  const double mass = specfun::integrate(
      [&](double v) { return v == 0.0 ? 0.0 : dist.pdf(c.p_max * v * v) * 2.0 * c.p_max * v; },
      0.0, 1.0);
  CHECK(std::abs(mass - 1.0) < 1e-8);
  for (double x : {1e-6, 1e-3, 0.1, 0.5, 0.999}) CHECK(dist.pdf(x) >= 0.0);
}

TEST_CASE("transmit power density: multi-tier normalization for shared and distinct exponents") {
  NetworkConfig c = reference_config();
  c.tiers.push_back({10.0 / 1e6, dbm_to_watts(-80.0), 1.0, 4.0});
  c.tiers.push_back({0.5 / 1e6, dbm_to_watts(-60.0), 1.0, 4.0});
  for (std::size_t j = 0; j < 3; ++j) {
    const TxPowerDistribution dist(c, j);
    const double mass = specfun::integrate(
        [&](double v) { return v == 0.0 ? 0.0 : dist.pdf(c.p_max * v * v) * 2.0 * c.p_max * v; }, 0.0, 1.0);
    CHECK(std::abs(mass - 1.0) < 1e-8);
  }

  c.tiers[1].eta = 3.0;
  c.tiers[2].eta = 3.6;
  for (std::size_t j = 0; j < 3; ++j) {
    const TxPowerDistribution dist(c, j);
    CHECK(dist.route() == Route::kDistinctExponent);
    // x = P_u v^2 leaves at worst a v^(4/eta - 1) endpoint behaviour; with
    // eta_max = 4 that is bounded.
    const double mass = specfun::integrate(
        [&](double v) { return v == 0.0 ? 0.0 : dist.pdf(c.p_max * v * v) * 2.0 * c.p_max * v; }, 0.0, 1.0);
    CHECK(std::abs(mass - 1.0) < 1e-8);
    CHECK(dist.cdf(0.3) == doctest::Approx(
        specfun::integrate([&](double v) { return v == 0.0 ? 0.0 : dist.pdf(c.p_max * v * v) * 2.0 * c.p_max * v; },
                           0.0, std::sqrt(0.3))).epsilon(1e-9));
  }
}

TEST_CASE("two tiers with equal eta and cutoff reduce to one tier of intensity Lambda") {
  NetworkConfig two = reference_config();
  two.tiers.front().lambda = 0.5 / 1e6;
  two.tiers.push_back(two.tiers.front());
  two.tiers[1].lambda = 1.5 / 1e6;
  const NetworkConfig one = reference_config();  // Lambda = 2 BS/km^2
  const TxPowerDistribution multi(two, 0);
  const TxPowerDistribution single(one, 0);
  for (double x : {1e-8, 1e-5, 1e-3, 0.01, 0.2, 0.7, 1.0}) {
    CHECK(rel_err(multi.pdf(x), single.pdf(x)) <= 1e-12);
  }
  CHECK(rel_err(sinr_outage(two, 1), sinr_outage(one, 0)) <= 1e-9);
  CHECK(rel_err(spectral_efficiency(two, 1), spectral_efficiency(one, 0)) <= 1e-9);
}

TEST_CASE("transmit power moments") {
  const auto c = reference_config();
  const TxPowerDistribution dist(c, 0);
  // Oracle: direct integration of x f(x) with x = v^2, independently coded.
  const double lambda = c.tiers[0].lambda;
  const double rho = c.tiers[0].rho_o;
  auto power_pdf = [&](double x) {
    const double norm = 1.0 - std::exp(-pi * lambda * std::sqrt(c.p_max / rho));
    return 2.0 * pi * lambda * std::pow(x, -0.5) * std::exp(-pi * lambda * std::sqrt(x / rho)) /
           (4.0 * std::sqrt(rho) * norm);
  };
  const double oracle = specfun::integrate(
      [&](double v) { return v == 0.0 ? 0.0 : v * v * power_pdf(v * v) * 2.0 * v; }, 0.0, 1.0);
  CHECK(oracle == doctest::Approx(0.282401178901630228).epsilon(1e-10));
  CHECK(dist.moment(1.0) == doctest::Approx(0.282401178901630228).epsilon(1e-10));

  // Saturation at P_u / 3 for a huge cutoff.
  const auto saturated = single_tier(2.0, 60.0, 1.0, dbm_to_watts(-90.0));
  CHECK(rel_err(TxPowerDistribution(saturated, 0).moment(1.0), 1.0 / 3.0) < 0.005);

  // Unbounded P_u: E[P^(2/eta)] = rho^(2/eta) Gamma(2) / (pi lambda).
  const auto unbounded = single_tier(2.0, -70.0, kUnbounded, 0.0);
  CHECK(rel_err(TxPowerDistribution(unbounded, 0).moment(0.5), std::sqrt(rho) / (pi * lambda)) < 1e-13);

  CHECK_THROWS_AS(dist.moment(0.0), std::domain_error);
}

TEST_CASE("distinct-exponent moments agree with the closed form when exponents coincide") {
  NetworkConfig c = reference_config();
  c.tiers.push_back({5.0 / 1e6, dbm_to_watts(-75.0), 1.0, 4.0});
  for (double p_max : {1.0, kUnbounded}) {
    c.p_max = p_max;
    for (std::size_t j = 0; j < 2; ++j) {
      const TxPowerDistribution common(c, j, Route::kCommonExponent);
      const TxPowerDistribution distinct(c, j, Route::kDistinctExponent);
      for (double alpha : {0.5, 1.0, 2.0}) {
        CAPTURE(alpha);
        CHECK(rel_err(distinct.moment(alpha), common.moment(alpha)) < 1e-8);
      }
    }
  }
}

TEST_CASE("truncation outage") {
  CHECK(truncation_outage(reference_config(), 0) ==
        doctest::Approx(std::exp(-pi * 2e-6 * 1e5)).epsilon(1e-14));
  CHECK(truncation_outage(reference_config(), 0) == doctest::Approx(0.5335).epsilon(1e-4));
  CHECK(truncation_outage(single_tier(2.0, -70.0, kUnbounded, 0.0), 0) == 0.0);
  CHECK(truncation_outage(single_tier(2.0, 200.0, 1.0, 0.0), 0) == doctest::Approx(1.0).epsilon(1e-6));

  // Distinct exponents: every term of the exponent uses the tagged tier's cutoff.
  NetworkConfig c = reference_config();
  c.tiers.push_back({4.0 / 1e6, dbm_to_watts(-80.0), 1.0, 3.5});
  const double rho0 = c.tiers[0].rho_o;
  const double expected =
      std::exp(-pi * 2e-6 * std::pow(1.0 / rho0, 0.5) - pi * 4e-6 * std::pow(1.0 / rho0, 2.0 / 3.5));
  CHECK(truncation_outage(c, 0) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("truncation outage monotonicity grid") {
  const double rhos[] = {-100.0, -85.0, -70.0, -55.0, -40.0};
  const double lambdas[] = {0.5, 1.0, 2.0, 5.0, 20.0};
  const double powers[] = {0.01, 0.1, 1.0, 10.0, 100.0};
  for (double lam : lambdas) {
    for (double p : powers) {
      double previous = -1.0;
      for (double r : rhos) {
        const double value = truncation_outage(single_tier(lam, r, p, 0.0), 0);
        CHECK(value >= previous);
        previous = value;
      }
    }
  }
  for (double r : rhos) {
    for (double p : powers) {
      double previous = 2.0;
      for (double lam : lambdas) {
        const double value = truncation_outage(single_tier(lam, r, p, 0.0), 0);
        CHECK(value <= previous);
        previous = value;
      }
    }
    for (double lam : lambdas) {
      double previous = 2.0;
      for (double p : powers) {
        const double value = truncation_outage(single_tier(lam, r, p, 0.0), 0);
        CHECK(value <= previous);
        previous = value;
      }
    }
  }
}

TEST_CASE("interference Laplace transform") {
  const auto c = single_tier(2.0, -70.0, kUnbounded, 0.0);
  const double rho = c.tiers[0].rho_o;
  CHECK(interference_lt(c, 0, 0, 0.0) == 1.0);
  CHECK(interference_lt(c, 0, 0, 1e-30) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(interference_lt(c, 0, 0, 1.0 / rho) == doctest::Approx(std::exp(-pi / 4.0)).epsilon(1e-14));

  // Oracle: the probability generating functional integral before any change of
  // variables, with P = rho r^eta and r Rayleigh, evaluated by nested quadrature:
  //   -ln L(s) = 2 pi lambda E_r[ int_r^inf s P x / (x^eta + s P) dx ].
  const double lambda = c.tiers[0].lambda;
  const double s = 1.0 / rho;
  auto inner = [&](double r) {
    const double sp = s * rho * std::pow(r, 4.0);
    return specfun::integrate_semi_infinite(
        [&](double x) { return sp * x / (std::pow(x, 4.0) + sp); }, r, {1e-12, 1e-14, 2000});
  };
  const double scale = 1.0 / std::sqrt(pi * lambda);
  const double mean = specfun::integrate_semi_infinite(
      [&](double t) {
        const double r = t * scale;
        return 2.0 * pi * lambda * r * std::exp(-pi * lambda * r * r) * inner(r) * scale;
      },
      0.0);
  CHECK(std::exp(-2.0 * pi * lambda * mean) == doctest::Approx(std::exp(-pi / 4.0)).epsilon(1e-8));

  // No interferers: a vanishing source tier. With unbounded P_u a single tier's
  // interference is intensity-free, so the limit needs a bounded P_u or a
  // second tier carrying the association.
  NetworkConfig sparse = c;
  sparse.p_max = 1.0;
  sparse.tiers[0].lambda = 1e-30;
  CHECK(interference_lt(sparse, 0, 0, 1.0 / rho) == doctest::Approx(1.0).epsilon(1e-12));
  NetworkConfig two = c;
  two.tiers.push_back({1e-30, rho, 1.0, 4.0});
  CHECK(interference_lt(two, 0, 1, 1.0 / rho) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(interference_lt(c, 0, 0, -1.0), std::domain_error);
}

TEST_CASE("SINR outage special cases") {
  const double simplest = 1.0 - std::exp(-pi / 4.0);
  for (double lam : {1.0, 2.0, 50.0}) {
    for (double rho : {-90.0, -60.0}) {
      const auto c = single_tier(lam, rho, kUnbounded, 0.0);
      CHECK(sinr_outage(c, 0) == doctest::Approx(simplest).epsilon(1e-14));
      CHECK(std::abs(sinr_outage(c, 0, generic()) - simplest) <= 1e-9);
    }
  }
  // Oracle for the closed form: the general path with P_u = 1e6 W and
  // sigma^2 = 1e-30 W.
  const auto near = single_tier(2.0, -70.0, 1e6, 1e-30);
  CHECK(std::abs(sinr_outage(near, 0, generic()) - simplest) <= 1e-9);

  CHECK(sinr_outage(single_tier(2.0, -70.0, kUnbounded, 0.0, 1e-12), 0) < 1e-5);
  CHECK(sinr_outage(single_tier(2.0, -70.0, kUnbounded, 0.0, 0.0 + 1e-300), 0) < 1e-100);

  CHECK(sinr_outage(reference_config(), 0) == doctest::Approx(0.206316073655384597).epsilon(1e-12));
}

TEST_CASE("SINR outage is nonincreasing in the cutoff at the defaults") {
  double previous = 2.0;
  for (double rho = -130.0; rho <= 10.0; rho += 0.25) {
    NetworkConfig c = reference_config();
    c.tiers[0].rho_o = dbm_to_watts(rho);
    const double value = sinr_outage(c, 0);
    CHECK(value <= previous + 1e-15);
    previous = value;
  }
}

TEST_CASE("eta = 4 closed forms agree with generic quadrature") {
  for (double rho : {-90.0, -70.0, -50.0}) {
    for (double p_max : {0.1, 1.0, kUnbounded}) {
      for (double theta : {0.1, 1.0, 10.0}) {
        const auto c = single_tier(2.0, rho, p_max, dbm_to_watts(-90.0), theta);
        CHECK(rel_err(sinr_outage(c, 0, generic()), sinr_outage(c, 0)) <= 1e-9);
        CHECK(rel_err(spectral_efficiency(c, 0, generic()), spectral_efficiency(c, 0)) <= 1e-9);
      }
    }
  }
  NetworkConfig multi = single_tier(2.0, -70.0, kUnbounded, 0.0);
  multi.tiers.push_back({8.0 / 1e6, dbm_to_watts(-80.0), 2.0, 4.0});
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(rel_err(sinr_outage(multi, j, generic()), sinr_outage(multi, j)) <= 1e-9);
    CHECK(rel_err(spectral_efficiency(multi, j, generic()), spectral_efficiency(multi, j)) <= 1e-9);
  }
  // Multi-tier interference-limited closed form with arctan.
  double exponent = 0.0;
  const double total = 10.0 / 1e6;
  for (const auto& k : multi.tiers) {
    const double q = std::sqrt(multi.tiers[1].theta * k.rho_o / multi.tiers[1].rho_o);
    exponent += k.lambda / total * q * std::atan(q);
  }
  CHECK(sinr_outage(multi, 1) == doctest::Approx(1.0 - std::exp(-exponent)).epsilon(1e-12));
}

TEST_CASE("spectral efficiency") {
  for (double lam : {1.0, 10.0, 100.0}) {
    const auto c = single_tier(lam, -70.0, kUnbounded, 0.0);
    const double rate = spectral_efficiency(c, 0);
    CHECK(std::abs(rate - 0.77) <= 0.005);
    CHECK(rate == doctest::Approx(0.768404801448331347).epsilon(1e-9));
  }
  CHECK(spectral_efficiency(reference_config(), 0) == doctest::Approx(1.76684677968285129).epsilon(1e-9));
  CHECK(spectral_efficiency(single_tier(2.0, -70.0, 1.0, 1e3), 0) < 1e-9);

  NetworkConfig multi = single_tier(3.0, -70.0, kUnbounded, 0.0);
  multi.tiers.push_back({30.0 / 1e6, dbm_to_watts(-70.0), 1.0, 4.0});
  multi.tiers.push_back({0.2 / 1e6, dbm_to_watts(-70.0), 1.0, 4.0});
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(spectral_efficiency(multi, j) == doctest::Approx(0.768404801448331347).epsilon(1e-9));
  }
}

TEST_CASE("common-exponent route with one tier matches the single-tier route") {
  for (double p_max : {0.5, 1.0, kUnbounded}) {
    for (double eta : {3.0, 4.0, 4.5}) {
      const auto c = single_tier(2.0, -70.0, p_max, dbm_to_watts(-90.0), 1.0, eta);
      const auto common = forced(Route::kCommonExponent);
      CHECK(rel_err(sinr_outage(c, 0, common), sinr_outage(c, 0)) <= 1e-12);
      CHECK(rel_err(spectral_efficiency(c, 0, common), spectral_efficiency(c, 0)) <= 1e-12);
      CHECK(rel_err(truncation_outage(c, 0, common) + 1.0, truncation_outage(c, 0) + 1.0) <= 1e-12);
      CHECK(rel_err(TxPowerDistribution(c, 0, Route::kCommonExponent).moment(1.0),
                    TxPowerDistribution(c, 0).moment(1.0)) <= 1e-12);
    }
  }
}

TEST_CASE("distinct-exponent route with equal exponents matches the common route") {
  NetworkConfig c = reference_config();
  c.tiers.push_back({6.0 / 1e6, dbm_to_watts(-78.0), 2.0, 4.0});
  c.tiers.push_back({0.7 / 1e6, dbm_to_watts(-64.0), 0.5, 4.0});
  for (double eta : {3.2, 4.0}) {
    for (auto& t : c.tiers) t.eta = eta;
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(rel_err(sinr_outage(c, j, forced(Route::kDistinctExponent)), sinr_outage(c, j)) <= 1e-8);
      CHECK(rel_err(spectral_efficiency(c, j, forced(Route::kDistinctExponent)),
                    spectral_efficiency(c, j)) <= 1e-8);
      CHECK(rel_err(truncation_outage(c, j, forced(Route::kDistinctExponent)),
                    truncation_outage(c, j)) <= 1e-12);
    }
  }
}

TEST_CASE("survival factorizes over tiers without noise") {
  NetworkConfig c = single_tier(2.0, -70.0, 1.0, 0.0);
  c.tiers.push_back({6.0 / 1e6, dbm_to_watts(-78.0), 2.0, 4.0});
  c.tiers.push_back({0.7 / 1e6, dbm_to_watts(-64.0), 0.5, 3.3});
  for (auto route : {Route::kDistinctExponent}) {
    for (std::size_t j = 0; j < 3; ++j) {
      const double s = c.tiers[j].theta / c.tiers[j].rho_o;
      double product = 1.0;
      for (std::size_t k = 0; k < 3; ++k) product *= interference_lt(c, j, k, s, forced(route));
      CHECK(rel_err(1.0 - sinr_outage(c, j, forced(route)), product) <= 1e-12);
    }
  }
  c.tiers[2].eta = 4.0;
  for (std::size_t j = 0; j < 3; ++j) {
    const double s = c.tiers[j].theta / c.tiers[j].rho_o;
    double product = 1.0;
    for (std::size_t k = 0; k < 3; ++k) product *= interference_lt(c, j, k, s);
    CHECK(rel_err(1.0 - sinr_outage(c, j), product) <= 1e-12);
  }
}

TEST_CASE("distinct exponents: path-loss ordering and sanity") {
  NetworkConfig c = reference_config();
  c.tiers.push_back({10.0 / 1e6, dbm_to_watts(-80.0), 1.0, 3.0});
  for (std::size_t j = 0; j < 2; ++j) {
    const auto report = full_report(c, j);
    CHECK(report.sinr_outage > 0.0);
    CHECK(report.sinr_outage < 1.0);
    CHECK(report.spectral_efficiency > 0.0);
    CHECK(report.mean_tx_power > 0.0);
    CHECK(report.mean_tx_power <= c.p_max);
  }
}

TEST_CASE("full report composite identities and intensity independence") {
  const auto report = full_report(reference_config(), 0);
  CHECK(report.total_outage ==
        report.truncation_outage + (1.0 - report.truncation_outage) * report.sinr_outage);
  CHECK(report.effective_spectral_efficiency ==
        (1.0 - report.truncation_outage) * report.spectral_efficiency);
  CHECK(report.truncation_outage == doctest::Approx(0.533488091091103251).epsilon(1e-13));

  const auto a = full_report(single_tier(1.0, -70.0, kUnbounded, 0.0), 0);
  const auto b = full_report(single_tier(10.0, -70.0, kUnbounded, 0.0), 0);
  const auto d = full_report(single_tier(100.0, -70.0, kUnbounded, 0.0), 0);
  for (const auto* x : {&a, &b, &d}) {
    for (const auto* y : {&a, &b, &d}) {
      CHECK(std::abs(x->truncation_outage - y->truncation_outage) <= 1e-9);
      CHECK(std::abs(x->sinr_outage - y->sinr_outage) <= 1e-9);
      CHECK(std::abs(x->total_outage - y->total_outage) <= 1e-9);
      CHECK(std::abs(x->spectral_efficiency - y->spectral_efficiency) <= 1e-9);
      CHECK(std::abs(x->effective_spectral_efficiency - y->effective_spectral_efficiency) <= 1e-9);
    }
  }
  CHECK(a.mean_tx_power > d.mean_tx_power);
}

TEST_CASE("boundary units and SI give identical analytic results") {
  const auto from_spec = validate(default_spec());
  NetworkConfig si;
  si.tiers.push_back({2e-6, 1e-10, 1.0, 4.0});
  si.p_max = 1.0;
  si.noise = 1e-12;
  const auto r1 = full_report(from_spec, 0);
  const auto r2 = full_report(si, 0);
  CHECK(rel_err(r1.sinr_outage, r2.sinr_outage) <= 1e-14);
  CHECK(rel_err(r1.spectral_efficiency, r2.spectral_efficiency) <= 1e-14);
  CHECK(rel_err(r1.truncation_outage, r2.truncation_outage) <= 1e-14);
  CHECK(rel_err(r1.mean_tx_power, r2.mean_tx_power) <= 1e-14);
}

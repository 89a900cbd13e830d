#pragma once

// Numerical kernel shared by the analytic path: lower incomplete gamma,
// the interference tail integral and adaptive Gauss-Kronrod quadrature.

#include <functional>
#include <stdexcept>
#include <string>

namespace uplink::specfun {

struct QuadratureSpec {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  int max_subdivisions = 2000;

  /// Throws std::invalid_argument unless every field is strictly positive.
  void check() const;
};

/// Raised when adaptive subdivision runs out of budget before the error
/// estimate meets max(abs_tol, rel_tol * |result|).
class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, double estimate, double error)
      : std::runtime_error(what), estimate_(estimate), error_(error) {}
  double estimate() const noexcept { return estimate_; }
  double error() const noexcept { return error_; }

 private:
  double estimate_;
  double error_;
};

using Integrand = std::function<double(double)>;

/// gamma(a, b) = int_0^b t^(a-1) e^-t dt. b may be +inf (returns Gamma(a)).
/// Throws std::domain_error for a <= 0 or b < 0.
double lower_incomplete_gamma(double a, double b);

/// J(eta, a) = int_a^inf y / (y^eta + 1) dy. Dispatches to the closed form
/// 0.5 * (pi/2 - atan(a^2)) when eta == 4.
double tail_interference_integral(double eta, double a);

/// Same integral, always by quadrature (no closed-form dispatch).
double tail_interference_integral_quadrature(double eta, double a);

/// Adaptive Gauss-Kronrod (7/15) on [lo, hi] with global bisection.
double integrate(const Integrand& f, double lo, double hi,
                 const QuadratureSpec& spec = {});

/// Integral over [lower, inf) through the map x = lower + t / (1 - t).
double integrate_semi_infinite(const Integrand& f, double lower,
                               const QuadratureSpec& spec = {});

}  // namespace uplink::specfun

#include "uplink/specfun.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <vector>

namespace uplink::specfun {

void QuadratureSpec::check() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || max_subdivisions < 1) {
    throw std::invalid_argument(
        "quadrature spec needs rel_tol > 0, abs_tol > 0, max_subdivisions >= 1");
  }
}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Series for gamma(a, x), accurate for x < a + 1.
double gamma_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int n = 0; n < 10000; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x));
}

// Continued fraction for Gamma(a, x) (modified Lentz), accurate for x >= a + 1.
double upper_gamma_cf(double a, double x) {
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x)) * h;
}

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double lo;
  double hi;
  double value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

Panel gauss_kronrod_15(const Integrand& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double f_center = f(center);
  double gauss = f_center * kWg[3];
  double kronrod = f_center * kWgk[7];
  double abs_kronrod = std::abs(kronrod);
  std::array<double, 7> f_left{};
  std::array<double, 7> f_right{};
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kXgk[i];
    const double fl = f(center - dx);
    const double fr = f(center + dx);
    f_left[i] = fl;
    f_right[i] = fr;
    kronrod += kWgk[i] * (fl + fr);
    abs_kronrod += kWgk[i] * (std::abs(fl) + std::abs(fr));
    if (i % 2 == 1) gauss += kWg[i / 2] * (fl + fr);
  }
  const double mean = 0.5 * kronrod;
  double asc = kWgk[7] * std::abs(f_center - mean);
  for (int i = 0; i < 7; ++i) {
    asc += kWgk[i] * (std::abs(f_left[i] - mean) + std::abs(f_right[i] - mean));
  }
  const double result = kronrod * half;
  const double res_abs = abs_kronrod * std::abs(half);
  const double res_asc = asc * std::abs(half);
  double error = std::abs((kronrod - gauss) * half);
  if (res_asc != 0.0 && error != 0.0) {
    error = res_asc * std::min(1.0, std::pow(200.0 * error / res_asc, 1.5));
  }
  if (res_abs > std::numeric_limits<double>::min() / (50.0 * kEps)) {
    error = std::max(50.0 * kEps * res_abs, error);
  }
  if (!std::isfinite(result)) {
    throw NonConvergenceError("integrand is not finite on [" + std::to_string(lo) +
                                  ", " + std::to_string(hi) + "]",
                              result, error);
  }
  return {lo, hi, result, error};
}

}  // namespace

double lower_incomplete_gamma(double a, double b) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw std::domain_error("lower_incomplete_gamma: a must be positive and finite");
  }
  if (!(b >= 0.0)) {
    throw std::domain_error("lower_incomplete_gamma: b must be nonnegative");
  }
  if (b == 0.0) return 0.0;
  if (std::isinf(b)) return std::tgamma(a);
  if (b < a + 1.0) return gamma_series(a, b);
  return std::tgamma(a) - upper_gamma_cf(a, b);
}

double tail_interference_integral(double eta, double a) {
  if (eta == 4.0 && a >= 0.0) {
    if (std::isinf(a)) return 0.0;
    // 0.5 * (pi/2 - atan(a^2)), written to keep relative accuracy for large a.
    return 0.5 * std::atan2(1.0, a * a);
  }
  return tail_interference_integral_quadrature(eta, a);
}

double tail_interference_integral_quadrature(double eta, double a) {
  if (!(eta > 2.0)) {
    throw std::domain_error("tail_interference_integral: eta must exceed 2");
  }
  if (!(a >= 0.0)) {
    throw std::domain_error("tail_interference_integral: a must be nonnegative");
  }
  if (std::isinf(a)) return 0.0;

  const QuadratureSpec inner{1e-13, 1e-15, 2000};
  double head = 0.0;
  if (a < 1.0) {
    head = integrate([eta](double y) { return y / (std::pow(y, eta) + 1.0); }, a,
                     1.0, inner);
  }
  // On [max(a,1), inf) substitute v = y^(2-eta): the integrand becomes
  // 1 / ((eta-2) (1 + v^(eta/(eta-2)))) on the finite range [0, max(a,1)^(2-eta)].
  const double upper = std::pow(std::max(a, 1.0), 2.0 - eta);
  if (upper == 0.0) return head;
  const double power = eta / (eta - 2.0);
  const double tail =
      integrate([power](double v) { return 1.0 / (1.0 + std::pow(v, power)); }, 0.0,
                upper, inner);
  return head + tail / (eta - 2.0);
}

double integrate(const Integrand& f, double lo, double hi, const QuadratureSpec& spec) {
  spec.check();
  if (lo == hi) return 0.0;
  if (hi < lo) return -integrate(f, hi, lo, spec);

  std::priority_queue<Panel> panels;
  Panel first = gauss_kronrod_15(f, lo, hi);
  double total = first.value;
  double error = first.error;
  panels.push(first);

  int subdivisions = 0;
  while (error > std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) {
    if (subdivisions >= spec.max_subdivisions) {
      throw NonConvergenceError("adaptive quadrature did not converge within " +
                                    std::to_string(spec.max_subdivisions) +
                                    " subdivisions",
                                total, error);
    }
    const Panel worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    const Panel left = gauss_kronrod_15(f, worst.lo, mid);
    const Panel right = gauss_kronrod_15(f, mid, worst.hi);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
    ++subdivisions;
  }

  // Re-sum from the panels so the running updates leave no drift.
  double sum = 0.0;
  double compensation = 0.0;
  while (!panels.empty()) {
    const double v = panels.top().value;
    panels.pop();
    const double t = sum + v;
    compensation += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return sum + compensation;
}

double integrate_semi_infinite(const Integrand& f, double lower,
                               const QuadratureSpec& spec) {
  if (!std::isfinite(lower)) {
    throw std::domain_error("integrate_semi_infinite: lower limit must be finite");
  }
  auto mapped = [&f, lower](double t) {
    const double one_minus = 1.0 - t;
    const double value = f(lower + t / one_minus);
    if (value == 0.0) return 0.0;
    return value / (one_minus * one_minus);
  };
  return integrate(mapped, 0.0, 1.0, spec);
}

}  // namespace uplink::specfun

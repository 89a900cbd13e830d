#include "uplink/optimize.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <thread>

namespace uplink::optimize {

namespace {

// Sign that turns every objective into a minimization.
double minimization_sign(Objective objective) {
  return objective == Objective::kTotalOutage ? 1.0 : -1.0;
}

NetworkConfig at_cutoff(const NetworkConfig& config, std::size_t tier, double rho_o_dbm) {
  if (tier >= config.tiers.size()) throw std::out_of_range("tier index out of range");
  return validate(with_cutoff(config, tier, dbm_to_watts(rho_o_dbm)));
}

}  // namespace

double objective_value(const MetricsReport& report, Objective objective) {
  return objective == Objective::kTotalOutage ? report.total_outage
                                              : report.effective_spectral_efficiency;
}

bool strictly_better(double candidate, double incumbent, Objective objective) {
  return minimization_sign(objective) * (incumbent - candidate) > kTieTolerance;
}

double evaluate_objective(const NetworkConfig& config, std::size_t tier, double rho_o_dbm,
                          Objective objective, const analytic::Options& options) {
  const NetworkConfig c = at_cutoff(config, tier, rho_o_dbm);
  const double op = analytic::truncation_outage(c, tier, options);
  if (objective == Objective::kTotalOutage) {
    return total_outage(op, analytic::sinr_outage(c, tier, options));
  }
  return effective_rate(op, analytic::spectral_efficiency(c, tier, options));
}

std::vector<double> GridSpec::values() const {
  if (!(from_dbm < to_dbm)) throw std::invalid_argument("grid needs from < to");
  if (steps < 2) throw std::invalid_argument("grid needs at least 2 steps");
  std::vector<double> v(steps);
  const double step = (to_dbm - from_dbm) / static_cast<double>(steps - 1);
  for (std::size_t i = 0; i < steps; ++i) v[i] = from_dbm + step * static_cast<double>(i);
  v.back() = to_dbm;
  return v;
}

std::size_t SweepResult::failures() const {
  return static_cast<std::size_t>(
      std::count_if(reports.begin(), reports.end(), [](const auto& r) { return !r; }));
}

std::pair<double, double> SweepResult::bracket() const {
  const std::size_t last = parameter_values.size() - 1;
  const std::size_t lo = opt_index == 0 ? 0 : opt_index - 1;
  const std::size_t hi = std::min(opt_index + 1, last);
  return {parameter_values[lo], parameter_values[hi]};
}

SweepResult sweep(const NetworkConfig& config, std::size_t tier, const GridSpec& grid,
                  Objective objective, const analytic::Options& options, unsigned workers) {
  SweepResult result;
  result.objective = objective;
  result.parameter_values = grid.values();
  const std::size_t n = result.parameter_values.size();
  result.reports.resize(n);
  result.errors.resize(n);

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        const NetworkConfig c = at_cutoff(config, tier, result.parameter_values[i]);
        result.reports[i] = analytic::full_report(c, tier, options);
      } catch (const std::exception& e) {
        result.errors[i] = e.what();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  bool found = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (!result.reports[i]) continue;
    const double value = objective_value(*result.reports[i], objective);
    if (!found || strictly_better(value, result.opt_value, objective)) {
      found = true;
      result.opt_index = i;
      result.opt_value = value;
    }
  }
  if (!found) throw std::runtime_error("every sweep point failed: " + result.errors.front());
  result.argopt = result.parameter_values[result.opt_index];
  return result;
}

ScalarMinimum golden_minimize(const std::function<double(double)>& objective, double lo,
                              double hi, double tol) {
  if (!(lo < hi)) throw BracketError("bracket needs lo < hi");
  if (!(tol > 0.0)) throw BracketError("tolerance must be positive");

  std::map<double, double> seen;
  auto f = [&](double x) {
    auto it = seen.find(x);
    if (it != seen.end()) return it->second;
    const double value = objective(x);
    seen.emplace(x, value);
    return value;
  };
  // Sampled in x order, a unimodal function never rises and then falls.
  auto unimodal = [&] {
    bool rising = false;
    bool first = true;
    double previous = 0.0;
    for (const auto& [x, value] : seen) {
      if (!first) {
        if (value > previous + kTieTolerance) rising = true;
        if (rising && value < previous - kTieTolerance) return false;
      }
      previous = value;
      first = false;
    }
    return true;
  };

  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - ratio * (b - a);
  double d = a + ratio * (b - a);
  const double fa = f(a), fb = f(b), fc = f(c), fd = f(d);
  if (std::max({fa, fb, fc, fd}) - std::min({fa, fb, fc, fd}) <= kTieTolerance) {
    return {lo, fa, false, seen.size()};
  }

  bool fallback = !unimodal();
  while (!fallback && b - a > tol) {
    if (f(c) <= f(d)) {
      b = d;
      d = c;
      c = b - ratio * (b - a);
    } else {
      a = c;
      c = d;
      d = a + ratio * (b - a);
    }
    f(c);
    f(d);
    fallback = !unimodal();
  }
  if (fallback) {
    const auto points = static_cast<std::size_t>(std::ceil((hi - lo) / (tol / 2.0))) + 1;
    const double step = (hi - lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) f(lo + step * static_cast<double>(i));
  }

  ScalarMinimum best;
  bool first = true;
  for (const auto& [x, value] : seen) {
    if (first || value < best.value - kTieTolerance) {
      best.x = x;
      best.value = value;
      first = false;
    }
  }
  best.grid_fallback = fallback;
  best.evaluations = seen.size();
  return best;
}

Optimum refine_optimum(const NetworkConfig& config, std::size_t tier, Objective objective,
                       double lo_dbm, double hi_dbm, double tol_db,
                       const analytic::Options& options) {
  const double sign = minimization_sign(objective);
  const ScalarMinimum m = golden_minimize(
      [&](double x) { return sign * evaluate_objective(config, tier, x, objective, options); },
      lo_dbm, hi_dbm, tol_db);
  return {m.x, sign * m.value, m.grid_fallback, m.evaluations};
}

}  // namespace uplink::optimize

#include "uplink/montecarlo.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

namespace uplink::montecarlo {

namespace {

constexpr double kZ95 = 1.96;
constexpr std::uint32_t kUnfilled = std::numeric_limits<std::uint32_t>::max();

double distance2(Point a, Point b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

// r^eta from r^2; exact for the common eta = 4.
double path_metric(double d2, double eta) {
  return eta == 4.0 ? d2 * d2 : std::pow(d2, eta / 2.0);
}

Point uniform_point(double side, Rng& rng) {
  const double x = (rng.uniform() - 0.5) * side;
  const double y = (rng.uniform() - 0.5) * side;
  return {x, y};
}

class CompensatedSum {
 public:
  void add(double value) {
    const double t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value)) {
      compensation_ += (sum_ - t) + value;
    } else {
      compensation_ += (value - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

// Largest r^eta any tier could still serve; beyond it every BS is truncated
// and loses to any serving candidate.
double serving_metric_cap(const NetworkConfig& config) {
  double cap = 0.0;
  for (const auto& t : config.tiers) cap = std::max(cap, config.p_max / t.rho_o);
  return cap;
}

// Fills `out` step by step so the probe outcome survives a saturation failure.
void run_realization(const NetworkConfig& config, std::size_t tier, Rng& rng,
                     const SimulationOptions& options, Realization& out) {
  if (tier >= config.tiers.size()) throw std::out_of_range("tier index out of range");
  if (!(options.batch_factor > 0.0) || options.max_batches < 1) {
    throw std::invalid_argument("batch_factor and max_batches must be positive");
  }
  const double half = config.window_side / 2.0;
  const double side = config.window_side + 2.0 * config.guard_margin;
  const auto& tagged_tier = config.tiers[tier];

  out = Realization{};
  auto& bs = out.bs_points;
  for (std::size_t k = 0; k < config.tiers.size(); ++k) {
    for (const Point& p : sample_ppp(config.tiers[k].lambda, side, rng)) bs.push_back({p, k});
  }

  // Truncated iff rho_j min_k r_k^eta_k > P_u, judged on the undisturbed PPP.
  const Point probe = uniform_point(config.window_side, rng);
  double best_metric = std::numeric_limits<double>::infinity();
  for (const auto& b : bs) {
    best_metric =
        std::min(best_metric, path_metric(distance2(probe, b.position), config.tiers[b.tier].eta));
  }
  out.probe_truncated = !(tagged_tier.rho_o * best_metric <= config.p_max);
  if (!out.probe_truncated) out.probe_power = tagged_tier.rho_o * best_metric;

  if (options.tagged == TaggedSelection::kInsertedAtCenter) {
    bs.push_back({{0.0, 0.0}, tier});
    out.tagged_bs = bs.size() - 1;
  } else {
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < bs.size(); ++i) {
      const auto& b = bs[i];
      if (b.tier != tier || std::abs(b.position.x) > half || std::abs(b.position.y) > half) continue;
      const double d2 = distance2(b.position, {});
      if (d2 < nearest) {
        nearest = d2;
        out.tagged_bs = i;
      }
    }
  }

  const AssociationIndex index(bs, config, side);
  std::vector<char> inner(bs.size());
  std::size_t inactive = 0;
  for (std::size_t i = 0; i < bs.size(); ++i) {
    inner[i] = std::abs(bs[i].position.x) <= half && std::abs(bs[i].position.y) <= half;
    inactive += inner[i];
  }

  std::vector<std::uint32_t> eligible(bs.size(), 0);
  std::vector<ScheduledUe> chosen(bs.size());
  const auto batch = static_cast<std::size_t>(
      std::ceil(config.total_intensity() * side * side * options.batch_factor));
  while (inactive > 0) {
    if (out.batches == static_cast<std::size_t>(options.max_batches)) {
      throw SaturationError(inactive);
    }
    for (std::size_t n = 0; n < batch; ++n) {
      const Point ue = uniform_point(side, rng);
      const Link link = index(ue);
      if (link.truncated) continue;
      const std::uint32_t seen = ++eligible[link.bs];
      // Reservoir sampling keeps a uniform choice among the eligible UEs.
      if (seen == 1) {
        chosen[link.bs] = {ue, link.bs, link.required_power};
        if (inner[link.bs]) --inactive;
      } else if (rng.uniform() * seen < 1.0) {
        chosen[link.bs] = {ue, link.bs, link.required_power};
      }
    }
    ++out.batches;
  }

  for (std::size_t i = 0; i < bs.size(); ++i) {
    if (eligible[i] > 0) out.scheduled_ues.push_back(chosen[i]);
  }

  if (out.tagged_bs == kNone || eligible[out.tagged_bs] == 0) return;
  out.tagged_active = true;
  const Point at = bs[out.tagged_bs].position;
  const double signal = tagged_tier.rho_o * rng.exponential();
  double interference = 0.0;
  for (const auto& ue : out.scheduled_ues) {
    if (ue.serving_bs == out.tagged_bs) continue;
    interference +=
        ue.tx_power * rng.exponential() / path_metric(distance2(ue.position, at), tagged_tier.eta);
  }
  out.tagged_sinr = signal / (config.noise + interference);
}

}  // namespace

std::vector<Point> sample_ppp(double intensity, double side, Rng& rng) {
  if (!(intensity >= 0.0) || !(side > 0.0)) {
    throw std::invalid_argument("sample_ppp needs intensity >= 0 and side > 0");
  }
  std::vector<Point> points;
  if (intensity == 0.0) return points;
  std::poisson_distribution<std::uint64_t> count(intensity * side * side);
  const std::uint64_t n = count(rng);
  points.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) points.push_back(uniform_point(side, rng));
  return points;
}

Link associate(Point ue, std::span<const BaseStation> bs_points, const NetworkConfig& config) {
  Link link;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < bs_points.size(); ++i) {
    const auto& b = bs_points[i];
    const double metric = path_metric(distance2(ue, b.position), config.tiers[b.tier].eta);
    if (metric < best) {
      best = metric;
      link.bs = i;
    }
  }
  if (link.bs == kNone) return link;
  link.required_power = config.tiers[bs_points[link.bs].tier].rho_o * best;
  link.truncated = !(link.required_power <= config.p_max);
  return link;
}

AssociationIndex::AssociationIndex(std::span<const BaseStation> bs_points,
                                   const NetworkConfig& config, double extent)
    : bs_points_(bs_points),
      config_(&config),
      half_extent_(extent / 2.0),
      metric_cap_(serving_metric_cap(config)) {
  const double cap = metric_cap_;
  grids_.resize(config.tiers.size());
  std::vector<std::size_t> counts(config.tiers.size(), 0);
  for (const auto& b : bs_points) ++counts[b.tier];

  for (std::size_t k = 0; k < grids_.size(); ++k) {
    Grid& g = grids_[k];
    g.cells = static_cast<int>(
        std::clamp(std::ceil(std::sqrt(static_cast<double>(counts[k]))), 1.0, 1024.0));
    g.cell = extent / g.cells;
    g.search_radius = std::pow(cap, 1.0 / config.tiers[k].eta);
    g.start.assign(static_cast<std::size_t>(g.cells) * g.cells + 1, 0);
  }
  auto cell_of = [this](const Grid& g, Point p) {
    const int cx = std::clamp(static_cast<int>((p.x + half_extent_) / g.cell), 0, g.cells - 1);
    const int cy = std::clamp(static_cast<int>((p.y + half_extent_) / g.cell), 0, g.cells - 1);
    return static_cast<std::size_t>(cy) * g.cells + cx;
  };
  for (const auto& b : bs_points) ++grids_[b.tier].start[cell_of(grids_[b.tier], b.position) + 1];
  for (auto& g : grids_) {
    for (std::size_t c = 1; c < g.start.size(); ++c) g.start[c] += g.start[c - 1];
    g.members.resize(g.start.back());
  }
  std::vector<std::vector<std::uint32_t>> fill(grids_.size());
  for (std::size_t k = 0; k < grids_.size(); ++k) {
    fill[k].assign(grids_[k].start.begin(), grids_[k].start.end() - 1);
  }
  for (std::size_t i = 0; i < bs_points.size(); ++i) {
    Grid& g = grids_[bs_points[i].tier];
    g.members[fill[bs_points[i].tier][cell_of(g, bs_points[i].position)]++] =
        static_cast<std::uint32_t>(i);
  }

  query_cells_ = static_cast<int>(
      std::clamp(std::ceil(std::sqrt(static_cast<double>(bs_points.size()))), 1.0, 1024.0));
  query_cell_ = extent / query_cells_;
  const auto total = static_cast<std::size_t>(query_cells_) * query_cells_;
  offset_.assign(total, kUnfilled);
  count_.assign(total, 0);
}

std::span<const AssociationIndex::Candidate> AssociationIndex::candidates(std::size_t c) const {
  if (offset_[c] != kUnfilled) return {pool_.data() + offset_[c], count_[c]};

  const double x0 = -half_extent_ + static_cast<double>(c % query_cells_) * query_cell_;
  const double y0 = -half_extent_ + static_cast<double>(c / query_cells_) * query_cell_;
  const double x1 = x0 + query_cell_;
  const double y1 = y0 + query_cell_;
  const Point center{(x0 + x1) / 2.0, (y0 + y1) / 2.0};

  // Every point of the cell has a BS within metric `bound`: the farthest
  // corner distance to the BS nearest the center.
  double bound = metric_cap_;
  for (std::size_t k = 0; k < grids_.size(); ++k) {
    double d2 = 0.0;
    const std::size_t i = nearest(grids_[k], center, d2);
    if (i == kNone) continue;
    const Point b = bs_points_[i].position;
    const double fx = std::max(std::abs(x0 - b.x), std::abs(x1 - b.x));
    const double fy = std::max(std::abs(y0 - b.y), std::abs(y1 - b.y));
    bound = std::min(bound, path_metric(fx * fx + fy * fy, config_->tiers[k].eta));
  }

  offset_[c] = static_cast<std::uint32_t>(pool_.size());
  for (std::size_t k = 0; k < grids_.size(); ++k) {
    const Grid& g = grids_[k];
    const double eta = config_->tiers[k].eta;
    const double reach = std::pow(bound, 1.0 / eta);
    auto to_cell = [&](double v) {
      const double t = std::floor((v + half_extent_) / g.cell);
      return static_cast<int>(std::clamp(t, 0.0, static_cast<double>(g.cells - 1)));
    };
    const int gx0 = to_cell(x0 - reach), gx1 = to_cell(x1 + reach);
    const int gy0 = to_cell(y0 - reach), gy1 = to_cell(y1 + reach);
    for (int gy = gy0; gy <= gy1; ++gy) {
      for (int gx = gx0; gx <= gx1; ++gx) {
        const std::size_t cell = static_cast<std::size_t>(gy) * g.cells + gx;
        for (std::uint32_t m = g.start[cell]; m < g.start[cell + 1]; ++m) {
          const std::uint32_t i = g.members[m];
          const Point b = bs_points_[i].position;
          const double ex = std::max({0.0, x0 - b.x, b.x - x1});
          const double ey = std::max({0.0, y0 - b.y, b.y - y1});
          if (path_metric(ex * ex + ey * ey, eta) > bound) continue;
          pool_.push_back({b.x, b.y, eta, config_->tiers[k].rho_o, i});
        }
      }
    }
  }

  // With a shared exponent the points nearer b' than b form a half-plane, so
  // b never wins inside the cell when all four corners are strictly nearer b'.
  const std::size_t first = offset_[c];
  const std::size_t n = pool_.size() - first;
  std::vector<std::array<double, 4>> corner(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Candidate& b = pool_[first + i];
    corner[i] = {distance2({x0, y0}, {b.x, b.y}), distance2({x1, y0}, {b.x, b.y}),
                 distance2({x0, y1}, {b.x, b.y}), distance2({x1, y1}, {b.x, b.y})};
  }
  std::vector<bool> dominated(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n && !dominated[i]; ++j) {
      if (j == i || pool_[first + j].eta != pool_[first + i].eta) continue;
      dominated[i] = corner[i][0] > corner[j][0] && corner[i][1] > corner[j][1] &&
                     corner[i][2] > corner[j][2] && corner[i][3] > corner[j][3];
    }
  }
  std::size_t kept = first;
  for (std::size_t i = 0; i < n; ++i) {
    if (!dominated[i]) pool_[kept++] = pool_[first + i];
  }
  pool_.resize(kept);
  count_[c] = static_cast<std::uint32_t>(kept - first);
  return {pool_.data() + offset_[c], count_[c]};
}

std::size_t AssociationIndex::nearest(const Grid& g, Point ue, double& best2) const {
  const double gx = ue.x + half_extent_;
  const double gy = ue.y + half_extent_;
  const int cx = std::clamp(static_cast<int>(gx / g.cell), 0, g.cells - 1);
  const int cy = std::clamp(static_cast<int>(gy / g.cell), 0, g.cells - 1);
  const double fx = gx - cx * g.cell;
  const double fy = gy - cy * g.cell;
  const double margin = std::max(0.0, std::min({fx, g.cell - fx, fy, g.cell - fy}));

  std::size_t best = kNone;
  best2 = g.search_radius * g.search_radius;
  auto scan = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= g.cells || y >= g.cells) return;
    const double ex = std::max({0.0, x * g.cell - gx, gx - (x + 1) * g.cell});
    const double ey = std::max({0.0, y * g.cell - gy, gy - (y + 1) * g.cell});
    if (ex * ex + ey * ey > best2) return;
    const std::size_t c = static_cast<std::size_t>(y) * g.cells + x;
    for (std::uint32_t m = g.start[c]; m < g.start[c + 1]; ++m) {
      const std::uint32_t i = g.members[m];
      const double d2 = distance2(ue, bs_points_[i].position);
      if (d2 < best2 || (d2 == best2 && best != kNone && i < best)) {
        best2 = d2;
        best = i;
      }
    }
  };
  for (int r = 0; r <= g.cells; ++r) {
    if (r > 0) {
      const double bound = (r - 1) * g.cell + margin;
      if (bound * bound > best2) break;
    }
    for (int dy = -r; dy <= r; ++dy) {
      if (dy == -r || dy == r) {
        for (int dx = -r; dx <= r; ++dx) scan(cx + dx, cy + dy);
      } else {
        scan(cx - r, cy + dy);
        scan(cx + r, cy + dy);
      }
    }
  }
  return best;
}

Link AssociationIndex::operator()(Point ue) const {
  const double gx = (ue.x + half_extent_) / query_cell_;
  const double gy = (ue.y + half_extent_) / query_cell_;
  if (!(gx >= 0.0 && gy >= 0.0 && gx < query_cells_ && gy < query_cells_)) return search(ue);
  const auto c = static_cast<std::size_t>(gy) * query_cells_ + static_cast<std::size_t>(gx);

  Link link;
  double best = metric_cap_;
  double rho = 0.0;
  for (const Candidate& cand : candidates(c)) {
    const double dx = ue.x - cand.x;
    const double dy = ue.y - cand.y;
    const double metric = path_metric(dx * dx + dy * dy, cand.eta);
    if (metric < best || (metric == best && cand.index < link.bs)) {
      best = metric;
      link.bs = cand.index;
      rho = cand.rho;
    }
  }
  if (link.bs == kNone) return link;
  link.required_power = rho * best;
  link.truncated = !(link.required_power <= config_->p_max);
  return link;
}

Link AssociationIndex::search(Point ue) const {
  Link link;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grids_.size(); ++k) {
    double d2 = 0.0;
    const std::size_t i = nearest(grids_[k], ue, d2);
    if (i == kNone) continue;
    const double metric = path_metric(d2, config_->tiers[k].eta);
    if (metric < best || (metric == best && i < link.bs)) {
      best = metric;
      link.bs = i;
    }
  }
  if (link.bs == kNone) return link;
  link.required_power = config_->tiers[bs_points_[link.bs].tier].rho_o * best;
  link.truncated = !(link.required_power <= config_->p_max);
  return link;
}

Realization build_realization(const NetworkConfig& config, std::size_t tier, Rng& rng,
                              const SimulationOptions& options) {
  Realization out;
  run_realization(config, tier, rng, options, out);
  return out;
}

EstimateWithCI wilson_interval(std::size_t successes, std::size_t n) {
  EstimateWithCI e;
  e.n_samples = n;
  if (n == 0) {
    e.mean = e.half_width_95 = e.lower = e.upper = std::numeric_limits<double>::quiet_NaN();
    return e;
  }
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = kZ95 * kZ95;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  e.mean = p;
  e.half_width_95 = kZ95 * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  e.lower = std::max(0.0, center - e.half_width_95);
  e.upper = std::min(1.0, center + e.half_width_95);
  return e;
}

EstimateWithCI mean_interval(std::span<const double> samples) {
  EstimateWithCI e;
  e.n_samples = samples.size();
  if (samples.empty()) {
    e.mean = e.half_width_95 = e.lower = e.upper = std::numeric_limits<double>::quiet_NaN();
    return e;
  }
  CompensatedSum sum;
  for (double v : samples) sum.add(v);
  const double n = static_cast<double>(samples.size());
  e.mean = sum.value() / n;
  if (samples.size() < 2) {
    e.half_width_95 = std::numeric_limits<double>::infinity();
  } else {
    CompensatedSum squares;
    for (double v : samples) squares.add((v - e.mean) * (v - e.mean));
    e.half_width_95 = kZ95 * std::sqrt(squares.value() / (n - 1.0) / n);
  }
  e.lower = e.mean - e.half_width_95;
  e.upper = e.mean + e.half_width_95;
  return e;
}

MetricsReport SimulationReport::point() const {
  return MetricsReport::compose(truncation_outage.mean, sinr_outage.mean,
                                spectral_efficiency.mean, mean_tx_power.mean);
}

SimulationReport estimate_metrics(const NetworkConfig& config, std::size_t tier,
                                  const EstimateOptions& options) {
  if (options.iterations < 100) throw std::invalid_argument("iterations must be at least 100");
  if (tier >= config.tiers.size()) throw std::out_of_range("tier index out of range");

  struct Outcome {
    bool discarded = false;
    bool probe_truncated = false;
    bool active = false;
    double sinr = 0.0;
    double power = 0.0;
  };
  std::vector<Outcome> outcomes(options.iterations);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    Realization r;
    for (std::size_t i = next++; i < outcomes.size(); i = next++) {
      Outcome& o = outcomes[i];
      Rng rng(options.seed, i);
      try {
        run_realization(config, tier, rng, options.simulation, r);
      } catch (const SaturationError&) {
        o.discarded = true;
        o.probe_truncated = r.probe_truncated;
        o.power = r.probe_power;
        continue;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = outcomes.size();
        return;
      }
      o.probe_truncated = r.probe_truncated;
      o.power = r.probe_power;
      o.active = r.tagged_active;
      o.sinr = r.tagged_sinr;
    }
  };
  const unsigned workers = std::max(1u, options.workers);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  SimulationReport report;
  report.realizations = outcomes.size();
  std::size_t truncated = 0;
  std::size_t outages = 0;
  std::vector<double> rates;
  std::vector<double> powers;
  const double theta = config.tiers[tier].theta;
  for (const auto& o : outcomes) {
    truncated += o.probe_truncated;
    if (!o.probe_truncated) powers.push_back(o.power);
    if (o.discarded) {
      ++report.discarded;
      continue;
    }
    if (!o.active) continue;
    outages += o.sinr <= theta;
    rates.push_back(std::log1p(o.sinr));
  }
  report.truncation_outage = wilson_interval(truncated, outcomes.size());
  report.sinr_outage = wilson_interval(outages, rates.size());
  report.spectral_efficiency = mean_interval(rates);
  report.mean_tx_power = mean_interval(powers);

  // Delta-method intervals for the composite metrics.
  const double op = report.truncation_outage.mean;
  const double os = report.sinr_outage.mean;
  const double rate = report.spectral_efficiency.mean;
  const double np = static_cast<double>(outcomes.size());
  const double ns = static_cast<double>(rates.size());
  const double var_op = op * (1.0 - op) / np;
  const double var_os = os * (1.0 - os) / ns;
  const double se_rate = report.spectral_efficiency.half_width_95 / kZ95;

  auto& total = report.total_outage;
  total.mean = uplink::total_outage(op, os);
  total.n_samples = rates.size();
  total.half_width_95 =
      kZ95 * std::sqrt((1.0 - os) * (1.0 - os) * var_op + (1.0 - op) * (1.0 - op) * var_os);
  total.lower = std::max(0.0, total.mean - total.half_width_95);
  total.upper = std::min(1.0, total.mean + total.half_width_95);

  auto& eff = report.effective_spectral_efficiency;
  eff.mean = uplink::effective_rate(op, rate);
  eff.n_samples = rates.size();
  eff.half_width_95 =
      kZ95 * std::sqrt(rate * rate * var_op + (1.0 - op) * (1.0 - op) * se_rate * se_rate);
  eff.lower = eff.mean - eff.half_width_95;
  eff.upper = eff.mean + eff.half_width_95;
  return report;
}

}  // namespace uplink::montecarlo

#pragma once

// Monte Carlo simulation of the uplink system: PPP base stations, uniform
// UE drops until every BS is active, truncated channel inversion, Rayleigh
// fading, and the SINR of one tagged BS per realization.
//
// Coordinates are meters with the measurement window [-L/2, L/2]^2 centered
// at the origin; BSs and UEs live on the window expanded by the guard margin.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "uplink/model.hpp"
#include "uplink/rng.hpp"

namespace uplink::montecarlo {

inline constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct BaseStation {
  Point position;
  std::size_t tier = 0;
};

struct ScheduledUe {
  Point position;
  std::size_t serving_bs = kNone;
  double tx_power = 0.0;
};

struct Link {
  std::size_t bs = kNone;       // kNone only when no BS could serve at all
  double required_power = 0.0;  // rho_o^(tier) r^eta
  bool truncated = true;
};

enum class TaggedSelection {
  kNearestCenter,     // the tagged-tier BS nearest the window center; its cell is area-biased
  kInsertedAtCenter,  // an extra tagged-tier BS placed at the center (a typical BS)
};

struct SimulationOptions {
  double batch_factor = 10.0;  // UEs per batch = ceil(Lambda * area * batch_factor)
  int max_batches = 50;
  TaggedSelection tagged = TaggedSelection::kInsertedAtCenter;
};

struct Realization {
  std::vector<BaseStation> bs_points;
  std::vector<ScheduledUe> scheduled_ues;
  std::size_t tagged_bs = kNone;
  double tagged_sinr = 0.0;
  bool tagged_active = false;
  bool probe_truncated = false;  // independent uniform probe UE, tagged-tier cutoff
  double probe_power = 0.0;      // probe's required power; 0 when truncated
  std::size_t batches = 0;
};

class SaturationError : public std::runtime_error {
 public:
  explicit SaturationError(std::size_t inactive)
      : std::runtime_error("UE drop cap reached with " + std::to_string(inactive) +
                           " inactive base stations"),
        inactive_(inactive) {}
  std::size_t inactive() const noexcept { return inactive_; }

 private:
  std::size_t inactive_;
};

using Rng = Philox4x32;

/// Homogeneous PPP on the square [-side/2, side/2]^2.
std::vector<Point> sample_ppp(double intensity, double side, Rng& rng);

/// Best-link association by exhaustive search: argmin r^eta_tier, truncated
/// when the required power exceeds P_u.
Link associate(Point ue, std::span<const BaseStation> bs_points, const NetworkConfig& config);

/// Grid-accelerated association over a fixed BS set inside the square of
/// side `extent`. Agrees with associate() whenever a BS can serve; when none
/// can, the link is truncated and may report bs = kNone. Candidate lists are
/// cached on first use, so one instance must not be shared across threads.
class AssociationIndex {
 public:
  AssociationIndex(std::span<const BaseStation> bs_points, const NetworkConfig& config,
                   double extent);
  Link operator()(Point ue) const;

 private:
  struct Grid {
    double cell = 1.0;
    int cells = 1;
    std::vector<std::uint32_t> start;  // CSR offsets, cells*cells + 1
    std::vector<std::uint32_t> members;
    double search_radius = 0.0;  // no BS of this tier beyond it can serve or win
  };
  // Nearest BS of `grid` within its search radius; returns kNone otherwise.
  std::size_t nearest(const Grid& grid, Point ue, double& distance2) const;

  struct Candidate {
    double x, y, eta, rho;
    std::uint32_t index;
  };
  // BSs that can win for some point of query cell `c`.
  std::span<const Candidate> candidates(std::size_t c) const;
  Link search(Point ue) const;

  std::span<const BaseStation> bs_points_;
  const NetworkConfig* config_;
  double half_extent_;
  double metric_cap_;
  std::vector<Grid> grids_;
  int query_cells_ = 1;
  double query_cell_ = 1.0;
  mutable std::vector<std::uint32_t> offset_;  // kUnfilled until computed
  mutable std::vector<std::uint32_t> count_;
  mutable std::vector<Candidate> pool_;
};

/// One realization of the simulation protocol for tagged tier `tier`.
/// Throws SaturationError when the drop cap is reached.
Realization build_realization(const NetworkConfig& config, std::size_t tier, Rng& rng,
                              const SimulationOptions& options = {});

struct EstimateWithCI {
  double mean = 0.0;
  double half_width_95 = 0.0;
  std::size_t n_samples = 0;
  double lower = 0.0;
  double upper = 0.0;

  bool contains(double value) const { return value >= lower && value <= upper; }
};

/// Wilson score interval for `successes` out of `n` at 95%.
EstimateWithCI wilson_interval(std::size_t successes, std::size_t n);
/// Sample mean with 1.96 s / sqrt(n) half-width; compensated sums.
EstimateWithCI mean_interval(std::span<const double> samples);

struct SimulationReport {
  EstimateWithCI truncation_outage;
  EstimateWithCI sinr_outage;
  EstimateWithCI total_outage;
  EstimateWithCI spectral_efficiency;
  EstimateWithCI effective_spectral_efficiency;
  EstimateWithCI mean_tx_power;
  std::size_t realizations = 0;
  std::size_t discarded = 0;  // saturation failures

  double discard_rate() const {
    return realizations ? static_cast<double>(discarded) / static_cast<double>(realizations) : 0.0;
  }
  MetricsReport point() const;
};

struct EstimateOptions {
  std::size_t iterations = 10000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  SimulationOptions simulation;
};

/// Runs independent realizations and reduces them in index order, so the
/// result is bitwise identical for any worker count. iterations >= 100.
/// O_s and R come from the tagged link of each saturated realization; O_p and
/// E[P] from the probe UE, so they include discarded realizations.
SimulationReport estimate_metrics(const NetworkConfig& config, std::size_t tier,
                                  const EstimateOptions& options);

}  // namespace uplink::montecarlo

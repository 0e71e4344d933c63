#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "shadowgm/bounds.hpp"
#include "shadowgm/brownian.hpp"
#include "shadowgm/model.hpp"
#include "shadowgm/solver.hpp"

namespace shadowgm {

/// Runs fn(i) for i in [0, count) on `threads` workers, in the order given by
/// `order` (identity when empty). fn must only write to slot i of its outputs.
void parallel_for(std::size_t count, int threads, const std::vector<std::size_t>& order,
                  const std::function<void(std::size_t)>& fn);

/// Deterministic permutation of [0, count) keyed by `seed`.
std::vector<std::size_t> shuffled_order(std::size_t count, std::uint64_t seed);

/// Controls with β resolved: inside the blowup regime the tracked mean uses the
/// β picked by select_beta_k, otherwise the given value.
SolverControls resolve_beta(const Parameters& params, SolverControls controls, bool automatic);

struct PathRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  double gamma = 0.0;
  PathVerdict check;
  std::string error;  // breakdown message, empty otherwise
  double final_Bstar = 0.0;
  double worst_profile = 0.0;
  double worst_xi_hat_decrease = 0.0;
  std::int64_t accepted_steps = 0;
  std::int64_t rejected_steps = 0;
  // Stopping-time diagnostics, filled when the path reaches t_λ before blowup.
  bool reached_t_lambda = false;
  std::optional<double> t_hat_lambda;
  double t_hat_bound = 0.0;
  double h_star_margin = 0.0;
  double envelope_ratio = 0.0;
  double C0 = 0.0;

  /// Numerical blowup time (upper end of the bracket), +inf when none.
  double T_b() const;
};

struct PathOutcome {
  RunResult run;
  PathRecord record;
  std::optional<BrownianPath> path;  // the refined driver
};

/// Samples the driver, integrates, and checks the blowup bound for one seed.
/// A solver breakdown becomes a record with verdict `breakdown`.
PathOutcome run_path(const Parameters& params, const SolverControls& controls,
                     std::uint64_t seed, const BoundCheckOptions& check = {});

struct ProbabilityAggregate {
  double theta0 = 0.0;
  double A0 = 0.0;
  double bound = 0.0;
  bool vacuous = true;
  double cap = 0.0;
  std::size_t within_cap = 0;  // paths with T_b ≤ cap
  double fraction = 0.0;
  double sigma = 0.0;
  bool holds = true;  // vacuous or fraction ≥ bound - 3σ

  bool operator==(const ProbabilityAggregate&) const = default;
};

struct EnsembleAggregates {
  std::size_t paths = 0;
  std::size_t blew_up = 0;
  std::size_t applicable = 0;
  std::size_t satisfied = 0;
  std::size_t violated = 0;
  std::size_t inconclusive = 0;
  std::size_t breakdowns = 0;
  double fraction_blew_up = 0.0;
  double fraction_satisfied = 0.0;  // among applicable; 1 when none applicable
  double median_T_b = 0.0;
  double median_bound = 0.0;        // over applicable paths; +inf when none
  ProbabilityAggregate probability;

  bool operator==(const EnsembleAggregates&) const = default;
};

struct EnsembleStats {
  std::vector<PathRecord> rows;
  EnsembleAggregates aggregates;
};

struct EnsembleOptions {
  std::size_t paths = 100;
  std::uint64_t base_seed = 1;
  int threads = 1;
  bool shuffle = false;
  BoundCheckOptions check;
};

EnsembleAggregates aggregate(const std::vector<PathRecord>& rows, const Parameters& params,
                             double window);

EnsembleStats run_ensemble(const Parameters& params, const SolverControls& controls,
                           const EnsembleOptions& options);

double median(std::vector<double> values);

struct GammaSweepRow {
  double gamma = 0.0;
  double median_T_b = 0.0;
  double median_bound = 0.0;
  double fixed_K_bound = 0.0;  // bound at K_θ with θ = window and B* = 0
  std::size_t blew_up = 0;
  std::size_t paths = 0;
};

struct GammaSweep {
  std::vector<GammaSweepRow> rows;
  double fixed_K = 0.0;
  bool T_b_non_increasing = true;
  bool bound_non_increasing = true;
  double top_decade_slope = 0.0;  // log-log slope of the fixed-K bound over the last pair
  bool slope_ok = true;           // within 10% of -(p-1)
};

GammaSweep gamma_sweep(const Parameters& params, const SolverControls& controls,
                       const std::vector<double>& gammas, const EnsembleOptions& options);

struct TailRow {
  double t = 0.0;
  double A = 0.0;
  std::size_t paths = 0;
  std::size_t exceed = 0;
  double frequency = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double bound = 0.0;
  bool pass = false;      // ci_hi ≤ bound, or no exceedance at all
  bool resolved = false;  // ci_hi ≤ bound
};

/// Two-sided Wilson score interval.
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials, double z);
inline constexpr double kZ99 = 2.5758293035489004;

std::vector<TailRow> tail_check(const std::vector<double>& t_values,
                                const std::vector<double>& A_values, std::size_t paths,
                                std::uint64_t base_seed, double dt, int threads = 1,
                                bool shuffle = false);

}  // namespace shadowgm

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "shadowgm/brownian.hpp"
#include "shadowgm/model.hpp"
#include "shadowgm/radial.hpp"

namespace shadowgm {

/// Pieces of the coupled system that can be switched off for oracle runs.
struct SolverSwitches {
  bool diffusion = true;
  bool reaction = true;
  bool coupling = true;   // false forces mean(v^r) to 0 in the ξ equation
  bool freeze_xi = false; // K ≡ ξ0^{-q} for all t
  bool operator==(const SolverSwitches&) const = default;
};

struct SolverControls {
  Eigen::Index cells = 1024;
  double horizon = 1.0;
  double dt_max = 1e-3;
  double dt_min = 1e-14;
  double v_blow = 1e10;
  double safety = 0.5;
  double growth_cap = 0.1;         // reject when K vmax^{p-1} dt exceeds this
  double xi_hat_growth_cap = 0.05; // reject when Δξ̂ / ξ̂ exceeds this
  double beta = 1.0;               // exponent of the tracked mean h = mean(v^β)
  double path_dt = 1e-3;           // base spacing of the driving path
  int snapshot_every = 0;          // every k-th accepted step; 0 disables
  std::vector<double> snapshot_times;
  bool snapshot_until_t_lambda = true;  // keep every profile while ξ̂ < λ ξ0
  std::size_t max_snapshots = 4096;
  SolverSwitches switches;
  bool operator==(const SolverControls&) const = default;
};

struct RadialState {
  double t = 0.0;
  std::int64_t tick = 0;  // position on the path lattice
  ArrayX<double> v;
  double xi = 0.0;
  double xi_hat = 0.0;
  double B = 0.0;
  double Bstar = 0.0;
  double K = 0.0;
};

struct TrajectorySample {
  double t, xi, xi_hat, B, Bstar, v0, vmax, mean_vr, mean_vbeta, K, dt;
};

struct Snapshot {
  double t;
  ArrayX<double> v;
};

struct Trajectory {
  ArrayX<double> z;
  std::vector<TrajectorySample> samples;
  std::vector<Snapshot> snapshots;
  bool snapshots_truncated = false;
};

enum class Trigger { threshold, dt_floor, horizon };
const char* to_string(Trigger trigger);

/// Worst relative violations of v ≥ γ, ∂_z v ≤ 0 and z^n v^β ≤ mean(v^β).
struct ProfileDiagnostics {
  double lower_bound = 0.0;  // max(γ - min v, 0) / max v
  double monotone = 0.0;     // max(v_{i+1} - v_i, 0) / max v
  double mean_bound = 0.0;   // max(z^n v^β - mean v^β, 0) / mean v^β
  double worst() const;
  void absorb(const ProfileDiagnostics& other);
};

struct BlowupReport {
  bool blew_up = false;
  double t_lo = 0.0;
  double t_hi = 0.0;
  Trigger trigger = Trigger::horizon;
  double final_time = 0.0;
  std::optional<double> t_lambda;       // empty: ξ̂ never reached λ ξ0
  double Bstar_t_lambda = 0.0;          // B* at min(t_lambda, final time)
  std::optional<double> t_hat_lambda;   // filled by post-processing
  double final_Bstar = 0.0;
  double path_dt = 0.0;
  ProfileDiagnostics worst_profile;
  double worst_xi_hat_decrease = 0.0;   // max over steps of -Δξ̂ / ξ̂, clipped at 0
  double worst_xi_hat_identity = 0.0;   // |ξ̂ - e^{3t/2-B} ξ| / ξ̂
  double worst_K_identity = 0.0;        // |K - e^{-(p-1)t} ξ^{-q}| / K
  std::int64_t accepted_steps = 0;
  std::int64_t rejected_steps = 0;
};

struct RunResult {
  Parameters params;
  SolverControls controls;
  std::uint64_t seed = 0;
  Trajectory trajectory;
  BlowupReport report;
};

/// NaN, infinity or a negative field value appeared; carries everything
/// computed up to the failing step.
class SolverBreakdown : public NumericalBreakdown {
 public:
  SolverBreakdown(const std::string& what, std::shared_ptr<const RunResult> partial)
      : NumericalBreakdown(what), partial_(std::move(partial)) {}
  const RunResult& partial() const { return *partial_; }

 private:
  std::shared_ptr<const RunResult> partial_;
};

ProfileDiagnostics monitor_lemma21(const ArrayX<double>& v, const RadialGrid<double>& grid,
                                   double gamma, double beta);

/// Operator-split integrator for the transformed radial system.
///
/// One step: implicit Neumann diffusion, then the exact flow of v' = K v^p
/// with K frozen at the step start, then a trapezoid update of the monotone
/// process ξ̂ whose integrand is nonnegative, so ξ̂ never decreases.
class RadialSolver {
 public:
  RadialSolver(const Parameters& params, const SolverControls& controls);

  const Parameters& params() const { return params_; }
  const SolverControls& controls() const { return controls_; }
  const RadialGrid<double>& grid() const { return grid_; }

  RadialState initial_state(const ArrayX<double>& v0) const;
  RadialState initial_state() const;

  /// Advances by `ticks` lattice units; throws StepRejected when a growth cap
  /// is exceeded and NumericalBreakdown on non-finite or negative values.
  RadialState step(const RadialState& state, BrownianPath& path, std::int64_t ticks);

  /// Largest admissible power-of-two tick count for the next step.
  std::int64_t propose_ticks(const RadialState& state, const BrownianPath& path,
                             std::int64_t end_tick) const;

  double reaction_coefficient(double t, double xi) const;

  /// Runs from γ φ (or `v0`) until blowup or the horizon.
  RunResult run(BrownianPath& path, std::uint64_t seed = 0,
                const std::optional<ArrayX<double>>& v0 = std::nullopt);

 private:
  double xi_hat_rate(double t, double B, double mean_vr, double xi_start) const;

  Parameters params_;
  SolverControls controls_;
  RadialGrid<double> grid_;
  RadialDiffusion<double> diffusion_;
};

/// Builds the driving path for a run and integrates it.
RunResult simulate(const Parameters& params, const SolverControls& controls, std::uint64_t seed);

/// First time ξ̂ reaches λ ξ0, interpolated linearly in ξ̂ between samples.
std::optional<double> stopping_time_t_lambda(const Trajectory& traj, const Parameters& params);

/// First time mean(v^β) reaches `level`, interpolated linearly between samples.
std::optional<double> first_time_mean_reaches(const Trajectory& traj, double level);

struct C0Estimate {
  double value = 0.0;
  bool clipped = false;  // a positive slope at z = 1/2 was observed
  std::size_t snapshots_used = 0;
};

/// -max_t (1/2)^{n-1} ∂_z v(1/2, t) over the stored snapshots (t ≤ t_until).
C0Estimate estimate_C0(const Trajectory& traj, int n, double t_until = INFINITY);

/// max |∂_z v| over all nodes and the stored snapshots with t ≤ t_until.
double estimate_C1(const Trajectory& traj, double t_until = INFINITY);

/// Centered slope of a profile at node i (one-sided at the ends).
double slope_at(const ArrayX<double>& v, Eigen::Index i, double h);

}  // namespace shadowgm

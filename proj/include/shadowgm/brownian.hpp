#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace shadowgm {

/// Discrete sample path of a standard one-dimensional Brownian motion with a
/// cached running maximum of |B|.
///
/// Nodes live on a dyadic lattice: time = tick * dt / 2^kLevels, where dt is
/// the spacing of the base nodes. Base values come from Gaussian increments;
/// every other node is filled by a Lévy midpoint construction between its two
/// dyadic parents, with the normal keyed by (seed, tick). Any order of
/// refinement therefore produces the same path, and refinement never changes
/// existing nodes.
class BrownianPath {
 public:
  static constexpr int kLevels = 40;
  static constexpr std::int64_t kTicksPerBase = std::int64_t{1} << kLevels;

  /// Path with base nodes at k * dt holding `base_values` (first must be 0).
  BrownianPath(double dt, std::uint64_t seed, std::vector<double> base_values);

  double base_dt() const { return dt_; }
  double tick_length() const { return tick_; }
  std::uint64_t seed() const { return seed_; }

  std::size_t size() const { return ticks_.size(); }
  std::int64_t end_tick() const { return ticks_.back(); }
  double end_time() const { return time_of_tick(end_tick()); }

  double time(std::size_t k) const { return time_of_tick(ticks_[k]); }
  double value(std::size_t k) const { return values_[k]; }
  double running_max(std::size_t k) const { return running_max_[k]; }
  std::span<const std::int64_t> ticks() const { return ticks_; }
  std::span<const double> values() const { return values_; }

  double time_of_tick(std::int64_t tick) const;
  /// Nearest lattice tick to t.
  std::int64_t nearest_tick(double t) const;
  /// Largest lattice tick at or below t (with a relative tolerance of 1e-12).
  std::int64_t floor_tick(double t) const;

  bool has_tick(std::int64_t tick) const;
  /// Value at a lattice tick, inserting the node (and its dyadic ancestors) if absent.
  double value_at_tick(std::int64_t tick);
  /// Discrete max of |B| over nodes up to and including `tick`.
  double running_max_at_tick(std::int64_t tick) const;

 private:
  std::size_t insert(std::int64_t tick);
  void refresh_running_max(std::size_t from);

  double dt_;
  double tick_;
  std::uint64_t seed_;
  std::vector<std::int64_t> ticks_;
  std::vector<double> values_;
  std::vector<double> running_max_;
};

/// Path on [0, T] with base spacing dt (the last base node is at ceil(T/dt) dt).
BrownianPath sample_path(double horizon, double dt, std::uint64_t seed);

/// Copy of `path` with a node inserted at the lattice tick nearest to t.
/// Throws DomainError if t is outside (0, end) or already a node.
BrownianPath refine(BrownianPath path, double t);

/// Discrete approximation of sup_{0≤s≤t} |B_s|.
double running_max(const BrownianPath& path, double t);

/// Reflection-principle tail bound
/// P(B*_t ≥ A) ≤ sqrt(t / 2π) (4 / A) exp(-A² / 2t).
double tail_bound(double t, double level);

/// CSV with header `t,B,Bstar`.
void write_path_csv(std::ostream& out, const BrownianPath& path);

}  // namespace shadowgm

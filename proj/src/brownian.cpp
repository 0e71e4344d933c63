#include "shadowgm/brownian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "shadowgm/error.hpp"
#include "shadowgm/io.hpp"
#include "shadowgm/rng.hpp"

namespace shadowgm {

BrownianPath::BrownianPath(double dt, std::uint64_t seed, std::vector<double> base_values)
    : dt_(dt), tick_(std::ldexp(dt, -kLevels)), seed_(seed), values_(std::move(base_values)) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("path spacing must be positive");
  if (values_.size() < 2) throw DomainError("path needs at least two base nodes");
  if (values_.front() != 0.0) throw DomainError("Brownian path must start at 0");
  ticks_.resize(values_.size());
  for (std::size_t k = 0; k < ticks_.size(); ++k)
    ticks_[k] = static_cast<std::int64_t>(k) * kTicksPerBase;
  running_max_.resize(values_.size());
  refresh_running_max(0);
}

double BrownianPath::time_of_tick(std::int64_t tick) const {
  const std::int64_t base = tick >> kLevels;
  const std::int64_t frac = tick & (kTicksPerBase - 1);
  return static_cast<double>(base) * dt_ + static_cast<double>(frac) * tick_;
}

std::int64_t BrownianPath::nearest_tick(double t) const {
  return static_cast<std::int64_t>(std::llround(t / tick_));
}

std::int64_t BrownianPath::floor_tick(double t) const {
  return static_cast<std::int64_t>(std::floor(t / tick_ * (1.0 + 1e-12)));
}

bool BrownianPath::has_tick(std::int64_t tick) const {
  return std::binary_search(ticks_.begin(), ticks_.end(), tick);
}

double BrownianPath::value_at_tick(std::int64_t tick) {
  return values_[insert(tick)];
}

double BrownianPath::running_max_at_tick(std::int64_t tick) const {
  if (tick < 0 || tick > end_tick()) throw DomainError("running max requested outside the path");
  const auto it = std::upper_bound(ticks_.begin(), ticks_.end(), tick);
  return running_max_[static_cast<std::size_t>(it - ticks_.begin()) - 1];
}

std::size_t BrownianPath::insert(std::int64_t tick) {
  if (tick < 0 || tick > end_tick()) throw DomainError("refinement outside the path span");
  auto it = std::lower_bound(ticks_.begin(), ticks_.end(), tick);
  if (it != ticks_.end() && *it == tick) return static_cast<std::size_t>(it - ticks_.begin());

  // Non-base ticks have a lowest set bit below kLevels; the parents sit one
  // such step to either side and are strictly coarser.
  const std::int64_t half_width = tick & -tick;
  const double left = values_[insert(tick - half_width)];
  const double right = values_[insert(tick + half_width)];
  const double variance = 0.5 * static_cast<double>(half_width) * tick_;
  const double z = rng::normal(seed_, rng::kBridgeStream, static_cast<std::uint64_t>(tick));
  const double value = 0.5 * (left + right) + std::sqrt(variance) * z;

  it = std::lower_bound(ticks_.begin(), ticks_.end(), tick);
  const auto pos = static_cast<std::size_t>(it - ticks_.begin());
  ticks_.insert(it, tick);
  values_.insert(values_.begin() + static_cast<std::ptrdiff_t>(pos), value);
  running_max_.insert(running_max_.begin() + static_cast<std::ptrdiff_t>(pos), 0.0);
  refresh_running_max(pos);
  return pos;
}

void BrownianPath::refresh_running_max(std::size_t from) {
  double current = from == 0 ? 0.0 : running_max_[from - 1];
  for (std::size_t k = from; k < values_.size(); ++k) {
    const double next = std::max(current, std::abs(values_[k]));
    if (k > from && next == running_max_[k]) break;  // suffix already consistent
    running_max_[k] = next;
    current = next;
  }
}

BrownianPath sample_path(double horizon, double dt, std::uint64_t seed) {
  if (!(horizon > 0.0) || !(dt > 0.0)) throw DomainError("sample_path needs T > 0 and dt > 0");
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt * (1.0 - 1e-12)));
  std::vector<double> values(steps + 1, 0.0);
  const double scale = std::sqrt(dt);
  for (std::size_t k = 1; k <= steps; ++k)
    values[k] = values[k - 1] + scale * rng::normal(seed, rng::kIncrementStream, k);
  return BrownianPath(dt, seed, std::move(values));
}

BrownianPath refine(BrownianPath path, double t) {
  if (!(t > 0.0) || !(t < path.end_time())) throw DomainError("refine: t outside (0, end)");
  const std::int64_t tick = path.nearest_tick(t);
  if (path.has_tick(tick)) throw DomainError("refine: t is already a node");
  path.value_at_tick(tick);
  return path;
}

double running_max(const BrownianPath& path, double t) {
  if (!(t >= 0.0) || t > path.end_time() * (1.0 + 1e-12))
    throw DomainError("running_max: t outside the path span");
  return path.running_max_at_tick(std::min(path.floor_tick(t), path.end_tick()));
}

double tail_bound(double t, double level) {
  if (!(t > 0.0) || !(level > 0.0)) throw DomainError("tail_bound needs t > 0 and A > 0");
  return std::sqrt(t) / std::sqrt(2.0 * std::numbers::pi) * (4.0 / level) *
         std::exp(-level * level / (2.0 * t));
}

void write_path_csv(std::ostream& out, const BrownianPath& path) {
  out << "t,B,Bstar\n";
  for (std::size_t k = 0; k < path.size(); ++k)
    out << io::fmt(path.time(k)) << ',' << io::fmt(path.value(k)) << ','
        << io::fmt(path.running_max(k)) << '\n';
}

}  // namespace shadowgm

#include "shadowgm/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "shadowgm/rng.hpp"

namespace shadowgm {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void parallel_for(std::size_t count, int threads, const std::vector<std::size_t>& order,
                  const std::function<void(std::size_t)>& fn) {
  if (!order.empty() && order.size() != count) throw DomainError("order size mismatch");
  auto item = [&](std::size_t k) { return order.empty() ? k : order[k]; };
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || count <= 1) {
    for (std::size_t k = 0; k < count; ++k) fn(item(k));
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t k = next++; k < count; k = next++) {
      try {
        fn(item(k));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, count); ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<std::size_t> shuffled_order(std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 gen(seed);
  std::shuffle(order.begin(), order.end(), gen);
  return order;
}

SolverControls resolve_beta(const Parameters& params, SolverControls controls, bool automatic) {
  if (!automatic) return controls;
  const Parameters prm = validate(params);
  controls.beta = prm.blowup_regime ? select_beta_k(prm).beta : 1.0;
  return controls;
}

double PathRecord::T_b() const { return check.blew_up ? check.T_b_hi : kInf; }

namespace {

void fill_from_run(PathRecord& rec, const RunResult& run, const BrownianPath& path,
                   const BoundCheckOptions& check) {
  rec.check = bound_check_per_path(run, path, check);
  rec.final_Bstar = run.report.final_Bstar;
  rec.worst_profile = run.report.worst_profile.worst();
  rec.worst_xi_hat_decrease = run.report.worst_xi_hat_decrease;
  rec.accepted_steps = run.report.accepted_steps;
  rec.rejected_steps = run.report.rejected_steps;
}

}  // namespace

PathOutcome run_path(const Parameters& params, const SolverControls& controls,
                     std::uint64_t seed, const BoundCheckOptions& check) {
  PathOutcome out;
  PathRecord& rec = out.record;
  rec.seed = seed;
  rec.gamma = params.gamma;
  RadialSolver solver(params, controls);
  out.path = sample_path(std::max(controls.horizon, check.window), controls.path_dt, seed);
  BrownianPath& path = *out.path;
  try {
    out.run = solver.run(path, seed);
  } catch (const SolverBreakdown& e) {
    out.run = e.partial();
    fill_from_run(rec, out.run, path, check);
    rec.error = e.what();
    rec.check.verdict = Verdict::breakdown;
    return out;
  }
  fill_from_run(rec, out.run, path, check);
  try {
    const auto d = stopping_time_diagnostics(out.run);
    if (d.reached_t_lambda && out.run.params.blowup_regime) {
      rec.reached_t_lambda = true;
      rec.t_hat_lambda = d.t_hat_lambda;
      out.run.report.t_hat_lambda = d.t_hat_lambda;
      rec.t_hat_bound = d.t_hat_bound.value;
      rec.h_star_margin = d.h_star_margin;
      rec.envelope_ratio = d.envelope_worst_ratio;
      rec.C0 = d.C0.value;
    }
  } catch (const DomainError&) {
    // The run tracked a β other than the selected one; no stopping-time diagnostics.
  }
  return out;
}

double median(std::vector<double> values) {
  std::erase_if(values, [](double x) { return std::isnan(x); });
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  if (values.size() % 2 == 1) return values[m];
  return 0.5 * (values[m - 1] + values[m]);
}

EnsembleAggregates aggregate(const std::vector<PathRecord>& rows, const Parameters& params,
                             double window) {
  const Parameters prm = validate(params);
  EnsembleAggregates a;
  a.paths = rows.size();
  std::vector<double> T_b;
  std::vector<double> bounds;
  for (const auto& r : rows) {
    if (r.check.blew_up) ++a.blew_up;
    switch (r.check.verdict) {
      case Verdict::satisfied: ++a.satisfied; break;
      case Verdict::violated: ++a.violated; break;
      case Verdict::inconclusive: ++a.inconclusive; break;
      case Verdict::breakdown: ++a.breakdowns; break;
      case Verdict::not_applicable: break;
    }
    if (r.check.applicable && r.check.verdict != Verdict::breakdown) {
      ++a.applicable;
      bounds.push_back(r.check.bound);
    }
    T_b.push_back(r.T_b());
  }
  if (a.paths > 0) a.fraction_blew_up = double(a.blew_up) / double(a.paths);
  a.fraction_satisfied = a.applicable > 0 ? double(a.satisfied) / double(a.applicable) : 1.0;
  a.median_T_b = T_b.empty() ? kInf : median(T_b);
  a.median_bound = bounds.empty() ? kInf : median(bounds);

  ProbabilityAggregate& c = a.probability;
  c.theta0 = window;
  const auto pb = probability_bound_cor32(window, prm.gamma, prm.lambda, prm.xi0, prm.p, prm.q, prm.n);
  c.A0 = pb.A0;
  c.bound = pb.bound;
  c.vacuous = pb.vacuous;
  c.cap = prm.delta * prm.delta / (2.0 * prm.n) * std::pow(1.0 + prm.alpha / 2.0, 1.0 - prm.p);
  for (const auto& r : rows)
    if (r.T_b() <= c.cap) ++c.within_cap;
  if (a.paths > 0) {
    c.fraction = double(c.within_cap) / double(a.paths);
    if (!c.vacuous) c.sigma = std::sqrt(c.bound * (1.0 - c.bound) / double(a.paths));
  }
  c.holds = c.vacuous || c.fraction >= c.bound - 3.0 * c.sigma;
  return a;
}

EnsembleStats run_ensemble(const Parameters& params, const SolverControls& controls,
                           const EnsembleOptions& options) {
  if (options.paths < 1) throw DomainError("ensemble needs at least one path");
  const Parameters prm = validate(params);
  EnsembleStats stats;
  stats.rows.resize(options.paths);
  const auto order = options.shuffle ? shuffled_order(options.paths, options.base_seed)
                                     : std::vector<std::size_t>{};
  parallel_for(options.paths, options.threads, order, [&](std::size_t i) {
    PathRecord rec =
        run_path(prm, controls, rng::derive_seed(options.base_seed, i), options.check).record;
    rec.index = i;
    stats.rows[i] = std::move(rec);
  });
  stats.aggregates = aggregate(stats.rows, prm, options.check.window);
  if (!(aggregate(stats.rows, prm, options.check.window) == stats.aggregates))
    throw NumericalBreakdown("ensemble aggregates are not reproducible from the rows");
  return stats;
}

GammaSweep gamma_sweep(const Parameters& params, const SolverControls& controls,
                       const std::vector<double>& gammas, const EnsembleOptions& options) {
  GammaSweep sweep;
  if (gammas.empty()) return sweep;
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    if (!(gammas[i] > 0.0)) throw DomainError("gammas must be positive");
    if (i > 0 && !(gammas[i] > gammas[i - 1])) throw DomainError("gammas must be increasing");
  }
  const Parameters base = validate(params);
  sweep.fixed_K = K_theta(base.p, base.q, base.lambda, base.xi0, options.check.window, 0.0);
  for (double g : gammas) {
    Parameters prm = base;
    prm.gamma = g;
    const auto stats = run_ensemble(prm, controls, options);
    GammaSweepRow row;
    row.gamma = g;
    row.median_T_b = stats.aggregates.median_T_b;
    row.median_bound = stats.aggregates.median_bound;
    row.fixed_K_bound =
        blowup_bound_thm31(g, sweep.fixed_K, base.p, base.delta, base.alpha, base.n).value;
    row.blew_up = stats.aggregates.blew_up;
    row.paths = stats.aggregates.paths;
    sweep.rows.push_back(row);
  }
  for (std::size_t i = 1; i < sweep.rows.size(); ++i) {
    const auto& a = sweep.rows[i - 1];
    const auto& b = sweep.rows[i];
    if (b.median_T_b > a.median_T_b) sweep.T_b_non_increasing = false;
    if (b.median_bound > a.median_bound) sweep.bound_non_increasing = false;
  }
  if (sweep.rows.size() >= 2) {
    const auto& a = sweep.rows[sweep.rows.size() - 2];
    const auto& b = sweep.rows.back();
    sweep.top_decade_slope =
        std::log(b.fixed_K_bound / a.fixed_K_bound) / std::log(b.gamma / a.gamma);
    const double target = -(base.p - 1.0);
    sweep.slope_ok = std::abs(sweep.top_decade_slope - target) <= 0.1 * std::abs(target);
  }
  return sweep;
}

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) throw DomainError("Wilson interval needs at least one trial");
  const double n = double(trials);
  const double phat = double(successes) / n;
  const double z2 = z * z;
  const double centre = (phat + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = z / (1.0 + z2 / n) * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

std::vector<TailRow> tail_check(const std::vector<double>& t_values,
                                const std::vector<double>& A_values, std::size_t paths,
                                std::uint64_t base_seed, double dt, int threads, bool shuffle) {
  if (paths < 1) throw DomainError("tail_check needs at least one path");
  if (!(dt > 0.0)) throw DomainError("tail_check needs dt > 0");
  for (double t : t_values)
    if (!(t > 0.0)) throw DomainError("tail_check times must be positive");
  for (double A : A_values)
    if (!(A > 0.0)) throw DomainError("tail_check levels must be positive");
  if (t_values.empty() || A_values.empty()) return {};

  const double horizon = *std::max_element(t_values.begin(), t_values.end());
  const std::size_t cells = t_values.size() * A_values.size();
  // One byte per (path, t, A) keeps the tally independent of the schedule.
  std::vector<std::uint8_t> hits(paths * cells, 0);
  const auto order = shuffle ? shuffled_order(paths, base_seed) : std::vector<std::size_t>{};
  parallel_for(paths, threads, order, [&](std::size_t i) {
    const BrownianPath path = sample_path(horizon, dt, rng::derive_seed(base_seed, i));
    std::size_t c = 0;
    for (double t : t_values) {
      const double m = running_max(path, t);
      for (double A : A_values) hits[i * cells + c++] = m >= A ? 1 : 0;
    }
  });

  std::vector<TailRow> rows;
  std::size_t c = 0;
  for (double t : t_values) {
    for (double A : A_values) {
      TailRow row;
      row.t = t;
      row.A = A;
      row.paths = paths;
      for (std::size_t i = 0; i < paths; ++i) row.exceed += hits[i * cells + c];
      row.frequency = double(row.exceed) / double(paths);
      std::tie(row.ci_lo, row.ci_hi) = wilson_interval(row.exceed, paths, kZ99);
      row.bound = tail_bound(t, A);
      row.resolved = row.ci_hi <= row.bound;
      row.pass = row.resolved || row.exceed == 0;
      rows.push_back(row);
      ++c;
    }
  }
  return rows;
}

}  // namespace shadowgm

#include "shadowgm/bounds.hpp"

#include <algorithm>

namespace shadowgm {

const char* to_string(ExponentConvention c) {
  return c == ExponentConvention::stated ? "stated" : "derived";
}

ExponentConvention parse_exponent_convention(const std::string& s) {
  if (s == "stated") return ExponentConvention::stated;
  if (s == "derived") return ExponentConvention::derived;
  throw ConfigError("unknown exponent convention '" + s + "'");
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::satisfied: return "satisfied";
    case Verdict::violated: return "violated";
    case Verdict::not_applicable: return "not_applicable";
    case Verdict::inconclusive: return "inconclusive";
    case Verdict::breakdown: return "breakdown";
  }
  return "unknown";
}

BetaK select_beta_k(const Parameters& params) {
  const Parameters prm = validate(params);
  if (!prm.blowup_regime)
    throw InfeasibleSelection("beta/k selection needs p >= r and (p-1)/r > 2/(n+2)");
  const double n = prm.n;
  const double need = prm.r + 1.0 - prm.p;
  const double upper = std::min(1.0, 0.499 * n * (prm.p - 1.0));
  double beta = std::min(std::max(need, 0.01 * std::min(1.0, n * (prm.p - 1.0) / 2.0)), upper);
  if (beta < need) {
    if (need < n * (prm.p - 1.0) / 2.0 && need <= 1.0)
      beta = need;
    else
      throw InfeasibleSelection("no beta in (0, 1] with n(p-1) > 2 beta >= 2(r+1-p)");
  }
  const double k = 0.5 * (1.0 + 2.0 * beta / n + prm.p);
  BetaK out{beta,
            k,
            n * (prm.p - 1.0) - 2.0 * beta,
            2.0 * beta - 2.0 * need,
            n * (k - 1.0) - 2.0 * beta,
            prm.p - k};
  if (!(beta > 0.0 && beta <= 1.0 && out.margin_dimension > 0.0 && out.margin_reaction >= 0.0 &&
        out.margin_k_lower > 0.0 && out.margin_k_upper > 0.0 && k > 1.0))
    throw InfeasibleSelection("selected (beta, k) violates its constraints");
  return out;
}

namespace {

void check_beta(const BoundInputs& in) {
  const auto& prm = in.params;
  if (!(in.beta > 0.0 && in.beta <= 1.0)) throw DomainError("beta must lie in (0, 1]");
  if (prm.p + in.beta - 1.0 < prm.r) throw DomainError("beta must satisfy p + beta - 1 >= r");
}

void check_k_ell(const BoundInputs& in) {
  check_beta(in);
  if (!(in.k > 1.0 && in.k < in.params.p)) throw DomainError("k must lie in (1, p)");
  if (!(in.ell >= in.k / in.beta)) throw DomainError("ell must be at least k / beta");
}

}  // namespace

HStar h_star_lambda(const BoundInputs& in) {
  check_beta(in);
  const auto& prm = in.params;
  const double jump = in.beta * (prm.lambda - 1.0) * std::pow(prm.lambda, -prm.q) *
                      std::pow(prm.gamma, in.beta + prm.p - 1.0 - prm.r) *
                      std::pow(prm.xi0, prm.s - prm.q + 1.0);
  const double decay = std::exp(-prm.p * in.t_lambda - (prm.s + prm.q + 1.0) *
                                                           (1.5 * in.t_lambda + in.Bstar_t_lambda));
  HStar out{in.h0 + jump * decay, in.h0 + jump};
  if (!(out.value <= out.cap)) throw NumericalBreakdown("h*_lambda exceeds its cap");
  return out;
}

EpsStar eps_star(const BoundInputs& in) {
  check_k_ell(in);
  const auto& prm = in.params;
  const double n = prm.n;
  EpsStar out{};
  out.terms[0] = prm.alpha * std::pow(1.0 + prm.alpha / 2.0, -in.k) * std::pow(in.h0, in.ell);
  out.terms[1] = std::pow(2.0, -in.ell * n + n) * in.C0 *
                 std::pow(prm.gamma, in.beta * in.ell - in.k);
  out.terms[2] = (prm.p - in.k) * std::pow(prm.gamma, prm.p + in.ell - in.k) /
                 (2.0 * in.k * std::pow(prm.lambda * prm.xi0, prm.q)) *
                 std::exp(-(prm.p - 1.0) * in.t_lambda - prm.q * in.Bstar_t_lambda);
  const auto it = std::min_element(std::begin(out.terms), std::end(out.terms));
  out.value = *it;
  out.active_term = static_cast<int>(it - std::begin(out.terms)) + 1;
  return out;
}

double L_lemma45(const BoundInputs& in, double R, double h_star) {
  if (!(R > 0.0 && R < 1.0)) throw DomainError("R must lie in (0, 1)");
  check_beta(in);
  const auto& prm = in.params;
  const double n = prm.n;
  const double b = in.beta;
  return in.C1 * n * b * std::pow(R, n - 1.0) * std::pow(prm.gamma, b - 1.0) +
         in.C1 * in.C1 * b * (1.0 - b) * std::pow(prm.gamma, b - 2.0) +
         b * std::pow(prm.xi0, -prm.q) *
             std::exp(1.5 * prm.q * in.t_lambda + prm.q * in.Bstar_t_lambda) *
             std::pow(h_star / std::pow(R, n), (b + prm.p - 1.0) / b);
}

double t_hat_R_grid(int i) {
  return std::pow(10.0, -4.0 * (1.0 - double(i) / double(kTHatGridSize)));
}

double t_hat_bound_at(const BoundInputs& in, double R, double h_star, double eps) {
  const double n = in.params.n;
  const double km1 = in.k - 1.0;
  const double power = in.convention == ExponentConvention::stated ? 1.0 / km1
                                                                            : in.beta / km1;
  const double e = n - 2.0 * in.beta / km1;
  const double h1 = n * std::pow(2.0 * std::pow(h_star, in.ell) / (eps * km1), power) *
                    std::pow(R, e) / e;
  return (h_star - in.h0 - h1) / L_lemma45(in, R, h_star);
}

THatBound t_hat_lower_bound(const BoundInputs& in) {
  check_k_ell(in);
  const double h_star = h_star_lambda(in).value;
  const double eps = eps_star(in).value;
  THatBound out;
  for (int i = 0; i < kTHatGridSize; ++i) {
    const double R = t_hat_R_grid(i);
    const double value = t_hat_bound_at(in, R, h_star, eps);
    if (value > out.value) {
      out.value = value;
      out.R_used = R;
      out.positive = true;
    }
  }
  if (out.positive) {
    out.L = L_lemma45(in, out.R_used, h_star);
    out.numerator = out.value * out.L;
  }
  return out;
}

PathVerdict bound_check_per_path(const RunResult& run, const BrownianPath& path,
                                 const BoundCheckOptions& options) {
  const Parameters& prm = run.params;
  const BlowupReport& rep = run.report;
  PathVerdict out;
  out.t_lambda = rep.t_lambda;
  out.theta = rep.t_lambda ? std::min(*rep.t_lambda, options.window) : options.window;
  out.case_i = !rep.t_lambda || *rep.t_lambda >= options.window;
  out.blew_up = rep.blew_up;
  out.T_b_lo = rep.t_lo;
  out.T_b_hi = rep.t_hi;
  out.final_time = rep.final_time;
  out.path_dt = path.base_dt();

  if (!(out.theta > 0.0)) {
    // ξ̂ starts at or above λ ξ0 only for λ ≤ 1, which validation excludes.
    out.verdict = Verdict::not_applicable;
    return out;
  }
  out.Bstar_theta = running_max(path, out.theta);
  out.K_theta = K_theta(prm.p, prm.q, prm.lambda, prm.xi0, out.theta, out.Bstar_theta);
  const auto cond = gamma_condition(prm.gamma, out.K_theta, prm.p, prm.n);
  out.gamma_margin = cond.margin;
  const auto bound = blowup_bound_thm31(prm.gamma, out.K_theta, prm.p, prm.delta, prm.alpha, prm.n);
  out.applicable = bound.applicable;
  out.bound = bound.value;
  out.cap = bound.cap;
  if (!out.applicable) {
    out.verdict = Verdict::not_applicable;
    return out;
  }
  const double limit = out.bound * (1.0 + options.allowance);
  if (rep.blew_up)
    out.verdict = rep.t_hi <= limit ? Verdict::satisfied : Verdict::violated;
  else
    out.verdict = rep.final_time >= limit ? Verdict::violated : Verdict::inconclusive;
  return out;
}

namespace {

double interpolate_h(const Trajectory& traj, double t) {
  const auto& s = traj.samples;
  if (t <= s.front().t) return s.front().mean_vbeta;
  for (std::size_t k = 1; k < s.size(); ++k) {
    if (s[k].t >= t) {
      const double w = (t - s[k - 1].t) / (s[k].t - s[k - 1].t);
      return s[k - 1].mean_vbeta + w * (s[k].mean_vbeta - s[k - 1].mean_vbeta);
    }
  }
  return s.back().mean_vbeta;
}

}  // namespace

StoppingTimeDiagnostics stopping_time_diagnostics(const RunResult& run, ExponentConvention convention) {
  const Parameters& prm = run.params;
  const BlowupReport& rep = run.report;
  const Trajectory& traj = run.trajectory;
  StoppingTimeDiagnostics d;
  const double stop = rep.blew_up ? rep.t_lo : rep.final_time;
  d.reached_t_lambda = rep.t_lambda.has_value() && *rep.t_lambda <= stop;
  if (!d.reached_t_lambda || !prm.blowup_regime) return d;

  const BetaK bk = select_beta_k(prm);
  if (bk.beta != run.controls.beta)
    throw DomainError("run tracked mean(v^beta) with a beta other than the selected one");

  BoundInputs& in = d.inputs;
  in.params = prm;
  in.h0 = traj.samples.front().mean_vbeta;
  in.beta = bk.beta;
  in.k = bk.k;
  in.ell = bk.k / bk.beta;
  in.t_lambda = *rep.t_lambda;
  in.Bstar_t_lambda = rep.Bstar_t_lambda;
  in.convention = convention;

  d.h_star = h_star_lambda(in);
  d.t_hat_lambda = first_time_mean_reaches(traj, d.h_star.value);
  const double t_hat = d.t_hat_lambda.value_or(in.t_lambda);

  d.C0 = estimate_C0(traj, prm.n, t_hat);
  in.C0 = d.C0.value;
  in.C0_source = "solver-estimate";
  in.C1 = estimate_C1(traj, t_hat);
  in.C1_source = "solver-estimate";

  d.eps = eps_star(in);
  d.t_hat_bound = t_hat_lower_bound(in);
  d.t_hat_bound_holds = !d.t_hat_lambda || *d.t_hat_lambda >= d.t_hat_bound.value;

  d.h_at_t_lambda = interpolate_h(traj, in.t_lambda);
  d.h_star_margin = (d.h_at_t_lambda - d.h_star.value) / d.h_star.value;

  const auto grid = make_radial_grid<double>(traj.z.size() - 1, prm.n);
  const double km1 = in.k - 1.0;
  for (const auto& snap : traj.snapshots) {
    if (snap.t > t_hat) continue;
    const double h = mean_power(snap.v, in.beta, grid);
    const double amp = std::pow(2.0 * std::pow(h, in.ell) / (d.eps.value * km1), 1.0 / km1);
    for (Eigen::Index i = 1; i < traj.z.size() && traj.z(i) <= 0.5; ++i) {
      const double envelope = amp * std::pow(traj.z(i), -2.0 / km1);
      d.envelope_worst_ratio = std::max(d.envelope_worst_ratio, snap.v(i) / envelope);
      ++d.envelope_points;
    }
  }
  return d;
}

}  // namespace shadowgm

#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "shadowgm/brownian.hpp"
#include "shadowgm/error.hpp"
#include "shadowgm/model.hpp"
#include "shadowgm/solver.hpp"

namespace shadowgm {

// Blowup-time estimates on a window [0, θ] on which ξ̂ stays below λ ξ0.

/// (λ ξ0)^{-q} exp(-(p-1) θ - q B*_θ): lower bound of K(t) on [0, θ].
template <typename Scalar>
Scalar K_theta(Scalar p, Scalar q, Scalar lambda, Scalar xi0, Scalar theta, Scalar Bstar) {
  using std::exp;
  using std::pow;
  if (!(theta > Scalar(0))) throw DomainError("K_theta needs theta > 0");
  if (!(Bstar >= Scalar(0))) throw DomainError("K_theta needs B* >= 0");
  return pow(lambda * xi0, -q) * exp(-(p - Scalar(1)) * theta - q * Bstar);
}

template <typename Scalar>
struct GammaCondition {
  Scalar margin;  // γ^{p-1} K_θ - 4n/(p-1)
  bool holds;     // margin > 0
};

template <typename Scalar>
GammaCondition<Scalar> gamma_condition(Scalar gamma, Scalar k_theta, Scalar p, int n) {
  using std::pow;
  const Scalar margin = pow(gamma, p - Scalar(1)) * k_theta - Scalar(4 * n) / (p - Scalar(1));
  return {margin, margin > Scalar(0)};
}

/// Blowup time of the pure-reaction lower solution started from γ φ(z):
/// inner branch on [0, δ], 2 γ^{1-p} z² / (K_θ (p-1)) on (δ, 1).
template <typename Scalar>
Scalar tau_profile(Scalar z, Scalar gamma, Scalar k_theta, Scalar p, Scalar alpha, Scalar delta) {
  using std::pow;
  if (!(z >= Scalar(0) && z < Scalar(1))) throw DomainError("tau_profile: z outside [0, 1)");
  const Scalar scale = Scalar(2) / (k_theta * (p - Scalar(1))) * pow(gamma, Scalar(1) - p);
  if (z > delta) return scale * (z * z);
  const Scalar ratio = z / delta;
  const Scalar bracket = Scalar(1) + (Scalar(1) - ratio * ratio) * (alpha / Scalar(2));
  return scale * pow(bracket, Scalar(1) - p) * (delta * delta);
}

template <typename Scalar>
struct BlowupBound {
  Scalar value;     // τ(0)
  Scalar cap;       // δ² / (2n) (1 + α/2)^{1-p}
  bool applicable;  // gamma condition holds
};

template <typename Scalar>
BlowupBound<Scalar> blowup_bound_thm31(Scalar gamma, Scalar k_theta, Scalar p, Scalar delta,
                                       Scalar alpha, int n) {
  using std::pow;
  const Scalar value = tau_profile(Scalar(0), gamma, k_theta, p, alpha, delta);
  const Scalar cap = delta * delta / Scalar(2 * n) * pow(Scalar(1) + alpha / Scalar(2), Scalar(1) - p);
  const bool applicable = gamma_condition(gamma, k_theta, p, n).holds;
  if (applicable && !(value < cap))
    throw NumericalBreakdown("blowup bound is not below its cap although the gamma condition holds");
  return {value, cap, applicable};
}

template <typename Scalar>
struct ProbabilityBound {
  Scalar A0;
  Scalar bound;  // 1 - tail
  Scalar tail;   // tail_bound(θ0, A0) when A0 > 0
  bool vacuous;  // A0 <= 0 or bound <= 0
};

/// Lower bound on P(T_b ≤ δ²/(2n) (1+α/2)^{1-p}) when θ ≤ θ0 almost surely.
template <typename Scalar>
ProbabilityBound<Scalar> probability_bound_cor32(Scalar theta0, Scalar gamma, Scalar lambda,
                                                 Scalar xi0, Scalar p, Scalar q, int n) {
  using std::exp;
  using std::log;
  using std::pow;
  using std::sqrt;
  if (!(theta0 > Scalar(0))) throw DomainError("theta0 must be positive");
  const Scalar A0 = log((p - Scalar(1)) * pow(gamma, p - Scalar(1)) /
                        (Scalar(4 * n) * pow(lambda * xi0, q))) / q -
                    (p - Scalar(1)) / q * theta0;
  if (!(A0 > Scalar(0))) return {A0, -std::numeric_limits<Scalar>::infinity(),
                                 std::numeric_limits<Scalar>::infinity(), true};
  const Scalar tail = sqrt(theta0) / sqrt(Scalar(2) * std::numbers::pi_v<Scalar>) *
                      (Scalar(4) / A0) * exp(-A0 * A0 / (Scalar(2) * theta0));
  const Scalar bound = Scalar(1) - tail;
  return {A0, bound, tail, !(bound > Scalar(0))};
}

// Lower bound on the time t̂_λ at which h = mean(v^β) reaches h*_λ.

/// Power on the envelope constant in the subtracted term: 1/(k-1) (stated) or
/// β/(k-1) (derived). They agree at β = 1.
enum class ExponentConvention { stated, derived };
const char* to_string(ExponentConvention c);
ExponentConvention parse_exponent_convention(const std::string& s);

struct BetaK {
  double beta;
  double k;
  // Each margin is positive (or zero for the non-strict one) when satisfied.
  double margin_dimension;  // n(p-1) - 2β
  double margin_reaction;   // 2β - 2(r+1-p), non-strict
  double margin_k_lower;    // n(k-1) - 2β
  double margin_k_upper;    // p - k
};

/// Picks β ∈ (0, 1] and k ∈ (1, p) with n(p-1) > 2β ≥ 2(r+1-p) and n(k-1) > 2β.
BetaK select_beta_k(const Parameters& params);

struct BoundInputs {
  Parameters params;      // validated
  double h0 = 0.0;        // mean(v0^β)
  double beta = 1.0;
  double k = 1.5;
  double ell = 1.5;       // ℓ ≥ k/β
  double t_lambda = 0.0;
  double Bstar_t_lambda = 0.0;
  double C0 = 0.0;
  double C1 = 0.0;
  std::string C0_source = "input";
  std::string C1_source = "input";
  ExponentConvention convention = ExponentConvention::stated;
};

struct HStar {
  double value;
  double cap;  // value at t_λ = 0, B* = 0
};

HStar h_star_lambda(const BoundInputs& in);

struct EpsStar {
  double value;
  int active_term;  // 1, 2 or 3
  double terms[3];
};

EpsStar eps_star(const BoundInputs& in);

double L_lemma45(const BoundInputs& in, double R, double h_star);

struct THatBound {
  double value = 0.0;     // 0 when no R gives a positive bound
  double R_used = 0.0;
  bool positive = false;
  double numerator = 0.0;  // at R_used
  double L = 0.0;          // at R_used
};

/// R grid 10^{-4(1-i/64)}, i = 0..63.
double t_hat_R_grid(int i);
inline constexpr int kTHatGridSize = 64;

/// Bound at a single R.
double t_hat_bound_at(const BoundInputs& in, double R, double h_star, double eps);

THatBound t_hat_lower_bound(const BoundInputs& in);

// Per-path checks.

struct BoundCheckOptions {
  double window = 1.0;     // θ = min(t_λ, window)
  double allowance = 0.05; // relative slack on the bound for discretization
};

enum class Verdict { satisfied, violated, not_applicable, inconclusive, breakdown };
const char* to_string(Verdict v);

struct PathVerdict {
  double theta = 0.0;
  double Bstar_theta = 0.0;
  double path_dt = 0.0;
  double K_theta = 0.0;
  double gamma_margin = 0.0;
  bool applicable = false;
  double bound = 0.0;
  double cap = 0.0;
  bool blew_up = false;
  double T_b_lo = 0.0;
  double T_b_hi = 0.0;
  double final_time = 0.0;
  std::optional<double> t_lambda;
  bool case_i = false;  // t_λ ≥ window
  Verdict verdict = Verdict::inconclusive;
};

/// Compares the realized blowup bracket with the bound on the window
/// θ = min(t_λ, window), using the discrete B*_θ of the driving path.
PathVerdict bound_check_per_path(const RunResult& run, const BrownianPath& path,
                                 const BoundCheckOptions& options = {});

struct StoppingTimeDiagnostics {
  bool reached_t_lambda = false;
  BoundInputs inputs;
  HStar h_star{0.0, 0.0};
  EpsStar eps{0.0, 0, {0.0, 0.0, 0.0}};
  std::optional<double> t_hat_lambda;  // realized
  THatBound t_hat_bound;
  C0Estimate C0;
  double h_at_t_lambda = 0.0;
  double h_star_margin = 0.0;         // (h(t_λ) - h*_λ) / h*_λ
  double envelope_worst_ratio = 0.0;    // max v / envelope over z ≤ 1/2, t ≤ t̂_λ
  std::size_t envelope_points = 0;
  bool t_hat_bound_holds = true;       // realized t̂_λ ≥ bound
};

/// Evaluates every t̂_λ quantity on a finished run with solver-estimated C0, C1.
StoppingTimeDiagnostics stopping_time_diagnostics(const RunResult& run,
                                         ExponentConvention convention =
                                             ExponentConvention::stated);

}  // namespace shadowgm

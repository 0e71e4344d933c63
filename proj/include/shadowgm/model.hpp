#pragma once

#include <cmath>

#include "shadowgm/error.hpp"
#include "shadowgm/radial.hpp"

namespace shadowgm {

/// Relative slack applied to the strict inequalities of the admissibility and
/// blowup-regime tests so that boundary cases are not accepted by round-off.
inline constexpr double kStrictSlack = 1e-12;

/// Exponents and knobs of the stochastic shadow Gierer-Meinhardt system
///   u_t = Δu - u + u^p / ξ^q,   dξ = (-ξ + mean(u^r) / ξ^s) dt + ξ dB
/// on the unit ball with Neumann data, started from v_0 = γ φ.
struct Parameters {
  double p = 2.0;
  double q = 1.0;
  double r = 2.0;
  double s = 0.0;
  int n = 3;
  double delta = 0.5;   // corner of the initial profile
  double gamma = 100.0; // amplitude of the initial profile
  double xi0 = 1.0;     // ξ(0)
  double lambda = 2.0;  // stopping level λ ξ0
  double alpha = 0.0;   // 2 / (p - 1); filled by validate()
  bool blowup_regime = false;

  bool operator==(const Parameters&) const = default;
};

/// Checks domains and admissibility, fills `alpha` and `blowup_regime`.
/// Throws DomainError or AdmissibilityViolation. Idempotent.
Parameters validate(const Parameters& raw);

// Initial profile φ and its derivatives. Outer branch z^{-α} on [δ, 1],
// inner parabola δ^{-α}(1 + α/2) - (α/2) δ^{-α-2} z^2 on [0, δ).

template <typename Scalar>
struct PhiJet {
  Scalar value;
  Scalar slope;
  Scalar curvature;
};

template <typename Scalar>
PhiJet<Scalar> phi_outer_jet(Scalar z, Scalar alpha) {
  using std::pow;
  const Scalar zpow = pow(z, -alpha);
  return {zpow, -alpha * zpow / z, alpha * (alpha + Scalar(1)) * zpow / (z * z)};
}

template <typename Scalar>
PhiJet<Scalar> phi_inner_jet(Scalar z, Scalar delta, Scalar alpha) {
  using std::pow;
  const Scalar corner = pow(delta, -alpha);
  const Scalar scale = corner / (delta * delta);  // δ^{-α-2}
  const Scalar half = alpha / Scalar(2);
  return {corner * (Scalar(1) + half) - half * scale * z * z, -alpha * scale * z,
          -alpha * scale};
}

template <typename Scalar>
PhiJet<Scalar> phi_jet(Scalar z, Scalar delta, Scalar alpha) {
  if (!(z >= Scalar(0) && z <= Scalar(1))) throw DomainError("phi: z outside [0, 1]");
  return z >= delta ? phi_outer_jet(z, alpha) : phi_inner_jet(z, delta, alpha);
}

template <typename Scalar>
Scalar phi(Scalar z, Scalar delta, Scalar alpha) {
  return phi_jet(z, delta, alpha).value;
}

/// γ φ sampled on the grid nodes.
ArrayX<double> initial_profile(const Parameters& params, const RadialGrid<double>& grid);

/// Outcome of checking φ'' + ((n-1)/z) φ' + α n φ^p ≥ 0 on the interior nodes.
struct PhiInequalityReport {
  double min_margin = 0.0;
  double min_relative_margin = 0.0;  // margin / (|φ''| + |(n-1)φ'/z| + α n φ^p)
  double argmin_z = 0.0;
  double margin_left_of_delta = 0.0;   // inner branch evaluated at z = δ
  double margin_right_of_delta = 0.0;  // outer branch evaluated at z = δ
  double value_mismatch = 0.0;         // relative, at z = δ
  double slope_mismatch = 0.0;         // relative, at z = δ
  Eigen::Index nodes_checked = 0;
};

PhiInequalityReport verify_phi_inequality(const Parameters& params,
                                          const RadialGrid<double>& grid);

inline double u_from_v(double v, double t) { return std::exp(-t) * v; }
inline double v_from_u(double u, double t) { return std::exp(t) * u; }

}  // namespace shadowgm

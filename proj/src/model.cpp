#include "shadowgm/model.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace shadowgm {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

double margin_at(const PhiJet<double>& jet, double z, const Parameters& prm) {
  const double n = prm.n;
  return jet.curvature + (n - 1.0) / z * jet.slope + prm.alpha * n * std::pow(jet.value, prm.p);
}

}  // namespace

Parameters validate(const Parameters& raw) {
  Parameters prm = raw;
  for (double x : {prm.p, prm.q, prm.r, prm.s, prm.delta, prm.gamma, prm.xi0, prm.lambda})
    require(std::isfinite(x), "parameters must be finite");
  require(prm.p > 1.0, "p must exceed 1");
  require(prm.q > 0.0, "q must be positive");
  require(prm.r > 0.0, "r must be positive");
  require(prm.s >= 0.0, "s must be non-negative");
  require(prm.n >= 1, "dimension n must be at least 1");
  require(prm.delta > 0.0 && prm.delta < 1.0, "delta must lie in (0, 1)");
  require(prm.gamma > 0.0, "gamma must be positive");
  require(prm.xi0 > 0.0, "xi0 must be positive");
  require(prm.lambda > 1.0, "lambda must exceed 1");

  const double ratio = (prm.p - 1.0) / prm.r;
  const double ceiling = prm.q / (prm.s + 1.0);
  if (!(ratio < ceiling * (1.0 - kStrictSlack)))
    throw AdmissibilityViolation("(p-1)/r = " + std::to_string(ratio) +
                                 " is not strictly below q/(s+1) = " + std::to_string(ceiling));

  prm.alpha = 2.0 / (prm.p - 1.0);
  const double critical = 2.0 / (prm.n + 2.0);
  prm.blowup_regime = prm.p >= prm.r && ratio > critical * (1.0 + kStrictSlack);
  return prm;
}

ArrayX<double> initial_profile(const Parameters& params, const RadialGrid<double>& grid) {
  return grid.nodes.unaryExpr(
      [&](double z) { return params.gamma * phi(z, params.delta, params.alpha); });
}

PhiInequalityReport verify_phi_inequality(const Parameters& params,
                                          const RadialGrid<double>& grid) {
  const Parameters prm = validate(params);
  PhiInequalityReport rep;
  rep.min_margin = std::numeric_limits<double>::infinity();
  rep.min_relative_margin = std::numeric_limits<double>::infinity();

  const double n = prm.n;
  for (Eigen::Index i = 1; i < grid.cells(); ++i) {
    const double z = grid.nodes(i);
    const auto jet = phi_jet(z, prm.delta, prm.alpha);
    const double reaction = prm.alpha * n * std::pow(jet.value, prm.p);
    const double margin = margin_at(jet, z, prm);
    const double scale =
        std::abs(jet.curvature) + std::abs((n - 1.0) / z * jet.slope) + reaction;
    if (margin < rep.min_margin) {
      rep.min_margin = margin;
      rep.argmin_z = z;
    }
    rep.min_relative_margin = std::min(rep.min_relative_margin, margin / scale);
    ++rep.nodes_checked;
  }

  const auto inner = phi_inner_jet(prm.delta, prm.delta, prm.alpha);
  const auto outer = phi_outer_jet(prm.delta, prm.alpha);
  rep.margin_left_of_delta = margin_at(inner, prm.delta, prm);
  rep.margin_right_of_delta = margin_at(outer, prm.delta, prm);
  rep.value_mismatch = std::abs(inner.value - outer.value) / std::abs(outer.value);
  rep.slope_mismatch = std::abs(inner.slope - outer.slope) / std::abs(outer.slope);
  return rep;
}

}  // namespace shadowgm

#pragma once

#include <Eigen/Core>

#include <cmath>
#include <string>

#include "shadowgm/error.hpp"

namespace shadowgm {

template <typename Scalar>
using ArrayX = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

/// Uniform radial grid on [0, 1] for isotropic fields on the unit ball of R^n.
///
/// Node i owns the shell [z_{i-1/2}, z_{i+1/2}] clipped to [0, 1]. Its weight is
/// the exact normalized ball measure of that shell, so `weights` integrates
/// against n z^{n-1} dz, sums to one, and pairs with the flux-form operator in
/// RadialDiffusion so that Neumann diffusion conserves the weighted mean.
template <typename Scalar>
struct RadialGrid {
  int dimension = 1;
  Scalar spacing = Scalar(1);
  ArrayX<Scalar> nodes;        // N + 1 nodes, z_0 = 0, z_N = 1
  ArrayX<Scalar> weights;      // N + 1 shell measures
  ArrayX<Scalar> conductance;  // N faces: n z_{i+1/2}^{n-1} / h

  Eigen::Index cells() const { return nodes.size() - 1; }
  Eigen::Index size() const { return nodes.size(); }
};

template <typename Scalar = double>
RadialGrid<Scalar> make_radial_grid(Eigen::Index cells, int dimension) {
  if (cells < 2) throw DomainError("radial grid needs at least two cells");
  if (dimension < 1) throw DomainError("dimension must be at least 1");

  RadialGrid<Scalar> g;
  g.dimension = dimension;
  g.spacing = Scalar(1) / Scalar(cells);
  g.nodes = ArrayX<Scalar>::NullaryExpr(
      cells + 1, [cells](Eigen::Index i) { return Scalar(i) / Scalar(cells); });

  const Scalar n = Scalar(dimension);
  ArrayX<Scalar> faces = ArrayX<Scalar>::NullaryExpr(cells, [cells](Eigen::Index i) {
    return (Scalar(2 * i + 1)) / Scalar(2 * cells);
  });
  ArrayX<Scalar> measure = faces.pow(n);

  g.weights.resize(cells + 1);
  g.weights(0) = measure(0);
  for (Eigen::Index i = 1; i < cells; ++i) g.weights(i) = measure(i) - measure(i - 1);
  g.weights(cells) = Scalar(1) - measure(cells - 1);

  g.conductance = n * faces.pow(n - Scalar(1)) / g.spacing;
  return g;
}

/// Mean of v^m over the unit ball, i.e. \f$\int_0^1 v^m n z^{n-1} dz\f$.
template <typename Derived>
typename Derived::Scalar mean_power(const Eigen::ArrayBase<Derived>& v,
                                    typename Derived::Scalar m,
                                    const RadialGrid<typename Derived::Scalar>& grid) {
  using Scalar = typename Derived::Scalar;
  if (v.size() != grid.size()) throw DomainError("field size does not match grid");
  if (m < Scalar(0)) throw DomainError("mean_power exponent must be non-negative");
  if (v.minCoeff() < Scalar(-1e-14))
    throw DomainError("mean_power of a field with negative entries");
  if (m == Scalar(1)) return (grid.weights * v.derived().max(Scalar(0))).sum();
  return (grid.weights * v.derived().max(Scalar(0)).pow(m)).sum();
}

/// Implicit Neumann diffusion for the radial Laplacian
/// \f$\partial_z^2 v + \frac{n-1}{z}\partial_z v\f$ in flux form
/// \f$(L v)_i = (F_{i+1/2} - F_{i-1/2}) / w_i\f$, \f$F_{i+1/2} = c_{i+1/2}(v_{i+1} - v_i)\f$.
///
/// At the origin this reduces to 2n(v_1 - v_0)/h^2. The matrix I - dt L is an
/// M-matrix with unit row sums, so the minimum and the ordering of a
/// non-increasing profile are preserved.
template <typename Scalar>
class RadialDiffusion {
 public:
  explicit RadialDiffusion(const RadialGrid<Scalar>& grid)
      : lower_rate_(grid.size()), upper_rate_(grid.size()),
        c_prime_(grid.size()), d_prime_(grid.size()) {
    const Eigen::Index N = grid.cells();
    lower_rate_.setZero();
    upper_rate_.setZero();
    for (Eigen::Index i = 0; i < N; ++i) upper_rate_(i) = grid.conductance(i) / grid.weights(i);
    for (Eigen::Index i = 1; i <= N; ++i)
      lower_rate_(i) = grid.conductance(i - 1) / grid.weights(i);
  }

  /// Applies the discrete operator L (no time stepping).
  ArrayX<Scalar> apply(const ArrayX<Scalar>& v) const {
    const Eigen::Index n = v.size();
    ArrayX<Scalar> out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      Scalar acc(0);
      if (i > 0) acc += lower_rate_(i) * (v(i - 1) - v(i));
      if (i + 1 < n) acc += upper_rate_(i) * (v(i + 1) - v(i));
      out(i) = acc;
    }
    return out;
  }

  /// Overwrites v with the solution of (I - dt L) x = v (Thomas algorithm).
  void solve_implicit(Scalar dt, Eigen::Ref<ArrayX<Scalar>> v) {
    const Eigen::Index n = v.size();
    auto diag = [&](Eigen::Index i) {
      return Scalar(1) + dt * (lower_rate_(i) + upper_rate_(i));
    };
    Scalar m = diag(0);
    c_prime_(0) = -dt * upper_rate_(0) / m;
    d_prime_(0) = v(0) / m;
    for (Eigen::Index i = 1; i < n; ++i) {
      const Scalar a = -dt * lower_rate_(i);
      m = diag(i) - a * c_prime_(i - 1);
      c_prime_(i) = (i + 1 < n) ? -dt * upper_rate_(i) / m : Scalar(0);
      d_prime_(i) = (v(i) - a * d_prime_(i - 1)) / m;
    }
    v(n - 1) = d_prime_(n - 1);
    for (Eigen::Index i = n - 2; i >= 0; --i) v(i) = d_prime_(i) - c_prime_(i) * v(i + 1);
  }

 private:
  ArrayX<Scalar> lower_rate_;
  ArrayX<Scalar> upper_rate_;
  ArrayX<Scalar> c_prime_;
  ArrayX<Scalar> d_prime_;
};

}  // namespace shadowgm

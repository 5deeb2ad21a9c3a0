#pragma once

#include <Eigen/LU>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <utility>

#include "opinf/core.hpp"
#include "opinf/tensor_ops.hpp"

namespace opinf {

/// Uniform periodic 1-D grid with points w_i = i * dw, i = 0..n-1.
struct Grid1D {
  Index n = 0;
  double length = 0.0;
  double dw = 0.0;

  static Grid1D uniform(Index n, double length) {
    if (n < 4) throw std::invalid_argument("Grid1D: n >= 4 required");
    if (!(length > 0)) throw std::invalid_argument("Grid1D: length > 0 required");
    return Grid1D{n, length, length / static_cast<double>(n)};
  }

  Vector points() const {
    Vector w(n);
    for (Index i = 0; i < n; ++i) w(i) = static_cast<double>(i) * dw;
    return w;
  }
};

/// Linear-quadratic ODE dx/dt = A x + F vech(x x^T).
struct QuadraticModel {
  Matrix A;
  QuadOpCompact F;
  Index dim = 0;
};

/// Paired state / time-derivative trajectory samples.
struct SnapshotSet {
  Matrix states;  // n x K
  Matrix derivs;  // n x K
  Vector times;   // K, spacing stride * dt_sim
  double dt_sim = 0.0;
  Index stride = 1;
  std::map<std::string, double> ic_params;
};

enum class TimeScheme { SemiImplicitEuler, CrankNicolsonAB2 };

namespace detail {

/// Skew-symmetric split discretization of the convection term -x x_w on a
/// periodic grid:
///   N_i = -(1/3) [ x_i (x_{i+1} - x_{i-1}) + (x_{i+1}^2 - x_{i-1}^2) ] / (2 dw).
/// The two telescoping sums cancel exactly, so x^T N(x) = 0 for every x and
/// ep_violation of the assembled operator is zero in floating point (all
/// coefficients are +-c and +-c/2 for a single c).
inline QuadOpCompact convection_quadratic(const Grid1D& grid) {
  const Index n = grid.n;
  QuadOpCompact f{Matrix::Zero(n, vech_len(n)), n};
  const double c = 1.0 / (6.0 * grid.dw);
  for (Index i = 0; i < n; ++i) {
    const Index ip = (i + 1) % n;
    const Index im = (i + n - 1) % n;
    f.entries(i, vech_index(n, std::max(i, ip), std::min(i, ip))) -= c;
    f.entries(i, vech_index(n, std::max(i, im), std::min(i, im))) += c;
    f.entries(i, vech_index(n, ip, ip)) -= c;
    f.entries(i, vech_index(n, im, im)) += c;
  }
  return f;
}

}  // namespace detail

/// Viscous Burgers on a periodic grid: A is the circulant [1,-2,1] second
/// difference scaled by mu/dw^2; F is the skew-symmetric split convection.
inline QuadraticModel assemble_burgers(const Grid1D& grid, double mu) {
  if (!(mu > 0)) throw std::invalid_argument("assemble_burgers: mu > 0 required");
  if (grid.n < 4) throw std::invalid_argument("assemble_burgers: n >= 4 required");
  const Index n = grid.n;
  const double s = mu / (grid.dw * grid.dw);
  Matrix a = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    a(i, i) += -2.0 * s;
    a(i, (i + 1) % n) += s;
    a(i, (i + n - 1) % n) += s;
  }
  return {std::move(a), detail::convection_quadratic(grid), n};
}

/// Kuramoto-Sivashinsky: A = -(D2 + mu D4) with central [1,-2,1] and
/// [1,-4,6,-4,1] stencils; the quadratic term matches Burgers' convection.
inline QuadraticModel assemble_kse(const Grid1D& grid, double mu) {
  if (!(mu > 0)) throw std::invalid_argument("assemble_kse: mu > 0 required");
  if (grid.n < 6) throw std::invalid_argument("assemble_kse: n >= 6 required");
  const Index n = grid.n;
  const double s2 = 1.0 / (grid.dw * grid.dw);
  const double s4 = mu / (grid.dw * grid.dw * grid.dw * grid.dw);
  Matrix a = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    a(i, i) += -(-2.0 * s2 + 6.0 * s4);
    a(i, (i + 1) % n) += -(s2 - 4.0 * s4);
    a(i, (i + n - 1) % n) += -(s2 - 4.0 * s4);
    a(i, (i + 2) % n) += -s4;
    a(i, (i + n - 2) % n) += -s4;
  }
  return {std::move(a), detail::convection_quadratic(grid), n};
}

/// x(w, 0) = A sin(2 pi f w + phi).
inline Vector burgers_ic(const Grid1D& grid, double amplitude, Index frequency,
                         double phase) {
  if (frequency < 1) throw std::invalid_argument("burgers_ic: frequency >= 1");
  Vector x(grid.n);
  for (Index i = 0; i < grid.n; ++i)
    x(i) = amplitude *
           std::sin(2.0 * std::numbers::pi * static_cast<double>(frequency) *
                        (static_cast<double>(i) * grid.dw) +
                    phase);
  return x;
}

/// x(w, 0) = a cos(2 pi w / L) + b cos(4 pi w / L).
inline Vector kse_ic(const Grid1D& grid, double a, double b) {
  Vector x(grid.n);
  for (Index i = 0; i < grid.n; ++i) {
    const double w = static_cast<double>(i) * grid.dw;
    x(i) = a * std::cos(2.0 * std::numbers::pi * w / grid.length) +
           b * std::cos(4.0 * std::numbers::pi * w / grid.length);
  }
  return x;
}

namespace detail {

inline Eigen::PartialPivLU<Matrix> factor_shifted(const Matrix& a, double scale,
                                                  const char* who) {
  const Index n = a.rows();
  Eigen::PartialPivLU<Matrix> lu(Matrix::Identity(n, n) - scale * a);
  const double rc = lu.rcond();
  if (!(rc > 1e-14))
    throw NumericalError(std::string(who) +
                         ": shifted linear operator numerically singular"
                         " (rcond = " +
                         std::to_string(rc) + ")");
  return lu;
}

}  // namespace detail

/// One step of the semi-implicit Euler scheme:
///   (I - dt A) x+ = x + dt q(x).
/// The factorization of (I - dt A) is computed once at construction and
/// reused across steps.
class SemiImplicitEulerStepper {
 public:
  SemiImplicitEulerStepper(const QuadraticModel& model, double dt)
      : lu_(detail::factor_shifted(model.A, dt, "semi-implicit Euler")),
        quad_(model.F),
        dt_(dt) {
    if (!(dt > 0)) throw std::invalid_argument("stepper: dt > 0 required");
  }

  Vector step(const Vector& x) const { return lu_.solve(x + dt_ * quad_.apply(x)); }

  const QuadEvaluator& quadratic() const { return quad_; }

 private:
  Eigen::PartialPivLU<Matrix> lu_;
  QuadEvaluator quad_;
  double dt_;
};

/// One step of Crank-Nicolson (linear) + 2nd-order Adams-Bashforth
/// (quadratic):
///   (I - dt/2 A) x+ = (I + dt/2 A) x + dt (3/2 q(x) - 1/2 q_prev).
/// Returns (x+, q(x)); the caller threads q(x) into the next step.
class CrankNicolsonAB2Stepper {
 public:
  CrankNicolsonAB2Stepper(const QuadraticModel& model, double dt)
      : lu_(detail::factor_shifted(model.A, 0.5 * dt, "CN/AB2")),
        plus_(Matrix::Identity(model.dim, model.dim) + 0.5 * dt * model.A),
        quad_(model.F),
        dt_(dt) {
    if (!(dt > 0)) throw std::invalid_argument("stepper: dt > 0 required");
  }

  std::pair<Vector, Vector> step(const Vector& x, const Vector& q_prev) const {
    Vector q = quad_.apply(x);
    Vector xp = lu_.solve(plus_ * x + dt_ * (1.5 * q - 0.5 * q_prev));
    return {std::move(xp), std::move(q)};
  }

  const QuadEvaluator& quadratic() const { return quad_; }

 private:
  Eigen::PartialPivLU<Matrix> lu_;
  Matrix plus_;
  QuadEvaluator quad_;
  double dt_;
};

/// Single-step conveniences; repeated stepping should construct a stepper
/// once instead.
inline Vector step_semi_implicit_euler(const QuadraticModel& model, const Vector& x,
                                       double dt) {
  return SemiImplicitEulerStepper(model, dt).step(x);
}

inline std::pair<Vector, Vector> step_cnab2(const QuadraticModel& model, const Vector& x,
                                            const Vector& q_prev, double dt) {
  return CrankNicolsonAB2Stepper(model, dt).step(x, q_prev);
}

/// Integrate from x0 over [0, T], storing every stride-th state including
/// t = 0.  Derivative columns are exact right-hand-side evaluations at the
/// stored states.  The first CN/AB2 step bootstraps with q_prev = q(x0).
inline SnapshotSet simulate(const QuadraticModel& model, const Vector& x0, double dt,
                            double T, Index stride, TimeScheme scheme) {
  if (!(T > 0)) throw std::invalid_argument("simulate: T > 0 required");
  if (stride < 1) throw std::invalid_argument("simulate: stride >= 1 required");
  if (x0.size() != model.dim)
    throw std::invalid_argument("simulate: initial state length mismatch");
  const auto steps = static_cast<Index>(std::llround(T / dt));
  if (steps < 1) throw std::invalid_argument("simulate: T/dt below one step");
  const Index cols = steps / stride + 1;

  SnapshotSet out;
  out.states.resize(model.dim, cols);
  out.derivs.resize(model.dim, cols);
  out.times.resize(cols);
  out.dt_sim = dt;
  out.stride = stride;

  QuadEvaluator quad(model.F);
  const auto rhs = [&](const Vector& x) -> Vector { return model.A * x + quad.apply(x); };
  const auto store = [&](Index col, Index step, const Vector& x) {
    out.states.col(col) = x;
    out.derivs.col(col) = rhs(x);
    out.times(col) = static_cast<double>(step) * dt;
  };

  Vector x = x0;
  store(0, 0, x);
  Index col = 1;

  if (scheme == TimeScheme::SemiImplicitEuler) {
    SemiImplicitEulerStepper stepper(model, dt);
    for (Index s = 1; s <= steps; ++s) {
      x = stepper.step(x);
      if (!x.allFinite())
        throw NumericalError("simulate: non-finite state at step " + std::to_string(s));
      if (s % stride == 0) store(col++, s, x);
    }
  } else {
    CrankNicolsonAB2Stepper stepper(model, dt);
    Vector q_prev = stepper.quadratic().apply(x);
    for (Index s = 1; s <= steps; ++s) {
      auto [xp, q] = stepper.step(x, q_prev);
      x = std::move(xp);
      q_prev = std::move(q);
      if (!x.allFinite())
        throw NumericalError("simulate: non-finite state at step " + std::to_string(s));
      if (s % stride == 0) store(col++, s, x);
    }
  }
  return out;
}

/// Replace exact-RHS derivatives with finite differences on the stored
/// states: central in the interior, one-sided at the ends.  For data-only
/// workflows where the right-hand side is treated as unknown.
inline void finite_difference_derivatives(SnapshotSet& snaps) {
  const Index cols = snaps.states.cols();
  if (cols < 2)
    throw std::invalid_argument("finite_difference_derivatives: need >= 2 columns");
  const double h = static_cast<double>(snaps.stride) * snaps.dt_sim;
  Matrix d(snaps.states.rows(), cols);
  d.col(0) = (snaps.states.col(1) - snaps.states.col(0)) / h;
  for (Index c = 1; c + 1 < cols; ++c)
    d.col(c) = (snaps.states.col(c + 1) - snaps.states.col(c - 1)) / (2.0 * h);
  d.col(cols - 1) = (snaps.states.col(cols - 1) - snaps.states.col(cols - 2)) / h;
  snaps.derivs = std::move(d);
}

}  // namespace opinf

#pragma once

#include <Eigen/SVD>
#include <vector>

#include "opinf/core.hpp"
#include "opinf/pde_models.hpp"

namespace opinf {

/// POD basis from the thin SVD of the concatenated snapshot matrix.  V holds
/// the leading r_max left singular vectors with a fixed sign convention;
/// sigma is the full singular-value spectrum for energy reporting.
struct PODBasis {
  Matrix V;      // n x r_max, orthonormal columns
  Vector sigma;  // full spectrum, nonincreasing
  Index n = 0;
  Index r_max = 0;
};

/// Snapshot data projected to the leading r coordinates.
struct ReducedData {
  Matrix states;  // r x K_total
  Matrix derivs;  // r x K_total
  Index r = 0;
};

namespace detail {

inline Matrix concat_states(const std::vector<SnapshotSet>& sets, bool derivs) {
  if (sets.empty()) throw std::invalid_argument("POD: no snapshot sets");
  const Index n = sets.front().states.rows();
  Index total = 0;
  for (const auto& s : sets) {
    if (s.states.rows() != n)
      throw std::invalid_argument("POD: snapshot sets disagree on state dimension");
    total += s.states.cols();
  }
  Matrix out(n, total);
  Index at = 0;
  for (const auto& s : sets) {
    const Matrix& m = derivs ? s.derivs : s.states;
    out.middleCols(at, m.cols()) = m;
    at += m.cols();
  }
  return out;
}

}  // namespace detail

/// Thin SVD of the horizontally concatenated states.  Columns are
/// sign-normalized so the largest-magnitude entry of each basis vector is
/// positive, making downstream operator entries reproducible.  Fails if
/// r_max exceeds the numerical rank at tolerance 1e-12 * sigma_1.
inline PODBasis compute_pod(const std::vector<SnapshotSet>& sets, Index r_max) {
  if (r_max < 1) throw std::invalid_argument("compute_pod: r_max >= 1 required");
  Matrix x = detail::concat_states(sets, false);
  if (x.cols() < r_max)
    throw std::invalid_argument("compute_pod: fewer columns than r_max");
  Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinU);
  Vector sigma = svd.singularValues();
  Index rank = 0;
  const double tol = 1e-12 * (sigma.size() > 0 ? sigma(0) : 0.0);
  for (Index i = 0; i < sigma.size(); ++i)
    if (sigma(i) > tol) ++rank;
  if (r_max > rank)
    throw NumericalError("compute_pod: requested r_max " + std::to_string(r_max) +
                         " exceeds numerical rank " + std::to_string(rank) +
                         " (tolerance 1e-12 * sigma_1)");
  Matrix v = svd.matrixU().leftCols(r_max);
  for (Index c = 0; c < v.cols(); ++c) {
    Index imax;
    v.col(c).cwiseAbs().maxCoeff(&imax);
    if (v(imax, c) < 0) v.col(c) = -v.col(c);
  }
  return {std::move(v), std::move(sigma), x.rows(), r_max};
}

/// Fraction of squared singular-value mass beyond the first r modes:
/// sum_{i>r} sigma_i^2 / sum_i sigma_i^2.
inline double energy_lost(const Vector& sigma, Index r) {
  if (r < 0 || r > sigma.size())
    throw std::invalid_argument("energy_lost: r out of [0, len(sigma)]");
  const double total = sigma.squaredNorm();
  if (total == 0.0) throw std::invalid_argument("energy_lost: all-zero spectrum");
  return sigma.tail(sigma.size() - r).squaredNorm() / total;
}

/// Complement of energy_lost; the quantity usually quoted as "captured
/// energy".
inline double energy_retained(const Vector& sigma, Index r) {
  return 1.0 - energy_lost(sigma, r);
}

/// Reduced coordinates over the concatenated sets, preserving set order then
/// time order.
inline ReducedData project(const PODBasis& basis, const std::vector<SnapshotSet>& sets,
                           Index r) {
  if (r < 1 || r > basis.r_max) throw std::invalid_argument("project: r out of range");
  Matrix x = detail::concat_states(sets, false);
  Matrix xd = detail::concat_states(sets, true);
  if (x.rows() != basis.n) throw std::invalid_argument("project: dimension mismatch");
  const auto vr = basis.V.leftCols(r);
  return {vr.transpose() * x, vr.transpose() * xd, r};
}

}  // namespace opinf

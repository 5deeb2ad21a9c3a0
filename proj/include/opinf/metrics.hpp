#pragma once

#include <cmath>
#include <vector>

#include "opinf/core.hpp"

namespace opinf {

/// Full trajectory, its reduced counterpart, and the basis that links them.
struct TrajectoryPair {
  Matrix full_states;     // n x K
  Matrix reduced_states;  // r x K
  Matrix basis;           // n x r
};

/// Average over trajectories of ||X - V Xr||_F^2 / ||X||_F^2, the relative
/// error of the reduced trajectory reconstructed in full space.
inline double relative_state_error(const std::vector<TrajectoryPair>& pairs) {
  if (pairs.empty()) throw std::invalid_argument("relative_state_error: empty list");
  double total = 0.0;
  for (const auto& p : pairs) {
    if (p.full_states.cols() != p.reduced_states.cols() ||
        p.basis.rows() != p.full_states.rows() ||
        p.basis.cols() != p.reduced_states.rows())
      throw std::invalid_argument("relative_state_error: inconsistent shapes");
    const double denom = p.full_states.squaredNorm();
    if (denom == 0.0)
      throw std::invalid_argument("relative_state_error: zero-norm full trajectory");
    total += (p.full_states - p.basis * p.reduced_states).squaredNorm() / denom;
  }
  return total / static_cast<double>(pairs.size());
}

enum class SeriesSource { Full, Reduced };

/// Normalized sample autocorrelation rho(k) = c_k / c_0 over lags 0..k_max.
struct AutocorrSeries {
  Vector rho;
  Index k_max = 0;
  SeriesSource source = SeriesSource::Full;
  Index constant_rows_excluded = 0;  // set by field_autocorrelation
};

/// Mean-removed biased estimator with 1/T normalization:
///   c_k = (1/T) sum_{t=1}^{T-k} (x(t) - xbar)(x(t+k) - xbar),  rho = c_k/c_0.
/// rho(0) is exactly 1.  A constant series has c_0 = 0 and is rejected.
inline AutocorrSeries sample_autocorrelation(const Vector& series, Index k_max) {
  const Index t_len = series.size();
  if (k_max < 0 || t_len <= k_max)
    throw std::invalid_argument("sample_autocorrelation: need T > k_max >= 0");
  if (series.maxCoeff() == series.minCoeff())
    throw NumericalError("sample_autocorrelation: constant series (zero variance)");
  const double mean = series.mean();
  Vector centered = series.array() - mean;
  Vector c(k_max + 1);
  for (Index k = 0; k <= k_max; ++k)
    c(k) = centered.head(t_len - k).dot(centered.tail(t_len - k)) /
           static_cast<double>(t_len);
  if (c(0) == 0.0)
    throw NumericalError("sample_autocorrelation: zero variance after centering");
  AutocorrSeries out;
  out.k_max = k_max;
  out.rho = c / c(0);
  return out;
}

/// Per-grid-point autocorrelation averaged over space with equal weights.
/// Constant rows carry no signal and are excluded (counted in the result).
inline AutocorrSeries field_autocorrelation(const Matrix& states, Index k_max) {
  if (states.cols() <= k_max)
    throw std::invalid_argument("field_autocorrelation: need K > k_max");
  Vector acc = Vector::Zero(k_max + 1);
  Index used = 0, skipped = 0;
  for (Index i = 0; i < states.rows(); ++i) {
    const Vector row = states.row(i).transpose();
    if (row.maxCoeff() == row.minCoeff()) {
      ++skipped;
      continue;
    }
    acc += sample_autocorrelation(row, k_max).rho;
    ++used;
  }
  if (used == 0)
    throw NumericalError("field_autocorrelation: every grid row is constant");
  AutocorrSeries out;
  out.k_max = k_max;
  out.rho = acc / static_cast<double>(used);
  out.constant_rows_excluded = skipped;
  return out;
}

/// Average normalized autocorrelation error over paired series:
/// (1/J) sum_j ||rho_j - rho_reduced_j||^2 / ||rho_j||^2.
inline double nace(const std::vector<AutocorrSeries>& full,
                   const std::vector<AutocorrSeries>& reduced) {
  if (full.empty() || full.size() != reduced.size())
    throw std::invalid_argument("nace: need equal-length nonempty lists");
  double total = 0.0;
  for (std::size_t j = 0; j < full.size(); ++j) {
    if (full[j].k_max != reduced[j].k_max)
      throw std::invalid_argument("nace: lag grids differ");
    const double denom = full[j].rho.squaredNorm();
    if (denom == 0.0) throw NumericalError("nace: zero-norm full autocorrelation");
    total += (full[j].rho - reduced[j].rho).squaredNorm() / denom;
  }
  return total / static_cast<double>(full.size());
}

}  // namespace opinf

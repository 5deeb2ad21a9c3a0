#pragma once

// Shared test utilities: deterministic random data, energy-preserving
// operator generators, and the penalty-method oracle used to cross-check the
// constrained solver.  Everything here is independent of the KKT path under
// test.

#include <Eigen/QR>
#include <cmath>
#include <vector>

#include "opinf/inference.hpp"
#include "opinf/rng.hpp"
#include "opinf/tensor_ops.hpp"

namespace opinf::testing {

inline Matrix random_matrix(Index rows, Index cols, CounterRng& rng, double lo = -1.0,
                            double hi = 1.0) {
  Matrix m(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) m(r, c) = rng.uniform(lo, hi);
  return m;
}

inline Vector random_vector(Index n, CounterRng& rng, double lo = -1.0, double hi = 1.0) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
  return v;
}

inline Matrix random_orthonormal(Index n, Index r, CounterRng& rng) {
  Matrix a = random_matrix(n, n, rng);
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ();
  return q.leftCols(r);
}

/// Project the compact operator onto the energy-preserving subspace.  The
/// constraint rows have disjoint supports, so one orthogonal projection per
/// row is exact up to rounding.
inline void project_onto_ep(QuadOpCompact& f) {
  const Index r = f.dim;
  const Index q = vech_len(r);
  const ConstraintSystem cons = build_constraint_matrix(r);
  Vector vec(r * q);
  for (Index i = 0; i < r; ++i) vec.segment(i * q, q) = f.entries.row(i).transpose();
  for (Index c = 0; c < cons.matrix.rows(); ++c) {
    double dot = 0.0, nrm2 = 0.0;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(cons.matrix, c); it;
         ++it) {
      dot += it.value() * vec(it.col());
      nrm2 += it.value() * it.value();
    }
    const double scale = dot / nrm2;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(cons.matrix, c); it;
         ++it)
      vec(it.col()) -= scale * it.value();
  }
  for (Index i = 0; i < r; ++i) f.entries.row(i) = vec.segment(i * q, q).transpose();
}

/// Random energy-preserving operator with floating entries (feasible to
/// rounding accuracy).
inline QuadOpCompact random_ep_compact(Index r, CounterRng& rng) {
  QuadOpCompact f{random_matrix(r, vech_len(r), rng), r};
  project_onto_ep(f);
  return f;
}

/// Energy-preserving operator with small-integer entries, so every
/// constraint combination cancels exactly in floating point.  Useful when a
/// test asserts exact (not approximate) preservation.
inline QuadOpCompact exact_ep_compact(Index r, CounterRng& rng) {
  QuadOpCompact f{Matrix::Zero(r, vech_len(r)), r};
  const auto rand_int = [&] { return std::floor(rng.uniform(-8.0, 9.0)); };
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j <= i; ++j)
      for (Index k = 0; k <= j; ++k) {
        if (i == j && j == k) continue;  // f_iii pinned to zero
        if (j == k) {
          // constraint: f_i(jj) + f_j(ij) = 0
          const double a = rand_int();
          f.entries(i, vech_index(r, j, j)) = a;
          f.entries(j, vech_index(r, i, j)) = -a;
        } else if (i == j) {
          // constraint: f_i(ik) + f_k(ii) = 0
          const double a = rand_int();
          f.entries(i, vech_index(r, i, k)) = a;
          f.entries(k, vech_index(r, i, i)) = -a;
        } else {
          // distinct i > j > k: f_i(jk) + f_j(ik) + f_k(ij) = 0, integers
          const double a = rand_int();
          const double b = rand_int();
          f.entries(i, vech_index(r, j, k)) = a;
          f.entries(j, vech_index(r, i, k)) = b;
          f.entries(k, vech_index(r, i, j)) = -(a + b);
        }
      }
  return f;
}

/// Exact-data least-squares system from known reduced operators evaluated at
/// random states.
inline LsqSystem synthetic_system(const Matrix& a_hat, const QuadOpCompact& f_hat,
                                  Index samples, CounterRng& rng) {
  const Index r = a_hat.rows();
  ReducedData data;
  data.r = r;
  data.states = random_matrix(r, samples, rng);
  data.derivs.resize(r, samples);
  for (Index t = 0; t < samples; ++t)
    data.derivs.col(t) = a_hat * data.states.col(t) + eval_quadratic(f_hat, data.states.col(t));
  return assemble_lsq(data);
}

/// Penalty-method oracle for the equality-constrained least squares: solves
/// (G + mu C^T C) z = g over a sweep of penalty weights and Richardson-
/// extrapolates in 1/mu.  Dense, unscaled, and structurally unrelated to the
/// KKT elimination it cross-checks.  Returns the stacked operator matrix
/// O = [A | F] (r x p).
inline Matrix penalty_oracle(const LsqSystem& sys, const ConstraintSystem& cons,
                             double ridge = 0.0) {
  const Index r = sys.r;
  const Index p = sys.data.cols();
  const Index q = vech_len(r);
  const Index m = cons.matrix.rows();

  Matrix gram = sys.data.transpose() * sys.data;
  gram.diagonal().array() += ridge;
  Matrix big_g = Matrix::Zero(r * p, r * p);
  Vector g = Vector::Zero(r * p);
  const Matrix dtr = sys.data.transpose() * sys.rhs;
  for (Index i = 0; i < r; ++i) {
    big_g.block(i * p, i * p, p, p) = gram;
    g.segment(i * p, p) = dtr.col(i);
  }
  Matrix cz = Matrix::Zero(m, r * p);
  for (Index c = 0; c < m; ++c)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(cons.matrix, c); it;
         ++it) {
      const Index block = it.col() / q;
      const Index local = it.col() % q;
      cz(c, block * p + r + local) = it.value();
    }
  const Matrix ctc = cz.transpose() * cz;

  std::vector<double> mus;
  for (double mu = 1e3; mu <= 1e10 * 1.5; mu *= 10.0) mus.push_back(mu);
  std::vector<Vector> solutions;
  for (double mu : mus)
    solutions.push_back(Eigen::LDLT<Matrix>(big_g + mu * ctc).solve(g));

  // z(mu) = z* + c/mu + O(1/mu^2); extrapolate consecutive pairs and keep the
  // pair whose extrapolation has settled.
  Vector best;
  double best_gap = std::numeric_limits<double>::infinity();
  Vector prev;
  for (std::size_t k = 0; k + 1 < mus.size(); ++k) {
    const double m1 = mus[k], m2 = mus[k + 1];
    Vector ext = (m2 * solutions[k + 1] - m1 * solutions[k]) / (m2 - m1);
    if (k > 0) {
      const double gap = (ext - prev).norm();
      if (gap < best_gap) {
        best_gap = gap;
        best = ext;
      }
    }
    prev = ext;
  }

  Matrix o(r, p);
  for (Index i = 0; i < r; ++i) o.row(i) = best.segment(i * p, p).transpose();
  return o;
}

inline Matrix stack_operators(const ReducedModel& m) {
  Matrix o(m.r, m.r + vech_len(m.r));
  o.leftCols(m.r) = m.A_hat;
  o.rightCols(vech_len(m.r)) = m.F_hat.entries;
  return o;
}

}  // namespace opinf::testing

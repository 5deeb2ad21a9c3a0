#pragma once

#include <Eigen/SparseCore>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "opinf/core.hpp"
#include "opinf/rng.hpp"

namespace opinf {

/// Quadratic operator in Kronecker form: n x n^2, acting on x (x) x.
/// Entry h_ijk multiplies x_j * x_k and lives in column kron_index(n, j, k).
struct QuadOpFull {
  Matrix entries;  // n x n^2
  Index dim = 0;
  bool symmetric = false;  // h_ijk == h_ikj guaranteed by the producer
};

/// Quadratic operator in compact form: n x n(n+1)/2, acting on vech(x x^T).
/// Entry f_ijk (j >= k) multiplies x_j * x_k and lives in column
/// vech_index(n, j, k).
struct QuadOpCompact {
  Matrix entries;  // n x n(n+1)/2
  Index dim = 0;
};

/// Linear equality system C * vec(F) = 0 expressing energy preservation of
/// the compact quadratic operator.  vec() is the row-major vectorization of
/// the n x n(n+1)/2 entry matrix.  One row per unordered index triple
/// {i, j, k}; triple_index stores them 0-based with i >= j >= k.
struct ConstraintSystem {
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
  Index dim = 0;
  std::vector<std::array<Index, 3>> triple_index;
};

inline constexpr Index vech_len(Index n) { return n * (n + 1) / 2; }

/// Index map between operator entries and storage columns.  All storage in
/// this library is 0-based; the conventional 1-based formulas are
///   kron:  m = n(k-1) + j,
///   vech:  m = (n - k/2)(k-1) + j   for j >= k,
/// and these two functions are their unique 0-based shifts.  Tested against
/// hand-enumerated columns in the unit suite.
inline Index kron_index(Index n, Index j, Index k) { return n * k + j; }

inline Index vech_index(Index n, Index j, Index k) {
  // requires j >= k
  return k * n - k * (k + 1) / 2 + j;
}

/// x (x) x: entry at kron_index(n, j, k) is x_j * x_k.
inline Vector kron_square(const Vector& x) {
  const Index n = x.size();
  Vector out(n * n);
  for (Index k = 0; k < n; ++k) out.segment(k * n, n) = x(k) * x;
  return out;
}

/// vech(x x^T): entry at vech_index(n, j, k) is x_j * x_k, j >= k.
inline Vector vech_square(const Vector& x) {
  const Index n = x.size();
  Vector out(vech_len(n));
  for (Index k = 0; k < n; ++k)
    out.segment(vech_index(n, k, k), n - k) = x(k) * x.tail(n - k);
  return out;
}

namespace detail {

inline void check_full_dims(const QuadOpFull& h) {
  if (h.entries.rows() != h.dim || h.entries.cols() != h.dim * h.dim)
    throw std::invalid_argument("QuadOpFull: entry matrix shape does not match dim");
}

inline void check_compact_dims(const QuadOpCompact& f) {
  if (f.entries.rows() != f.dim || f.entries.cols() != vech_len(f.dim))
    throw std::invalid_argument("QuadOpCompact: entry matrix shape does not match dim");
}

}  // namespace detail

/// Fold the redundant Kronecker columns: f_ijk = h_ijk + h_ikj for j > k,
/// f_ijj = h_ijj.  Evaluation-equivalent: H (x(x)x) == F vech(x x^T).
inline QuadOpCompact h_to_f(const QuadOpFull& h) {
  detail::check_full_dims(h);
  const Index n = h.dim;
  QuadOpCompact f{Matrix(n, vech_len(n)), n};
  for (Index k = 0; k < n; ++k) {
    f.entries.col(vech_index(n, k, k)) = h.entries.col(kron_index(n, k, k));
    for (Index j = k + 1; j < n; ++j)
      f.entries.col(vech_index(n, j, k)) =
          h.entries.col(kron_index(n, j, k)) + h.entries.col(kron_index(n, k, j));
  }
  return f;
}

/// Expand to the symmetric Kronecker form: off-diagonal mass split evenly,
/// h_ijk = h_ikj = f_ijk / 2.  Exact round-trip under h_to_f.
inline QuadOpFull f_to_h(const QuadOpCompact& f) {
  detail::check_compact_dims(f);
  const Index n = f.dim;
  QuadOpFull h{Matrix::Zero(n, n * n), n, true};
  for (Index k = 0; k < n; ++k) {
    h.entries.col(kron_index(n, k, k)) = f.entries.col(vech_index(n, k, k));
    for (Index j = k + 1; j < n; ++j) {
      Vector half = 0.5 * f.entries.col(vech_index(n, j, k));
      h.entries.col(kron_index(n, j, k)) = half;
      h.entries.col(kron_index(n, k, j)) = half;
    }
  }
  return h;
}

/// F * vech(x x^T).
inline Vector eval_quadratic(const QuadOpCompact& f, const Vector& x) {
  detail::check_compact_dims(f);
  if (x.size() != f.dim)
    throw std::invalid_argument("eval_quadratic: state length does not match operator dim");
  return f.entries * vech_square(x);
}

/// Precomputed nonzero-term list for fast repeated quadratic evaluation.
/// q_i = sum_t w_t x_{j_t} x_{k_t}; O(#terms) per evaluation instead of
/// materializing vech(x x^T).  Built once per simulation or reduction.
class QuadEvaluator {
 public:
  struct Term {
    Index row, j, k;
    double w;
  };

  explicit QuadEvaluator(const QuadOpCompact& f) : n_(f.dim) {
    detail::check_compact_dims(f);
    for (Index k = 0; k < n_; ++k)
      for (Index j = k; j < n_; ++j) {
        const Index col = vech_index(n_, j, k);
        for (Index i = 0; i < n_; ++i)
          if (double w = f.entries(i, col); w != 0.0)
            terms_.push_back({i, j, k, w});
      }
  }

  Index dim() const { return n_; }

  Vector apply(const Vector& x) const {
    Vector q = Vector::Zero(n_);
    for (const Term& t : terms_) q(t.row) += t.w * x(t.j) * x(t.k);
    return q;
  }

  /// Extended-precision accumulation; used where downstream cancellation must
  /// stay below the double rounding of the stored result.
  std::vector<long double> apply_extended(const Vector& x) const {
    std::vector<long double> q(static_cast<std::size_t>(n_), 0.0L);
    for (const Term& t : terms_)
      q[static_cast<std::size_t>(t.row)] +=
          static_cast<long double>(t.w) * x(t.j) * x(t.k);
    return q;
  }

 private:
  Index n_;
  std::vector<Term> terms_;
};

/// Sum of |h_ijk + h_jik + h_kji| over all ordered triples, evaluated on the
/// symmetric Kronecker expansion of F.  Zero exactly when the quadratic term
/// contributes nothing to the energy rate x^T F vech(x x^T) for every x.
/// Entries of the expansion are read on the fly, so no n x n^2 matrix is
/// formed.
inline double ep_violation(const QuadOpCompact& f) {
  detail::check_compact_dims(f);
  const Index n = f.dim;
  const auto h = [&](Index i, Index j, Index k) -> double {
    if (j == k) return f.entries(i, vech_index(n, j, j));
    return 0.5 * f.entries(i, j > k ? vech_index(n, j, k) : vech_index(n, k, j));
  };
  double total = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (Index k = 0; k < n; ++k)
        total += std::abs(h(i, j, k) + h(j, i, k) + h(k, j, i));
  return total;
}

/// Randomized check of x^T F vech(x x^T) == 0: true iff every sampled state
/// satisfies |x^T q(x)| <= tol * ||x||^3.  Deterministic sampling.
inline bool is_energy_preserving(const QuadOpCompact& f, Index samples, double tol) {
  detail::check_compact_dims(f);
  if (samples < 1) throw std::invalid_argument("is_energy_preserving: samples >= 1");
  if (!(tol > 0)) throw std::invalid_argument("is_energy_preserving: tol > 0");
  CounterRng rng(0x45503031u, 17);
  Vector x(f.dim);
  for (Index s = 0; s < samples; ++s) {
    for (Index i = 0; i < f.dim; ++i) x(i) = rng.uniform(-1.0, 1.0);
    const double rate = x.dot(eval_quadratic(f, x));
    const double norm = x.norm();
    if (std::abs(rate) > tol * norm * norm * norm) return false;
  }
  return true;
}

/// Energy-preservation equalities on vec(F), one row per unordered triple
/// {i,j,k}: delta_jk f_ijk + delta_ik f_jik + delta_ij f_kij = 0 with
/// delta_ab = 1 if a == b else 1/2.  Coincident terms accumulate into the
/// same column (two-equal triples yield two unit entries); the fully
/// repeated triple {i,i,i} is stored with unit coefficient.  Row count is
/// r(r+1)(r+2)/6.
inline ConstraintSystem build_constraint_matrix(Index r) {
  if (r < 1) throw std::invalid_argument("build_constraint_matrix: r >= 1");
  const Index q = vech_len(r);
  ConstraintSystem sys;
  sys.dim = r;
  const Index rows = r * (r + 1) * (r + 2) / 6;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(3 * rows));
  Index row = 0;
  const auto var = [&](Index i, Index hi, Index lo) { return i * q + vech_index(r, hi, lo); };
  const auto delta = [](Index a, Index b) { return a == b ? 1.0 : 0.5; };
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j <= i; ++j)
      for (Index k = 0; k <= j; ++k) {
        if (i == j && j == k) {
          trips.emplace_back(row, var(i, i, i), 1.0);
        } else {
          // Accumulate the three delta-weighted terms; with i >= j >= k every
          // referenced pair is already ordered.
          std::array<std::pair<Index, double>, 3> t{{{var(i, j, k), delta(j, k)},
                                                     {var(j, i, k), delta(i, k)},
                                                     {var(k, i, j), delta(i, j)}}};
          for (int a = 0; a < 3; ++a) {
            double w = t[a].second;
            bool dup = false;
            for (int b = 0; b < a; ++b)
              if (t[b].first == t[a].first) dup = true;
            if (dup) continue;
            for (int b = a + 1; b < 3; ++b)
              if (t[b].first == t[a].first) w += t[b].second;
            trips.emplace_back(row, t[a].first, w);
          }
        }
        sys.triple_index.push_back({i, j, k});
        ++row;
      }
  sys.matrix.resize(rows, r * q);
  sys.matrix.setFromTriplets(trips.begin(), trips.end());
  return sys;
}

/// Leading principal subsystem: the r' x r' block of A and the F entries with
/// all of i, j, k < r'.  Every retained constraint row is a parent constraint
/// row, so exact energy preservation survives extraction exactly.
inline std::pair<Matrix, QuadOpCompact> extract_submodel(const Matrix& a_hat,
                                                         const QuadOpCompact& f_hat,
                                                         Index r_prime) {
  detail::check_compact_dims(f_hat);
  const Index r = f_hat.dim;
  if (a_hat.rows() != r || a_hat.cols() != r)
    throw std::invalid_argument("extract_submodel: A must be r x r");
  if (r_prime < 1 || r_prime > r)
    throw std::invalid_argument("extract_submodel: r' out of range");
  QuadOpCompact sub{Matrix(r_prime, vech_len(r_prime)), r_prime};
  for (Index k = 0; k < r_prime; ++k)
    for (Index j = k; j < r_prime; ++j)
      sub.entries.col(vech_index(r_prime, j, k)) =
          f_hat.entries.col(vech_index(r, j, k)).head(r_prime);
  return {a_hat.topLeftCorner(r_prime, r_prime), std::move(sub)};
}

}  // namespace opinf

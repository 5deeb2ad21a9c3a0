#pragma once

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "opinf/core.hpp"
#include "opinf/pde_models.hpp"
#include "opinf/pod.hpp"
#include "opinf/tensor_ops.hpp"

namespace opinf {

/// Least-squares data for operator fitting: row t of `data` is
/// [xhat_t^T, vech(xhat_t xhat_t^T)^T] and row t of `rhs` is xdothat_t^T.
struct LsqSystem {
  Matrix data;  // K_total x (r + r(r+1)/2)
  Matrix rhs;   // K_total x r
  Index r = 0;
  Index sample_count = 0;
};

enum class Provenance { Intrusive, OpInf, EpOpInf };

inline const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::Intrusive: return "intrusive";
    case Provenance::OpInf: return "opinf";
    case Provenance::EpOpInf: return "ep-opinf";
  }
  return "?";
}

struct SolveDiagnostics {
  double residual_fro = 0.0;              // ||D O^T - R||_F on the unscaled data
  double constraint_residual_inf = 0.0;   // ||C vec(F)||_inf
  double cond_estimate = 0.0;             // condition of the scaled matrix solved
  double ridge = 0.0;
  Vector multipliers;                     // KKT multipliers (ep-opinf only)
};

/// Reduced operators [A | F] with provenance and solver diagnostics.
struct ReducedModel {
  Matrix A_hat;
  QuadOpCompact F_hat;
  Index r = 0;
  Provenance provenance = Provenance::OpInf;
  SolveDiagnostics diagnostics;
};

inline QuadraticModel to_quadratic_model(const ReducedModel& m) {
  return {m.A_hat, m.F_hat, m.r};
}

/// Galerkin projection of known full operators: A_hat = V^T A V and the
/// compact quadratic reduced through symmetrized evaluations,
///   F_hat col (j,k) = V^T [ q(v_j + v_k) - q(v_j) - q(v_k) ],  j > k,
///   F_hat col (j,j) = V^T q(v_j),
/// which never materializes the n x n^2 Kronecker operator.  Accumulation in
/// extended precision keeps the projected operator energy-preserving to the
/// rounding of its stored entries when the full operator is.
inline ReducedModel intrusive_reduce(const QuadraticModel& model, const PODBasis& basis,
                                     Index r) {
  if (r < 1 || r > basis.r_max)
    throw std::invalid_argument("intrusive_reduce: r out of range");
  if (model.dim != basis.n)
    throw std::invalid_argument("intrusive_reduce: model/basis dimension mismatch");
  const auto vr = basis.V.leftCols(r);
  const Index n = model.dim;

  ReducedModel out;
  out.r = r;
  out.provenance = Provenance::Intrusive;
  out.A_hat = vr.transpose() * model.A * vr;
  out.F_hat = QuadOpCompact{Matrix(r, vech_len(r)), r};

  QuadEvaluator quad(model.F);
  std::vector<std::vector<long double>> qcol(static_cast<std::size_t>(r));
  for (Index j = 0; j < r; ++j) qcol[static_cast<std::size_t>(j)] = quad.apply_extended(vr.col(j));

  const auto project_col = [&](const std::vector<long double>& q, Index dest) {
    for (Index i = 0; i < r; ++i) {
      long double acc = 0.0L;
      for (Index a = 0; a < n; ++a)
        acc += static_cast<long double>(vr(a, i)) * q[static_cast<std::size_t>(a)];
      out.F_hat.entries(i, dest) = static_cast<double>(acc);
    }
  };

  for (Index j = 0; j < r; ++j) {
    project_col(qcol[static_cast<std::size_t>(j)], vech_index(r, j, j));
    for (Index k = 0; k < j; ++k) {
      std::vector<long double> q = quad.apply_extended(vr.col(j) + vr.col(k));
      for (Index a = 0; a < n; ++a) {
        q[static_cast<std::size_t>(a)] -= qcol[static_cast<std::size_t>(j)][static_cast<std::size_t>(a)];
        q[static_cast<std::size_t>(a)] -= qcol[static_cast<std::size_t>(k)][static_cast<std::size_t>(a)];
      }
      project_col(q, vech_index(r, j, k));
    }
  }
  return out;
}

/// Stack reduced data into the least-squares system min ||D O^T - R||_F.
inline LsqSystem assemble_lsq(const ReducedData& data) {
  const Index r = data.r;
  const Index k_total = data.states.cols();
  if (k_total < 1) throw std::invalid_argument("assemble_lsq: empty data");
  LsqSystem sys;
  sys.r = r;
  sys.sample_count = k_total;
  sys.data.resize(k_total, r + vech_len(r));
  sys.rhs = data.derivs.transpose();
  for (Index t = 0; t < k_total; ++t) {
    sys.data.block(t, 0, 1, r) = data.states.col(t).transpose();
    sys.data.block(t, r, 1, vech_len(r)) = vech_square(data.states.col(t)).transpose();
  }
  return sys;
}

namespace detail {

/// Unit 2-norm column scaling of the data matrix; the solve runs in scaled
/// coordinates and the solution is rescaled afterwards.
struct ColumnScaling {
  Matrix scaled;  // D * diag(s)
  Vector s;       // original solution = s .* scaled solution (per column)
};

inline ColumnScaling scale_columns(const Matrix& d) {
  ColumnScaling cs;
  cs.s.resize(d.cols());
  for (Index c = 0; c < d.cols(); ++c) {
    const double nrm = d.col(c).norm();
    cs.s(c) = nrm > 0.0 ? 1.0 / nrm : 1.0;
  }
  cs.scaled = d * cs.s.asDiagonal();
  return cs;
}

inline double residual_fro(const Matrix& d, const Matrix& o, const Matrix& rhs) {
  return (d * o.transpose() - rhs).norm();
}

inline ReducedModel split_operators(const Matrix& o, Index r, Provenance prov) {
  ReducedModel m;
  m.r = r;
  m.provenance = prov;
  m.A_hat = o.leftCols(r);
  m.F_hat = QuadOpCompact{o.rightCols(vech_len(r)), r};
  return m;
}

}  // namespace detail

/// Unconstrained operator inference.  Each operator row solves
/// min ||D o^T - R_col||^2 + ridge ||o||^2; all rows share one factorization.
/// With ridge = 0 a rank-deficient system returns the minimum-norm solution
/// (in column-scaled coordinates, which fixes it deterministically).
inline ReducedModel standard_opinf(const LsqSystem& sys, double ridge = 0.0) {
  if (ridge < 0) throw std::invalid_argument("standard_opinf: ridge >= 0 required");
  const Index p = sys.data.cols();
  auto cs = detail::scale_columns(sys.data);

  Matrix ot;  // p x r, scaled coordinates
  double cond = 0.0;
  if (ridge == 0.0) {
    Eigen::BDCSVD<Matrix> svd(cs.scaled, Eigen::ComputeThinU | Eigen::ComputeThinV);
    ot = svd.solve(sys.rhs);
    const auto& sv = svd.singularValues();
    cond = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1)
                                 : std::numeric_limits<double>::infinity();
  } else {
    // Augmented rows sqrt(ridge) * diag(s) make the penalty act on the
    // unscaled unknowns.
    Matrix aug(cs.scaled.rows() + p, p);
    aug.topRows(cs.scaled.rows()) = cs.scaled;
    aug.bottomRows(p) = std::sqrt(ridge) * Matrix(cs.s.asDiagonal());
    Matrix rhs_aug = Matrix::Zero(aug.rows(), sys.r);
    rhs_aug.topRows(sys.rhs.rows()) = sys.rhs;
    Eigen::BDCSVD<Matrix> svd(aug, Eigen::ComputeThinU | Eigen::ComputeThinV);
    ot = svd.solve(rhs_aug);
    const auto& sv = svd.singularValues();
    cond = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1)
                                 : std::numeric_limits<double>::infinity();
  }
  Matrix o = (cs.s.asDiagonal() * ot).transpose();  // r x p, original coordinates

  ReducedModel m = detail::split_operators(o, sys.r, Provenance::OpInf);
  m.diagnostics.residual_fro = detail::residual_fro(sys.data, o, sys.rhs);
  m.diagnostics.cond_estimate = cond;
  m.diagnostics.ridge = ridge;
  return m;
}

namespace detail {

struct ScaledConstraintEntry {
  Index block;  // operator row
  Index local;  // column within the block (already offset past the A part)
  double w;     // coefficient times column scale
};

/// KKT solve of the equality-constrained least squares
///   min sum_i ||D o_i^T - R_i||^2 + ridge ||o_i||^2   s.t.  C vec(F) = 0
/// via a block LDL^T of the saddle matrix: the Gram block is I_r (x) M with
/// M = Ds^T Ds + ridge diag(s)^2 shared by every operator row, and the
/// multiplier block is eliminated through the dense Schur complement
/// S = C G^{-1} C^T.  Two rounds of iterative refinement keep the KKT
/// residual at rounding level, and a final single-pass projection (constraint
/// rows have disjoint supports) restores feasibility exactly.
inline ReducedModel ep_opinf_kkt(const LsqSystem& sys, const ConstraintSystem& constraints,
                                 double ridge) {
  const Index r = sys.r;
  const Index p = sys.data.cols();
  const Index q = vech_len(r);
  const Index m = constraints.matrix.rows();

  auto cs = scale_columns(sys.data);
  Matrix gram = cs.scaled.transpose() * cs.scaled;
  if (ridge > 0.0) gram += (ridge * cs.s.array().square()).matrix().asDiagonal();

  Eigen::LDLT<Matrix> ldlt(gram);
  const Vector dvec = ldlt.vectorD();
  const double dmax = dvec.maxCoeff();
  if (ldlt.info() != Eigen::Success || !(dvec.minCoeff() > static_cast<double>(p) *
                                             std::numeric_limits<double>::epsilon() * dmax))
    throw NumericalError(
        "ep_opinf: singular KKT system (rank-deficient data with ridge = 0); "
        "remedy: ridge > 0");

  // Constraint rows in scaled coordinates, grouped per row.
  std::vector<std::vector<ScaledConstraintEntry>> rows(static_cast<std::size_t>(m));
  for (Index c = 0; c < m; ++c) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(constraints.matrix, c);
         it; ++it) {
      const Index block = it.col() / q;
      const Index local = r + (it.col() % q);
      rows[static_cast<std::size_t>(c)].push_back({block, local, it.value() * cs.s(local)});
    }
  }

  const Matrix dtr = cs.scaled.transpose() * sys.rhs;  // p x r

  // z: p x r, column i = scaled unknowns of operator row i.
  const auto apply_ct = [&](const Vector& lambda) {
    Matrix out = Matrix::Zero(p, r);
    for (Index c = 0; c < m; ++c)
      for (const auto& e : rows[static_cast<std::size_t>(c)])
        out(e.local, e.block) += lambda(c) * e.w;
    return out;
  };
  const auto apply_c = [&](const Matrix& z) {
    Vector out = Vector::Zero(m);
    for (Index c = 0; c < m; ++c)
      for (const auto& e : rows[static_cast<std::size_t>(c)])
        out(c) += e.w * z(e.local, e.block);
    return out;
  };

  // Schur complement over the multipliers.
  const Matrix w = ldlt.solve(Matrix::Identity(p, p));
  Matrix schur(m, m);
  for (Index a = 0; a < m; ++a)
    for (Index b = 0; b < m; ++b) {
      double acc = 0.0;
      for (const auto& ea : rows[static_cast<std::size_t>(a)])
        for (const auto& eb : rows[static_cast<std::size_t>(b)])
          if (ea.block == eb.block) acc += ea.w * w(ea.local, eb.local) * eb.w;
      schur(a, b) = acc;
    }
  Eigen::LDLT<Matrix> schur_ldlt(schur);
  if (schur_ldlt.info() != Eigen::Success)
    throw NumericalError("ep_opinf: Schur complement factorization failed");

  // Saddle solve with rhs (g, 0), then refinement on the true KKT residual.
  Matrix z = ldlt.solve(dtr);
  Vector lambda = schur_ldlt.solve(apply_c(z));
  z -= ldlt.solve(apply_ct(lambda));

  for (int pass = 0; pass < 2; ++pass) {
    Matrix res_z = gram * z - dtr + apply_ct(lambda);   // p x r
    Vector res_c = apply_c(z);                          // m
    Matrix dz = ldlt.solve(-res_z);
    Vector dl = schur_ldlt.solve(apply_c(dz) + res_c);
    dz -= ldlt.solve(apply_ct(dl));
    z += dz;
    lambda += dl;
  }

  // Feasibility restoration: constraint supports are disjoint, so one
  // orthogonal projection per row is exact.
  for (Index c = 0; c < m; ++c) {
    double dot = 0.0, nrm2 = 0.0;
    for (const auto& e : rows[static_cast<std::size_t>(c)]) {
      dot += e.w * z(e.local, e.block);
      nrm2 += e.w * e.w;
    }
    const double f = dot / nrm2;
    for (const auto& e : rows[static_cast<std::size_t>(c)]) z(e.local, e.block) -= f * e.w;
  }

  Matrix o = (cs.s.asDiagonal() * z).transpose();  // r x p, unscaled

  ReducedModel model = split_operators(o, r, Provenance::EpOpInf);
  model.diagnostics.residual_fro = residual_fro(sys.data, o, sys.rhs);
  model.diagnostics.ridge = ridge;
  // The elimination above works with the halved gradient M z - g; the
  // multipliers of the full objective 2 D^T(D O^T - R) + ... are twice the
  // internal ones, and the scaled/unscaled problems share them.
  model.diagnostics.multipliers = 2.0 * lambda;
  const double dmin = dvec.minCoeff();
  model.diagnostics.cond_estimate = dmin > 0 ? std::sqrt(dmax / dmin)
                                             : std::numeric_limits<double>::infinity();
  // Row-major vec(F) for the feasibility report.
  Vector vecf(r * q);
  for (Index i = 0; i < r; ++i) vecf.segment(i * q, q) = model.F_hat.entries.row(i).transpose();
  model.diagnostics.constraint_residual_inf =
      m > 0 ? (constraints.matrix * vecf).cwiseAbs().maxCoeff() : 0.0;
  return model;
}

}  // namespace detail

/// Energy-preserving operator inference: the least-squares fit of
/// standard_opinf subject to C vec(F) = 0.  The constraints couple the r row
/// problems, so the solve is a single KKT system; see detail::ep_opinf_kkt.
/// An empty constraint set degenerates to the unconstrained path.
inline ReducedModel ep_opinf(const LsqSystem& sys, const ConstraintSystem& constraints,
                             double ridge = 0.0) {
  if (ridge < 0) throw std::invalid_argument("ep_opinf: ridge >= 0 required");
  if (constraints.matrix.rows() == 0) {
    ReducedModel m = standard_opinf(sys, ridge);
    m.provenance = Provenance::EpOpInf;
    return m;
  }
  if (constraints.dim != sys.r)
    throw std::invalid_argument("ep_opinf: constraint dimension mismatch");
  return detail::ep_opinf_kkt(sys, constraints, ridge);
}

/// Post-solve optimality report for an ep_opinf model, in original
/// coordinates: stationarity 2 D^T (D O^T - R) + 2 ridge O^T + C^T lambda,
/// primal feasibility, and multiplier size, plus the reference scale
/// ||D^T R||_inf.
struct KktReport {
  double stationarity_inf = 0.0;
  double primal_feasibility_inf = 0.0;
  double multiplier_norm_inf = 0.0;
  double scale = 0.0;
};

inline KktReport kkt_diagnostics(const ReducedModel& model, const LsqSystem& sys,
                                 const ConstraintSystem& constraints) {
  if (model.provenance != Provenance::EpOpInf)
    throw std::invalid_argument("kkt_diagnostics: model must come from ep_opinf");
  const Index r = sys.r;
  const Index q = vech_len(r);
  const Index p = sys.data.cols();
  const Index m = constraints.matrix.rows();

  Matrix o(r, p);
  o.leftCols(r) = model.A_hat;
  o.rightCols(q) = model.F_hat.entries;

  Matrix grad = 2.0 * (sys.data.transpose() * (sys.data * o.transpose() - sys.rhs));
  if (model.diagnostics.ridge > 0) grad += 2.0 * model.diagnostics.ridge * o.transpose();

  if (m > 0) {
    const Vector& lambda = model.diagnostics.multipliers;
    if (lambda.size() != m)
      throw std::invalid_argument("kkt_diagnostics: multiplier count mismatch");
    for (Index c = 0; c < m; ++c)
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(constraints.matrix,
                                                                          c);
           it; ++it)
        grad(r + it.col() % q, it.col() / q) += lambda(c) * it.value();
  }

  KktReport rep;
  rep.stationarity_inf = grad.cwiseAbs().maxCoeff();
  rep.scale = (sys.data.transpose() * sys.rhs).cwiseAbs().maxCoeff();
  if (m > 0) {
    Vector vecf(r * q);
    for (Index i = 0; i < r; ++i) vecf.segment(i * q, q) = model.F_hat.entries.row(i).transpose();
    rep.primal_feasibility_inf = (constraints.matrix * vecf).cwiseAbs().maxCoeff();
    rep.multiplier_norm_inf =
        model.diagnostics.multipliers.size() > 0
            ? model.diagnostics.multipliers.cwiseAbs().maxCoeff()
            : 0.0;
  }
  return rep;
}

}  // namespace opinf

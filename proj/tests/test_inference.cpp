#include <catch2/catch_amalgamated.hpp>

#include "opinf/inference.hpp"
#include "support/test_helpers.hpp"

using namespace opinf;
using Catch::Approx;

TEST_CASE("intrusive reduction") {
  CounterRng rng(101, 0);

  SECTION("identity basis returns the operators (evaluation-equivalent)") {
    const Index n = 6;
    QuadraticModel m{testing::random_matrix(n, n, rng), testing::exact_ep_compact(n, rng), n};
    PODBasis b{Matrix::Identity(n, n), Vector::Ones(n), n, n};
    const ReducedModel red = intrusive_reduce(m, b, n);
    CHECK((red.A_hat - m.A).cwiseAbs().maxCoeff() <= 1e-13);
    for (int t = 0; t < 20; ++t) {
      const Vector x = testing::random_vector(n, rng);
      CHECK((eval_quadratic(red.F_hat, x) - eval_quadratic(m.F, x)).norm() <= 1e-12);
    }
  }

  SECTION("r = 1 reduces to scalar contractions") {
    const Index n = 5;
    QuadraticModel m{testing::random_matrix(n, n, rng),
                     QuadOpCompact{testing::random_matrix(n, vech_len(n), rng), n}, n};
    const Matrix v = testing::random_orthonormal(n, 1, rng);
    PODBasis b{v, Vector::Ones(1), n, 1};
    const ReducedModel red = intrusive_reduce(m, b, 1);
    CHECK(red.A_hat(0, 0) == Approx((v.transpose() * m.A * v)(0, 0)).epsilon(1e-13));
    CHECK(red.F_hat.entries(0, 0) ==
          Approx(v.col(0).dot(eval_quadratic(m.F, v.col(0)))).epsilon(1e-12));
  }

  SECTION("energy preservation survives projection") {
    const Index n = 8, r = 4;
    QuadraticModel m{testing::random_matrix(n, n, rng), testing::exact_ep_compact(n, rng), n};
    PODBasis b{testing::random_orthonormal(n, r, rng), Vector::Ones(r), n, r};
    const ReducedModel red = intrusive_reduce(m, b, r);
    CHECK(ep_violation(red.F_hat) <= 1e-12);
    CHECK(is_energy_preserving(red.F_hat, 1000, 1e-10));
  }

  SECTION("Burgers projection is energy preserving at reduced size") {
    const Grid1D grid = Grid1D::uniform(32, 1.0);
    const QuadraticModel m = assemble_burgers(grid, 0.1);
    std::vector<SnapshotSet> sets;
    for (int f = 1; f <= 3; ++f)
      sets.push_back(simulate(m, burgers_ic(grid, 1.0, f, 0.0), 1e-3, 0.2, 20,
                              TimeScheme::SemiImplicitEuler));
    const PODBasis b = compute_pod(sets, 5);
    const ReducedModel red = intrusive_reduce(m, b, 5);
    CHECK(ep_violation(red.F_hat) <= 1e-12);
  }
}

TEST_CASE("assemble_lsq row layout") {
  ReducedData data;
  data.r = 2;
  data.states.resize(2, 1);
  data.states << 1.0, 2.0;
  data.derivs = Matrix::Zero(2, 1);
  const LsqSystem sys = assemble_lsq(data);
  REQUIRE(sys.data.rows() == 1);
  REQUIRE(sys.data.cols() == 5);
  CHECK(sys.data(0, 0) == 1.0);
  CHECK(sys.data(0, 1) == 2.0);
  CHECK(sys.data(0, 2) == 1.0);  // x1^2
  CHECK(sys.data(0, 3) == 2.0);  // x2 x1
  CHECK(sys.data(0, 4) == 4.0);  // x2^2
  CHECK(sys.rhs.row(0).isZero());

  ReducedData zeros;
  zeros.r = 3;
  zeros.states = Matrix::Zero(3, 4);
  zeros.derivs = Matrix::Zero(3, 4);
  const LsqSystem zsys = assemble_lsq(zeros);
  CHECK(zsys.data.isZero());
  CHECK(zsys.rhs.isZero());
  CHECK(zsys.sample_count == 4);
}

TEST_CASE("standard_opinf") {
  CounterRng rng(111, 0);

  SECTION("zero right-hand side gives the zero operator") {
    LsqSystem sys;
    sys.r = 2;
    sys.sample_count = 10;
    sys.data = testing::random_matrix(10, 5, rng);
    sys.rhs = Matrix::Zero(10, 2);
    const ReducedModel m = standard_opinf(sys, 0.0);
    CHECK(m.A_hat.cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(m.F_hat.entries.cwiseAbs().maxCoeff() <= 1e-14);
  }

  SECTION("synthetic operator recovery") {
    const Index r = 4;
    const Matrix a_true = testing::random_matrix(r, r, rng);
    QuadOpCompact f_true{testing::random_matrix(r, vech_len(r), rng), r};
    const LsqSystem sys = testing::synthetic_system(a_true, f_true, 200, rng);
    const ReducedModel m = standard_opinf(sys, 0.0);
    REQUIRE(m.diagnostics.cond_estimate <= 1e6);
    const double scale = a_true.norm() + f_true.entries.norm();
    CHECK((m.A_hat - a_true).norm() <= 1e-8 * scale);
    CHECK((m.F_hat.entries - f_true.entries).norm() <= 1e-8 * scale);
    CHECK(m.diagnostics.residual_fro <= 1e-9 * sys.rhs.norm());
  }

  SECTION("minimum-norm resolution matches an independent decomposition") {
    // Underdetermined: 3 samples, r = 2 (5 unknowns per row).
    LsqSystem sys;
    sys.r = 2;
    sys.sample_count = 3;
    sys.data = testing::random_matrix(3, 5, rng);
    sys.rhs = testing::random_matrix(3, 2, rng);
    const ReducedModel m = standard_opinf(sys, 0.0);
    // Min-norm solution in scaled coordinates, reproduced via a complete
    // orthogonal decomposition of the same scaled matrix.
    Vector s(5);
    for (Index c = 0; c < 5; ++c) s(c) = 1.0 / sys.data.col(c).norm();
    Matrix ds = sys.data * s.asDiagonal();
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(ds);
    Matrix o_ref = (s.asDiagonal() * cod.solve(sys.rhs)).transpose();
    CHECK((testing::stack_operators(m) - o_ref).cwiseAbs().maxCoeff() <= 1e-10);
  }

  SECTION("ridge shrinks the solution and is applied unscaled") {
    const Index r = 3;
    const Matrix a_true = testing::random_matrix(r, r, rng);
    QuadOpCompact f_true{testing::random_matrix(r, vech_len(r), rng), r};
    const LsqSystem sys = testing::synthetic_system(a_true, f_true, 60, rng);
    const ReducedModel plain = standard_opinf(sys, 0.0);
    const ReducedModel damped = standard_opinf(sys, 1e3);
    CHECK(testing::stack_operators(damped).norm() < testing::stack_operators(plain).norm());
    // Normal-equation check of the ridge solution: (D^T D + ridge I) O^T = D^T R.
    const Index p = sys.data.cols();
    const Matrix ot = testing::stack_operators(damped).transpose();
    const Matrix lhs = (sys.data.transpose() * sys.data + 1e3 * Matrix::Identity(p, p)) * ot;
    const Matrix rhs = sys.data.transpose() * sys.rhs;
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-8 * rhs.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("ep_opinf constrained solve") {
  CounterRng rng(121, 0);

  SECTION("feasible data: agrees with the unconstrained fit") {
    const Index r = 3;
    const Matrix a_true = testing::random_matrix(r, r, rng);
    const QuadOpCompact f_true = testing::exact_ep_compact(r, rng);
    const LsqSystem sys = testing::synthetic_system(a_true, f_true, 60, rng);
    const ConstraintSystem cons = build_constraint_matrix(r);

    const ReducedModel unconstrained = standard_opinf(sys, 0.0);
    const ReducedModel constrained = ep_opinf(sys, cons, 0.0);
    const double scale = testing::stack_operators(unconstrained).norm();
    CHECK((testing::stack_operators(constrained) - testing::stack_operators(unconstrained))
              .norm() <= 1e-6 * scale);
    CHECK(constrained.diagnostics.constraint_residual_inf <= 1e-10);
    CHECK(ep_violation(constrained.F_hat) <= 1e-10);
    CHECK(ep_violation(unconstrained.F_hat) <= 1e-8);
    CHECK(constrained.diagnostics.residual_fro <=
          unconstrained.diagnostics.residual_fro + 1e-8);
  }

  SECTION("infeasible data: constrained residual strictly larger, still feasible") {
    const Index r = 3;
    const Matrix a_true = testing::random_matrix(r, r, rng);
    QuadOpCompact f_bad{testing::random_matrix(r, vech_len(r), rng), r};  // not EP
    const LsqSystem sys = testing::synthetic_system(a_true, f_bad, 60, rng);
    const ConstraintSystem cons = build_constraint_matrix(r);
    const ReducedModel unconstrained = standard_opinf(sys, 0.0);
    const ReducedModel constrained = ep_opinf(sys, cons, 0.0);
    CHECK(constrained.diagnostics.residual_fro >
          unconstrained.diagnostics.residual_fro + 1e-6);
    CHECK(constrained.diagnostics.constraint_residual_inf <= 1e-10);
    CHECK(ep_violation(constrained.F_hat) <= 1e-10);
  }

  SECTION("r = 1: quadratic forced to zero, linear part is the plain fit") {
    LsqSystem sys;
    sys.r = 1;
    sys.sample_count = 30;
    ReducedData data;
    data.r = 1;
    data.states = testing::random_matrix(1, 30, rng);
    data.derivs = testing::random_matrix(1, 30, rng);
    sys = assemble_lsq(data);
    const ReducedModel m = ep_opinf(sys, build_constraint_matrix(1), 0.0);
    CHECK(m.F_hat.entries(0, 0) == 0.0);
    // scalar least squares of xdot on x
    const Vector x = sys.data.col(0);
    const Vector y = sys.rhs.col(0);
    CHECK(m.A_hat(0, 0) == Approx(x.dot(y) / x.dot(x)).epsilon(1e-9));
  }

  SECTION("empty constraint set reproduces standard_opinf exactly") {
    const Index r = 3;
    const Matrix a_true = testing::random_matrix(r, r, rng);
    QuadOpCompact f_true{testing::random_matrix(r, vech_len(r), rng), r};
    const LsqSystem sys = testing::synthetic_system(a_true, f_true, 50, rng);
    ConstraintSystem none;
    none.dim = r;
    none.matrix.resize(0, r * vech_len(r));
    const ReducedModel a = ep_opinf(sys, none, 0.0);
    const ReducedModel b = standard_opinf(sys, 0.0);
    CHECK(a.provenance == Provenance::EpOpInf);
    CHECK(a.A_hat == b.A_hat);
    CHECK(a.F_hat.entries == b.F_hat.entries);
  }

  SECTION("matches the penalty-method oracle") {
    const Index r = 3;
    CounterRng orng(131, 0);
    const Matrix a_true = testing::random_matrix(r, r, orng);
    QuadOpCompact f_any{testing::random_matrix(r, vech_len(r), orng), r};
    LsqSystem sys = testing::synthetic_system(a_true, f_any, 40, orng);
    // mild noise so the unconstrained optimum is strictly infeasible
    sys.rhs += 0.01 * testing::random_matrix(40, r, orng);
    const ConstraintSystem cons = build_constraint_matrix(r);
    const ReducedModel kkt = ep_opinf(sys, cons, 0.0);
    const Matrix oracle = testing::penalty_oracle(sys, cons, 0.0);
    const double scale = oracle.norm();
    CHECK((testing::stack_operators(kkt) - oracle).norm() <= 1e-6 * scale);
  }

  SECTION("objective ordering across random instances") {
    for (int t = 0; t < 20; ++t) {
      CounterRng irng(200 + t, 0);
      const Index r = 2 + (t % 2);
      const Matrix a_true = testing::random_matrix(r, r, irng);
      QuadOpCompact f_any{testing::random_matrix(r, vech_len(r), irng), r};
      LsqSystem sys = testing::synthetic_system(a_true, f_any, 30, irng);
      sys.rhs += 0.05 * testing::random_matrix(30, r, irng);
      const ReducedModel uc = standard_opinf(sys, 0.0);
      const ReducedModel ec = ep_opinf(sys, build_constraint_matrix(r), 0.0);
      CHECK(ec.diagnostics.residual_fro >= uc.diagnostics.residual_fro - 1e-10);
    }
  }

  SECTION("rank-deficient data without ridge is reported, ridge recovers") {
    LsqSystem sys;
    sys.r = 2;
    sys.sample_count = 2;  // 2 rows, 5 unknowns per row
    sys.data = testing::random_matrix(2, 5, rng);
    sys.rhs = testing::random_matrix(2, 2, rng);
    const ConstraintSystem cons = build_constraint_matrix(2);
    CHECK_THROWS_AS(ep_opinf(sys, cons, 0.0), NumericalError);
    const ReducedModel m = ep_opinf(sys, cons, 1e-8);
    CHECK(m.diagnostics.constraint_residual_inf <= 1e-10);
  }
}

TEST_CASE("kkt_diagnostics") {
  CounterRng rng(141, 0);

  SECTION("inactive constraints leave tiny multipliers") {
    const Index r = 3;
    const Matrix a_true = testing::random_matrix(r, r, rng);
    const QuadOpCompact f_true = testing::exact_ep_compact(r, rng);
    const LsqSystem sys = testing::synthetic_system(a_true, f_true, 60, rng);
    const ConstraintSystem cons = build_constraint_matrix(r);
    const ReducedModel m = ep_opinf(sys, cons, 0.0);
    const KktReport rep = kkt_diagnostics(m, sys, cons);
    CHECK(rep.stationarity_inf <= 1e-8 * rep.scale);
    CHECK(rep.primal_feasibility_inf <= 1e-10);
    CHECK(rep.multiplier_norm_inf <= 1e-6 * rep.scale);
  }

  SECTION("zero data with ridge gives identically zero residuals") {
    LsqSystem sys;
    sys.r = 2;
    sys.sample_count = 4;
    sys.data = Matrix::Zero(4, 5);
    sys.rhs = Matrix::Zero(4, 2);
    const ConstraintSystem cons = build_constraint_matrix(2);
    const ReducedModel m = ep_opinf(sys, cons, 1e-3);
    const KktReport rep = kkt_diagnostics(m, sys, cons);
    CHECK(rep.stationarity_inf == 0.0);
    CHECK(rep.primal_feasibility_inf == 0.0);
    CHECK(rep.scale == 0.0);
  }

  SECTION("active constraints: stationarity still at solver accuracy") {
    const Index r = 4;
    const Matrix a_true = testing::random_matrix(r, r, rng);
    QuadOpCompact f_bad{testing::random_matrix(r, vech_len(r), rng), r};
    const LsqSystem sys = testing::synthetic_system(a_true, f_bad, 80, rng);
    const ConstraintSystem cons = build_constraint_matrix(r);
    const ReducedModel m = ep_opinf(sys, cons, 0.0);
    const KktReport rep = kkt_diagnostics(m, sys, cons);
    CHECK(rep.stationarity_inf <= 1e-8 * rep.scale);
    CHECK(rep.multiplier_norm_inf > 0.0);
    CHECK_THROWS_AS(kkt_diagnostics(standard_opinf(sys, 0.0), sys, cons),
                    std::invalid_argument);
  }
}

TEST_CASE("submodel extraction composes with the fitted models") {
  // Operators for r' < r_max come from the r_max fit; extraction must keep
  // the constrained fit feasible at machine level for every r'.
  CounterRng rng(151, 0);
  const Index r = 5;
  const Matrix a_true = testing::random_matrix(r, r, rng);
  QuadOpCompact f_any{testing::random_matrix(r, vech_len(r), rng), r};
  LsqSystem sys = testing::synthetic_system(a_true, f_any, 80, rng);
  sys.rhs += 0.01 * testing::random_matrix(80, r, rng);
  const ReducedModel m = ep_opinf(sys, build_constraint_matrix(r), 0.0);
  for (Index rp = 1; rp <= r; ++rp) {
    auto [a_sub, f_sub] = extract_submodel(m.A_hat, m.F_hat, rp);
    CHECK(ep_violation(f_sub) <= 1e-12);
  }
}

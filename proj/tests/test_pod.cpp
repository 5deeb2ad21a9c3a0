#include <catch2/catch_amalgamated.hpp>

#include "opinf/pod.hpp"
#include "support/test_helpers.hpp"

using namespace opinf;
using Catch::Approx;

namespace {

SnapshotSet wrap(const Matrix& states) {
  SnapshotSet s;
  s.states = states;
  s.derivs = Matrix::Zero(states.rows(), states.cols());
  s.times = Vector::Zero(states.cols());
  s.dt_sim = 1.0;
  s.stride = 1;
  return s;
}

}  // namespace

TEST_CASE("compute_pod on elementary snapshot matrices") {
  SECTION("single unit snapshot") {
    Matrix x = Matrix::Zero(4, 1);
    x(0, 0) = 1.0;
    const PODBasis b = compute_pod({wrap(x)}, 1);
    CHECK(b.sigma(0) == Approx(1.0));
    CHECK(b.V(0, 0) == Approx(1.0));
    CHECK(b.V.col(0).tail(3).cwiseAbs().maxCoeff() <= 1e-14);
  }

  SECTION("two orthogonal columns of norms 2 and 1") {
    Matrix x = Matrix::Zero(4, 2);
    x(0, 0) = 2.0;
    x(2, 1) = 1.0;
    const PODBasis b = compute_pod({wrap(x)}, 2);
    REQUIRE(b.sigma.size() == 2);
    CHECK(b.sigma(0) == Approx(2.0));
    CHECK(b.sigma(1) == Approx(1.0));
    CHECK(b.V(0, 0) == Approx(1.0));
    CHECK(b.V(2, 1) == Approx(1.0));
  }

  SECTION("orthonormality and sign convention on real data") {
    const Grid1D grid = Grid1D::uniform(24, 1.0);
    const QuadraticModel m = assemble_burgers(grid, 0.1);
    std::vector<SnapshotSet> sets;
    for (int f = 1; f <= 2; ++f)
      sets.push_back(simulate(m, burgers_ic(grid, 1.0, f, 0.1), 1e-3, 0.1, 10,
                              TimeScheme::SemiImplicitEuler));
    const PODBasis b = compute_pod(sets, 5);
    CHECK((b.V.transpose() * b.V - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() <= 1e-12);
    for (Index c = 0; c < 5; ++c) {
      Index imax;
      b.V.col(c).cwiseAbs().maxCoeff(&imax);
      CHECK(b.V(imax, c) > 0.0);
    }
    for (Index i = 0; i + 1 < b.sigma.size(); ++i) CHECK(b.sigma(i) >= b.sigma(i + 1));

    const PODBasis again = compute_pod(sets, 5);
    CHECK(again.V == b.V);  // deterministic, including signs
  }

  SECTION("rank failure reported with the numerical rank") {
    CounterRng rng(7, 0);
    const Vector u = testing::random_vector(6, rng);
    const Vector v = testing::random_vector(6, rng);
    Matrix x(6, 4);
    x.col(0) = u;
    x.col(1) = v;
    x.col(2) = u + v;
    x.col(3) = 2.0 * u - v;  // rank 2
    CHECK_THROWS_WITH(compute_pod({wrap(x)}, 3),
                      Catch::Matchers::ContainsSubstring("rank"));
  }
}

TEST_CASE("energy accounting of the singular spectrum") {
  Vector sigma(4);
  sigma << 2.0, 1.0, 1.0, 0.0;
  CHECK(energy_lost(sigma, 4) == 0.0);
  CHECK(energy_lost(sigma, 0) == 1.0);
  CHECK(energy_lost(sigma, 2) == Approx(1.0 / 6.0));
  CHECK(energy_retained(sigma, 2) == Approx(5.0 / 6.0));
  for (Index r = 0; r + 1 <= 4; ++r)
    CHECK(energy_lost(sigma, r + 1) <= energy_lost(sigma, r));
  CHECK_THROWS_AS(energy_lost(Vector::Zero(3), 1), std::invalid_argument);
  CHECK_THROWS_AS(energy_lost(sigma, 5), std::invalid_argument);
}

TEST_CASE("projection to reduced coordinates") {
  CounterRng rng(17, 0);

  SECTION("identity basis keeps the data") {
    Matrix x = testing::random_matrix(3, 7, rng);
    SnapshotSet s = wrap(x);
    s.derivs = testing::random_matrix(3, 7, rng);
    PODBasis b{Matrix::Identity(3, 3), Vector::Ones(3), 3, 3};
    const ReducedData rd = project(b, {s}, 3);
    CHECK((rd.states - x).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((rd.derivs - s.derivs).cwiseAbs().maxCoeff() <= 1e-15);
  }

  SECTION("projection identity inside the span and contraction outside") {
    const Matrix v = testing::random_orthonormal(8, 3, rng);
    const Vector coeff = testing::random_vector(3, rng);
    const Vector x = v * coeff;
    CHECK((v * (v.transpose() * x) - x).norm() <= 1e-12 * x.norm());

    const Matrix data = testing::random_matrix(8, 5, rng);
    PODBasis b{v, Vector::Ones(3), 8, 3};
    const ReducedData rd = project(b, {wrap(data)}, 3);
    CHECK(rd.states.norm() <= data.norm() * (1.0 + 1e-14));
  }

  SECTION("column order follows set order then time order") {
    Matrix x1 = testing::random_matrix(4, 2, rng);
    Matrix x2 = testing::random_matrix(4, 3, rng);
    PODBasis b{Matrix::Identity(4, 4), Vector::Ones(4), 4, 4};
    const ReducedData rd = project(b, {wrap(x1), wrap(x2)}, 4);
    REQUIRE(rd.states.cols() == 5);
    CHECK((rd.states.leftCols(2) - x1).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((rd.states.rightCols(3) - x2).cwiseAbs().maxCoeff() <= 1e-15);
  }

  SECTION("r beyond r_max rejected") {
    PODBasis b{Matrix::Identity(4, 2), Vector::Ones(2), 4, 2};
    CHECK_THROWS_AS(project(b, {wrap(Matrix::Ones(4, 3))}, 3), std::invalid_argument);
  }
}

TEST_CASE("rank-r POD reconstruction attains the spectral tail bound") {
  CounterRng rng(27, 0);
  const Matrix x = testing::random_matrix(6, 8, rng);
  const PODBasis b = compute_pod({wrap(x)}, 6);
  for (Index r = 1; r <= 6; ++r) {
    const auto vr = b.V.leftCols(r);
    const double err = (x - vr * (vr.transpose() * x)).norm();
    const double tail = std::sqrt(b.sigma.tail(b.sigma.size() - r).squaredNorm());
    CHECK(err == Approx(tail).margin(1e-10));
  }
}

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "chemcons/metrics.hpp"
#include "chemcons/ode_reference.hpp"
#include "doctest.h"

using namespace chemcons;

namespace {

double sup_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

Eigen::VectorXd vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), Eigen::Index(v.size()));
}

std::vector<double> indexed(std::size_t m, double factor = 1.0) {
  std::vector<double> z(m);
  for (std::size_t i = 0; i < m; ++i) z[i] = factor * double(i + 1);
  return z;
}

// exp(A) for symmetric A through its eigendecomposition.
Eigen::MatrixXd symmetric_exponential(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  return es.eigenvectors() * es.eigenvalues().array().exp().matrix().asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

TEST_CASE("reversible pair against its closed form") {
  const auto model = make_model(make_complete(2), 0.0, {500, 300}, {500, 300});
  const auto traj = integrate(model, 5.0, 0.01, 0.1);
  REQUIRE(traj.size() == 51);
  double worst = 0.0;
  for (const auto& s : traj) {
    const double e = 100.0 * std::exp(-2.0 * s.t);
    worst = std::max({worst, std::abs(s.state[0] - (400 + e)), std::abs(s.state[1] - (400 - e))});
  }
  CHECK(worst < 1e-6);
  CHECK(traj.back().t == 5.0);
}

TEST_CASE("step size precondition") {
  const auto model = make_model(make_complete(5), 0.1, indexed(5), indexed(5));
  CHECK(model.max_step() == doctest::Approx(0.1 / 4.1));
  CHECK_THROWS_AS(integrate(model, 1.0, 0.05, 0.1), std::invalid_argument);
  CHECK_NOTHROW(integrate(model, 1.0, 0.02, 0.1));
}

TEST_CASE("balanced Laplacian conserves the mean without refresh") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto g = make_small_world(20, 60, 0.5, seed);
    const auto z = indexed(20);
    const auto model = make_model(g, 0.0, z, z);
    const double total0 = vec(z).sum();
    for (const auto& s : integrate(model, 10.0, model.max_step(), 0.5)) CHECK(std::abs(vec(s.state).sum() - total0) < 1e-9);
  }
}

TEST_CASE("matrix exponential") {
  CHECK(matrix_exponential(Eigen::MatrixXd::Zero(3, 3)) == Eigen::MatrixXd::Identity(3, 3));

  Eigen::MatrixXd nil(2, 2);
  nil << 0, 1, 0, 0;
  Eigen::MatrixXd nil_exp(2, 2);
  nil_exp << 1, 1, 0, 1;
  CHECK((matrix_exponential(nil) - nil_exp).cwiseAbs().maxCoeff() < 1e-15);

  const double theta = 2.5;
  Eigen::MatrixXd rot(2, 2);
  rot << 0, -theta, theta, 0;
  Eigen::MatrixXd rot_exp(2, 2);
  rot_exp << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  CHECK((matrix_exponential(rot) - rot_exp).cwiseAbs().maxCoeff() < 1e-13);

  SUBCASE("symmetric matrices against the eigendecomposition") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto g = make_small_world(10, 20, 0.5, seed);
      const Eigen::MatrixXd a = -(laplacian(g) + 0.1 * Eigen::MatrixXd::Identity(10, 10)) * (0.7 + 3.0 * double(seed));
      CHECK((matrix_exponential(a) - symmetric_exponential(a)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("RK4 against the matrix exponential on small graphs") {
  std::vector<NetworkGraph> graphs{make_ring(7), make_complete(6), make_regular_lattice(9, 2),
                                   make_small_world(10, 30, 0.5, 5)};
  for (const auto& g : graphs) {
    for (double delta : {0.0, 0.1, 0.5}) {
      const auto n = g.size();
      std::vector<double> c0(n);
      for (std::size_t i = 0; i < n; ++i) c0[i] = double((7 * i) % 5) + 1.0;
      const auto model = make_model(g, delta, indexed(n), c0);
      const Eigen::MatrixXd a = model.L + delta * Eigen::MatrixXd::Identity(Eigen::Index(n), Eigen::Index(n));
      for (const auto& s : integrate(model, 4.0, model.default_step(), 0.5)) {
        const Eigen::MatrixXd e = matrix_exponential(-a * s.t);
        Eigen::VectorXd exact = e * model.c0;
        if (delta > 0.0) {
          exact += a.partialPivLu().solve((Eigen::MatrixXd::Identity(a.rows(), a.cols()) - e) * (delta * model.z));
        }
        CHECK(sup_diff(vec(s.state), exact) < 1e-8);
      }
    }
  }
}

TEST_CASE("analytic response") {
  const auto g = make_small_world(10, 30, 0.5, 1);
  const auto z = indexed(10);
  const auto model = make_model(g, 0.1, z, z);

  CHECK(analytic_response(model, 0.0) == model.c0);
  CHECK(sup_diff(analytic_response(model, 2000.0), steady_state(model)) < 1e-9);

  SUBCASE("agrees with RK4 on the ten-node scenario") {
    double worst = 0.0;
    for (const auto& s : integrate(model, 30.0, model.default_step(), 0.25)) {
      worst = std::max(worst, sup_diff(vec(s.state), analytic_response(model, s.t)));
    }
    CHECK(worst < 1e-6);
  }

  SUBCASE("zero delta is rejected") {
    CHECK_THROWS_AS(analytic_response(make_model(g, 0.0, z, z), 1.0), std::invalid_argument);
    CHECK_THROWS_AS(steady_state(make_model(g, 0.0, z, z)), std::invalid_argument);
  }
}

TEST_CASE("steady state") {
  const auto g = make_small_world(10, 30, 0.5, 1);
  const std::vector<double> flat(10, 7.0);
  CHECK(sup_diff(steady_state(make_model(g, 0.3, flat, flat)), vec(flat)) < 1e-12);

  const auto z = indexed(10);
  for (double delta : {1e-4, 0.1, 0.5, 2.0}) {
    const auto model = make_model(g, delta, z, z);
    const auto c = steady_state(model);
    const Eigen::VectorXd residual = model.L * c + delta * c - delta * model.z;
    CHECK(residual.cwiseAbs().maxCoeff() <= 1e-9);
  }

  const auto near_zero = steady_state(make_model(g, 1e-4, z, z));
  CHECK((near_zero.array() - 5.5).abs().maxCoeff() < 1e-3);

  auto steady_nmse = [&](double delta) {
    const auto c = steady_state(make_model(g, delta, z, z));
    return nmse(std::vector<double>(c.data(), c.data() + c.size()), z);
  };
  CHECK(steady_nmse(0.1) < steady_nmse(0.5));
}

TEST_CASE("convergence time bound") {
  const double l2 = algebraic_connectivity(make_ring(25));
  std::vector<double> table(25, 30.0);
  table[0] = 60.0;
  const double n0 = nmse(table, table);
  CHECK(convergence_time_bound(make_ring(25), table, 0.01) == doctest::Approx(std::log(n0 / 0.01) / (2 * l2)));
  CHECK(convergence_time_bound(make_complete(25), table, 0.01) <= 0.26);
  CHECK(convergence_time_bound(2 * l2, n0, 0.01) == doctest::Approx(convergence_time_bound(l2, n0, 0.01) / 2));
  CHECK(convergence_time_bound(l2, 0.005, 0.01) == 0.0);
  CHECK_THROWS_AS(convergence_time_bound(0.0, 1.0, 0.01), std::invalid_argument);
}

TEST_CASE("piecewise oracle") {
  const auto g = make_small_world(10, 30, 0.5, 1);
  const auto z = indexed(10);
  ProtocolParams params;
  params.variant = Variant::full;
  params.delta = 0.1;

  SUBCASE("no actions reproduces integrate") {
    const auto model = make_model(g, 0.1, z, z);
    const auto direct = integrate(model, 5.0, model.default_step(), 0.5);
    const auto piecewise = oracle_trajectory(g, z, params, {}, {}, 5.0, 0.5);
    REQUIRE(direct.size() == piecewise.size());
    for (std::size_t k = 0; k < direct.size(); ++k) CHECK(sup_diff(vec(direct[k].state), vec(piecewise[k].state)) < 1e-12);
  }

  SUBCASE("inactive nodes stay frozen and rejoin at their measurement") {
    std::vector<bool> active(10, true);
    active[9] = false;
    const std::vector<Action> actions{{5.0, ActionKind::leave, 0, 0.0}, {20.0, ActionKind::join, 9, 10.0}};
    const auto traj = oracle_trajectory(g, z, params, active, actions, 40.0, 1.0);
    for (const auto& s : traj) {
      if (s.t < 20.0) CHECK(s.state[9] == 10.0);
      if (s.t >= 5.0) CHECK(s.state[0] == traj[5].state[0]);
      CHECK(s.active[0] == (s.t < 5.0));
      CHECK(s.active[9] == (s.t >= 20.0));
    }
    const auto& last = traj.back();
    std::vector<double> ref = z;
    CHECK(nmse(last.state, ref, last.active) < 0.01);
  }

  SUBCASE("perturbation window changes the forcing only inside it") {
    const std::vector<Action> actions{{5.0, ActionKind::perturb_begin, 0, 1.5}, {7.0, ActionKind::perturb_end, 0, 1.5}};
    const auto base = oracle_trajectory(g, z, params, {}, {}, 30.0, 1.0);
    const auto hit = oracle_trajectory(g, z, params, {}, actions, 30.0, 1.0);
    CHECK(hit[5].state == base[5].state);
    CHECK(hit[6].state[0] > base[6].state[0]);
    CHECK(std::abs(hit[30].state[0] - base[30].state[0]) < std::abs(hit[7].state[0] - base[7].state[0]));
  }
}

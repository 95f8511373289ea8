#pragma once

// Mean-field oracle for the consensus chemistries:
//   dc/dt = -L c + delta * (z - c)
// with delta = 0 for the basic variant.

#include <vector>

#include <Eigen/Dense>

#include "chemcons/consensus_protocol.hpp"
#include "chemcons/topology.hpp"
#include "chemcons/trajectory.hpp"

namespace chemcons {

struct LinearModel {
  Eigen::MatrixXd L;
  double delta = 0.0;
  Eigen::VectorXd z;
  Eigen::VectorXd c0;
  /// Inactive nodes are frozen: no coupling and no refresh. Empty means all active.
  std::vector<bool> active;

  /// Throws std::invalid_argument on inconsistent dimensions or negative delta.
  void validate() const;
  Eigen::VectorXd derivative(const Eigen::VectorXd& c) const;
  /// Largest admissible RK4 step, 0.1 / (max |N_i| + delta).
  double max_step() const;
  /// max_step() / 8, the step used when none is given.
  double default_step() const { return max_step() / 8.0; }
};

LinearModel make_model(const NetworkGraph& g, double delta, const std::vector<double>& z,
                       const std::vector<double>& c0, const std::vector<bool>& active = {});

/// Advances c from t0 to t1 with equal RK4 steps no longer than dt.
Eigen::VectorXd rk4_advance(const LinearModel& model, Eigen::VectorXd c, double t0, double t1, double dt);

/// Classical RK4, sampled every `interval` from 0 and exactly at t_end.
/// Throws std::invalid_argument if dt exceeds model.max_step().
Trajectory integrate(const LinearModel& model, double t_end, double dt, double interval);

/// exp(A) by scaling and squaring of a truncated Taylor series.
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& a);

/// c(t) = E c0 + (L + delta I)^-1 (I - E) delta z with E = exp(-(L + delta I) t).
/// Requires delta > 0 and all nodes active.
Eigen::VectorXd analytic_response(const LinearModel& model, double t);

/// Solves (L + delta I) c* = delta z. Requires delta > 0.
Eigen::VectorXd steady_state(const LinearModel& model);

/// ln(nmse0 / threshold) / (2 lambda_2); zero when nmse0 is already below threshold.
double convergence_time_bound(double lambda2, double nmse0, double threshold);
double convergence_time_bound(const NetworkGraph& g, const std::vector<double>& initial, double threshold);

/// Mean-field counterpart of `simulate`: the same action list replayed on the
/// ODE. Perturbations scale z, joins restart a node at its measurement, and
/// basic-variant measurement changes shift the node's state.
Trajectory oracle_trajectory(const NetworkGraph& g, const std::vector<double>& z, const ProtocolParams& params,
                             const std::vector<bool>& active, const std::vector<Action>& actions, double t_end,
                             double interval, double dt = 0.0);  // 0 picks an eighth of the step bound

}  // namespace chemcons

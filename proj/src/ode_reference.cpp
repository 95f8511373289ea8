#include "chemcons/ode_reference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "chemcons/metrics.hpp"

namespace chemcons {

namespace {

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

bool all_active(const std::vector<bool>& active) {
  return std::all_of(active.begin(), active.end(), [](bool a) { return a; });
}

}  // namespace

void LinearModel::validate() const {
  const auto n = L.rows();
  if (L.cols() != n || z.size() != n || c0.size() != n) throw std::invalid_argument("model dimensions disagree");
  if (!active.empty() && static_cast<Eigen::Index>(active.size()) != n) {
    throw std::invalid_argument("activity mask size mismatch");
  }
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw std::invalid_argument("delta must be finite and non-negative");
}

Eigen::VectorXd LinearModel::derivative(const Eigen::VectorXd& c) const {
  Eigen::VectorXd d = -L * c;
  if (delta > 0.0) {
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      if (active.empty() || active[static_cast<std::size_t>(i)]) d(i) += delta * (z(i) - c(i));
    }
  }
  return d;
}

double LinearModel::max_step() const {
  const double degree = L.rows() == 0 ? 0.0 : L.diagonal().maxCoeff();
  return 0.1 / (degree + delta);
}

LinearModel make_model(const NetworkGraph& g, double delta, const std::vector<double>& z,
                       const std::vector<double>& c0, const std::vector<bool>& active) {
  LinearModel m;
  m.L = active.empty() ? laplacian(g) : laplacian(g, active);
  m.delta = delta;
  m.z = to_vector(z);
  m.c0 = to_vector(c0);
  m.active = active;
  m.validate();
  return m;
}

Eigen::VectorXd rk4_advance(const LinearModel& model, Eigen::VectorXd c, double t0, double t1, double dt) {
  if (!(t1 > t0)) return c;
  const auto steps = static_cast<long>(std::ceil((t1 - t0) / dt - 1e-12));
  const double h = (t1 - t0) / static_cast<double>(std::max(1L, steps));
  for (long s = 0; s < std::max(1L, steps); ++s) {
    const Eigen::VectorXd k1 = model.derivative(c);
    const Eigen::VectorXd k2 = model.derivative(c + 0.5 * h * k1);
    const Eigen::VectorXd k3 = model.derivative(c + 0.5 * h * k2);
    const Eigen::VectorXd k4 = model.derivative(c + h * k3);
    c += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return c;
}

namespace {

std::vector<double> sample_grid(double t_end, double interval) {
  if (!(interval > 0.0) || !std::isfinite(interval)) throw std::invalid_argument("sampling interval must be positive");
  std::vector<double> grid;
  const double slack = 1e-9 * interval;
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * interval;
    if (!(t < t_end - slack)) break;
    grid.push_back(t);
  }
  grid.push_back(t_end);
  return grid;
}

}  // namespace

Trajectory integrate(const LinearModel& model, double t_end, double dt, double interval) {
  model.validate();
  if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
  if (!(dt > 0.0) || dt > model.max_step()) {
    throw std::invalid_argument("RK4 step must lie in (0, 0.1 / (max degree + delta)]");
  }
  const std::vector<bool> mask = model.active.empty() ? std::vector<bool>(std::size_t(model.c0.size()), true) : model.active;
  Trajectory out;
  Eigen::VectorXd c = model.c0;
  double t = 0.0;
  for (double next : sample_grid(t_end, interval)) {
    c = rk4_advance(model, c, t, next, dt);
    t = next;
    out.push_back({t, to_std(c), mask});
  }
  return out;
}

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("matrix exponential needs a square matrix");
  const double norm = a.rows() == 0 ? 0.0 : a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Eigen::MatrixXd scaled = a / std::ldexp(1.0, squarings);

  const auto n = a.rows();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  for (int k = 1; k <= 30; ++k) {
    term = term * scaled / static_cast<double>(k);
    sum += term;
    if (term.cwiseAbs().maxCoeff() <= 1e-18 * sum.cwiseAbs().maxCoeff()) break;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

Eigen::VectorXd analytic_response(const LinearModel& model, double t) {
  model.validate();
  if (!(model.delta > 0.0)) {
    throw std::invalid_argument("analytic response needs delta > 0 (L + delta I is singular otherwise)");
  }
  if (!all_active(model.active)) throw std::invalid_argument("analytic response needs every node active");
  const auto n = model.L.rows();
  const Eigen::MatrixXd a = model.L + model.delta * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd e = matrix_exponential(-a * t);
  const Eigen::VectorXd forced = (Eigen::MatrixXd::Identity(n, n) - e) * (model.delta * model.z);
  return e * model.c0 + a.partialPivLu().solve(forced);
}

Eigen::VectorXd steady_state(const LinearModel& model) {
  model.validate();
  if (!(model.delta > 0.0)) throw std::invalid_argument("steady state needs delta > 0");
  if (!all_active(model.active)) throw std::invalid_argument("steady state needs every node active");
  const auto n = model.L.rows();
  const Eigen::MatrixXd a = model.L + model.delta * Eigen::MatrixXd::Identity(n, n);
  return a.partialPivLu().solve(model.delta * model.z);
}

double convergence_time_bound(double lambda2, double nmse0, double threshold) {
  if (!(lambda2 > 0.0)) throw std::invalid_argument("convergence bound needs lambda_2 > 0");
  if (!(threshold > 0.0)) throw std::invalid_argument("threshold must be positive");
  if (nmse0 <= threshold) return 0.0;
  return std::log(nmse0 / threshold) / (2.0 * lambda2);
}

double convergence_time_bound(const NetworkGraph& g, const std::vector<double>& initial, double threshold) {
  return convergence_time_bound(algebraic_connectivity(g), nmse(initial, initial), threshold);
}

Trajectory oracle_trajectory(const NetworkGraph& g, const std::vector<double>& z, const ProtocolParams& params,
                             const std::vector<bool>& active, const std::vector<Action>& actions, double t_end,
                             double interval, double dt) {
  const double delta = params.variant == Variant::full ? params.delta : 0.0;
  std::vector<bool> mask = active.empty() ? std::vector<bool>(g.size(), true) : active;
  std::vector<double> nominal = z;
  std::vector<double> factor(g.size(), 1.0);
  Eigen::VectorXd c = to_vector(z);

  auto model_now = [&] {
    std::vector<double> effective(nominal.size());
    for (std::size_t i = 0; i < nominal.size(); ++i) effective[i] = nominal[i] * factor[i];
    return make_model(g, delta, effective, to_std(c), mask);
  };
  if (dt <= 0.0) {
    std::size_t degree = 0;
    for (NodeIndex i = 0; i < g.size(); ++i) degree = std::max(degree, g.out_degree(i));
    dt = 0.0125 / (static_cast<double>(degree) + delta);
  }

  Trajectory out;
  LinearModel model = model_now();
  double t = 0.0;
  std::size_t next = 0;
  for (double sample_t : sample_grid(t_end, interval)) {
    while (next < actions.size() && actions[next].time <= sample_t) {
      const Action& a = actions[next++];
      c = rk4_advance(model, c, t, a.time, dt);
      t = std::max(t, a.time);
      const auto i = static_cast<Eigen::Index>(a.node);
      switch (a.kind) {
        case ActionKind::set_measurement:
          if (delta == 0.0 && mask[a.node]) c(i) = std::max(0.0, c(i) + a.value - nominal[a.node]);
          nominal[a.node] = a.value;
          break;
        case ActionKind::leave:
          mask[a.node] = false;
          break;
        case ActionKind::join:
          if (mask[a.node]) {
            if (delta == 0.0) c(i) = std::max(0.0, c(i) + a.value - nominal[a.node]);
          } else {
            mask[a.node] = true;
            c(i) = a.value;
          }
          nominal[a.node] = a.value;
          break;
        case ActionKind::perturb_begin:
          factor[a.node] = a.value;
          break;
        case ActionKind::perturb_end:
          factor[a.node] = 1.0;
          break;
      }
      model = model_now();
    }
    c = rk4_advance(model, c, t, sample_t, dt);
    t = sample_t;
    out.push_back({t, to_std(c), mask});
  }
  return out;
}

}  // namespace chemcons

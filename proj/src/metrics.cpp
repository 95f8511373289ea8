#include "chemcons/metrics.hpp"

#include <stdexcept>

namespace chemcons {

const char* const nmse_definition =
    "(1/M_active) * sum_active (x_i - z_avg)^2 / z_avg^2, z_avg = mean measurement of active nodes";
const char* const deviation_definition =
    "(1/M_active) * sum_active (x_i - x_avg)^2 / x_avg^2, x_avg = mean state of active nodes";

namespace {

bool is_active(const std::vector<bool>& active, std::size_t i) { return active.empty() || active[i]; }

double normalized_spread(const std::vector<double>& x, double centre, const std::vector<bool>& active) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!is_active(active, i)) continue;
    const double d = x[i] - centre;
    sum += d * d;
    ++n;
  }
  return sum / static_cast<double>(n) / (centre * centre);
}

}  // namespace

double active_mean(const std::vector<double>& x, const std::vector<bool>& active) {
  if (!active.empty() && active.size() != x.size()) throw std::invalid_argument("activity mask size mismatch");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!is_active(active, i)) continue;
    sum += x[i];
    ++n;
  }
  if (n == 0) throw std::invalid_argument("no active nodes");
  return sum / static_cast<double>(n);
}

double nmse(const std::vector<double>& state, const std::vector<double>& z_ref, const std::vector<bool>& active) {
  if (state.size() != z_ref.size()) throw std::invalid_argument("state and reference sizes differ");
  return nmse_about(state, active_mean(z_ref, active), active);
}

double nmse_about(const std::vector<double>& state, double z_avg, const std::vector<bool>& active) {
  if (!active.empty() && active.size() != state.size()) throw std::invalid_argument("activity mask size mismatch");
  return normalized_spread(state, z_avg, active);
}

double deviation(const std::vector<double>& state, const std::vector<bool>& active) {
  return normalized_spread(state, active_mean(state, active), active);
}

std::optional<double> convergence_time(const std::vector<double>& t, const std::vector<double>& nmse,
                                       double threshold) {
  if (t.size() != nmse.size()) throw std::invalid_argument("time and nmse series differ in length");
  std::size_t first = 0;
  for (std::size_t k = 0; k < nmse.size(); ++k) {
    if (!(nmse[k] < threshold)) first = k + 1;
  }
  if (first >= t.size()) return std::nullopt;
  return t[first];
}

}  // namespace chemcons

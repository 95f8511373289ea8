#pragma once

#include <optional>
#include <string>
#include <vector>

namespace chemcons {

/// (1/M_a) sum_a (x_i - z_avg)^2 / z_avg^2 over active nodes, z_avg the mean
/// of the active nodes' measurements. Empty mask means all active.
double nmse(const std::vector<double>& state, const std::vector<double>& z_ref, const std::vector<bool>& active = {});

/// The same with z_avg given directly.
double nmse_about(const std::vector<double>& state, double z_avg, const std::vector<bool>& active = {});

/// Mean over active nodes. Throws std::invalid_argument when none is active.
double active_mean(const std::vector<double>& x, const std::vector<bool>& active = {});

/// (1/M_a) sum_a (x_i - x_avg)^2 / x_avg^2, x_avg the mean active state.
double deviation(const std::vector<double>& state, const std::vector<bool>& active = {});

/// Earliest sample time from which every later sample has nmse < threshold.
std::optional<double> convergence_time(const std::vector<double>& t, const std::vector<double>& nmse,
                                       double threshold = 0.01);

/// Human-readable definitions, embedded in run records.
extern const char* const nmse_definition;
extern const char* const deviation_definition;

}  // namespace chemcons

#pragma once

// Run directories:
//   states.csv     t,node_0,...,node_{M-1}
//   metrics.csv    t,nmse,deviation
//   reference.csv  t,z_avg,active_0,...,active_{M-1}   (flags 0/1)
//   record.json    config, analysis, provenance, metric summary
//   oracle.csv     optional, states.csv layout, mean-field trajectory
// Doubles are written in shortest round-trip form, so reading back is exact.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "json.hpp"

#include "chemcons/scenario.hpp"

namespace chemcons {

std::string format_double(double value);
/// Throws ConfigError(schema) unless the whole field parses.
double parse_double(std::string_view text);

void write_states_csv(std::ostream& os, const Trajectory& samples);
/// Activity flags are not part of states.csv; every node reads as active.
Trajectory read_states_csv(std::istream& is);

void write_metrics_csv(std::ostream& os, const RunMetrics& metrics);
/// Fills t, nmse and deviation only.
RunMetrics read_metrics_csv(std::istream& is);

void write_reference_csv(std::ostream& os, const ReferenceSeries& reference);
ReferenceSeries read_reference_csv(std::istream& is);

nlohmann::json record_json(const RunRecord& record);

/// Creates `dir` if needed and writes the four run files.
void write_run(const RunRecord& record, const std::filesystem::path& dir);

struct PersistedRun {
  Trajectory samples;  // activity restored from reference.csv
  ReferenceSeries reference;
  RunMetrics metrics;
  nlohmann::json record;
};

PersistedRun read_run(const std::filesystem::path& dir);

}  // namespace chemcons

#include "chemcons/record_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "chemcons/error.hpp"
#include "chemcons/metrics.hpp"

namespace chemcons {

using nlohmann::json;

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return {buf, res.ptr};
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ConfigError(ErrorCode::schema, "malformed number '" + std::string(text) + "'");
  }
  return value;
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

// Reads the header and checks it against `prefix` followed by
// `per_node`_0 ... Returns the node count.
std::size_t read_header(std::istream& is, const std::vector<std::string>& prefix, const std::string& per_node) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError(ErrorCode::schema, "empty CSV");
  line = strip_cr(line);
  const auto fields = split(line);
  if (fields.size() < prefix.size()) throw ConfigError(ErrorCode::schema, "CSV header '" + line + "' is too short");
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (fields[i] != prefix[i]) throw ConfigError(ErrorCode::schema, "unexpected CSV header '" + line + "'");
  }
  const std::size_t nodes = fields.size() - prefix.size();
  if (per_node.empty() && nodes != 0) throw ConfigError(ErrorCode::schema, "unexpected CSV header '" + line + "'");
  for (std::size_t i = 0; i < nodes; ++i) {
    if (fields[prefix.size() + i] != per_node + "_" + std::to_string(i)) {
      throw ConfigError(ErrorCode::schema, "unexpected CSV column '" + std::string(fields[prefix.size() + i]) + "'");
    }
  }
  return nodes;
}

// Calls `row` with the parsed fields of each data line.
template <typename Row>
void read_rows(std::istream& is, std::size_t width, Row row) {
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != width) {
      throw ConfigError(ErrorCode::schema, "CSV line " + std::to_string(line_no) + " has " +
                                               std::to_string(fields.size()) + " fields, expected " +
                                               std::to_string(width));
    }
    row(fields);
  }
}

bool parse_flag(std::string_view text) {
  if (text == "1") return true;
  if (text == "0") return false;
  throw ConfigError(ErrorCode::schema, "activity flag must be 0 or 1, got '" + std::string(text) + "'");
}

}  // namespace

void write_states_csv(std::ostream& os, const Trajectory& samples) {
  const std::size_t m = samples.empty() ? 0 : samples.front().state.size();
  os << "t";
  for (std::size_t i = 0; i < m; ++i) os << ",node_" << i;
  os << '\n';
  for (const auto& s : samples) {
    os << format_double(s.t);
    for (double x : s.state) os << ',' << format_double(x);
    os << '\n';
  }
}

Trajectory read_states_csv(std::istream& is) {
  const std::size_t m = read_header(is, {"t"}, "node");
  Trajectory out;
  read_rows(is, m + 1, [&](const std::vector<std::string_view>& f) {
    TrajectorySample s;
    s.t = parse_double(f[0]);
    for (std::size_t i = 0; i < m; ++i) s.state.push_back(parse_double(f[i + 1]));
    s.active.assign(m, true);
    out.push_back(std::move(s));
  });
  return out;
}

void write_metrics_csv(std::ostream& os, const RunMetrics& metrics) {
  os << "t,nmse,deviation\n";
  for (std::size_t k = 0; k < metrics.t.size(); ++k) {
    os << format_double(metrics.t[k]) << ',' << format_double(metrics.nmse[k]) << ','
       << format_double(metrics.deviation[k]) << '\n';
  }
}

RunMetrics read_metrics_csv(std::istream& is) {
  read_header(is, {"t", "nmse", "deviation"}, "");
  RunMetrics m;
  read_rows(is, 3, [&](const std::vector<std::string_view>& f) {
    m.t.push_back(parse_double(f[0]));
    m.nmse.push_back(parse_double(f[1]));
    m.deviation.push_back(parse_double(f[2]));
  });
  return m;
}

void write_reference_csv(std::ostream& os, const ReferenceSeries& reference) {
  const std::size_t m = reference.empty() ? 0 : reference.front().active.size();
  os << "t,z_avg";
  for (std::size_t i = 0; i < m; ++i) os << ",active_" << i;
  os << '\n';
  for (const auto& r : reference) {
    os << format_double(r.t) << ',' << format_double(r.z_avg);
    for (bool a : r.active) os << ',' << (a ? '1' : '0');
    os << '\n';
  }
}

ReferenceSeries read_reference_csv(std::istream& is) {
  const std::size_t m = read_header(is, {"t", "z_avg"}, "active");
  ReferenceSeries out;
  read_rows(is, m + 2, [&](const std::vector<std::string_view>& f) {
    ReferenceSample r;
    r.t = parse_double(f[0]);
    r.z_avg = parse_double(f[1]);
    for (std::size_t i = 0; i < m; ++i) r.active.push_back(parse_flag(f[i + 2]));
    out.push_back(std::move(r));
  });
  return out;
}

json record_json(const RunRecord& record) {
  const auto& m = record.metrics;
  json metrics{{"threshold", m.threshold},
               {"convergence_time", m.convergence_time ? json(*m.convergence_time) : json(nullptr)},
               {"final_mean", std::isfinite(m.final_mean) ? json(m.final_mean) : json(nullptr)},
               {"nmse_definition", nmse_definition},
               {"deviation_definition", deviation_definition},
               {"samples", m.t.size()}};
  return json{{"config", to_json(record.config)},
              {"metrics", metrics},
              {"analysis", record.analysis ? *record.analysis : json(nullptr)},
              {"provenance", record.provenance},
              {"files", {"states.csv", "metrics.csv", "reference.csv"}}};
}

namespace {

template <typename Writer>
void write_file(const std::filesystem::path& path, Writer writer) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  writer(os);
  os.flush();
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  return is;
}

}  // namespace

void write_run(const RunRecord& record, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "states.csv", [&](std::ostream& os) { write_states_csv(os, record.samples); });
  write_file(dir / "metrics.csv", [&](std::ostream& os) { write_metrics_csv(os, record.metrics); });
  write_file(dir / "reference.csv", [&](std::ostream& os) { write_reference_csv(os, record.reference); });
  write_file(dir / "record.json", [&](std::ostream& os) { os << record_json(record).dump(2) << '\n'; });
}

PersistedRun read_run(const std::filesystem::path& dir) {
  PersistedRun run;
  {
    auto is = open_input(dir / "states.csv");
    run.samples = read_states_csv(is);
  }
  {
    auto is = open_input(dir / "reference.csv");
    run.reference = read_reference_csv(is);
  }
  {
    auto is = open_input(dir / "metrics.csv");
    run.metrics = read_metrics_csv(is);
  }
  {
    auto is = open_input(dir / "record.json");
    try {
      run.record = json::parse(is);
    } catch (const json::parse_error& e) {
      throw ConfigError(ErrorCode::schema, "record.json: " + std::string(e.what()));
    }
  }
  if (run.samples.size() != run.reference.size()) {
    throw ConfigError(ErrorCode::schema, "states.csv and reference.csv differ in length");
  }
  for (std::size_t k = 0; k < run.samples.size(); ++k) {
    if (run.samples[k].t != run.reference[k].t || run.samples[k].state.size() != run.reference[k].active.size()) {
      throw ConfigError(ErrorCode::schema, "states.csv and reference.csv disagree at row " + std::to_string(k + 1));
    }
    run.samples[k].active = run.reference[k].active;
  }
  return run;
}

}  // namespace chemcons

#include <bit>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "chemcons/error.hpp"
#include "chemcons/metrics.hpp"
#include "chemcons/record_io.hpp"
#include "chemcons/scenario.hpp"
#include "doctest.h"

using namespace chemcons;
using nlohmann::json;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("chemcons_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.code();
  }
  FAIL("no ConfigError thrown");
  return ErrorCode::runtime;
}

json small_config(const std::string& algorithm) {
  return json{{"topology", {{"kind", "small_world"}, {"M", 10}, {"edges", 30}, {"seed", 1}}},
              {"algorithm", algorithm},
              {"z", {{"indexed", "i"}}},
              {"params", {{"scale", 60}, {"warm_start", true}}},
              {"seed", 3},
              {"duration", 6.0},
              {"sample_interval", 0.5}};
}

double random_double(std::mt19937_64& rng) {
  for (;;) {
    const double d = std::bit_cast<double>(rng());
    if (std::isfinite(d)) return d;
  }
}

}  // namespace

TEST_CASE("metric definitions") {
  CHECK(nmse({4, 4, 4}, {3, 4, 5}) == 0.0);
  // (100^2 + 100^2) / 2 / 400^2
  CHECK(nmse({500, 300}, {400, 400}) == 0.0625);
  CHECK(nmse({5, 3}, {4, 4}) == doctest::Approx(nmse({500, 300}, {400, 400})).epsilon(1e-15));
  // (1 + 1) / 2 / 3^2
  CHECK(deviation({2, 4}) == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
  CHECK(deviation({7, 7, 7}) == 0.0);

  SUBCASE("inactive nodes are ignored") {
    CHECK(nmse({500, 300, 1e9}, {400, 400, 0}, {true, true, false}) == 0.0625);
    CHECK(deviation({2, 4, 100}, {true, true, false}) == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
    CHECK(nmse_about({500, 300}, 400.0) == nmse({500, 300}, {400, 400}));
    CHECK_THROWS_AS(active_mean({1, 2}, {false, false}), std::invalid_argument);
  }

  SUBCASE("convergence time") {
    CHECK(convergence_time({0, 1, 2}, {0.005, 0.005, 0.005}) == 0.0);
    CHECK(convergence_time({0, 1, 2, 3}, {1.0, 0.1, 0.009, 0.001}) == 2.0);
    CHECK(convergence_time({0, 1, 2, 3}, {1.0, 0.005, 0.02, 0.001}) == 3.0);
    CHECK_FALSE(convergence_time({0, 1}, {1.0, 0.5}).has_value());
    CHECK(convergence_time({0, 1, 2}, {1.0, 0.05, 0.02}, 0.1) == 1.0);
  }
}

TEST_CASE("shortest round-trip doubles") {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 20000; ++k) {
    const double d = random_double(rng);
    CHECK(std::bit_cast<std::uint64_t>(parse_double(format_double(d))) == std::bit_cast<std::uint64_t>(d));
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(400.0) == "400");
  CHECK(std::isnan(parse_double(format_double(std::numeric_limits<double>::quiet_NaN()))));
  CHECK(parse_double(format_double(-std::numeric_limits<double>::infinity())) == -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(parse_double("1.5x"), ConfigError);
  CHECK_THROWS_AS(parse_double(""), ConfigError);
}

TEST_CASE("CSV round trips are bit-exact") {
  std::mt19937_64 rng(22);
  std::uniform_int_distribution<std::size_t> width(1, 12);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = width(rng);
    Trajectory traj;
    ReferenceSeries ref;
    RunMetrics metrics;
    double t = 0.0;
    for (int k = 0; k < 20; ++k) {
      t += std::ldexp(double(rng() % 1000 + 1), -7);
      TrajectorySample s{t, {}, {}};
      ReferenceSample r{t, random_double(rng), {}};
      for (std::size_t i = 0; i < m; ++i) {
        s.state.push_back(random_double(rng));
        s.active.push_back(true);
        r.active.push_back(rng() % 3 != 0);
      }
      traj.push_back(s);
      ref.push_back(r);
      metrics.t.push_back(t);
      metrics.nmse.push_back(random_double(rng));
      metrics.deviation.push_back(random_double(rng));
    }
    std::stringstream a, b, c;
    write_states_csv(a, traj);
    write_reference_csv(b, ref);
    write_metrics_csv(c, metrics);
    CHECK(read_states_csv(a) == traj);
    CHECK(read_reference_csv(b) == ref);
    const auto back = read_metrics_csv(c);
    CHECK(back.t == metrics.t);
    CHECK(back.nmse == metrics.nmse);
    CHECK(back.deviation == metrics.deviation);
  }

  SUBCASE("schema checks") {
    std::stringstream bad_header("t,node_1\n0,1\n");
    CHECK_THROWS_AS(read_states_csv(bad_header), ConfigError);
    std::stringstream short_row("t,node_0,node_1\n0,1\n");
    CHECK_THROWS_AS(read_states_csv(short_row), ConfigError);
    std::stringstream flag("t,z_avg,active_0\n0,1,2\n");
    CHECK_THROWS_AS(read_reference_csv(flag), ConfigError);
    std::stringstream crlf("t,nmse,deviation\r\n0,0.5,0.25\r\n");
    CHECK(read_metrics_csv(crlf).nmse == std::vector<double>{0.5});
  }
}

TEST_CASE("scenario parsing") {
  SUBCASE("defaults and resolved form") {
    const auto c = parse_scenario(small_config("chemical-full"));
    CHECK(c.topology.kind == TopologyKind::small_world);
    CHECK(c.topology.nodes == 10);
    CHECK(c.z == std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    CHECK(c.protocol.variant == Variant::full);
    CHECK(c.protocol.scale == 60);
    CHECK(c.protocol.lambda == 100.0);
    CHECK(c.protocol.delta == 0.1);
    CHECK(c.gossip.mu == 2.0);
    CHECK(c.gossip.mix == 0.5);
    CHECK(c.protocol.seed == 3);
    CHECK(c.gossip.seed == 3);
    CHECK(c.active == std::vector<bool>(10, true));
    CHECK(to_json(parse_scenario(to_json(c))) == to_json(c));
  }

  SUBCASE("measurement forms") {
    auto doc = small_config("rn");
    doc["z"] = {{"indexed", "10*i"}};
    CHECK(parse_scenario(doc).z.back() == 100.0);
    doc["z"] = {{"indexed", "i * 0.5"}};
    CHECK(parse_scenario(doc).z.front() == 0.5);
    doc["z"] = {{"uniform", {2.0, 4.0}}, {"seed", 9}};
    const auto drawn = parse_scenario(doc).z;
    CHECK(drawn == parse_scenario(doc).z);
    for (double v : drawn) CHECK((v >= 2.0 && v <= 4.0));
    doc["z"] = std::vector<double>(10, 7.0);
    doc["params"].erase("scale");
    CHECK(parse_scenario(doc).protocol.scale == 43);
    CHECK(default_scale({0.0, 0.5, 3.0}) == 600);
    CHECK(default_scale({0.0}) == 300);
  }

  SUBCASE("events and inactive nodes") {
    auto doc = small_config("chemical-full");
    doc["events"] = json::array({{{"time", 5}, {"kind", "node_leave"}, {"node", 0}},
                                 {{"time", 20}, {"kind", "node_join"}, {"node", 9}, {"value", 100}},
                                 {{"time", 21}, {"kind", "transient_error"}, {"node", 1}, {"value", 0.5}, {"duration", 2}}});
    doc["initially_inactive"] = {9};
    const auto c = parse_scenario(doc);
    CHECK(c.events.size() == 3);
    CHECK(c.events[2].duration == 2.0);
    CHECK_FALSE(c.active[9]);
    CHECK(to_json(parse_scenario(to_json(c))) == to_json(c));
  }

  SUBCASE("each failure class has its own code") {
    auto missing = small_config("rn");
    missing.erase("duration");
    CHECK(code_of([&] { parse_scenario(missing); }) == ErrorCode::schema);
    auto typo = small_config("rn");
    typo["durration"] = 3;
    CHECK(code_of([&] { parse_scenario(typo); }) == ErrorCode::schema);
    auto wrong_type = small_config("rn");
    wrong_type["topology"]["M"] = "ten";
    CHECK(code_of([&] { parse_scenario(wrong_type); }) == ErrorCode::schema);
    auto bad_z = small_config("rn");
    bad_z["z"] = {1, 2, 3};
    CHECK(code_of([&] { parse_scenario(bad_z); }) == ErrorCode::schema);
    auto bad_event = small_config("rn");
    bad_event["events"] = json::array({{{"time", 1}, {"kind", "node_leave"}, {"node", 40}}});
    CHECK(code_of([&] { parse_scenario(bad_event); }) == ErrorCode::schema);
    CHECK(code_of([&] { parse_scenario(small_config("gossip")); }) == ErrorCode::unknown_algorithm);
    auto lattice = small_config("chemical-basic");
    lattice["topology"] = {{"kind", "lattice"}, {"M", 5}, {"k", 3}};
    const auto c = parse_scenario(lattice);
    CHECK(code_of([&] { run_scenario(c); }) == ErrorCode::infeasible_topology);
    CHECK(code_of([&] { load_scenario("/nonexistent/scenario.json"); }) == ErrorCode::schema);
  }
}

TEST_CASE("reference series") {
  const Trajectory samples{{0.0, {0, 0, 0}, {true, true, false}},
                           {1.0, {0, 0, 0}, {true, true, false}},
                           {2.0, {0, 0, 0}, {true, true, true}},
                           {3.0, {0, 0, 0}, {false, false, false}}};
  const std::vector<Action> actions{{1.0, ActionKind::set_measurement, 0, 5.0},
                                    {1.5, ActionKind::perturb_begin, 1, 9.0},
                                    {2.0, ActionKind::join, 2, 9.0}};
  const auto ref = reference_series({1, 3, 100}, actions, samples);
  CHECK(ref[0].z_avg == 2.0);
  CHECK(ref[1].z_avg == 4.0);
  CHECK(ref[2].z_avg == doctest::Approx(17.0 / 3.0));
  CHECK(std::isnan(ref[3].z_avg));
  const auto m = compute_metrics(samples, ref);
  CHECK(std::isnan(m.nmse[3]));
  CHECK(m.nmse[0] == 1.0);
}

TEST_CASE("runs persist and recompute exactly") {
  ::setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  for (const std::string algorithm : {"chemical-basic", "chemical-full", "rn", "br"}) {
    CAPTURE(algorithm);
    auto doc = small_config(algorithm);
    doc["events"] = json::array({{{"time", 2}, {"kind", "node_leave"}, {"node", 0}},
                                 {{"time", 4}, {"kind", "node_join"}, {"node", 0}, {"value", 3}}});
    const auto config = parse_scenario(doc);
    const auto record = run_scenario(config);
    CHECK(record.samples.size() == 13);
    CHECK(record.analysis.has_value() == is_chemical(config.algorithm));
    CHECK_FALSE(record.samples[5].active[0]);
    CHECK(record.samples[8].active[0]);

    const auto dir = scratch_dir(algorithm);
    write_run(record, dir);
    const auto back = read_run(dir);
    CHECK(back.samples == record.samples);
    CHECK(back.reference == record.reference);
    const auto recomputed = compute_metrics(back.samples, back.reference);
    CHECK(recomputed == record.metrics);
    CHECK(back.metrics.nmse == record.metrics.nmse);
    CHECK(back.record["config"] == to_json(config));
    CHECK(back.record["provenance"]["timestamp"] == "2023-11-14T22:13:20Z");
    CHECK(back.record["metrics"]["nmse_definition"] == nmse_definition);

    const auto again = scratch_dir(algorithm + "_again");
    write_run(run_scenario(parse_scenario(doc)), again);
    for (const char* file : {"states.csv", "metrics.csv", "reference.csv", "record.json"}) {
      CHECK(slurp(dir / file) == slurp(again / file));
    }
    std::filesystem::remove_all(dir);
    std::filesystem::remove_all(again);
  }

  SUBCASE("analysis report of the consensus network") {
    const auto report = consensus_analysis(make_ring(5));
    CHECK(report["complexes"] == 5);
    CHECK(report["deficiency"] == 0);
    CHECK(report["verdict"] == "stable_unique_fixed_point");
  }

  SUBCASE("oracle") {
    const auto c = parse_scenario(small_config("chemical-full"));
    const auto traj = run_oracle(c);
    CHECK(traj.size() == 13);
    CHECK(code_of([&] { run_oracle(parse_scenario(small_config("br"))); }) == ErrorCode::invalid_argument);
  }
}

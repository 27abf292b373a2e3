#include <catch_amalgamated.hpp>

#include <filesystem>

#include "test_support.hpp"

using namespace pulseforge;
using Catch::Approx;

namespace {

const SystemParams kGaAs{2.0 * pi * 0.5e9};

ControlSchedule not_gate() { return synthesize_gate(NotGate{{pi / 3.0, pi / 4.0}}, kGaAs); }

ErrorKind parse_error(const std::string& text) {
  try {
    io::parse_schedule(text);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected a parse error");
  return ErrorKind::InvalidInput;
}

std::filesystem::path scratch_dir() {
  auto d = std::filesystem::temp_directory_path() / "pulseforge_io_test";
  std::filesystem::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("number and state formatting is lossless", "[io]") {
  for (double x : {0.0, -0.0, 1.0 / 3.0, 1e-300, 6.02214076e23, -pi}) {
    CHECK(io::parse_double(io::fmt(x), "x") == x);
  }
  Vector4c c(cplx(0.1, -0.2), cplx(1.0 / 3.0, 0.0), cplx(0.0, 1e-17), cplx(-5.0, 7.0));
  CHECK(io::parse_state(io::format_state(c)) == c);
  CHECK_THROWS_AS(io::parse_double("1.5x", "x"), Error);
  CHECK_THROWS_AS(io::parse_double("", "x"), Error);
  CHECK_THROWS_AS(io::parse_state("1:0;0:0"), Error);
}

TEST_CASE("schedule round trip preserves samples and metadata", "[io]") {
  const auto s = not_gate();
  for (auto format : {io::Format::Csv, io::Format::Json}) {
    const std::string text =
        format == io::Format::Csv ? io::schedule_to_csv(s) : io::schedule_to_json(s);
    const auto back = io::parse_schedule(text);
    REQUIRE(back.samples.size() == s.samples.size());
    for (std::size_t i = 0; i < s.samples.size(); ++i) {
      REQUIRE(back.samples[i].t == s.samples[i].t);
      REQUIRE(back.samples[i].tau == s.samples[i].tau);
      REQUIRE(back.samples[i].alpha == s.samples[i].alpha);
    }
    CHECK(back.duration == s.duration);
    CHECK(back.params.delta == s.params.delta);
    CHECK(back.meta.theta == s.meta.theta);
    CHECK(back.meta.gate == "not");
    CHECK(back.meta.branch == s.meta.branch);
    CHECK(back.meta.theta_candidates == s.meta.theta_candidates);
    CHECK(*back.meta.psi0 == *s.meta.psi0);
    CHECK(*back.meta.target == *s.meta.target);
    CHECK(back.has_angles());
    CHECK_FALSE(back.analytic_controls);
  }
}

TEST_CASE("reloaded schedules give bit-identical trajectories", "[io]") {
  const auto dir = scratch_dir();
  const auto s = not_gate();
  io::save_schedule(dir / "a.csv", s);
  const auto once = io::load_schedule(dir / "a.csv");
  io::save_schedule(dir / "b.csv", once);
  CHECK(io::read_file(dir / "a.csv") == io::read_file(dir / "b.csv"));
  const auto twice = io::load_schedule(dir / "b.csv");

  const StateVector psi0 = StateVector::normalized(*s.meta.psi0);
  const auto t1 = integrate(once, psi0, grid_for(once));
  const auto t2 = integrate(twice, psi0, grid_for(twice));
  const auto f1 = fidelity_trace(t1, StateVector::normalized(*s.meta.target));
  const auto f2 = fidelity_trace(t2, StateVector::normalized(*s.meta.target));
  CHECK(io::trajectory_to_csv(t1, &f1) == io::trajectory_to_csv(t2, &f2));

  // JSON and CSV carry the same numbers
  io::save_schedule(dir / "c.json", s, io::Format::Json);
  const auto js = io::load_schedule(dir / "c.json");
  const auto t3 = integrate(js, psi0, grid_for(js));
  CHECK(io::trajectory_to_csv(t1, nullptr) == io::trajectory_to_csv(t3, nullptr));
  CHECK_FALSE(std::filesystem::exists(dir / "a.csv.tmp"));
}

TEST_CASE("trajectory tables", "[io]") {
  const auto s = not_gate();
  const auto traj = integrate(s, StateVector::normalized(*s.meta.psi0), grid_for(s, 200));
  const std::string csv = io::trajectory_to_csv(traj, nullptr);
  std::stringstream ss(csv);
  std::string line;
  std::getline(ss, line);
  CHECK(line == io::trajectory_columns);
  std::size_t rows = 0;
  while (std::getline(ss, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 16);
    CHECK(line.substr(line.size() - 3) == "nan");
  }
  CHECK(rows == 201);

  const auto j = nlohmann::json::parse(io::trajectory_to_json(traj, nullptr));
  CHECK(j.at("t").size() == 201);
  CHECK(j.at("fidelity")[0].is_null());
  CHECK(j.at("p2").back().get<double>() == Approx(0.75).margin(1e-3));
}

TEST_CASE("malformed schedules are rejected", "[io]") {
  const std::string good = io::schedule_to_csv(not_gate());

  CHECK(parse_error("") == ErrorKind::InvalidInput);
  CHECK(parse_error("# delta=1\n# T=1\n") == ErrorKind::InvalidInput);
  CHECK(parse_error("# T=1\nt,tau,re_alpha,im_alpha\n0,0,0,0\n1,0,0,0\n") ==
        ErrorKind::InvalidInput);
  CHECK(parse_error("# delta=1\n# T=1\nt,tau,re_alpha,im_alpha\n0,0,0\n1,0,0,0\n") ==
        ErrorKind::InvalidInput);
  CHECK(parse_error("# delta=1\n# T=1\nt,tau,re_alpha,im_alpha\n0,0,0,0\n0.5,abc,0,0\n1,0,0,0\n") ==
        ErrorKind::InvalidInput);
  // not strictly increasing
  CHECK(parse_error("# delta=1\n# T=1\nt,tau,re_alpha,im_alpha\n0,0,0,0\n0.5,1,0,0\n0.5,1,0,0\n1,0,0,0\n") ==
        ErrorKind::InvalidInput);
  // controls switched on at the end
  CHECK(parse_error("# delta=1\n# T=1\nt,tau,re_alpha,im_alpha\n0,0,0,0\n1,0.5,0,0\n") ==
        ErrorKind::InvalidInput);
  // last sample is not T
  CHECK(parse_error("# delta=1\n# T=2\nt,tau,re_alpha,im_alpha\n0,0,0,0\n1,0,0,0\n") ==
        ErrorKind::InvalidInput);
  CHECK(parse_error("# delta=-1\n# T=1\nt,tau,re_alpha,im_alpha\n0,0,0,0\n1,0,0,0\n") ==
        ErrorKind::InvalidInput);
  CHECK(parse_error("{\"header\": {\"delta\": \"1\"}}") == ErrorKind::InvalidInput);
  CHECK(parse_error("{ not json") == ErrorKind::InvalidInput);

  std::string wrong_count = good;
  wrong_count.replace(wrong_count.find("# n_samples=2000"), 16, "# n_samples=1999");
  CHECK(parse_error(wrong_count) == ErrorKind::InvalidInput);

  CHECK_THROWS_AS(io::load_schedule("/nonexistent/dir/file.csv"), Error);
}

TEST_CASE("files without generating angles load for simulation only", "[io]") {
  const auto s = io::parse_schedule(
      "# delta=2\n# T=1\nt,tau,re_alpha,im_alpha\n0,0,0,0\n0.5,0.3,0.1,-0.1\n1,0,0,0\n");
  CHECK_FALSE(s.has_angles());
  const auto traj = integrate(s, StateVector::basis(1), grid_for(s, 100));
  CHECK(traj.size() == 101);
  CHECK_THROWS_AS(compare_analytic(s, StateVector::basis(1), grid_for(s, 100)), Error);
}

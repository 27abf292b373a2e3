// pulseforge: synthesize, simulate, and verify double-dot control pulses.
//
// Exit codes: 0 success, 2 invalid input, 3 infeasible target,
// 4 verification or integration failure.

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include <pulseforge/pulseforge.hpp>

namespace fs = std::filesystem;
using namespace pulseforge;

namespace {

struct Options {
  std::string plan_path;
  std::string schedule_path;
  std::string out_dir;
  std::size_t steps = default_steps;
  double tol = 1e-7;
  std::string branch = "min-theta";
  std::string format = "csv";
  std::string psi0;
  std::string target;
};

io::Format parse_format(const std::string& f) {
  if (f == "csv") return io::Format::Csv;
  if (f == "json") return io::Format::Json;
  throw Error(ErrorKind::InvalidInput, "--format must be csv or json");
}

const char* extension(io::Format f) { return f == io::Format::Csv ? ".csv" : ".json"; }

std::string describe_angle(double rad) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.6f rad (%.6f pi)", rad, rad / pi);
  return buf;
}

std::string short_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

std::string describe_amp(cplx c) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.6f%+.6fi", c.real(), c.imag());
  return buf;
}

/// "1".."4", "left:chi,mu", "right:chi,mu", or "re:im;re:im;re:im;re:im".
StateVector parse_state_arg(const std::string& text) {
  if (text.size() == 1 && text[0] >= '1' && text[0] <= '4') return StateVector::basis(text[0] - '0');
  auto qubit = [&](const std::string& body, bool left) {
    const auto comma = body.find(',');
    const double chi = plan::parse_angle(body.substr(0, comma));
    const double mu = comma == std::string::npos ? 0.0 : plan::parse_angle(body.substr(comma + 1));
    return left ? StateVector::left_qubit(chi, mu) : StateVector::right_qubit(chi, mu);
  };
  if (text.rfind("left:", 0) == 0) return qubit(text.substr(5), true);
  if (text.rfind("right:", 0) == 0) return qubit(text.substr(6), false);
  return StateVector::normalized(io::parse_state(text));
}

fs::path output_dir(const Options& opt, const plan::Plan& p) {
  return opt.out_dir.empty() ? p.out_dir : fs::path(opt.out_dir);
}

std::size_t steps_for(const Options& opt, const CLI::App& sub, const plan::Plan& p) {
  return sub.count("--steps") ? opt.steps : p.steps;
}

void print_schedule_summary(const ControlSchedule& s) {
  std::cout << "  theta    = " << describe_angle(s.meta.theta) << "\n"
            << "  T        = " << io::fmt(s.duration * 1e9) << " ns\n"
            << "  branch   = " << s.meta.branch << " of " << s.meta.theta_candidates.size()
            << " candidate(s):";
  for (double th : s.meta.theta_candidates) std::cout << " " << io::fmt(th);
  std::cout << "\n";
}

/// Synthesizes and verifies every stage of the plan whose kind matches.
int run_synthesis(const Options& opt, const CLI::App& sub, bool preparation) {
  const plan::Plan p = plan::load_plan(opt.plan_path);
  const BranchRule cli_rule = plan::parse_branch(opt.branch);
  const io::Format fmt = sub.count("--format") ? parse_format(opt.format) : p.format;
  const std::size_t steps = steps_for(opt, sub, p);
  const fs::path out = output_dir(opt, p);

  int handled = 0;
  bool failed = false;
  for (std::size_t i = 0; i < p.stages.size(); ++i) {
    const auto& st = p.stages[i];
    const bool is_prep = std::holds_alternative<PrepareGate>(st.gate);
    if (is_prep != preparation) continue;
    ++handled;
    if (!st.has_initial)
      throw Error(ErrorKind::InvalidInput,
                  "stage " + std::to_string(i + 1) + " needs an explicit initial qubit");
    const BranchRule rule = sub.count("--branch") ? cli_rule : st.branch.value_or(cli_rule);
    ControlSchedule s;
    try {
      s = synthesize_gate(st.gate, p.system, st.ansatz, rule);
    } catch (const Error& e) {
      throw Error(e.kind(), "stage " + std::to_string(i + 1) + " (" + st.label + "): " + e.detail());
    }

    const StateVector psi0(*s.meta.psi0);
    const Vector4c predicted = s.propagator_at(s.duration) * psi0.amplitudes();
    const TimeGrid grid = grid_for(s, steps);
    const Trajectory traj = integrate(s, psi0, grid);
    const double err = compare_analytic(s, psi0, grid);
    const double fid = state_fidelity(*s.meta.target, traj.final_state());

    const fs::path file = out / ("stage" + std::to_string(i + 1) + "_" + s.meta.gate +
                                 ".schedule" + extension(fmt));
    io::save_schedule(file, s, fmt);

    std::cout << "stage " << (i + 1) << " [" << s.meta.gate << "] " << st.label << "\n";
    print_schedule_summary(s);
    std::cout << "  predicted final amplitudes:";
    for (int k = 0; k < 4; ++k) std::cout << " b" << (k + 1) << "=" << describe_amp(predicted(k));
    std::cout << "\n  ODE fidelity vs target = " << io::fmt(fid) << "\n"
              << "  max |psi_ode - U psi0| = " << io::fmt(err) << " (tol " << short_num(opt.tol)
              << ") " << (err <= opt.tol ? "PASS" : "FAIL") << "\n"
              << "  schedule -> " << file.string() << "\n";
    if (err > opt.tol) failed = true;
  }
  if (handled == 0)
    throw Error(ErrorKind::InvalidInput,
                std::string("plan has no ") + (preparation ? "prepare" : "transport gate") + " stage");
  return failed ? 4 : 0;
}

int run_simulate(const Options& opt) {
  const fs::path path = opt.schedule_path;
  const ControlSchedule s = io::load_schedule(path);
  const StateVector psi0 = !opt.psi0.empty()   ? parse_state_arg(opt.psi0)
                           : s.meta.psi0       ? StateVector::normalized(*s.meta.psi0)
                                               : StateVector::basis(1);
  std::optional<StateVector> target;
  if (!opt.target.empty()) target = parse_state_arg(opt.target);
  else if (s.meta.target) target = StateVector::normalized(*s.meta.target);

  const Trajectory traj = integrate(s, psi0, grid_for(s, opt.steps));
  std::optional<FidelityTrace> fid;
  if (target) fid = fidelity_trace(traj, *target);

  const io::Format fmt = parse_format(opt.format);
  const fs::path dir = opt.out_dir.empty() ? path.parent_path() : fs::path(opt.out_dir);
  std::string stem = path.filename().string();
  for (const char* suffix : {".csv", ".json"})
    if (stem.size() > std::strlen(suffix) && stem.ends_with(suffix)) stem.resize(stem.size() - std::strlen(suffix));
  if (stem.ends_with(".schedule")) stem.resize(stem.size() - 9);
  const fs::path file = dir / (stem + ".trajectory" + extension(fmt));
  io::write_atomic(file, fmt == io::Format::Csv ? io::trajectory_to_csv(traj, fid ? &*fid : nullptr)
                                                : io::trajectory_to_json(traj, fid ? &*fid : nullptr));

  const auto& last = traj.populations.back();
  std::cout << "rows = " << traj.size() << "\n"
            << "final populations = " << io::fmt(last[0]) << " " << io::fmt(last[1]) << " "
            << io::fmt(last[2]) << " " << io::fmt(last[3]) << "\n";
  if (fid) std::cout << "final fidelity = " << io::fmt(fid->fidelity.back()) << "\n";
  std::cout << "trajectory -> " << file.string() << "\n";
  return 0;
}

int run_verify(const Options& opt) {
  const ControlSchedule s = io::load_schedule(opt.schedule_path);
  if (!s.has_angles())
    throw Error(ErrorKind::UnsupportedComparison,
                "schedule header lacks theta/gamma_final for a cosine ramp");
  const TimeGrid grid = grid_for(s, opt.steps);
  double worst = 0.0;
  for (int n = 1; n <= 4; ++n) worst = std::max(worst, compare_analytic(s, StateVector::basis(n), grid));
  double unitarity = 0.0;
  for (std::size_t k = 0; k <= (s.duration > 0.0 ? grid.n_steps : 0); ++k) {
    const Matrix4c u = s.propagator_at(grid.time(k));
    unitarity = std::max(unitarity, (u.adjoint() * u - Matrix4c::Identity()).cwiseAbs().maxCoeff());
  }
  const bool pass = worst <= opt.tol;
  std::cout << "max analytic-vs-numeric error = " << io::fmt(worst) << "\n"
            << "max unitarity residual        = " << io::fmt(unitarity) << "\n"
            << "tolerance                     = " << short_num(opt.tol) << "\n"
            << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? 0 : 4;
}

nlohmann::ordered_json state_json(const chain::ChainState& c) {
  return {{"boundary", c.stage},
          {"label", c.label},
          {"time_ns", c.time * 1e9},
          {"down", {c.down.real(), c.down.imag()}},
          {"up", {c.up.real(), c.up.imag()}},
          {"relative_phase", c.relative_phase()},
          {"bloch", c.bloch}};
}

int run_chain(const Options& opt, const CLI::App& sub) {
  const plan::Plan p = plan::load_plan(opt.plan_path);
  const BranchRule rule = plan::parse_branch(opt.branch);
  const io::Format fmt = sub.count("--format") ? parse_format(opt.format) : p.format;
  const fs::path out = output_dir(opt, p);
  const chain::ChainResult r = chain::run_chain(p, rule, steps_for(opt, sub, p));

  nlohmann::ordered_json report;
  report["stages"] = nlohmann::json::array();
  for (std::size_t k = 0; k < r.stages.size(); ++k) {
    const auto& st = r.stages[k];
    const fs::path file = out / ("stage" + std::to_string(k + 1) + "_" + st.schedule.meta.gate +
                                 ".schedule" + extension(fmt));
    io::save_schedule(file, st.schedule, fmt);
    std::cout << "stage " << (k + 1) << " [" << st.schedule.meta.gate << "] " << st.label << "\n";
    print_schedule_summary(st.schedule);
    std::cout << "  window   = [" << io::fmt(st.start * 1e9) << ", " << io::fmt(st.end * 1e9)
              << "] ns\n"
              << "  ODE fidelity vs stage target = " << io::fmt(st.target_fidelity_ode) << "\n"
              << "  schedule -> " << file.string() << "\n";
    report["stages"].push_back({{"label", st.label},
                                {"gate", st.schedule.meta.gate},
                                {"theta", st.schedule.meta.theta},
                                {"duration_ns", st.schedule.duration * 1e9},
                                {"t_end_ns", st.end * 1e9},
                                {"ode_target_fidelity", st.target_fidelity_ode},
                                {"schedule", file.string()}});
  }
  std::cout << "boundaries (analytic | ODE):\n";
  report["boundaries"] = nlohmann::json::array();
  for (std::size_t k = 0; k < r.boundaries.size(); ++k) {
    const auto& a = r.boundaries[k];
    const auto& o = r.ode_boundaries[k];
    char line[256];
    std::snprintf(line, sizeof line,
                  "  t%zu = %8.4f ns  bloch (%+.6f, %+.6f, %+.6f) | (%+.6f, %+.6f, %+.6f)  phase %+.6f\n",
                  k, a.time * 1e9, a.bloch[0], a.bloch[1], a.bloch[2], o.bloch[0], o.bloch[1],
                  o.bloch[2], a.relative_phase());
    std::cout << line;
    auto j = state_json(a);
    j["ode"] = state_json(o);
    report["boundaries"].push_back(j);
  }
  const double limit = opt.tol * static_cast<double>(r.stages.size());
  const bool pass = r.deviation() <= limit;
  std::cout << "end-to-end |psi_analytic - psi_ode| = " << io::fmt(r.deviation()) << " (tol "
            << short_num(limit) << ") " << (pass ? "PASS" : "FAIL") << "\n"
            << "end-to-end fidelity analytic vs ODE = " << io::fmt(r.agreement()) << "\n";
  report["deviation"] = r.deviation();
  report["agreement"] = r.agreement();
  report["pass"] = pass;
  io::write_atomic(out / "chain_report.json", report.dump(2) + "\n");
  return pass ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inverse-engineered tunneling and spin-orbit pulses for double quantum dots"};
  app.require_subcommand(1);
  Options opt;

  auto add_plan_opts = [&](CLI::App* c) {
    c->add_option("--plan", opt.plan_path, "Plan document (JSON)")->required();
    c->add_option("--out", opt.out_dir, "Output directory (default: plan io.out_dir)");
    c->add_option("--steps", opt.steps, "RK4 steps per stage")->check(CLI::PositiveNumber);
    c->add_option("--tol", opt.tol, "Tolerance on analytic-vs-numeric deviation");
    c->add_option("--branch", opt.branch, "Mixing-angle branch: min-theta or an index");
    c->add_option("--format", opt.format, "Schedule file format")->check(CLI::IsMember({"csv", "json"}));
  };

  auto* prepare = app.add_subcommand("prepare", "Synthesize qubit-preparation stages of a plan");
  add_plan_opts(prepare);
  auto* gate = app.add_subcommand("gate", "Synthesize transport gate stages of a plan");
  add_plan_opts(gate);
  auto* chain_cmd = app.add_subcommand("chain", "Run all plan stages as a dot-chain sequence");
  add_plan_opts(chain_cmd);

  auto* simulate = app.add_subcommand("simulate", "Integrate a schedule file and export a trajectory");
  simulate->add_option("--schedule", opt.schedule_path, "Schedule file")->required();
  simulate->add_option("--psi0", opt.psi0, "Initial state: 1..4, left:chi,mu, right:chi,mu, or re:im;...");
  simulate->add_option("--target", opt.target, "Target state for the fidelity column");
  simulate->add_option("--steps", opt.steps, "RK4 steps")->check(CLI::PositiveNumber);
  simulate->add_option("--out", opt.out_dir, "Output directory (default: next to the schedule)");
  simulate->add_option("--format", opt.format, "Trajectory format")->check(CLI::IsMember({"csv", "json"}));

  auto* verify = app.add_subcommand("verify", "Compare a schedule's ODE solution with the closed form");
  verify->add_option("--schedule", opt.schedule_path, "Schedule file")->required();
  verify->add_option("--tol", opt.tol, "Pass threshold on the maximum deviation");
  verify->add_option("--steps", opt.steps, "RK4 steps")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*prepare) return run_synthesis(opt, *prepare, true);
    if (*gate) return run_synthesis(opt, *gate, false);
    if (*simulate) return run_simulate(opt);
    if (*verify) return run_verify(opt);
    if (*chain_cmd) return run_chain(opt, *chain_cmd);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

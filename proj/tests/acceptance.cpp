// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include <pulseforge/pulseforge.hpp>

using namespace pulseforge;

namespace {

std::mt19937_64 gen(77031);
double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); }

const SystemParams kGaAs{2.0 * pi * 0.5e9};

int failures = 0;

void report(const char* id, const char* name, bool pass, const std::string& detail) {
  std::printf("%s %s %s: %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
  if (!pass) ++failures;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

/// Distance between two states after removing the global phase.
double phase_free_distance(const Vector4c& a, const Vector4c& b) {
  const cplx overlap = a.dot(b);
  const cplx rot = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : cplx(1.0);
  return (a * rot - b).norm();
}

void guarded(const char* id, const char* name, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, name, false, std::string("threw ") + e.what());
  }
}

ControlSchedule superposition() {
  return synthesize_preparation({{0.0, 0.5, std::polar(std::sqrt(3.0) / 2.0, pi / 2.0), 0.0}}, kGaAs);
}

void oracle_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  const double gammas[] = {pi / 2.0, pi, 3.0 * pi / 2.0};
  for (int i = 0; i < 50; ++i) {
    const SystemParams p{uniform(1.0, 10.0) * 1e9};
    const double T = uniform(0.5, 5.0) * 1e-9;
    const auto s = schedule_from_angles(uniform(-pi / 2, pi / 2), GammaProfile::cosine(gammas[i % 3]), T, p);
    for (int b = 1; b <= 4; ++b)
      worst = std::max(worst, compare_analytic(s, StateVector::basis(b), grid_for(s, 4000)));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report("AC1", "oracle equivalence", worst < 1e-7 && secs < 10.0,
         "max deviation " + num(worst) + " over 50 schedules x 4 columns, " + num(secs) + " s");
}

void preparation_example() {
  const auto s = superposition();
  const auto traj = integrate(s, StateVector::basis(1), grid_for(s));
  const auto& p = traj.populations.back();
  const double pop_err = std::max({std::abs(p[0]), std::abs(p[1] - 0.25), std::abs(p[2] - 0.75),
                                   std::abs(p[3])});
  const Vector4c& c = traj.final_state();
  const double phase_err = std::abs(std::remainder(std::arg(c(2) / c(1)) - pi / 2.0, 2.0 * pi));
  double p4 = 0.0;
  for (const auto& row : traj.populations) p4 = std::max(p4, row[3]);
  const bool params_ok = std::abs(s.meta.theta + pi / 3.0) < 1e-12 &&
                         std::abs(s.duration - 1.5e-9) < 1e-21;
  report("AC2", "preparation example", params_ok && pop_err < 1e-6 && phase_err < 1e-6 && p4 < 1e-8,
         "theta " + num(s.meta.theta) + ", T " + num(s.duration * 1e9) + " ns, population error " +
             num(pop_err) + ", phase error " + num(phase_err) + ", max p4 " + num(p4));
}

void not_gate_example() {
  const double chi = pi / 3.0, mu = pi / 4.0;
  const auto s = synthesize_gate(NotGate{{chi, mu}}, kGaAs);
  const StateVector psi0 = StateVector::left_qubit(chi, mu);
  const Vector4c target(0.0, std::polar(std::sin(chi), mu), std::cos(chi), 0.0);
  const auto traj = integrate(s, psi0, grid_for(s));
  const auto f = fidelity_trace(traj, StateVector::normalized(target));
  const double fid = f.fidelity.back();
  // informational: average rise of the fidelity trace over the pulse
  const std::size_t q = f.fidelity.size() / 4;
  const bool rising = f.fidelity[q] <= f.fidelity[2 * q] && f.fidelity[2 * q] <= f.fidelity[3 * q];
  const bool pass = std::abs(s.meta.theta - 0.685) <= 1e-3 && std::abs(s.duration - 0.5e-9) <= 1e-12 &&
                    fid >= 1.0 - 1e-6;
  report("AC3", "NOT gate example", pass,
         "theta " + num(s.meta.theta) + ", T " + num(s.duration * 1e9) + " ns, final infidelity " +
             num(std::max(0.0, 1.0 - fid)) + ", trace rising at quartiles: " + (rising ? "yes" : "no"));
}

void phase_gate_property() {
  double worst = 0.0;
  bool alpha_zero = true;
  for (int i = 0; i < 20; ++i) {
    const double chi = uniform(0.0, pi / 2), mu = uniform(0.0, 2 * pi), shift = uniform(-pi, pi);
    const auto s = synthesize_gate(PhaseGate{{chi, mu}, shift}, kGaAs);
    for (const auto& c : s.samples) alpha_zero = alpha_zero && c.alpha == cplx(0.0);
    const auto traj = integrate(s, StateVector::left_qubit(chi, mu), grid_for(s));
    // theta = 0: tunneling only, left qubit lands on the right dot with the
    // spin-up amplitude advanced by the Zeeman phase
    const Vector4c expected(0.0, std::cos(chi), std::polar(std::sin(chi), mu - kGaAs.delta * s.duration), 0.0);
    worst = std::max(worst, phase_free_distance(expected, traj.final_state()));
    const Vector4c declared = *s.meta.target;
    worst = std::max(worst, phase_free_distance(declared / declared.norm(), traj.final_state()));
  }
  report("AC4", "phase gate property", alpha_zero && worst < 1e-8,
         std::string("alpha identically zero: ") + (alpha_zero ? "yes" : "no") +
             ", max phase-free distance " + num(worst));
}

void structural_invariants() {
  double unitarity = 0.0, herm = 0.0, identity = 0.0, ab = 0.0;
  bool zero_transfer = true;
  for (int i = 0; i < 2000; ++i) {
    // natural units (Delta ~ 1), so absolute and relative tolerances coincide
    const SystemParams p{uniform(1.0, 10.0)};
    const DiamondAngles a{uniform(-2 * pi, 2 * pi), uniform(-3.0, 3.0), uniform(-pi, pi)};
    const double t = uniform(0.0, 5.0);
    const Matrix4c u = analytic_propagator(a, t, p);
    unitarity = std::max(unitarity, (u.adjoint() * u - Matrix4c::Identity()).cwiseAbs().maxCoeff());
    zero_transfer = zero_transfer && u(3, 0) == cplx(0.0);
    const ControlSample c = controls_from_angles(a, t, p);
    const Matrix4c h0 = h0_matrix(c, p);
    const Matrix4c h = full_hamiltonian(a, PhaseFrame::diamond(p), t, p);
    herm = std::max({herm, (h0 - h0.adjoint()).cwiseAbs().maxCoeff(), (h - h.adjoint()).cwiseAbs().maxCoeff()});
    identity = std::max(identity, (h - h0).cwiseAbs().maxCoeff());
    const double chi = uniform(0, pi / 2), mu = uniform(0, 2 * pi);
    const auto m = transport_magnitudes(chi, mu, a.theta, a.gamma);
    ab = std::max(ab, std::abs(m.A * m.A + m.B * m.B - std::pow(std::sin(a.gamma), 2)));
  }
  const bool pass = unitarity < 1e-12 && herm < 1e-14 && identity < 1e-13 && zero_transfer && ab < 1e-12;
  report("AC5", "structural invariants", pass,
         "unitarity " + num(unitarity) + ", hermiticity " + num(herm) + ", H identity " + num(identity) +
             ", <4|U|1> exactly zero: " + (zero_transfer ? "yes" : "no") + ", A^2+B^2 " + num(ab));
}

void inversion_round_trip() {
  double forward = 0.0, worst_fid = 1.0;
  int done = 0;
  while (done < 100) {
    const double chi = uniform(0.05, pi / 2 - 0.05), mu = uniform(0.0, 2 * pi);
    const double A = transport_magnitudes(chi, mu, uniform(-pi / 2, pi / 2), pi / 2.0).A;
    const double B = std::sqrt(std::max(0.0, 1.0 - A * A));
    for (double th : solve_theta(chi, mu, A, B)) {
      const auto m = transport_magnitudes(chi, mu, th, pi / 2.0);
      forward = std::max({forward, std::abs(m.A - A), std::abs(m.B - B)});
    }
    const double lambda = uniform(-pi, pi);
    const auto s = synthesize_gate(CustomTransport{{chi, mu}, A, B, lambda}, kGaAs);
    const Vector4c target(0.0, A, std::polar(B, lambda), 0.0);
    const auto traj = integrate(s, StateVector::left_qubit(chi, mu), grid_for(s));
    worst_fid = std::min(worst_fid, state_fidelity(target, traj.final_state()));
    ++done;
  }
  report("AC6", "inversion round trip", forward < 1e-10 && worst_fid >= 1.0 - 1e-6,
         "max forward-map residual " + num(forward) + ", worst end-to-end infidelity " + num(std::max(0.0, 1.0 - worst_fid)));
}

void convergence_order() {
  const auto s = superposition();
  const Vector4c exact = s.propagator_at(s.duration) * StateVector::basis(1).amplitudes();
  auto err = [&](std::size_t n) {
    return (integrate(s, StateVector::basis(1), {s.duration, n}).final_state() - exact).norm();
  };
  const double e1 = err(100), e2 = err(200), e3 = err(400);
  const double o1 = std::log2(e1 / e2), o2 = std::log2(e2 / e3);
  const bool pass = o1 >= 3.7 && o1 <= 4.3 && o2 >= 3.7 && o2 <= 4.3;
  report("AC7", "convergence order", pass,
         "errors " + num(e1) + ", " + num(e2) + ", " + num(e3) + " at 100/200/400 steps; orders " + num(o1) +
             ", " + num(o2));
}

void chain_sequence() {
  const auto p = plan::load_plan(std::string(PULSEFORGE_PLANS) + "/three_dot_chain.json");
  const auto r = chain::run_chain(p);
  const double inc = r.boundaries[2].relative_phase() - r.boundaries[1].relative_phase();
  const double inc_err = std::abs(std::remainder(inc - pi / 4.0, 2.0 * pi));
  report("AC8", "chain sequence", r.stages.size() == 3 && r.deviation() < 3e-7 && inc_err < 1e-6,
         "stages " + std::to_string(r.stages.size()) + ", analytic-vs-ODE deviation " + num(r.deviation()) +
             ", stage-2 phase increment error " + num(inc_err));
}

}  // namespace

int main(int argc, char** argv) {
  // optional argument: run a single criterion, e.g. `acceptance AC3`
  const std::string only = argc > 1 ? argv[1] : "";
  const struct {
    const char* id;
    const char* name;
    void (*body)();
  } criteria[] = {{"AC1", "oracle equivalence", oracle_equivalence},
                  {"AC2", "preparation example", preparation_example},
                  {"AC3", "NOT gate example", not_gate_example},
                  {"AC4", "phase gate property", phase_gate_property},
                  {"AC5", "structural invariants", structural_invariants},
                  {"AC6", "inversion round trip", inversion_round_trip},
                  {"AC7", "convergence order", convergence_order},
                  {"AC8", "chain sequence", chain_sequence}};
  int ran = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && only != c.id) continue;
    guarded(c.id, c.name, c.body);
    ++ran;
  }
  if (ran == 0) {
    std::printf("FAIL: unknown criterion '%s'\n", only.c_str());
    return 1;
  }
  std::printf("%s: %d of %d criteria failed\n", failures ? "FAIL" : "PASS", failures, ran);
  return failures ? 1 : 0;
}

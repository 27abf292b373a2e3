#ifndef PULSEFORGE_CHAIN_HPP
#define PULSEFORGE_CHAIN_HPP

// Sequential transport through a chain of dots. Stage k moves the qubit from
// the left dot of pair k to its right dot; the right-dot amplitudes (|2>, |3>)
// then become the left-dot amplitudes (|1>, |4>) of pair k+1.
//
// Bloch convention: the qubit basis is (spin-down, spin-up), so z = +1 is
// spin-down, x + iy = 2 conj(c_down) c_up.

#include <array>
#include <string>
#include <vector>

#include "plan.hpp"
#include "propagator.hpp"

namespace pulseforge::chain {

using Bloch = std::array<double, 3>;

inline Bloch bloch_vector(cplx down, cplx up) {
  const cplx coh = 2.0 * std::conj(down) * up;
  return {coh.real(), coh.imag(), std::norm(down) - std::norm(up)};
}

struct ChainState {
  std::size_t stage = 0;  // boundary index: 0 = initial, k = after stage k
  std::string label;
  double time = 0.0;  // cumulative, seconds
  cplx down{1.0};
  cplx up{0.0};
  Bloch bloch{0.0, 0.0, 1.0};

  /// Relative phase arg(up/down); 0 when either amplitude vanishes.
  double relative_phase() const {
    if (std::abs(down) < 1e-12 || std::abs(up) < 1e-12) return 0.0;
    return std::arg(up / down);
  }
};

struct StageReport {
  std::string label;
  ControlSchedule schedule;
  double start = 0.0;
  double end = 0.0;
  double target_fidelity_ode = 0.0;  // chained ODE output vs the stage target
};

struct ChainResult {
  std::vector<StageReport> stages;
  std::vector<ChainState> boundaries;      // from the analytic composition
  std::vector<ChainState> ode_boundaries;  // from chained integration
  Vector4c final_analytic;
  Vector4c final_ode;

  double deviation() const { return (final_analytic - final_ode).norm(); }
  double agreement() const { return state_fidelity(final_analytic, final_ode); }
};

/// Right-dot amplitudes of one pair become the left-dot input of the next.
inline Vector4c hand_over(const Vector4c& right) {
  Vector4c next = Vector4c::Zero();
  next(0) = right(1);
  next(3) = right(2);
  return next;
}

namespace detail {

inline GateSpec with_initial(GateSpec gate, const QubitAngles& q) {
  std::visit(
      [&](auto& g) {
        using T = std::decay_t<decltype(g)>;
        if constexpr (!std::is_same_v<T, PrepareGate>) g.initial = q;
      },
      gate);
  return gate;
}

inline ChainState state_at(std::size_t index, const std::string& label, double time, cplx down,
                           cplx up) {
  return {index, label, time, down, up, bloch_vector(down, up)};
}

}  // namespace detail

/// Synthesizes every stage from the analytic output of the previous one and
/// runs the chain twice: composed closed-form propagators and chained RK4.
inline ChainResult run_chain(const plan::Plan& p, const BranchRule& default_rule = {},
                             std::size_t steps = default_steps) {
  if (p.stages.empty()) throw Error(ErrorKind::InvalidInput, "chain needs at least one stage");
  ChainResult r;
  Vector4c analytic = StateVector::basis(1).amplitudes();
  Vector4c ode = analytic;
  double clock = 0.0;

  const auto& first = p.stages.front();
  if (std::holds_alternative<PrepareGate>(first.gate)) {
    // starts from |1>
  } else if (first.has_initial) {
    const auto& q = std::visit(
        [](const auto& g) -> QubitAngles {
          if constexpr (requires { g.initial; }) return g.initial;
          else return {};
        },
        first.gate);
    analytic = StateVector::left_qubit(q.chi, q.mu).amplitudes();
    ode = analytic;
  } else {
    throw Error(ErrorKind::InvalidInput, "first chain stage needs an explicit initial qubit");
  }
  r.boundaries.push_back(detail::state_at(0, "initial", 0.0, analytic(0), analytic(3)));
  r.ode_boundaries.push_back(r.boundaries.back());

  for (std::size_t k = 0; k < p.stages.size(); ++k) {
    const auto& st = p.stages[k];
    if (k > 0 && std::holds_alternative<PrepareGate>(st.gate))
      throw Error(ErrorKind::InvalidInput,
                  "stage " + std::to_string(k + 1) + ": preparation is only valid as the first stage");
    if (k > 0 && st.has_initial)
      throw Error(ErrorKind::InvalidInput, "stage " + std::to_string(k + 1) +
                                               ": chain stages after the first inherit their input");
    try {
      GateSpec gate = st.gate;
      if (k > 0) gate = detail::with_initial(gate, qubit_angles(analytic(0), analytic(3)));
      StageReport rep;
      rep.label = st.label;
      rep.schedule = synthesize_gate(gate, p.system, st.ansatz, st.branch.value_or(default_rule));
      rep.start = clock;
      rep.end = clock + rep.schedule.duration;
      clock = rep.end;

      analytic = rep.schedule.propagator_at(rep.schedule.duration) * analytic;
      const Trajectory traj =
          integrate(rep.schedule, StateVector::normalized(ode), grid_for(rep.schedule, steps));
      ode = traj.final_state() * ode.norm();
      rep.target_fidelity_ode = state_fidelity(*rep.schedule.meta.target, ode);

      r.boundaries.push_back(detail::state_at(k + 1, st.label, clock, analytic(1), analytic(2)));
      r.ode_boundaries.push_back(detail::state_at(k + 1, st.label, clock, ode(1), ode(2)));
      r.stages.push_back(std::move(rep));
      if (k + 1 < p.stages.size()) {
        analytic = hand_over(analytic);
        ode = hand_over(ode);
      }
    } catch (const Error& e) {
      throw Error(e.kind(), "stage " + std::to_string(k + 1) + " (" + st.label + "): " + e.detail());
    }
  }
  r.final_analytic = analytic;
  r.final_ode = ode;
  return r;
}

}  // namespace pulseforge::chain

#endif

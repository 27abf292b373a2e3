#ifndef PULSEFORGE_PROPAGATOR_HPP
#define PULSEFORGE_PROPAGATOR_HPP

// Fixed-step RK4 integration of i dpsi/dt = H0(t) psi for a control schedule.
// This is the numerical check on every closed-form result, so it only ever
// sees tau(t) and alpha(t), never the rotation angles themselves.

#include <array>
#include <cmath>
#include <vector>

#include "pulse_synth.hpp"

namespace pulseforge {

struct TimeGrid {
  double t_end = 0.0;
  std::size_t n_steps = 4000;

  double step() const { return t_end / static_cast<double>(n_steps); }
  double time(std::size_t k) const {
    return k == n_steps ? t_end : static_cast<double>(k) * step();
  }
};

inline constexpr std::size_t default_steps = 4000;

inline TimeGrid grid_for(const ControlSchedule& s, std::size_t n_steps = default_steps) {
  return {s.duration, n_steps};
}

struct Trajectory {
  std::vector<double> times;
  std::vector<ControlSample> controls;
  std::vector<Vector4c> states;
  std::vector<std::array<double, 4>> populations;

  std::size_t size() const { return times.size(); }
  const Vector4c& final_state() const { return states.back(); }
};

struct FidelityTrace {
  std::vector<double> times;
  std::vector<double> fidelity;
};

/// Evaluates tau(t) and alpha(t): analytically from the generating angles when
/// the schedule allows it, else by local cubic interpolation of the samples.
class ControlEvaluator {
 public:
  explicit ControlEvaluator(const ControlSchedule& s) : s_(s) {}

  ControlSample operator()(double t) const {
    if (s_.analytic_controls && s_.profile) return controls_from_angles(s_.angles_at(t), t, s_.params);
    return interpolate(t);
  }

 private:
  ControlSample interpolate(double t) const {
    const auto& v = s_.samples;
    const std::size_t n = v.size();
    if (n == 1) return {t, v[0].tau, v[0].alpha};
    // Index of the interval containing t.
    std::size_t hi = static_cast<std::size_t>(
        std::lower_bound(v.begin(), v.end(), t,
                         [](const ControlSample& a, double x) { return a.t < x; }) -
        v.begin());
    hi = std::clamp<std::size_t>(hi, 1, n - 1);
    const std::size_t width = std::min<std::size_t>(4, n);
    std::size_t first = hi >= 2 ? hi - 2 : 0;
    if (first + width > n) first = n - width;

    ControlSample out{t, 0.0, 0.0};
    for (std::size_t i = first; i < first + width; ++i) {
      double w = 1.0;
      for (std::size_t j = first; j < first + width; ++j)
        if (j != i) w *= (t - v[j].t) / (v[i].t - v[j].t);
      out.tau += w * v[i].tau;
      out.alpha += w * v[i].alpha;
    }
    return out;
  }

  const ControlSchedule& s_;
};

inline constexpr double norm_failure_threshold = 1e-6;

inline Trajectory integrate(const ControlSchedule& schedule, const StateVector& psi0,
                            const TimeGrid& grid) {
  schedule.params.validate();
  if (schedule.samples.empty()) throw Error(ErrorKind::InvalidInput, "schedule has no samples");
  if (std::abs(grid.t_end - schedule.duration) > 1e-12 * schedule.duration ||
      !(grid.t_end >= 0.0))
    throw Error(ErrorKind::DomainMismatch, "time grid must span [0, T] of the schedule");

  const ControlEvaluator controls(schedule);
  const SystemParams& params = schedule.params;
  auto rhs = [&](double t, const Vector4c& psi) -> Vector4c {
    return -I * (h0_matrix(controls(t), params) * psi);
  };

  Trajectory traj;
  auto record = [&](double t, const Vector4c& psi) {
    traj.times.push_back(t);
    traj.controls.push_back(controls(t));
    traj.states.push_back(psi);
    traj.populations.push_back(
        {std::norm(psi(0)), std::norm(psi(1)), std::norm(psi(2)), std::norm(psi(3))});
  };

  Vector4c psi = psi0.amplitudes();
  record(0.0, psi);
  if (grid.t_end == 0.0) return traj;
  if (grid.n_steps < 1) throw Error(ErrorKind::InvalidInput, "need at least one step");

  const std::size_t n = grid.n_steps;
  traj.times.reserve(n + 1);
  traj.controls.reserve(n + 1);
  traj.states.reserve(n + 1);
  traj.populations.reserve(n + 1);
  const double h = grid.step();
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * h;
    const Vector4c k1 = rhs(t, psi);
    const Vector4c k2 = rhs(t + 0.5 * h, psi + 0.5 * h * k1);
    const Vector4c k3 = rhs(t + 0.5 * h, psi + 0.5 * h * k2);
    const Vector4c k4 = rhs(t + h, psi + h * k3);
    psi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double drift = std::abs(psi.norm() - 1.0);
    if (drift > norm_failure_threshold)
      throw Error(ErrorKind::IntegrationFailure,
                  "norm drifted by " + std::to_string(drift) + " at step " + std::to_string(k + 1) +
                      "; increase the number of steps");
    record(grid.time(k + 1), psi);
  }
  return traj;
}

inline FidelityTrace fidelity_trace(const Trajectory& traj, const StateVector& target) {
  FidelityTrace f;
  f.times = traj.times;
  f.fidelity.reserve(traj.size());
  for (const auto& psi : traj.states)
    f.fidelity.push_back(std::norm(target.amplitudes().dot(psi)));
  return f;
}

/// Largest 2-norm gap between the integrated state and U(t) psi0 over the grid.
inline double compare_analytic(const ControlSchedule& schedule, const StateVector& psi0,
                               const TimeGrid& grid) {
  if (!schedule.has_angles())
    throw Error(ErrorKind::UnsupportedComparison,
                "schedule lacks generating angles; analytic comparison unavailable");
  const Trajectory traj = integrate(schedule, psi0, grid);
  double worst = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const Vector4c exact = schedule.propagator_at(traj.times[k]) * psi0.amplitudes();
    worst = std::max(worst, (traj.states[k] - exact).norm());
  }
  return worst;
}

}  // namespace pulseforge

#endif

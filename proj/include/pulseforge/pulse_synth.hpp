#ifndef PULSEFORGE_PULSE_SYNTH_HPP
#define PULSEFORGE_PULSE_SYNTH_HPP

// Inverse engineering of tunneling / spin-orbit pulses.
//
// A gate request fixes the final amplitudes; from them we pick the constant
// mixing angle theta, a smooth gamma(t) ramp from 0 to gamma_final, and a
// duration T whose Zeeman phase Delta*T lands the requested relative phase.
// The controls then follow from tau = gamma' cos(theta) and
// alpha = -exp(i Delta t) gamma' sin(theta).

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dqd_model.hpp"

namespace pulseforge {

// ---------------------------------------------------------------------------
// gamma(t) profiles

struct GammaValue {
  double gamma = 0.0;
  double rate = 0.0;
};

/// Cosine ramp gamma(t) = gamma_final/2 * (1 - cos(pi t / T)); zero slope at both ends.
inline GammaValue gamma_ansatz(double t, double duration, double gamma_final) {
  if (!(duration > 0.0))
    throw Error(ErrorKind::InvalidAnsatz, "pulse duration must be positive");
  const double w = pi / duration;
  return {0.5 * gamma_final * (1.0 - std::cos(w * t)), 0.5 * gamma_final * w * std::sin(w * t)};
}

enum class AnsatzFamily { CosineRamp, UserSampledGamma };

inline const char* to_string(AnsatzFamily f) {
  return f == AnsatzFamily::CosineRamp ? "cosine" : "sampled";
}

/// Clamped cubic spline on a uniform grid over [0, 1] with zero end slopes.
class ClampedSpline {
 public:
  ClampedSpline() = default;

  explicit ClampedSpline(std::vector<double> values) : y_(std::move(values)) {
    if (y_.size() < 2) throw Error(ErrorKind::InvalidAnsatz, "need at least two gamma samples");
    const std::size_t n = y_.size() - 1;
    h_ = 1.0 / static_cast<double>(n);
    m_.assign(n + 1, 0.0);
    // Thomas algorithm on the clamped second-derivative system.
    std::vector<double> sub(n + 1, 1.0), diag(n + 1, 4.0), sup(n + 1, 1.0), rhs(n + 1, 0.0);
    diag[0] = 2.0;
    diag[n] = 2.0;
    rhs[0] = 6.0 / h_ * ((y_[1] - y_[0]) / h_);
    rhs[n] = 6.0 / h_ * (-(y_[n] - y_[n - 1]) / h_);
    for (std::size_t i = 1; i < n; ++i)
      rhs[i] = 6.0 / (h_ * h_) * (y_[i + 1] - 2.0 * y_[i] + y_[i - 1]);
    for (std::size_t i = 1; i <= n; ++i) {
      const double f = sub[i] / diag[i - 1];
      diag[i] -= f * sup[i - 1];
      rhs[i] -= f * rhs[i - 1];
    }
    m_[n] = rhs[n] / diag[n];
    for (std::size_t i = n; i-- > 0;) m_[i] = (rhs[i] - sup[i] * m_[i + 1]) / diag[i];
  }

  /// Value and derivative at normalized time s in [0, 1].
  GammaValue eval(double s) const {
    const std::size_t n = y_.size() - 1;
    s = std::clamp(s, 0.0, 1.0);
    std::size_t i = std::min(static_cast<std::size_t>(s / h_), n - 1);
    const double a = (static_cast<double>(i + 1) * h_ - s) / h_;
    const double b = 1.0 - a;
    const double v = a * y_[i] + b * y_[i + 1] +
                     ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h_ * h_ / 6.0;
    const double d = (y_[i + 1] - y_[i]) / h_ - (3.0 * a * a - 1.0) / 6.0 * h_ * m_[i] +
                     (3.0 * b * b - 1.0) / 6.0 * h_ * m_[i + 1];
    return {v, d};
  }

  const std::vector<double>& values() const { return y_; }

 private:
  std::vector<double> y_;
  std::vector<double> m_;
  double h_ = 1.0;
};

/// gamma(t) over a pulse of given duration; rates are analytic derivatives of
/// the chosen profile, never finite differences.
class GammaProfile {
 public:
  static GammaProfile cosine(double gamma_final) {
    GammaProfile p;
    p.family_ = AnsatzFamily::CosineRamp;
    p.gamma_final_ = gamma_final;
    return p;
  }

  /// Samples of gamma on a uniform grid of normalized time [0, 1]. The first
  /// sample must be 0; the last one defines gamma_final.
  static GammaProfile sampled(std::vector<double> gamma_samples) {
    if (gamma_samples.size() < 2)
      throw Error(ErrorKind::InvalidAnsatz, "need at least two gamma samples");
    if (std::abs(gamma_samples.front()) > 1e-12)
      throw Error(ErrorKind::InvalidAnsatz, "sampled gamma must start at 0");
    GammaProfile p;
    p.family_ = AnsatzFamily::UserSampledGamma;
    p.gamma_final_ = gamma_samples.back();
    p.spline_ = ClampedSpline(std::move(gamma_samples));
    return p;
  }

  GammaValue at(double t, double duration) const {
    if (!(duration > 0.0))
      throw Error(ErrorKind::InvalidAnsatz, "pulse duration must be positive");
    if (family_ == AnsatzFamily::CosineRamp) return gamma_ansatz(t, duration, gamma_final_);
    const GammaValue g = spline_.eval(t / duration);
    return {g.gamma, g.rate / duration};
  }

  AnsatzFamily family() const { return family_; }
  double gamma_final() const { return gamma_final_; }
  const std::vector<double>& samples() const { return spline_.values(); }

 private:
  AnsatzFamily family_ = AnsatzFamily::CosineRamp;
  double gamma_final_ = pi / 2.0;
  ClampedSpline spline_;
};

// ---------------------------------------------------------------------------
// Control schedules

struct ScheduleMetadata {
  double theta = 0.0;
  double gamma_final = pi / 2.0;
  std::string gate = "custom";
  std::string branch = "min-theta:0";
  AnsatzFamily family = AnsatzFamily::CosineRamp;
  std::vector<double> theta_candidates;
  std::optional<Vector4c> psi0;
  std::optional<Vector4c> target;
};

struct ControlSchedule {
  SystemParams params;
  double duration = 0.0;
  std::vector<ControlSample> samples;
  ScheduleMetadata meta;
  /// Generator of the samples. Present for in-process synthesis and for files
  /// whose metadata pins a cosine ramp.
  std::optional<GammaProfile> profile;
  /// Evaluate controls from `profile` during integration instead of
  /// interpolating `samples`.
  bool analytic_controls = false;

  bool has_angles() const { return profile.has_value(); }

  DiamondAngles angles_at(double t) const {
    if (!profile)
      throw Error(ErrorKind::UnsupportedComparison, "schedule carries no generating angles");
    if (duration <= 0.0) return {0.0, 0.0, meta.theta};
    const GammaValue g = profile->at(t, duration);
    return {g.gamma, g.rate, meta.theta};
  }

  Matrix4c propagator_at(double t) const { return analytic_propagator(angles_at(t), t, params); }
};

/// Checks the container invariants: grid from 0 to T, strictly increasing,
/// controls switched off at both ends.
inline void validate_schedule(const ControlSchedule& s, double endpoint_tol = 1e-9) {
  s.params.validate();
  if (s.samples.empty()) throw Error(ErrorKind::InvalidInput, "schedule has no samples");
  if (!(s.duration >= 0.0) || !std::isfinite(s.duration))
    throw Error(ErrorKind::InvalidInput, "schedule duration must be finite and non-negative");
  if (s.samples.front().t != 0.0) throw Error(ErrorKind::InvalidInput, "schedule must start at t=0");
  if (std::abs(s.samples.back().t - s.duration) > 1e-12 * s.duration)
    throw Error(ErrorKind::InvalidInput, "last sample time must equal T");
  if (s.duration == 0.0 && s.samples.size() != 1)
    throw Error(ErrorKind::InvalidInput, "zero-length schedule must hold a single sample");
  double scale = 0.0;
  for (std::size_t i = 0; i < s.samples.size(); ++i) {
    if (i > 0 && !(s.samples[i].t > s.samples[i - 1].t))
      throw Error(ErrorKind::InvalidInput, "schedule grid must be strictly increasing");
    scale = std::max({scale, std::abs(s.samples[i].tau), std::abs(s.samples[i].alpha)});
  }
  const auto& a = s.samples.front();
  const auto& b = s.samples.back();
  const double tol = endpoint_tol * std::max(1.0, scale);
  if (std::abs(a.tau) > tol || std::abs(a.alpha) > tol || std::abs(b.tau) > tol ||
      std::abs(b.alpha) > tol)
    throw Error(ErrorKind::InvalidInput, "controls must vanish at both ends of the schedule");
}

/// Samples the controls generated by (theta, profile) on a uniform grid.
inline ControlSchedule schedule_from_angles(double theta, const GammaProfile& profile,
                                            double duration, const SystemParams& params,
                                            std::size_t n_samples = 2000) {
  params.validate();
  if (!(duration > 0.0)) throw Error(ErrorKind::InvalidAnsatz, "pulse duration must be positive");
  if (n_samples < 2) throw Error(ErrorKind::InvalidInput, "need at least two samples");
  ControlSchedule s;
  s.params = params;
  s.duration = duration;
  s.meta.theta = theta;
  s.meta.gamma_final = profile.gamma_final();
  s.meta.family = profile.family();
  s.profile = profile;
  s.analytic_controls = true;
  s.samples.reserve(n_samples);
  const double dt = duration / static_cast<double>(n_samples - 1);
  for (std::size_t k = 0; k < n_samples; ++k) {
    const double t = k + 1 == n_samples ? duration : static_cast<double>(k) * dt;
    const GammaValue g = profile.at(t, duration);
    s.samples.push_back(controls_from_angles({g.gamma, g.rate, theta}, t, params));
  }
  // Exact switch-off at the endpoints; sin(pi) leaves ~1e-16 relative residue.
  s.samples.front().tau = 0.0;
  s.samples.front().alpha = 0.0;
  s.samples.back().tau = 0.0;
  s.samples.back().alpha = 0.0;
  return s;
}

// ---------------------------------------------------------------------------
// Forward map and its inversion

struct QubitAngles {
  double chi = 0.0;  // amplitude mixing angle, [0, pi/2]
  double mu = 0.0;   // relative phase, [0, 2 pi)
};

inline double wrap_two_pi(double x) {
  double r = std::fmod(x, 2.0 * pi);
  if (r < 0.0) r += 2.0 * pi;
  return r;
}

/// Wraps to (-pi, pi].
inline double wrap_pi(double x) {
  double r = wrap_two_pi(x);
  return r > pi ? r - 2.0 * pi : r;
}

/// Validates and canonicalizes a left-dot qubit; mu is dropped when one of
/// the amplitudes vanishes.
inline QubitAngles normalize_qubit(QubitAngles q) {
  if (!std::isfinite(q.chi) || !std::isfinite(q.mu))
    throw Error(ErrorKind::InvalidInput, "qubit angles must be finite");
  if (q.chi < -1e-12 || q.chi > pi / 2.0 + 1e-12)
    throw Error(ErrorKind::InvalidInput, "chi must lie in [0, pi/2]");
  q.chi = std::clamp(q.chi, 0.0, pi / 2.0);
  q.mu = wrap_two_pi(q.mu);
  if (std::abs(std::sin(q.chi) * std::cos(q.chi)) < 1e-14) q.mu = 0.0;
  return q;
}

/// (chi, mu) of a two-component qubit (down, up), ignoring global phase.
inline QubitAngles qubit_angles(cplx down, cplx up) {
  const double n = std::sqrt(std::norm(down) + std::norm(up));
  if (!(n > 0.0)) throw Error(ErrorKind::InvalidInput, "qubit has zero norm");
  QubitAngles q{std::atan2(std::abs(up), std::abs(down)), 0.0};
  if (std::abs(down) > 0.0 && std::abs(up) > 0.0) q.mu = std::arg(up / down);
  return normalize_qubit(q);
}

/// Final amplitudes b1..b4 for psi(0) = cos(chi)|1> + e^{i mu} sin(chi)|4>
/// after a diamond pulse with mixing angle theta reaching gamma(T) = gamma_final
/// at Zeeman phase Delta*T = zeeman_phase.
inline Vector4c transport_amplitudes(double chi, double mu, double theta, double gamma_final,
                                     double zeeman_phase) {
  const double cx = std::cos(chi), sx = std::sin(chi);
  const double ct = std::cos(theta), st = std::sin(theta);
  const double cg = std::cos(gamma_final), sg = std::sin(gamma_final);
  const cplx eu = std::polar(1.0, mu);
  const cplx ez = std::polar(1.0, -zeeman_phase);
  Vector4c b;
  b(0) = cx * cg;
  b(1) = -I * sg * (ct * cx + st * eu * sx);
  b(2) = I * ez * sg * (st * cx - ct * eu * sx);
  b(3) = sx * cg * std::polar(1.0, mu - zeeman_phase);
  return b;
}

struct TransportMagnitudes {
  double A = 0.0;
  double B = 0.0;
};

/// |b2| and |b3| from the closed-form square-root expressions.
inline TransportMagnitudes transport_magnitudes(double chi, double mu, double theta,
                                               double gamma_final) {
  const double mix = std::cos(2 * chi) * std::cos(2 * theta) +
                     std::cos(mu) * std::sin(2 * chi) * std::sin(2 * theta);
  const double s = std::abs(std::sin(gamma_final)) / std::sqrt(2.0);
  return {s * std::sqrt(std::max(0.0, 1.0 + mix)), s * std::sqrt(std::max(0.0, 1.0 - mix))};
}

/// All mixing angles theta in (-pi/2, pi/2] that produce |b2| = A at
/// gamma(T) = pi/2, found by inverting
///   cos(2chi) cos(2theta) + cos(mu) sin(2chi) sin(2theta) = 2A^2 - 1.
/// Sorted by |theta|, negative first on ties.
inline std::vector<double> solve_theta(double chi, double mu, double A, double B) {
  if (!std::isfinite(A) || !std::isfinite(B) || A < 0.0 || B < 0.0)
    throw Error(ErrorKind::InvalidInput, "target amplitudes must be finite and non-negative");
  if (std::abs(A * A + B * B - 1.0) > 1e-10)
    throw Error(ErrorKind::InvalidInput, "target amplitudes must satisfy A^2 + B^2 = 1");
  const double a = std::cos(2 * chi);
  const double b = std::cos(mu) * std::sin(2 * chi);
  const double d = 2.0 * A * A - 1.0;
  const double r = std::hypot(a, b);
  constexpr double slack = 1e-12;
  if (std::abs(d) > r + slack)
    throw Error(ErrorKind::InfeasibleAmplitude,
                "amplitude A=" + std::to_string(A) + " unreachable from chi=" +
                    std::to_string(chi) + ", mu=" + std::to_string(mu));
  std::vector<double> out;
  if (r < slack) {
    // Every theta gives A^2 = 1/2; report the pure-tunneling representative.
    out.push_back(0.0);
    return out;
  }
  const double center = std::atan2(b, a);
  const double spread = std::acos(std::clamp(d / r, -1.0, 1.0));
  for (double two_theta : {center - spread, center + spread}) {
    double th = wrap_pi(two_theta) / 2.0;  // (-pi/2, pi/2]
    if (th <= -pi / 2.0 + 1e-15) th += pi;
    const bool dup = std::any_of(out.begin(), out.end(), [&](double x) {
      return std::abs(x - th) < 1e-12 || std::abs(std::abs(x - th) - pi) < 1e-12;
    });
    if (!dup) out.push_back(th);
  }
  std::sort(out.begin(), out.end(), [](double x, double y) {
    if (std::abs(std::abs(x) - std::abs(y)) > 1e-14) return std::abs(x) < std::abs(y);
    return x < y;
  });
  return out;
}

struct ZetaPhases {
  double zeta_a = 0.0;
  double zeta_b = 0.0;
  double difference() const { return zeta_b - zeta_a; }
};

/// Phases of b2 = A e^{i zeta_a} and b3 = B e^{i (zeta_b - Delta T)}, taken as
/// two-argument angles of the forward-map amplitudes.
inline ZetaPhases zeta_phases(double chi, double mu, double theta, double gamma_final = pi / 2.0) {
  const Vector4c b = transport_amplitudes(chi, mu, theta, gamma_final, 0.0);
  constexpr double tiny = 1e-12;
  if (std::abs(b(1)) < tiny || std::abs(b(2)) < tiny)
    throw Error(ErrorKind::DegeneratePhase, "phase of a vanishing amplitude is undefined");
  return {std::arg(b(1)), std::arg(b(2))};
}

/// The arctangent closed forms of zeta_a and zeta_b; defined only when
/// sin(mu), sin(theta), cos(theta) and tan(chi) are all nonzero and finite.
/// Agrees with zeta_phases modulo pi.
inline ZetaPhases zeta_phases_closed_form(double chi, double mu, double theta) {
  const double smu = std::sin(mu), sth = std::sin(theta), cth = std::cos(theta);
  const double sch = std::sin(chi), cch = std::cos(chi);
  constexpr double tiny = 1e-12;
  if (std::abs(smu) < tiny || std::abs(sth) < tiny || std::abs(cth) < tiny ||
      std::abs(sch) < tiny || std::abs(cch) < tiny)
    throw Error(ErrorKind::DegeneratePhase, "closed-form zeta is singular for these angles");
  const double cot_mu = std::cos(mu) / smu;
  const double cot_chi = cch / sch;
  return {-std::atan(cot_mu + (cth / sth) * cot_chi / smu),
          -std::atan(cot_mu - (sth / cth) * cot_chi / smu)};
}

/// Smallest T > 0 with Delta*T = zeta - lambda (mod 2 pi).
inline double operation_time(double zeta, double lambda, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorKind::InvalidInput, "Zeeman splitting must be positive");
  double phase = wrap_two_pi(zeta - lambda);
  if (phase < 1e-12) phase = 2.0 * pi;
  if (2.0 * pi - phase < 1e-12) phase = 2.0 * pi;
  return phase / delta;
}

// ---------------------------------------------------------------------------
// Gate requests

struct PrepareGate {
  std::array<cplx, 4> target{};  // b1..b4; only b2, b3 may be nonzero
};

struct PhaseGate {
  QubitAngles initial;
  double phase_shift = 0.0;  // added to the relative phase of the qubit
};

struct NotGate {
  QubitAngles initial;
};

struct CustomTransport {
  QubitAngles initial;
  double A = 1.0;
  double B = 0.0;
  double lambda = 0.0;
};

using GateSpec = std::variant<PrepareGate, PhaseGate, NotGate, CustomTransport>;

inline const char* gate_name(const GateSpec& g) {
  return std::visit(
      [](const auto& x) -> const char* {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, PrepareGate>) return "prepare";
        else if constexpr (std::is_same_v<T, PhaseGate>) return "phase";
        else if constexpr (std::is_same_v<T, NotGate>) return "not";
        else return "transport";
      },
      g);
}

struct AnsatzSpec {
  AnsatzFamily family = AnsatzFamily::CosineRamp;
  double gamma_final = pi / 2.0;
  std::vector<double> gamma_samples;  // UserSampledGamma only
  /// Used only when the target leaves the relative phase free.
  std::optional<double> duration;
  double max_duration = std::numeric_limits<double>::infinity();
  int extra_periods = 0;  // whole Zeeman periods added to T
  std::size_t n_samples = 2000;

  GammaProfile profile() const {
    if (family == AnsatzFamily::CosineRamp) return GammaProfile::cosine(gamma_final);
    return GammaProfile::sampled(gamma_samples);
  }
};

struct BranchRule {
  enum class Mode { MinTheta, Index } mode = Mode::MinTheta;
  std::size_t index = 0;

  static BranchRule min_theta() { return {}; }
  static BranchRule at(std::size_t i) { return {Mode::Index, i}; }
};

inline constexpr double synthesis_fidelity_floor = 1.0 - 1e-9;

inline double state_fidelity(const Vector4c& a, const Vector4c& b) {
  return std::norm(a.dot(b)) / (a.squaredNorm() * b.squaredNorm());
}

namespace detail {

inline bool is_odd_half_pi(double g) {
  const double k = g / (pi / 2.0);
  const double r = std::round(k);
  return std::abs(k - r) < 1e-9 && static_cast<long long>(r) % 2 != 0;
}

struct Candidate {
  double theta = 0.0;
  std::optional<double> zeeman_phase;  // Delta*T mod 2 pi, if the target fixes it
};

inline ControlSchedule emit(const GateSpec& gate, const std::vector<Candidate>& candidates,
                            const Vector4c& psi0, const Vector4c& target,
                            const SystemParams& params, const AnsatzSpec& ansatz,
                            const BranchRule& rule) {
  params.validate();
  if (candidates.empty()) throw Error(ErrorKind::InfeasibleAmplitude, "no mixing angle found");
  const GammaProfile profile = ansatz.profile();
  if (!is_odd_half_pi(profile.gamma_final()))
    throw Error(ErrorKind::InvalidAnsatz,
                "gamma_final must be an odd multiple of pi/2 so that b1 and b4 vanish");

  std::vector<std::size_t> order;
  if (rule.mode == BranchRule::Mode::Index) {
    if (rule.index >= candidates.size())
      throw Error(ErrorKind::InvalidInput, "branch index " + std::to_string(rule.index) +
                                               " out of range (" +
                                               std::to_string(candidates.size()) + " branches)");
    order.push_back(rule.index);
  } else {
    for (std::size_t i = 0; i < candidates.size(); ++i) order.push_back(i);
  }

  const double period = 2.0 * pi / params.delta;
  std::string last_failure = "no branch verified";
  for (std::size_t idx : order) {
    const Candidate& c = candidates[idx];
    double duration = 0.0;
    if (c.zeeman_phase) {
      duration = operation_time(*c.zeeman_phase, 0.0, params.delta);
    } else {
      duration = ansatz.duration.value_or(period);
      if (!(duration > 0.0)) throw Error(ErrorKind::InvalidAnsatz, "duration must be positive");
    }
    duration += ansatz.extra_periods * period;
    if (duration > ansatz.max_duration)
      throw Error(ErrorKind::NoFeasibleTime,
                  "required duration " + std::to_string(duration) + " s exceeds maximum " +
                      std::to_string(ansatz.max_duration) + " s");

    const DiamondAngles end{profile.gamma_final(), 0.0, c.theta};
    const Vector4c reached = analytic_propagator(end, duration, params) * psi0;
    const double f = state_fidelity(target, reached);
    if (f < synthesis_fidelity_floor) {
      last_failure = "branch " + std::to_string(idx) + " reaches fidelity " + std::to_string(f);
      continue;
    }

    ControlSchedule s = schedule_from_angles(c.theta, profile, duration, params, ansatz.n_samples);
    s.meta.gate = gate_name(gate);
    s.meta.branch = std::string(rule.mode == BranchRule::Mode::MinTheta ? "min-theta:" : "index:") +
                    std::to_string(idx);
    for (const auto& cc : candidates) s.meta.theta_candidates.push_back(cc.theta);
    s.meta.psi0 = psi0;
    s.meta.target = target;
    return s;
  }
  throw Error(ErrorKind::VerificationFailure, last_failure);
}

inline std::vector<Candidate> transport_candidates(const std::vector<double>& thetas,
                                                   const QubitAngles& q, double gamma_final,
                                                   std::optional<double> lambda) {
  std::vector<Candidate> out;
  for (double th : thetas) {
    Candidate c{th, std::nullopt};
    if (lambda) {
      try {
        const ZetaPhases z = zeta_phases(q.chi, q.mu, th, gamma_final);
        c.zeeman_phase = z.difference() - *lambda;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::DegeneratePhase) throw;
      }
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace detail

/// Preparation from |1> into a qubit b2|2> + b3|3> on the right dot.
inline ControlSchedule synthesize_preparation(const PrepareGate& gate, const SystemParams& params,
                                              const AnsatzSpec& ansatz = {},
                                              const BranchRule& rule = {}) {
  const auto& b = gate.target;
  double norm2 = 0.0;
  for (const auto& x : b) norm2 += std::norm(x);
  if (std::abs(norm2 - 1.0) > 1e-10)
    throw Error(ErrorKind::InvalidInput, "preparation target must be normalized");
  if (std::abs(b[3]) > 1e-10)
    throw Error(ErrorKind::InfeasibleTarget,
                "transfer |1> -> |4> is forbidden: <4|U(t)|1> vanishes identically");
  if (std::abs(b[0]) > 1e-10)
    throw Error(ErrorKind::InfeasibleTarget,
                "b1 must vanish: the pulse ends at an odd multiple of pi/2");

  const double m2 = std::abs(b[1]), m3 = std::abs(b[2]);
  const double theta0 = std::atan2(m3, m2);
  std::vector<double> thetas;
  if (theta0 < 1e-12) thetas = {0.0};
  else if (pi / 2.0 - theta0 < 1e-12) thetas = {pi / 2.0};
  else thetas = {-theta0, theta0};

  // b3/b2 = -tan(theta) e^{-i Delta T}
  std::vector<detail::Candidate> candidates;
  for (double th : thetas) {
    detail::Candidate c{th, std::nullopt};
    if (m2 > 1e-12 && m3 > 1e-12) {
      const double zeta = std::arg(cplx(-std::tan(th), 0.0));
      const double lambda = std::arg(b[2] / b[1]);
      c.zeeman_phase = zeta - lambda;
    }
    candidates.push_back(c);
  }

  Vector4c target;
  target << b[0], b[1], b[2], b[3];
  const Vector4c psi0 = StateVector::basis(1).amplitudes();
  return detail::emit(gate, candidates, psi0, target, params, ansatz,
                      rule);
}

inline ControlSchedule synthesize_gate(const GateSpec& spec, const SystemParams& params,
                                       const AnsatzSpec& ansatz = {}, const BranchRule& rule = {}) {
  if (const auto* p = std::get_if<PrepareGate>(&spec))
    return synthesize_preparation(*p, params, ansatz, rule);

  QubitAngles q;
  double A = 0.0, B = 0.0, lambda = 0.0;
  std::vector<double> thetas;
  if (const auto* g = std::get_if<PhaseGate>(&spec)) {
    q = normalize_qubit(g->initial);
    A = std::cos(q.chi);
    B = std::sin(q.chi);
    lambda = q.mu + g->phase_shift;
    thetas = {0.0};
  } else if (const auto* g = std::get_if<NotGate>(&spec)) {
    q = normalize_qubit(g->initial);
    A = std::sin(q.chi);
    B = std::cos(q.chi);
    lambda = -q.mu;
    thetas = solve_theta(q.chi, q.mu, A, B);
  } else {
    const auto& c = std::get<CustomTransport>(spec);
    q = normalize_qubit(c.initial);
    A = c.A;
    B = c.B;
    lambda = c.lambda;
    thetas = solve_theta(q.chi, q.mu, A, B);
  }

  const double gf = ansatz.family == AnsatzFamily::CosineRamp
                        ? ansatz.gamma_final
                        : (ansatz.gamma_samples.empty() ? 0.0 : ansatz.gamma_samples.back());
  const bool phase_fixed = A > 1e-12 && B > 1e-12;
  auto candidates = detail::transport_candidates(
      thetas, q, gf, phase_fixed ? std::optional<double>(lambda) : std::nullopt);

  Vector4c target = Vector4c::Zero();
  target(1) = A;
  target(2) = std::polar(B, lambda);
  const Vector4c psi0 = StateVector::left_qubit(q.chi, q.mu).amplitudes();
  return detail::emit(spec, candidates, psi0, target, params, ansatz,
                      rule);
}

}  // namespace pulseforge

#endif

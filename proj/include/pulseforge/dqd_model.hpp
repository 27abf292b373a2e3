#ifndef PULSEFORGE_DQD_MODEL_HPP
#define PULSEFORGE_DQD_MODEL_HPP

// Four-level model of one electron spin in a double quantum dot.
//
// Basis: |1> = L-down, |2> = R-down, |3> = R-up, |4> = L-up. Units: hbar = 1,
// so every Hamiltonian entry is an angular frequency (rad/s) and time is in
// seconds. Matrix indices in comments are 1-based to match the basis labels.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "error.hpp"
#include "quat4d.hpp"

namespace pulseforge {

using cplx = std::complex<double>;
using Matrix4c = Eigen::Matrix4cd;
using Vector4c = Eigen::Vector4cd;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

struct SystemParams {
  double delta = 2.0 * pi * 0.5e9;  // Zeeman splitting, rad/s

  void validate() const {
    if (!(delta > 0.0) || !std::isfinite(delta))
      throw Error(ErrorKind::InvalidInput, "Zeeman splitting must be positive and finite");
  }
};

/// Laboratory-frame reading of alpha(t) = alpha0 + alpha1(t) exp(i omega t).
/// Informational only; the simulator consumes the complex alpha directly.
struct RashbaDecomposition {
  double alpha0 = 0.0;
  double alpha1 = 0.0;
  double omega = 0.0;
};

struct ControlSample {
  double t = 0.0;
  double tau = 0.0;   // spin-conserving tunneling, rad/s
  cplx alpha{0.0};    // Rashba spin-flip tunneling, rad/s
};

class StateVector {
 public:
  StateVector() : c_(Vector4c::Zero()) { c_(0) = 1.0; }
  explicit StateVector(const Vector4c& c) : c_(c) {
    if (std::abs(c_.norm() - 1.0) > 1e-10)
      throw Error(ErrorKind::InvalidInput,
                  "state vector is not normalized (norm " + std::to_string(c_.norm()) + ")");
  }

  /// Normalizes `c` instead of rejecting it.
  static StateVector normalized(const Vector4c& c) {
    const double n = c.norm();
    if (!(n > 0.0)) throw Error(ErrorKind::InvalidInput, "zero state vector");
    return StateVector(Vector4c(c / n));
  }

  /// Bare basis state |n>, n in 1..4.
  static StateVector basis(int n) {
    if (n < 1 || n > 4) throw Error(ErrorKind::InvalidInput, "basis index must be 1..4");
    Vector4c c = Vector4c::Zero();
    c(n - 1) = 1.0;
    return StateVector(c);
  }

  /// cos(chi)|1> + exp(i mu) sin(chi)|4>: a qubit on the left dot.
  static StateVector left_qubit(double chi, double mu) {
    Vector4c c = Vector4c::Zero();
    c(0) = std::cos(chi);
    c(3) = std::polar(std::sin(chi), mu);
    return StateVector(c);
  }

  /// cos(chi)|2> + exp(i mu) sin(chi)|3>: a qubit on the right dot.
  static StateVector right_qubit(double chi, double mu) {
    Vector4c c = Vector4c::Zero();
    c(1) = std::cos(chi);
    c(2) = std::polar(std::sin(chi), mu);
    return StateVector(c);
  }

  const Vector4c& amplitudes() const { return c_; }
  cplx operator[](int i) const { return c_(i); }

  std::array<double, 4> populations() const {
    return {std::norm(c_(0)), std::norm(c_(1)), std::norm(c_(2)), std::norm(c_(3))};
  }

 private:
  Vector4c c_;
};

/// Diagonal phase frame K(t) = diag(1, e^{i phi2}, e^{i phi3}, e^{i phi4})
/// with phases affine in time: phi_n(t) = offset_n + rate_n * t.
struct PhaseFrame {
  std::array<double, 3> offset{0.0, 0.0, 0.0};  // phi2, phi3, phi4 at t = 0
  std::array<double, 3> rate{0.0, 0.0, 0.0};    // d/dt of phi2, phi3, phi4

  /// phi2 = -pi/2, phi3 = -delta t + pi/2, phi4 = -delta t.
  static PhaseFrame diamond(const SystemParams& params) {
    return {{-pi / 2.0, pi / 2.0, 0.0}, {0.0, -params.delta, -params.delta}};
  }

  double phase(int n, double t) const {
    if (n == 1) return 0.0;
    return offset[n - 2] + rate[n - 2] * t;
  }

  double phase_rate(int n) const { return n == 1 ? 0.0 : rate[n - 2]; }

  Matrix4c matrix(double t) const {
    Matrix4c k = Matrix4c::Zero();
    for (int n = 1; n <= 4; ++n) k(n - 1, n - 1) = std::polar(1.0, phase(n, t));
    return k;
  }

  bool is_diamond(const SystemParams& params, double tol = 1e-12) const {
    const PhaseFrame ref = diamond(params);
    for (int i = 0; i < 3; ++i) {
      if (std::abs(offset[i] - ref.offset[i]) > tol) return false;
      if (std::abs(rate[i] - ref.rate[i]) > tol * std::max(1.0, params.delta)) return false;
    }
    return true;
  }
};

/// Rotation angles at one instant under the diamond constraints: the only
/// moving angle is gamma; theta is the constant coupling mixing angle and may
/// be any real number (negative values are used for preparation).
struct DiamondAngles {
  double gamma = 0.0;
  double gamma_rate = 0.0;  // d gamma / dt, rad/s
  double theta = 0.0;
};

/// Two-quaternion angles before gauge fixing (phi_1 = phi_2 = 0, constant thetas).
struct GeneralAngles {
  double gamma1 = 0.0;
  double gamma1_rate = 0.0;
  double gamma2 = 0.0;
  double gamma2_rate = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
};

inline Matrix4c h0_matrix(const ControlSample& s, const SystemParams& params) {
  Matrix4c h = Matrix4c::Zero();
  h(0, 1) = h(1, 0) = s.tau;
  h(2, 3) = h(3, 2) = s.tau;
  h(0, 2) = s.alpha;
  h(2, 0) = std::conj(s.alpha);
  h(1, 3) = -s.alpha;
  h(3, 1) = -std::conj(s.alpha);
  h(2, 2) = h(3, 3) = params.delta;
  return h;
}

inline ControlSample controls_from_angles(const DiamondAngles& a, double t,
                                         const SystemParams& params) {
  ControlSample s;
  s.t = t;
  s.tau = a.gamma_rate * std::cos(a.theta);
  s.alpha = -std::polar(1.0, params.delta * t) * (a.gamma_rate * std::sin(a.theta));
  return s;
}

inline RashbaDecomposition rashba_decomposition(const DiamondAngles& a,
                                                const SystemParams& params) {
  return {0.0, -a.gamma_rate * std::sin(a.theta), params.delta};
}

/// H(t) built directly from the rotation angles in the diamond gauge.
inline Matrix4c full_hamiltonian(const DiamondAngles& a, const PhaseFrame& frame, double t,
                                 const SystemParams& params) {
  if (!frame.is_diamond(params))
    throw Error(ErrorKind::InvalidInput, "full_hamiltonian requires the diamond phase frame");
  const double c = a.gamma_rate * std::cos(a.theta);
  const cplx s = std::polar(1.0, params.delta * t) * (a.gamma_rate * std::sin(a.theta));
  Matrix4c h = Matrix4c::Zero();
  h(0, 1) = c;
  h(2, 3) = c;
  h(0, 2) = -s;
  h(1, 3) = s;
  h(1, 0) = std::conj(h(0, 1));
  h(3, 2) = std::conj(h(2, 3));
  h(2, 0) = std::conj(h(0, 2));
  h(3, 1) = std::conj(h(1, 3));
  h(2, 2) = h(3, 3) = params.delta;
  return h;
}

/// Four-coupling diamond Hamiltonian for an arbitrary affine phase frame.
inline Matrix4c general_hamiltonian_check(const GeneralAngles& a, const PhaseFrame& frame,
                                          double t) {
  const double p2 = frame.phase(2, t);
  const double p3 = frame.phase(3, t);
  const double p4 = frame.phase(4, t);
  const double g1 = a.gamma1_rate;
  const double g2 = a.gamma2_rate;
  const double c1 = std::cos(a.theta1), s1 = std::sin(a.theta1);
  const double c2 = std::cos(a.theta2), s2 = std::sin(a.theta2);

  Matrix4c h = Matrix4c::Zero();
  h(1, 1) = -frame.phase_rate(2);
  h(2, 2) = -frame.phase_rate(3);
  h(3, 3) = -frame.phase_rate(4);
  h(0, 1) = -I * std::polar(1.0, -p2) * (g1 * c1 + g2 * c2);
  h(0, 2) = -I * std::polar(1.0, -p3) * (g1 * s1 + g2 * s2);
  h(1, 3) = -I * std::polar(1.0, p2 - p4) * (-g1 * s1 + g2 * s2);
  h(2, 3) = -I * std::polar(1.0, p3 - p4) * (g1 * c1 - g2 * c2);
  h(1, 0) = std::conj(h(0, 1));
  h(2, 0) = std::conj(h(0, 2));
  h(3, 1) = std::conj(h(1, 3));
  h(3, 2) = std::conj(h(2, 3));
  return h;
}

/// Closed-form U(t) for the diamond gauge, valid when gamma(0) is a multiple of 2 pi.
inline Matrix4c analytic_propagator(const DiamondAngles& a, double t,
                                    const SystemParams& params) {
  const double cg = std::cos(a.gamma), sg = std::sin(a.gamma);
  const double ct = std::cos(a.theta), st = std::sin(a.theta);
  const cplx e = std::polar(1.0, -params.delta * t);
  Matrix4c u = Matrix4c::Zero();
  u(0, 0) = cg;
  u(0, 1) = -I * ct * sg;
  u(0, 2) = I * sg * st;
  u(1, 0) = -I * ct * sg;
  u(1, 1) = cg;
  u(1, 3) = -I * sg * st;
  u(2, 0) = I * e * sg * st;
  u(2, 2) = e * cg;
  u(2, 3) = -I * e * ct * sg;
  u(3, 1) = -I * e * sg * st;
  u(3, 2) = -I * e * ct * sg;
  u(3, 3) = e * cg;
  return u;
}

/// The same propagator assembled as K(t) L(q) K(0)^dagger from the left
/// isoclinic rotation of q(gamma, theta, phi = 0).
inline Matrix4c propagator_from_rotation(const DiamondAngles& a, double t,
                                         const SystemParams& params) {
  const auto q = quat4d::quat_from_angles({a.gamma, a.theta, 0.0});
  const Matrix4c ur = quat4d::left_isoclinic(q).m.cast<cplx>();
  const PhaseFrame k = PhaseFrame::diamond(params);
  return k.matrix(t) * ur * k.matrix(0.0).adjoint();
}

}  // namespace pulseforge

#endif

#ifndef PULSEFORGE_TEST_SUPPORT_HPP
#define PULSEFORGE_TEST_SUPPORT_HPP

// Generators and independent oracles shared by the test binaries. Nothing
// here calls into the code paths it is used to check.

#include <functional>
#include <random>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include <pulseforge/pulseforge.hpp>

namespace pft {

using namespace pulseforge;

inline std::mt19937_64& rng() {
  static std::mt19937_64 gen(20240611);
  return gen;
}

inline double uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng());
}

inline quat4d::UnitQuaternion random_quaternion() {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Vector4d v(n(rng()), n(rng()), n(rng()), n(rng()));
  v.normalize();
  return {v(0), v(1), v(2), v(3)};
}

inline double max_abs(const Matrix4c& m) { return m.cwiseAbs().maxCoeff(); }

/// Exponential-midpoint propagation with exact 4x4 matrix exponentials:
/// second order, structurally different from RK4.
inline Vector4c expm_midpoint(const std::function<ControlSample(double)>& controls,
                              const SystemParams& params, const Vector4c& psi0, double t_end,
                              std::size_t n) {
  Vector4c psi = psi0;
  const double h = t_end / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double tm = (static_cast<double>(k) + 0.5) * h;
    const Matrix4c gen = (-I * h) * h0_matrix(controls(tm), params);
    psi = gen.exp() * psi;
  }
  return psi;
}

/// Roots of |<2|U psi0>| - A over theta in (-pi/2, pi/2], located by a dense
/// sign-change scan plus bisection on the closed-form propagator.
inline std::vector<double> brute_force_theta(double chi, double mu, double A,
                                             std::size_t scan = 20000) {
  const SystemParams p{1.0};
  const Vector4c psi0 = StateVector::left_qubit(chi, mu).amplitudes();
  auto f = [&](double th) {
    const Vector4c b = analytic_propagator({pi / 2.0, 0.0, th}, 0.0, p) * psi0;
    return std::abs(b(1)) - A;
  };
  std::vector<double> roots;
  const double lo = -pi / 2.0;
  double prev_t = lo, prev_f = f(lo);
  for (std::size_t i = 1; i <= scan; ++i) {
    const double t = lo + pi * static_cast<double>(i) / static_cast<double>(scan);
    const double v = f(t);
    if (prev_f == 0.0) roots.push_back(prev_t);
    else if ((prev_f < 0.0) != (v < 0.0) && v != 0.0) {
      double a = prev_t, b = t, fa = prev_f;
      for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if ((fm < 0.0) == (fa < 0.0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      roots.push_back(0.5 * (a + b));
    }
    prev_t = t;
    prev_f = v;
  }
  return roots;
}

/// Smallest distance between x and any element of v, modulo pi.
inline double distance_mod_pi(const std::vector<double>& v, double x) {
  double best = 1e300;
  for (double y : v) {
    const double d = std::remainder(x - y, pi);
    best = std::min(best, std::abs(d));
  }
  return best;
}

}  // namespace pft

#endif

#pragma once
// Radial reduction of the kernel |x-y|^{-n-2s}.
//
// For radial u, \iint g(|x|,|y|) |x-y|^{-n-2s} dx dy = \int\int omega_n r^{n-1} rho^{n-1} K(r,rho) g dr drho
// with K(r,rho) the sphere average below. Near the diagonal K ~ S(r,rho) |r-rho|^{-1-2s}; we keep that split
// explicit (singular coefficient S plus a regular remainder) so pair quadrature can treat each part with
// the right rule.

#include "fracneu/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>
#include <string>

namespace fracneu {

struct KernelParams {
  int n = 1;
  double s = 0.75;
  double c_ns = 0.0;
};

inline void check_order(double s) {
  if (!(s > 0.5 && s < 1.0))
    throw ParameterError("fractional order s must lie in (1/2,1), got " + std::to_string(s));
}

/// c_{n,s} = s 4^s Gamma((n+2s)/2) / (pi^{n/2} Gamma(1-s)).
inline double normalization_constant(int n, double s) {
  if (n < 1) throw ParameterError("dimension n must be >= 1");
  check_order(s);
  using boost::math::tgamma;
  return s * std::pow(2.0, 2.0 * s) * tgamma(0.5 * (n + 2.0 * s)) /
         (std::pow(std::numbers::pi, 0.5 * n) * tgamma(1.0 - s));
}

inline KernelParams make_kernel_params(int n, double s) { return {n, s, normalization_constant(n, s)}; }

/// Surface area of the unit sphere S^{n-1} in R^n (omega_1 = 2).
inline double sphere_area(int n) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / boost::math::tgamma(0.5 * n);
}

/// |Omega| for the annulus A_{R0,R} (R0 = 0 is the ball).
inline double domain_measure(int n, double R0, double R) {
  return sphere_area(n) * (std::pow(R, n) - std::pow(R0, n)) / n;
}

namespace detail {

// \int_{R^{n-1}} (1+|z|^2)^{-p/2} dz : leading diagonal coefficient of K for general n.
inline double diag_coefficient(int n, double s) {
  const double p = n + 2.0 * s;
  using boost::math::tgamma;
  return std::pow(std::numbers::pi, 0.5 * (n - 1)) * tgamma(0.5 * (p - n + 1)) / tgamma(0.5 * p);
}

// omega_{n-1} \int_0^pi (r^2+rho^2-2 r rho cos t)^{-p/2} sin^{n-2} t dt, n >= 2.
inline double angular_quadrature(double r, double rho, int n, double s) {
  const double p = n + 2.0 * s;
  const double area = sphere_area(n - 1);
  auto f = [&](double t) {
    const double d2 = (r - rho) * (r - rho) + 2.0 * r * rho * (1.0 - std::cos(t));
    double v = std::pow(d2, -0.5 * p);
    if (n > 2) v *= std::pow(std::sin(t), n - 2);
    return v;
  };
  // the integrand peaks at t = 0 with width ~ |r-rho|/sqrt(r rho); split there
  const double w = std::min(std::numbers::pi, 4.0 * std::abs(r - rho) / std::sqrt(r * rho));
  using boost::math::quadrature::gauss_kronrod;
  double total = 0.0;
  double a = 0.0, b = w;
  while (true) {
    total += gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-13);
    if (b >= std::numbers::pi) break;
    a = b;
    b = std::min(std::numbers::pi, 4.0 * b);
  }
  return area * total;
}

}  // namespace detail

/// K(r,rho) = \int_{S^{n-1}} |r e_1 - rho w|^{-(n+2s)} dsigma(w).
inline double angular_kernel(double r, double rho, const KernelParams& kp) {
  if (r == rho) throw SingularityError("angular_kernel evaluated at r == rho");
  const double s = kp.s;
  const double p = kp.n + 2.0 * s;
  switch (kp.n) {
    case 1:
      return std::pow(std::abs(r - rho), -p) + std::pow(r + rho, -p);
    case 3: {
      if (r == 0.0 || rho == 0.0) return 4.0 * std::numbers::pi * std::pow(r + rho, -p);
      return 2.0 * std::numbers::pi *
             (std::pow(std::abs(r - rho), 2.0 - p) - std::pow(r + rho, 2.0 - p)) /
             (r * rho * (p - 2.0));
    }
    default:
      if (r == 0.0 || rho == 0.0) return sphere_area(kp.n) * std::pow(r + rho, -p);
      return detail::angular_quadrature(r, rho, kp.n, s);
  }
}

/// Split of the radially weighted kernel (r rho)^{n-1} K(r,rho) = S |r-rho|^{-1-2s} + Reg for r != rho.
/// S and Reg extend continuously to the diagonal and to r = 0 or rho = 0.
struct KernelSplit {
  double sing;
  double reg;
};

inline KernelSplit weighted_split(double r, double rho, const KernelParams& kp) {
  const double s = kp.s;
  const double p = kp.n + 2.0 * s;
  switch (kp.n) {
    case 1:
      return {1.0, std::pow(r + rho, -p)};
    case 3: {
      const double pre = 2.0 * std::numbers::pi * r * rho / (p - 2.0);
      return {pre, -pre * std::pow(r + rho, 2.0 - p)};
    }
    default: {
      if (r == 0.0 || rho == 0.0) return {0.0, 0.0};
      const double w = std::pow(r * rho, kp.n - 1);
      const double d = std::abs(r - rho);
      if (d < 1e-7 * std::max(r, rho)) {
        const double m = 0.5 * (r + rho);
        return {w * detail::diag_coefficient(kp.n, s) * std::pow(m, 1.0 - kp.n), 0.0};
      }
      return {w * angular_kernel(r, rho, kp) * std::pow(d, 1.0 + 2.0 * s), 0.0};
    }
  }
}

/// (r rho)^{n-1} K(r,rho) for r != rho.
inline double weighted_kernel(double r, double rho, const KernelParams& kp) {
  if (kp.n == 1) return angular_kernel(r, rho, kp);
  if (kp.n == 3) {
    auto sp = weighted_split(r, rho, kp);
    return sp.sing * std::pow(std::abs(r - rho), -1.0 - 2.0 * kp.s) + sp.reg;
  }
  if (r == 0.0 || rho == 0.0) return 0.0;
  return std::pow(r * rho, kp.n - 1) * angular_kernel(r, rho, kp);
}

}  // namespace fracneu

#pragma once

// Reference values computed without the finite element code: 1D laminate
// flux balance, laminate elasticity by traction continuity, manufactured
// solutions, and a 3x3 Gauss L2 error.

#include "hk/grid.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

using hk::Mat2;
using hk::Vec2;

inline constexpr double pi = std::numbers::pi;

/// Two-phase laminate varying in y_1: fractions (1-f, f), conductivities
/// sigma_k, exponents p_k. Returns the constant flux q of the 1D problem
/// <(q / sigma)^{1/(p-1)}> = s (s = |xi| along the layering normal), by
/// bisection.
inline double laminate_normal_flux(double f, std::array<double, 2> sigma, std::array<double, 2> p, double s)
{
  auto g = [&](double q) {
    return (1.0 - f) * std::pow(q / sigma[0], 1.0 / (p[0] - 1.0)) + f * std::pow(q / sigma[1], 1.0 / (p[1] - 1.0)) - s;
  };
  double lo = 0.0, hi = 1.0;
  while (g(hi) < 0.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// p = 2 means.
inline double harmonic(double f, double s0, double s1) { return 1.0 / ((1.0 - f) / s0 + f / s1); }
inline double arithmetic(double f, double s0, double s1) { return (1.0 - f) * s0 + f * s1; }

/// Isotropic stress lambda tr(e) I + 2 mu e.
inline Mat2 iso_stress(double lambda, double mu, const Mat2& e)
{
  return lambda * e.trace() * Mat2::Identity() + 2.0 * mu * e;
}

/// Effective stress of an isotropic two-phase laminate (layers normal to
/// e_1, inclusion fraction f) under macroscopic strain E: strain components
/// along the layer (e_22) are shared, tractions (s_11, s_12) are continuous,
/// and the phase strains average to E.
inline Mat2 laminate_effective_stress(double f, std::array<double, 2> lambda, std::array<double, 2> mu, const Mat2& E)
{
  // unknowns: e11_0, e11_1, e12_0, e12_1
  Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
  Eigen::Vector4d b = Eigen::Vector4d::Zero();
  const double w[2] = {1.0 - f, f};
  A(0, 0) = w[0];
  A(0, 1) = w[1];
  b(0) = E(0, 0);
  A(1, 2) = w[0];
  A(1, 3) = w[1];
  b(1) = 0.5 * (E(0, 1) + E(1, 0));
  // s11 = (lambda + 2 mu) e11 + lambda e22 continuous
  A(2, 0) = lambda[0] + 2.0 * mu[0];
  A(2, 1) = -(lambda[1] + 2.0 * mu[1]);
  b(2) = (lambda[1] - lambda[0]) * E(1, 1);
  // s12 = 2 mu e12 continuous
  A(3, 2) = 2.0 * mu[0];
  A(3, 3) = -2.0 * mu[1];
  const Eigen::Vector4d x = A.fullPivLu().solve(b);
  Mat2 avg = Mat2::Zero();
  for (int k = 0; k < 2; ++k) {
    Mat2 e;
    e << x(k), x(2 + k), x(2 + k), E(1, 1);
    avg += w[k] * iso_stress(lambda[k], mu[k], e);
  }
  return avg;
}

/// u = sin(pi x1) sin(pi x2), -Laplace u.
inline double laplace_u(const Vec2& x) { return std::sin(pi * x(0)) * std::sin(pi * x(1)); }
inline double laplace_f(const Vec2& x) { return 2.0 * pi * pi * laplace_u(x); }

/// u = (sin(pi x1) sin(pi x2), 0) under isotropic (lambda, mu):
/// g = -div(lambda tr(D u) I + 2 mu D u).
inline Vec2 elastic_u(const Vec2& x) { return {laplace_u(x), 0.0}; }
inline Vec2 elastic_g(const Vec2& x, double lambda, double mu)
{
  const double s1 = std::sin(pi * x(0)), s2 = std::sin(pi * x(1));
  const double c1 = std::cos(pi * x(0)), c2 = std::cos(pi * x(1));
  return {(lambda + 3.0 * mu) * pi * pi * s1 * s2, -(lambda + mu) * pi * pi * c1 * c2};
}

/// ||u_h - u||_{L2} with a 3x3 Gauss rule per element; u_h is evaluated by
/// bilinear interpolation of its nodal values.
inline double l2_error(const hk::NodalField& uh, const std::function<double(const Vec2&, int)>& exact)
{
  const double gp[3] = {0.5 - 0.5 * std::sqrt(0.6), 0.5, 0.5 + 0.5 * std::sqrt(0.6)};
  const double gw[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  const auto& g = uh.grid;
  double s = 0.0;
  for (int e = 0; e < g.element_count(); ++e) {
    const Vec2 o = g.element_origin(e);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const Vec2 x = o + g.h() * Vec2(gp[a], gp[b]);
        const auto nodes = g.element_nodes(e);
        const auto sh = hk::q1_shape(Vec2(gp[a], gp[b]));
        for (int c = 0; c < uh.components; ++c) {
          double v = 0.0;
          for (int k = 0; k < 4; ++k) v += sh[static_cast<std::size_t>(k)] * uh(nodes[static_cast<std::size_t>(k)], c);
          const double d = v - exact(x, c);
          s += gw[a] * gw[b] * g.h() * g.h() * d * d;
        }
      }
  }
  return std::sqrt(s);
}

/// Least-squares slope of log(err) against log(h).
inline double loglog_slope(const std::vector<double>& h, const std::vector<double>& err)
{
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    mx += std::log(h[i]);
    my += std::log(err[i]);
  }
  mx /= static_cast<double>(h.size());
  my /= static_cast<double>(h.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    sxy += (std::log(h[i]) - mx) * (std::log(err[i]) - my);
    sxx += (std::log(h[i]) - mx) * (std::log(h[i]) - mx);
  }
  return sxy / sxx;
}

}  // namespace oracle

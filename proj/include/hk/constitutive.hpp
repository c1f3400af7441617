#pragma once

// Constitutive families a(y, xi) of the monotone electrostatic law and the
// phase-wise constant fourth-order tensors B(y), C(y).

#include "hk/grid.hpp"
#include "hk/types.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace hk {

/// Two-phase periodic microstructure on Y. Phase 1 is the inclusion, phase 0
/// the surrounding matrix.
struct Geometry {
  enum class Kind { Homogeneous, Laminate, SquareInclusion, Disc, Checkerboard };

  Kind kind = Kind::Homogeneous;
  /// Laminate: inclusion volume fraction, occupying y_1 in [1/2 - f, 1/2).
  /// Square inclusion: side length. Disc: radius.
  double size = 0.0;

  static Geometry homogeneous() { return {Kind::Homogeneous, 0.0}; }
  static Geometry laminate(double fraction) { return {Kind::Laminate, fraction}; }
  static Geometry square(double side) { return {Kind::SquareInclusion, side}; }
  static Geometry disc(double radius) { return {Kind::Disc, radius}; }
  static Geometry checkerboard() { return {Kind::Checkerboard, 0.0}; }

  /// Phase of a point of Y (the point is wrapped first).
  int phase(const Vec2& y) const;
  std::string name() const;
};

/// Phase id at every quadrature point of `grid`, evaluated at {x/eps}_Y.
/// Cell grids use eps = 1.
std::vector<int> qp_phases(const Geometry& geometry, const StructuredGrid& grid, double eps = 1.0);

enum class Family { Linear, PowerLaw, VariableExponent };

std::string to_string(Family f);

struct PhaseLaw {
  double sigma = 1.0;
  double exponent = 2.0;
  Mat2 matrix = Mat2::Identity();
};

/// A constitutive law a(y, xi) with declared structure constants.
///
/// Linear: a = b(y) xi. Power law and variable exponent:
/// a = sigma(y) (delta^2 + |xi|^2)^{(p(y)-2)/2} xi, with a constant exponent
/// for the power law. The constants (p, alpha, lambda_o, Lambda_o, Lambda_*)
/// are declarations audited by sampling, not derived.
struct OperatorSpec {
  Family family = Family::Linear;
  double p = 2.0;
  double alpha = 1.0;
  double lambda_o = 1.0;
  double Lambda_o = 1.0;
  double Lambda_star = 1.0;
  double delta = 0.0;
  std::array<PhaseLaw, 2> phases{};  // [matrix, inclusion]
  Geometry geometry{};

  static OperatorSpec linear(const Mat2& matrix_phase, const Mat2& inclusion_phase, Geometry g);
  static OperatorSpec power_law(double p, double sigma_matrix, double sigma_inclusion, Geometry g,
                                double delta = 0.0);
  static OperatorSpec variable_exponent(double p_matrix, double p_inclusion, double sigma_matrix,
                                        double sigma_inclusion, Geometry g, double delta = 0.0);

  /// Throws InvalidArgument on a violated invariant.
  void validate() const;

  int phase_at(const Vec2& y) const { return geometry.phase(y); }
  Vec2 flux(int phase, const Vec2& xi) const;
  /// d a / d xi.
  Mat2 tangent(int phase, const Vec2& xi) const;
  /// Frozen-coefficient matrix S with a(xi) = S(xi) xi (Kacanov iteration).
  Mat2 secant(int phase, const Vec2& xi) const;
  Vec2 eval(const Vec2& y, const Vec2& xi) const { return flux(phase_at(y), xi); }

  /// True when both phases carry the same law (or the geometry is homogeneous).
  bool is_y_independent() const;
  /// Largest exponent over the phases that actually occur.
  double max_exponent() const;
  std::string fingerprint() const;
};

struct GrowthReport {
  int samples = 0;
  double max_a_at_zero = 0.0;        // compare with Lambda_*
  double empirical_Lambda_o = 0.0;   // max continuity ratio
  double empirical_lambda_o = 0.0;   // min monotonicity ratio
  bool zero_bound_ok = true;         // max |a(y,0)| <= Lambda_*
  bool violation = false;            // empirical lambda_o <= 0
};

/// Samples m random (y, xi_1, xi_2) with xi in the ball of radius `radius`.
GrowthReport check_growth_conditions(const OperatorSpec& spec, int m, std::uint64_t seed,
                                     double radius = 3.0);

/// Isotropic tensor lambda delta_ij delta_kl + mu (delta_ik delta_jl + delta_il delta_jk).
Tensor4 isotropic_tensor(double lambda, double mu);

/// Phase-wise constant fourth-order tensor field on Y.
struct ElasticTensorField {
  Geometry geometry{};
  std::array<Tensor4, 2> phases{Tensor4::Zero(), Tensor4::Zero()};  // [matrix, inclusion]

  static ElasticTensorField isotropic(double lambda_matrix, double mu_matrix, double lambda_inclusion,
                                      double mu_inclusion, Geometry g);
  static ElasticTensorField uniform(const Tensor4& t);

  const Tensor4& at(const Vec2& y) const { return phases[static_cast<std::size_t>(geometry.phase(y))]; }
  Mat2 apply(const Vec2& y, const Mat2& m) const { return hk::apply(at(y), m); }
  bool is_uniform() const;
};

/// Largest violation of B_ijkh = B_jikh = B_ijhk (and B_ijkh = B_khij when
/// `major` is set).
double symmetry_defect(const Tensor4& t, bool major = true);

/// Smallest eigenvalue of the quadratic form c -> T c : c on symmetric 2x2
/// matrices (Frobenius-orthonormal basis).
double min_symmetric_eigenvalue(const Tensor4& t);

struct ElasticAudit {
  double symmetry_defect = 0.0;
  double sampled_ellipticity = 0.0;  // min B c:c / |c|^2 over sampled symmetric c
  double max_norm = 0.0;             // max entry magnitude
};

ElasticAudit audit_elastic_tensor(const ElasticTensorField& field, int samples, std::uint64_t seed);

}  // namespace hk

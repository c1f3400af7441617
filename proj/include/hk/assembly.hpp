#pragma once

// Q1 assembly shared by the cell, fine-scale and homogenized solvers, plus
// the damped Newton / Kacanov driver for monotone scalar problems.

#include "hk/constitutive.hpp"
#include "hk/linalg.hpp"

#include <span>
#include <vector>

namespace hk {

/// Flux law sampled at quadrature points: given the total gradient at every
/// quadrature point, return fluxes and (optionally) tangents.
class QuadratureLaw {
 public:
  virtual ~QuadratureLaw() = default;
  /// `tangent` is empty when only fluxes are needed.
  virtual void evaluate(std::span<const Vec2> grads, std::span<Vec2> flux, std::span<Mat2> tangent) = 0;
  /// Tangents at `grads`, which are the gradients of the latest evaluate().
  virtual void tangent(std::span<const Vec2> grads, std::span<Mat2> t);
  virtual bool has_secant() const { return false; }
  virtual void secant(std::span<const Vec2> /*grads*/, std::span<Mat2> /*s*/) {}
  /// False if tangents may be non-symmetric (LU instead of Cholesky).
  virtual bool symmetric() const { return true; }
  /// Coefficient of the linear problem used as a starting guess from zero:
  /// columns a(e_1), a(e_2) at every quadrature point.
  virtual void initial_operator(std::span<Mat2> out);
};

/// a(y, xi) of an OperatorSpec with a fixed phase id per quadrature point.
class SpecQuadratureLaw final : public QuadratureLaw {
 public:
  SpecQuadratureLaw(const OperatorSpec& spec, std::vector<int> phases)
      : spec_(spec), phases_(std::move(phases))
  {
  }
  void evaluate(std::span<const Vec2> grads, std::span<Vec2> flux, std::span<Mat2> tangent) override;
  void tangent(std::span<const Vec2> grads, std::span<Mat2> t) override;
  bool has_secant() const override { return true; }
  void secant(std::span<const Vec2> grads, std::span<Mat2> s) override;
  bool symmetric() const override;
  const std::vector<int>& phases() const { return phases_; }

 private:
  const OperatorSpec& spec_;
  std::vector<int> phases_;
};

struct NewtonOptions {
  double tol = 1e-10;      // max-norm nodal residual
  int max_newton = 50;
  int max_picard = 200;
  /// Residual magnitude the tolerance is measured against; tol is applied
  /// relative to min(1, scale). Non-positive: use the residual at u = 0.
  double residual_scale = -1.0;
  bool direct = false;     // sparse direct solve instead of CG for Dirichlet systems
  /// Dirichlet problems starting from u = 0: first solve the linear problem
  /// with initial_operator() (tangents of p > 2 laws vanish at zero gradient).
  bool initial_linear_solve = true;
  PcgOptions linear{};
};

struct NewtonStats {
  int newton_iterations = 0;
  int picard_iterations = 0;
  double residual = 0.0;
  bool used_picard = false;
  std::vector<double> history;  // max-norm residual per iterate
};

/// Gradient of a scalar nodal vector at all quadrature points plus a
/// constant background gradient.
void gradients_at_qp(const StructuredGrid& grid, std::span<const double> u, const Vec2& background,
                     std::span<Vec2> out);

/// r_i = sum_q w_q flux_q . grad N_i - load_i
void scalar_residual(const StructuredGrid& grid, std::span<const Vec2> flux, std::span<const double> load,
                     std::span<double> r);

/// K_ij = sum_q w_q grad N_i . T_q grad N_j
void assemble_scalar_operator(const StructuredGrid& grid, std::span<const Mat2> coeff, StencilMatrix& k);

/// int f N_i with f interpolated from nodes.
std::vector<double> scalar_load(const NodalField& f);

/// Solves sum_q w a(background + grad u) . grad v = load(v) for all test v
/// (periodic grids: mean-zero u; domain grids: u = 0 on the boundary).
/// `u` carries the initial guess. `pattern`, if given, is a matrix on `grid`
/// reused as workspace. Throws NonConvergence.
NewtonStats solve_monotone(const StructuredGrid& grid, QuadratureLaw& law, const Vec2& background,
                           std::span<const double> load, std::span<double> u, const NewtonOptions& opts,
                           StencilMatrix* pattern = nullptr);

/// Max-norm of the residual over free dofs.
double free_residual_norm(const StructuredGrid& grid, std::span<const double> r, int components = 1);

// --- linear elasticity -----------------------------------------------------

/// Symmetric gradient of the basis function N_a e_c at quadrature point q,
/// for element size h.
Mat2 basis_strain(int q, int a, int c, double h);

/// K_{(a,c),(b,d)} = sum_q w T_q D(N_b e_d) : D(N_a e_c), T_q = tensors[phase_q].
void assemble_elasticity(const StructuredGrid& grid, std::span<const int> phases,
                         const std::array<Tensor4, 2>& tensors, StencilMatrix& k);

/// f_(a,c) = sum_q w S_q : D(N_a e_c) for a stress field S at quadrature points.
std::vector<double> stress_load(const QuadField& stress);

/// int g . N_a e_c with g interpolated from nodes.
std::vector<double> body_load(const NodalField& g);

}  // namespace hk

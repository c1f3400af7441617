#pragma once

// Periodic cell problems on Y: the scalar monotone problem for eta_xi and the
// two elastic problems (unit-strain and electrostriction loads).

#include "hk/assembly.hpp"
#include "hk/constitutive.hpp"

#include <array>
#include <memory>
#include <string>

namespace hk {

struct SolverOptions {
  double tol = 1e-10;  // max-norm nodal residual (nonlinear) / relative CG residual (linear)
  int max_newton = 50;
  int max_picard = 200;
  int max_linear = 50000;
};

struct ScalarCellSolution {
  Vec2 xi = Vec2::Zero();
  NodalField eta;  // periodic, zero mean
  double residual = 0.0;
  int iterations = 0;
  bool used_picard = false;
};

/// Reusable solver for one (spec, grid) pair. solve() is const and safe to
/// call from several threads.
class ScalarCellSolver {
 public:
  ScalarCellSolver(const OperatorSpec& spec, const CellGrid& grid, SolverOptions opts = {});

  /// `warm` (optional) seeds the iteration with a nearby solution.
  ScalarCellSolution solve(const Vec2& xi, const NodalField* warm = nullptr) const;

  const OperatorSpec& spec() const { return spec_; }
  const CellGrid& grid() const { return grid_; }
  const std::vector<int>& phases() const { return phases_; }
  const SolverOptions& options() const { return opts_; }

 private:
  OperatorSpec spec_;
  CellGrid grid_;
  SolverOptions opts_;
  std::vector<int> phases_;
  StencilMatrix pattern_;
};

ScalarCellSolution solve_scalar_cell(const OperatorSpec& spec, const Vec2& xi, const CellGrid& grid,
                                     const SolverOptions& opts = {});

/// p(y, xi) = xi + grad eta_xi at quadrature points (2 components).
QuadField corrector_flux(const ScalarCellSolution& sol);

/// <a(y, p(y, xi))>, the effective flux.
Vec2 average_flux(const OperatorSpec& spec, const ScalarCellSolution& sol);

/// |int a(y,p).p - int a(y,p).xi|.
double verify_flux_identity(const OperatorSpec& spec, const Vec2& xi, const ScalarCellSolution& sol);

/// Discrete weak residual (max-norm over nodes) of the cell problem at `sol`.
double cell_residual(const OperatorSpec& spec, const ScalarCellSolution& sol);

struct ElasticCellSolution {
  int i = 0, j = 0;  // 0-based load indices
  NodalField field;  // 2 components, zero mean
  double residual = 0.0;
  int iterations = 0;
};

/// Upsilon^ij: int_Y B D(U^ij - Upsilon^ij) : D(v) = 0, U^ij_k = y_j delta_ik.
/// Indices are 0-based.
ElasticCellSolution solve_elastic_cell_U(const ElasticTensorField& b, const CellGrid& grid, int i, int j,
                                         const SolverOptions& opts = {});

/// zeta^ij = p(y, e^i) (x) p(y, e^j) at quadrature points (4 components).
QuadField assemble_zeta(const ScalarCellSolution& sol_i, const ScalarCellSolution& sol_j);

/// Placement of C in the electrostriction cell problem and C^hom average.
///  AsWritten: div(C D(chi) + zeta) = 0,   C^hom_ij = <C D(chi) + zeta>
///  CApplied:  div(C (D(chi) + zeta)) = 0, C^hom_ij = <C (D(chi) + zeta)>
///  TwoScale:  div(B D(chi) + C zeta) = 0, C^hom_ij = <B D(chi) + C zeta>
enum class ChomVariant { AsWritten, CApplied, TwoScale };

std::string to_string(ChomVariant v);
ChomVariant parse_chom_variant(const std::string& s);

/// chi^ij for a given zeta^ij. `b` is only used by the TwoScale variant.
ElasticCellSolution solve_electrostriction_cell(const ElasticTensorField& c, const QuadField& zeta,
                                                const CellGrid& grid, ChomVariant variant,
                                                const ElasticTensorField* b = nullptr,
                                                const SolverOptions& opts = {});

/// Solver for periodic elastic cell problems K x = f with a fixed tensor
/// field; the operator is assembled once.
class ElasticCellOperator {
 public:
  ElasticCellOperator(const ElasticTensorField& t, const CellGrid& grid);
  /// Solves K x = load; zero mean. Throws SingularSystem / NonConvergence.
  ElasticCellSolution solve(std::span<const double> load, const SolverOptions& opts) const;
  const std::vector<int>& phases() const { return phases_; }
  const std::array<Tensor4, 2>& tensors() const { return tensors_; }
  const CellGrid& grid() const { return grid_; }
  /// Max-norm of K x - load.
  double residual(const NodalField& x, std::span<const double> load) const;

 private:
  CellGrid grid_;
  std::vector<int> phases_;
  std::array<Tensor4, 2> tensors_;
  StencilMatrix k_;
};

/// T(y) M at quadrature points for a constant matrix M (4 components).
QuadField apply_constant(const ElasticTensorField& t, const CellGrid& grid, const Mat2& m);

/// T(y) F(y) at quadrature points.
QuadField apply_field(const ElasticTensorField& t, const QuadField& f);

/// sym(e^i (x) e^j)
Mat2 unit_strain(int i, int j);

}  // namespace hk

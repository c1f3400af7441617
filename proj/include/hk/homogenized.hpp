#pragma once

// The effective problems on the unit square and reconstruction of the
// first-order correctors phi^1, u^1 from cell solutions.

#include "hk/effective.hpp"
#include "hk/fine_scale.hpp"

#include <memory>

namespace hk {

struct HomogenizedOptions {
  double tol = 1e-9;  // max-norm nodal residual relative to min(1, |load|)
  int max_newton = 50;
  int threads = 1;
  bool direct = true;
  bool linear_predictor = true;  // start Newton from the solve with [a^hom(e1) a^hom(e2)]
};

/// Cell solution eta at every macroscopic quadrature point.
struct TwoScaleField {
  StructuredGrid macro;
  CellGrid cell;
  std::vector<std::shared_ptr<const ScalarCellSolution>> cells;  // index e*4+q

  /// grad_y phi^1(x_{e,q}, y) on cell element ce at its quadrature point cq.
  Vec2 grad_y(int e, int q, int ce, int cq) const;
  /// Whole cell field grad_y phi^1(x_{e,q}, .) at cell quadrature points.
  QuadField grad_y_field(int e, int q) const;
};

struct HomogenizedElectrostatic {
  NodalField phi0;
  std::vector<Vec2> grad;  // grad phi^0 at quadrature points
  double residual = 0.0;
  int iterations = 0;
  std::vector<double> history;
};

/// int a^hom(grad phi^0) . grad v = int f v, Newton with finite-difference
/// Jacobian of a^hom. Final per-point cell solutions are left in the law's
/// cache, so reconstruct_phi1 only hits the cache.
HomogenizedElectrostatic solve_homogenized_electrostatic(const EffectiveLaw& law, const NodalField& f,
                                                         const DomainGrid& domain,
                                                         const HomogenizedOptions& opts = {});

/// p(y, grad phi^0(x)) - grad phi^0(x) at every macroscopic quadrature point.
TwoScaleField reconstruct_phi1(const EffectiveLaw& law, const HomogenizedElectrostatic& hom, int threads = 1);

/// |int_Y a(y,p).p - int_Y a(y,p).grad phi^0| per macroscopic quadrature point.
std::vector<double> flux_identity_residuals(const EffectiveLaw& law, const HomogenizedElectrostatic& hom,
                                            const TwoScaleField& phi1);

/// int B^hom D(u0):D(v) = int g.v - int C^hom(grad phi0 (x) grad phi0) : D(v).
VectorDomainSolution solve_homogenized_elasticity(const Tensor4& b_hom, const Tensor4& c_hom, const NodalField& g,
                                                  const NodalField& phi0, const DomainGrid& domain,
                                                  const DomainSolveOptions& opts = {});

/// grad_y u^1 = -D(u0)_ij grad Upsilon^ij + d_i phi0 d_j phi0 grad chi^ij,
/// per macroscopic quadrature point.
class U1Corrector {
 public:
  U1Corrector(const std::array<ElasticCellSolution, 4>& upsilon, const std::array<ElasticCellSolution, 4>& chi,
              const NodalField& u0, const NodalField& phi0);
  /// Displacement gradient (d u^1_i / d y_j) at macroscopic point (e,q),
  /// cell element ce, cell quadrature point cq.
  Mat2 grad_y(int e, int q, int ce, int cq) const;
  QuadField grad_y_field(int e, int q) const;
  const CellGrid& cell() const { return cell_; }

 private:
  CellGrid cell_;
  std::array<QuadField, 4> dups_, dchi_;
  QuadField strain0_, grad_phi0_;
};

}  // namespace hk

#pragma once

// Coarse averaging operators, two-scale composition, corrector error norms,
// oscillating-test-function pairings, and the eps-ladder study driver.

#include "hk/homogenized.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>

namespace hk {

/// Index geometry of eps-cells on a commensurate domain grid. The eps-cell
/// with index k is centred at eps*k, k = 0..K (K = 1/eps); cells 0 and K
/// stick out of the domain and form the boundary layer J.
struct EpsLayout {
  int K = 0;      // 1/eps
  int n = 0;      // fine elements per eps-cell and side
  int N = 0;      // fine elements per side

  EpsLayout(double eps, const StructuredGrid& domain);
  /// eps-cell index (0..K) of fine element column/row I.
  int cell_of(int I) const { return (I + n / 2) / n; }
  /// Cell-grid element column/row matching fine element column/row I.
  int local_of(int I) const { return (I + n / 2) % n; }
  /// eps-cell (k1, k2) and matching cell-grid element of a fine element.
  void locate(int e, int& k1, int& k2, int& ce) const;
  bool interior(int k1, int k2) const { return k1 > 0 && k2 > 0 && k1 < K && k2 < K; }
  int cell_count() const { return (K + 1) * (K + 1); }
};

/// (M^eps v)(x): mean of v over the eps-cell of x for interior cells, 0 on
/// the boundary layer. v is a quadrature field on the domain grid.
QuadField coarse_average_M(const QuadField& v, double eps);

/// v(x, y) that is constant in x on every eps-cell, stored per eps-cell as a
/// field at cell-grid quadrature points.
struct CellwiseField {
  double eps = 0.0;
  int K = 0;
  CellGrid cell;
  int components = 1;
  std::vector<double> values;

  CellwiseField() = default;
  CellwiseField(double e, int k, const CellGrid& c, int comps)
      : eps(e), K(k), cell(c), components(comps),
        values(static_cast<std::size_t>((k + 1) * (k + 1) * c.qp_count() * comps), 0.0)
  {
  }
  double& at(int k1, int k2, int ce, int cq, int c = 0)
  {
    return values[index(k1, k2, ce, cq, c)];
  }
  double at(int k1, int k2, int ce, int cq, int c = 0) const { return values[index(k1, k2, ce, cq, c)]; }

 private:
  std::size_t index(int k1, int k2, int ce, int cq, int c) const
  {
    return static_cast<std::size_t>((((k2 * (K + 1) + k1) * cell.element_count() + ce) * 4 + cq) * components + c);
  }
};

/// (MM^eps v)(x, y): mean over the eps-cell of x (intersected with the
/// domain) of v(., y). `v(e, q)` returns the cell field at macroscopic
/// quadrature point (e, q) of `domain`.
CellwiseField coarse_average_MM(const std::function<QuadField(int, int)>& v, const StructuredGrid& domain,
                                const CellGrid& cell, double eps);

/// (v o S^eps)(x, y) = v(eps [x/eps] + eps y); v is extended by zero outside
/// the domain.
CellwiseField two_scale_compose_S(const NodalField& v, double eps, const CellGrid& cell);

/// ||v||_{L^p(Omega x Y)} with |eps-cell cap Omega| weights; interior_only
/// restricts to cells in I^eps.
double lp_norm(const CellwiseField& v, double p, bool interior_only = false);

/// ||v||_{L^p(Omega)} of a vector quadrature field (Euclidean norm pointwise).
double lp_norm(const QuadField& v, double p);

struct CorrectorErrors {
  double E_exp = 0.0, E_avg = 0.0, E_dm = 0.0, E_nocorr = 0.0;
  // same norms restricted to interior eps-cells
  double E_exp_interior = 0.0, E_avg_interior = 0.0, E_dm_interior = 0.0, E_nocorr_interior = 0.0;
};

/// ||grad phi^eps - grad phi^0 - grad_y phi^1(x, x/eps)||_p, or with
/// MM^eps applied to grad_y phi^1 first when `averaged`.
double corrector_error_explicit(const NodalField& phi_eps, const HomogenizedElectrostatic& hom,
                                const TwoScaleField& phi1, double eps, double p, bool averaged = false,
                                bool interior_only = false);

/// ||grad phi^eps - p(x/eps, M^eps grad phi^0)||_p with per-cell solves.
double corrector_error_dalmaso(const NodalField& phi_eps, const HomogenizedElectrostatic& hom,
                               const EffectiveLaw& law, double eps, double p, bool interior_only = false,
                               int threads = 1);

/// ||grad phi^eps - grad phi^0||_p
double nocorrector_error(const NodalField& phi_eps, const HomogenizedElectrostatic& hom, double p,
                         bool interior_only = false, double eps = 0.0);

CorrectorErrors corrector_errors(const NodalField& phi_eps, const HomogenizedElectrostatic& hom,
                                 const TwoScaleField& phi1, const EffectiveLaw& law, double eps, double p,
                                 int threads = 1);

using ScalarFn = std::function<double(const Vec2&)>;

/// int_Omega v(x) psi_x(x) psi_y(x/eps) dx by domain quadrature; v is one
/// component of a quadrature field.
double two_scale_pairing(const QuadField& v, int component, const ScalarFn& psi_x, const ScalarFn& psi_y,
                         double eps);
double two_scale_pairing(const NodalField& v, const ScalarFn& psi_x, const ScalarFn& psi_y, double eps);

/// (int_Omega psi_x) * int_Y g psi_y, the limit of the pairing of
/// sample_oscillatory(g, eps); the Y integral uses the cell quadrature.
double oscillation_limit(const NodalField& g, const ScalarFn& psi_x, const ScalarFn& psi_y);

/// int_Omega psi_x by a 2x2 Gauss rule on a uniform grid of `cells` per side.
double domain_integral(const ScalarFn& f, int cells = 512);

/// Entrywise int int Sigma^0(x,y) psi_x(x) psi_y(y), Sigma^0 = p (x) p with
/// p = grad phi^0 + grad_y phi^1.
Mat2 maxwell_limit(const HomogenizedElectrostatic& hom, const TwoScaleField& phi1, const ScalarFn& psi_x,
                   const ScalarFn& psi_y);

/// Entrywise pairing of Sigma^eps with psi_x(x) psi_y(x/eps).
Mat2 maxwell_pairing(const QuadField& sigma, const ScalarFn& psi_x, const ScalarFn& psi_y, double eps);

/// int psi_x(x) (u_1 + u_2) dx: pairing of a displacement with psi_x (1, 1).
double displacement_functional(const NodalField& u, const ScalarFn& psi_x);

struct RateFit {
  double slope = 0.0;
  bool floor_reached = false;  // some E == 0, slope undefined
};

/// Least-squares slope of log E against log eps; needs at least 3 points.
RateFit fit_rate(const std::vector<double>& eps, const std::vector<double>& err);

// --- study -----------------------------------------------------------------

struct StudyConfig {
  OperatorSpec spec;
  std::optional<ElasticTensorField> B, C;  // elasticity part runs when both are set
  ChomVariant variant = ChomVariant::CApplied;
  int n = 4;
  std::vector<double> ladder{0.25, 0.125, 0.0625, 0.03125};
  std::function<double(const Vec2&)> f = [](const Vec2&) { return 1.0; };
  std::function<Vec2(const Vec2&)> g = [](const Vec2&) { return Vec2(0.0, -1.0); };
  ScalarFn psi_x = [](const Vec2& x) { return std::sin(std::numbers::pi * x(0)) * std::sin(std::numbers::pi * x(1)); };
  ScalarFn psi_y = [](const Vec2& y) { return 1.0 + 0.5 * std::cos(2.0 * std::numbers::pi * y(0)); };
  SolverOptions cell{};
  DomainSolveOptions fine{};
  HomogenizedOptions hom{};
  int threads = 1;
};

struct LadderEntry {
  double eps = 0.0;
  int N = 0;
  CorrectorErrors errors;
  double flux_identity_max = 0.0;  // max over macro points of the cell flux identity
  Mat2 maxwell_pairing = Mat2::Zero();
  Mat2 maxwell_limit = Mat2::Zero();
  double maxwell_discrepancy = 0.0;   // max entry of |pairing - limit|
  double elastic_functional_eps = 0.0;
  double elastic_functional_hom = 0.0;
  double elastic_discrepancy = 0.0;
  double energy_ratio = 0.0;          // int |grad phi^eps|^p / int |f|^{p'}
  int fine_iterations = 0;
  int hom_iterations = 0;
  double fine_residual = 0.0;
  double hom_residual = 0.0;
};

struct CorrectorReport {
  std::vector<LadderEntry> entries;
  double norm_p = 2.0;
  RateFit rate_exp, rate_avg, rate_dm, rate_nocorr, rate_maxwell, rate_elastic;
  std::optional<Tensor4> B_hom, C_hom;
  std::string variant;
};

CorrectorReport run_corrector_study(const StudyConfig& cfg);

/// epsilon,E_exp,E_avg,E_dm,E_nocorr with 17 significant digits.
std::string corrector_csv(const CorrectorReport& r);

/// Strictly decreasing (each entry below its predecessor).
bool strictly_decreasing(const std::vector<double>& v);

}  // namespace hk

#include "hk/cell_problems.hpp"

#include <algorithm>
#include <cmath>

namespace hk {

namespace {

NewtonOptions newton_options(const SolverOptions& o)
{
  NewtonOptions n;
  n.tol = o.tol;
  n.max_newton = o.max_newton;
  n.max_picard = o.max_picard;
  n.linear.rel_tol = 1e-12;
  n.linear.max_iter = o.max_linear;
  return n;
}

}  // namespace

ScalarCellSolver::ScalarCellSolver(const OperatorSpec& spec, const CellGrid& grid, SolverOptions opts)
    : spec_(spec), grid_(grid), opts_(opts), phases_(qp_phases(spec.geometry, grid)), pattern_(grid, 1)
{
  spec_.validate();
}

ScalarCellSolution ScalarCellSolver::solve(const Vec2& xi, const NodalField* warm) const
{
  if (!xi.allFinite()) throw InvalidArgument("cell loading must be finite");
  ScalarCellSolution sol;
  sol.xi = xi;
  sol.eta = NodalField(grid_, 1, 0.0);
  if (warm && warm->grid == grid_) sol.eta.values = warm->values;

  SpecQuadratureLaw law(spec_, phases_);
  StencilMatrix k = pattern_;
  const auto st = solve_monotone(grid_, law, xi, {}, sol.eta.values, newton_options(opts_), &k);
  project_mean(sol.eta.values, 1);
  sol.residual = st.residual;
  sol.iterations = st.newton_iterations + st.picard_iterations;
  sol.used_picard = st.used_picard;
  return sol;
}

ScalarCellSolution solve_scalar_cell(const OperatorSpec& spec, const Vec2& xi, const CellGrid& grid,
                                     const SolverOptions& opts)
{
  return ScalarCellSolver(spec, grid, opts).solve(xi);
}

QuadField corrector_flux(const ScalarCellSolution& sol)
{
  QuadField g = gradient(sol.eta);
  for (int e = 0; e < g.grid.element_count(); ++e)
    for (int q = 0; q < 4; ++q) g.set_vector(e, q, sol.xi + g.vector(e, q));
  return g;
}

Vec2 average_flux(const OperatorSpec& spec, const ScalarCellSolution& sol)
{
  const QuadField p = corrector_flux(sol);
  const auto ph = qp_phases(spec.geometry, p.grid);
  Vec2 s = Vec2::Zero();
  for (int e = 0; e < p.grid.element_count(); ++e)
    for (int q = 0; q < 4; ++q)
      s += p.grid.qp_weight(q) * spec.flux(ph[static_cast<std::size_t>(4 * e + q)], p.vector(e, q));
  return s;
}

double verify_flux_identity(const OperatorSpec& spec, const Vec2& xi, const ScalarCellSolution& sol)
{
  const QuadField p = corrector_flux(sol);
  const auto ph = qp_phases(spec.geometry, p.grid);
  // accumulate a.(p - xi) directly: the difference of the two integrals
  double s = 0.0;
  for (int e = 0; e < p.grid.element_count(); ++e)
    for (int q = 0; q < 4; ++q) {
      const Vec2 pv = p.vector(e, q);
      s += p.grid.qp_weight(q) * spec.flux(ph[static_cast<std::size_t>(4 * e + q)], pv).dot(pv - xi);
    }
  return std::abs(s);
}

double cell_residual(const OperatorSpec& spec, const ScalarCellSolution& sol)
{
  const auto& grid = sol.eta.grid;
  const auto ph = qp_phases(spec.geometry, grid);
  std::vector<Vec2> g(static_cast<std::size_t>(grid.qp_count())), f(g.size());
  gradients_at_qp(grid, sol.eta.values, sol.xi, g);
  for (std::size_t k = 0; k < g.size(); ++k) f[k] = spec.flux(ph[k], g[k]);
  std::vector<double> r(static_cast<std::size_t>(grid.node_count()));
  scalar_residual(grid, f, {}, r);
  return max_abs(r);
}

// --- elasticity ----------------------------------------------------------------

Mat2 unit_strain(int i, int j) { return sym(outer(unit(i), unit(j))); }

std::string to_string(ChomVariant v)
{
  switch (v) {
    case ChomVariant::AsWritten:
      return "as-written";
    case ChomVariant::CApplied:
      return "C-applied";
    case ChomVariant::TwoScale:
      return "two-scale";
  }
  return "?";
}

ChomVariant parse_chom_variant(const std::string& s)
{
  if (s == "as-written") return ChomVariant::AsWritten;
  if (s == "C-applied") return ChomVariant::CApplied;
  if (s == "two-scale") return ChomVariant::TwoScale;
  throw InvalidArgument("unknown C^hom variant '" + s + "'");
}

ElasticCellOperator::ElasticCellOperator(const ElasticTensorField& t, const CellGrid& grid)
    : grid_(grid), phases_(qp_phases(t.geometry, grid)), tensors_(t.phases), k_(grid, 2)
{
  assemble_elasticity(grid_, phases_, tensors_, k_);
}

ElasticCellSolution ElasticCellOperator::solve(std::span<const double> load, const SolverOptions& opts) const
{
  ElasticCellSolution sol;
  sol.field = NodalField(grid_, 2, 0.0);
  PcgOptions po;
  po.rel_tol = std::min(1e-12, opts.tol);
  po.max_iter = opts.max_linear;
  po.mean_components = 2;
  const auto st = pcg(k_, load, sol.field.values, po);
  sol.iterations = st.iterations;
  sol.residual = residual(sol.field, load);
  return sol;
}

double ElasticCellOperator::residual(const NodalField& x, std::span<const double> load) const
{
  std::vector<double> kx(x.values.size()), b(load.begin(), load.end());
  k_.multiply(x.values, kx);
  project_mean(b, 2);
  for (std::size_t i = 0; i < kx.size(); ++i) kx[i] -= b[i];
  return max_abs(kx);
}

QuadField apply_constant(const ElasticTensorField& t, const CellGrid& grid, const Mat2& m)
{
  QuadField out(grid, 4);
  const auto ph = qp_phases(t.geometry, grid);
  const std::array<Mat2, 2> tm{apply(t.phases[0], m), apply(t.phases[1], m)};
  for (int e = 0; e < grid.element_count(); ++e)
    for (int q = 0; q < 4; ++q) out.set_matrix(e, q, tm[static_cast<std::size_t>(ph[static_cast<std::size_t>(4 * e + q)])]);
  return out;
}

QuadField apply_field(const ElasticTensorField& t, const QuadField& f)
{
  QuadField out(f.grid, 4);
  const auto ph = qp_phases(t.geometry, f.grid);
  for (int e = 0; e < f.grid.element_count(); ++e)
    for (int q = 0; q < 4; ++q)
      out.set_matrix(e, q, apply(t.phases[static_cast<std::size_t>(ph[static_cast<std::size_t>(4 * e + q)])], f.matrix(e, q)));
  return out;
}

ElasticCellSolution solve_elastic_cell_U(const ElasticTensorField& b, const CellGrid& grid, int i, int j,
                                         const SolverOptions& opts)
{
  if (i < 0 || i > 1 || j < 0 || j > 1) throw InvalidArgument("cell load indices must be 0 or 1");
  ElasticCellOperator op(b, grid);
  // int B D(Upsilon):D(v) = int B E^ij : D(v)
  const auto load = stress_load(apply_constant(b, grid, unit_strain(i, j)));
  auto sol = op.solve(load, opts);
  sol.i = i;
  sol.j = j;
  return sol;
}

QuadField assemble_zeta(const ScalarCellSolution& sol_i, const ScalarCellSolution& sol_j)
{
  if (!(sol_i.eta.grid == sol_j.eta.grid)) throw InvalidArgument("zeta: cell solutions on different grids");
  const QuadField pi = corrector_flux(sol_i), pj = corrector_flux(sol_j);
  QuadField z(pi.grid, 4);
  for (int e = 0; e < z.grid.element_count(); ++e)
    for (int q = 0; q < 4; ++q) z.set_matrix(e, q, outer(pi.vector(e, q), pj.vector(e, q)));
  return z;
}

ElasticCellSolution solve_electrostriction_cell(const ElasticTensorField& c, const QuadField& zeta,
                                                const CellGrid& grid, ChomVariant variant,
                                                const ElasticTensorField* b, const SolverOptions& opts)
{
  if (!(zeta.grid == static_cast<const StructuredGrid&>(grid)) || zeta.components != 4)
    throw InvalidArgument("zeta must be a tensor field on the cell grid");
  std::vector<double> load;
  const ElasticTensorField* op_field = &c;
  switch (variant) {
    case ChomVariant::AsWritten:
      load = stress_load(zeta);
      break;
    case ChomVariant::CApplied:
      load = stress_load(apply_field(c, zeta));
      break;
    case ChomVariant::TwoScale:
      if (!b) throw InvalidArgument("two-scale variant needs the elasticity tensor B");
      op_field = b;
      load = stress_load(apply_field(c, zeta));
      break;
  }
  for (double& v : load) v = -v;
  ElasticCellOperator op(*op_field, grid);
  return op.solve(load, opts);
}

}  // namespace hk

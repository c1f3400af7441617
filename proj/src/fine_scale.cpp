#include "hk/fine_scale.hpp"

#include <cmath>

namespace hk {

void check_commensurate(double eps, const DomainGrid& domain)
{
  const int k = inverse_scale(eps);
  if (domain.N() % k != 0)
    throw InvalidArgument("grid N=" + std::to_string(domain.N()) + " does not resolve eps=1/" + std::to_string(k) +
                          " (aliasing)");
}

ScalarDomainSolution solve_fine_electrostatic(const OperatorSpec& spec, double eps, const NodalField& f,
                                              const DomainGrid& domain, const DomainSolveOptions& opts)
{
  spec.validate();
  check_commensurate(eps, domain);
  if (!(f.grid == static_cast<const StructuredGrid&>(domain))) throw InvalidArgument("source on a different grid");
  SpecQuadratureLaw law(spec, qp_phases(spec.geometry, domain, eps));
  const auto load = scalar_load(f);
  NewtonOptions no;
  no.tol = opts.tol;
  no.max_newton = opts.max_newton;
  no.max_picard = opts.max_picard;
  no.direct = opts.direct;
  no.linear.rel_tol = opts.cg_tol;
  no.linear.max_iter = opts.max_linear;
  no.residual_scale = max_abs(load);
  ScalarDomainSolution sol;
  sol.phi = NodalField(domain, 1, 0.0);
  if (no.residual_scale == 0.0) return sol;
  const auto st = solve_monotone(domain, law, Vec2::Zero(), load, sol.phi.values, no);
  sol.residual = st.residual;
  sol.iterations = st.newton_iterations + st.picard_iterations;
  sol.used_picard = st.used_picard;
  sol.history = st.history;
  return sol;
}

QuadField maxwell_stress(const NodalField& phi)
{
  const QuadField g = gradient(phi);
  QuadField s(g.grid, 4);
  for (int e = 0; e < g.grid.element_count(); ++e)
    for (int q = 0; q < 4; ++q) {
      const Vec2 v = g.vector(e, q);
      s.set_matrix(e, q, outer(v, v));
    }
  return s;
}

VectorDomainSolution solve_dirichlet_elasticity(const DomainGrid& domain, std::span<const int> phases,
                                                const std::array<Tensor4, 2>& tensors,
                                                std::span<const double> load, const DomainSolveOptions& opts)
{
  StencilMatrix k(domain, 2);
  assemble_elasticity(domain, phases, tensors, k);
  const auto mask = domain.boundary_mask();
  StencilMatrix kc = k;
  kc.constrain(mask);
  std::vector<double> b(load.begin(), load.end());
  for (std::size_t i = 0; i < b.size(); ++i)
    if (mask[i / 2]) b[i] = 0.0;
  VectorDomainSolution sol;
  sol.u = NodalField(domain, 2, 0.0);
  if (opts.direct) {
    sol.u.values = solve_direct(kc, b);
  } else {
    PcgOptions po;
    po.rel_tol = opts.cg_tol;
    po.max_iter = opts.max_linear;
    sol.iterations = pcg(kc, b, sol.u.values, po).iterations;
  }
  std::vector<double> r(b.size());
  kc.multiply(sol.u.values, r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  sol.residual = max_abs(r);
  return sol;
}

VectorDomainSolution solve_fine_elasticity(const ElasticTensorField& b, const ElasticTensorField& c, double eps,
                                           const NodalField& g, const QuadField& sigma, const DomainGrid& domain,
                                           const DomainSolveOptions& opts)
{
  check_commensurate(eps, domain);
  if (!(sigma.grid == static_cast<const StructuredGrid&>(domain)) || sigma.components != 4)
    throw InvalidArgument("Maxwell stress must be a tensor field on the domain grid");
  auto load = body_load(g);
  // C(x/eps) Sigma at quadrature points
  const auto cph = qp_phases(c.geometry, domain, eps);
  QuadField cs(domain, 4);
  for (int e = 0; e < domain.element_count(); ++e)
    for (int q = 0; q < 4; ++q)
      cs.set_matrix(e, q, apply(c.phases[static_cast<std::size_t>(cph[static_cast<std::size_t>(4 * e + q)])], sigma.matrix(e, q)));
  const auto sl = stress_load(cs);
  for (std::size_t i = 0; i < load.size(); ++i) load[i] -= sl[i];
  return solve_dirichlet_elasticity(domain, qp_phases(b.geometry, domain, eps), b.phases, load, opts);
}

double gradient_energy(const NodalField& phi, double p)
{
  const QuadField g = gradient(phi);
  double s = 0.0;
  for (int e = 0; e < g.grid.element_count(); ++e)
    for (int q = 0; q < 4; ++q) s += g.grid.qp_weight(q) * std::pow(g.vector(e, q).norm(), p);
  return s;
}

double source_energy(const NodalField& f, double p)
{
  const double pp = p / (p - 1.0);
  const QuadField v = to_quadrature(f);
  double s = 0.0;
  for (int e = 0; e < v.grid.element_count(); ++e)
    for (int q = 0; q < 4; ++q) s += v.grid.qp_weight(q) * std::pow(std::abs(v(e, q)), pp);
  return s;
}

double interface_flux_balance(const OperatorSpec& spec, double eps, const NodalField& phi, const NodalField& f)
{
  const auto& grid = phi.grid;
  const auto ph = qp_phases(spec.geometry, grid, eps);
  std::vector<Vec2> g(static_cast<std::size_t>(grid.qp_count())), fl(g.size());
  gradients_at_qp(grid, phi.values, Vec2::Zero(), g);
  for (std::size_t k = 0; k < g.size(); ++k) fl[k] = spec.flux(ph[k], g[k]);
  std::vector<double> r(static_cast<std::size_t>(grid.node_count()));
  scalar_residual(grid, fl, scalar_load(f), r);
  // nodes touching elements of both phases
  std::vector<char> seen0(r.size(), 0), seen1(r.size(), 0);
  for (int e = 0; e < grid.element_count(); ++e)
    for (int nd : grid.element_nodes(e)) {
      (ph[static_cast<std::size_t>(4 * e)] ? seen1 : seen0)[static_cast<std::size_t>(nd)] = 1;
    }
  const auto mask = DomainGrid(grid.cells()).boundary_mask();
  double m = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i)
    if (seen0[i] && seen1[i] && !mask[i]) m = std::max(m, std::abs(r[i]));
  return m;
}

NodalField constant_field(const DomainGrid& domain, int components, const std::vector<double>& value)
{
  if (static_cast<int>(value.size()) != components) throw InvalidArgument("constant field: wrong component count");
  NodalField f(domain, components);
  for (int nd = 0; nd < domain.node_count(); ++nd)
    for (int c = 0; c < components; ++c) f(nd, c) = value[static_cast<std::size_t>(c)];
  return f;
}

}  // namespace hk

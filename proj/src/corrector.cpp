#include "hk/corrector.hpp"

#include <cstdio>
#include <sstream>

namespace hk {

EpsLayout::EpsLayout(double eps, const StructuredGrid& domain)
{
  K = inverse_scale(eps);
  N = domain.cells();
  if (domain.periodic() || N % K != 0 || (N / K) % 2 != 0)
    throw InvalidArgument("domain grid does not resolve eps-cells with an even number of elements");
  n = N / K;
}

void EpsLayout::locate(int e, int& k1, int& k2, int& ce) const
{
  const int I = e % N, J = e / N;
  k1 = cell_of(I);
  k2 = cell_of(J);
  ce = local_of(I) + n * local_of(J);
}

namespace {

// |eps-cell k cap Omega| / eps^2 for one direction: 1/2 on boundary cells
double side_fraction(int k, int K) { return (k == 0 || k == K) ? 0.5 : 1.0; }

}  // namespace

QuadField coarse_average_M(const QuadField& v, double eps)
{
  const EpsLayout lay(eps, v.grid);
  const int cc = v.components;
  // deviations from the first sample of each cell, so constants come back bit-exact
  std::vector<double> base(static_cast<std::size_t>(lay.cell_count() * cc), 0.0);
  std::vector<double> sum(base.size(), 0.0);
  std::vector<double> area(static_cast<std::size_t>(lay.cell_count()), 0.0);
  int k1 = 0, k2 = 0, ce = 0;
  for (int e = 0; e < v.grid.element_count(); ++e) {
    lay.locate(e, k1, k2, ce);
    const auto cell = static_cast<std::size_t>(k2 * (lay.K + 1) + k1);
    if (area[cell] == 0.0)
      for (int c = 0; c < cc; ++c) base[cell * static_cast<std::size_t>(cc) + static_cast<std::size_t>(c)] = v(e, 0, c);
    for (int q = 0; q < 4; ++q) {
      const double w = v.grid.qp_weight(q);
      area[cell] += w;
      for (int c = 0; c < cc; ++c) {
        const auto i = cell * static_cast<std::size_t>(cc) + static_cast<std::size_t>(c);
        sum[i] += w * (v(e, q, c) - base[i]);
      }
    }
  }
  QuadField out(v.grid, cc);
  for (int e = 0; e < v.grid.element_count(); ++e) {
    lay.locate(e, k1, k2, ce);
    if (!lay.interior(k1, k2)) continue;
    const auto cell = static_cast<std::size_t>(k2 * (lay.K + 1) + k1);
    for (int q = 0; q < 4; ++q)
      for (int c = 0; c < cc; ++c) {
        const auto i = cell * static_cast<std::size_t>(cc) + static_cast<std::size_t>(c);
        out(e, q, c) = base[i] + sum[i] / area[cell];
      }
  }
  return out;
}

CellwiseField coarse_average_MM(const std::function<QuadField(int, int)>& v, const StructuredGrid& domain,
                                const CellGrid& cell, double eps)
{
  const EpsLayout lay(eps, domain);
  CellwiseField out;
  std::vector<double> area(static_cast<std::size_t>(lay.cell_count()), 0.0);
  int k1 = 0, k2 = 0, ce = 0;
  bool first = true;
  for (int e = 0; e < domain.element_count(); ++e) {
    lay.locate(e, k1, k2, ce);
    for (int q = 0; q < 4; ++q) {
      const QuadField f = v(e, q);
      if (first) {
        if (!(f.grid == static_cast<const StructuredGrid&>(cell))) throw InvalidArgument("MM: field not on the cell grid");
        out = CellwiseField(eps, lay.K, cell, f.components);
        first = false;
      }
      const double w = domain.qp_weight(q);
      area[static_cast<std::size_t>(k2 * (lay.K + 1) + k1)] += w;
      for (int c2 = 0; c2 < cell.element_count(); ++c2)
        for (int cq = 0; cq < 4; ++cq)
          for (int c = 0; c < f.components; ++c) out.at(k1, k2, c2, cq, c) += w * f(c2, cq, c);
    }
  }
  const std::size_t per_cell = static_cast<std::size_t>(cell.qp_count() * out.components);
  for (int k = 0; k < lay.cell_count(); ++k) {
    const double a = area[static_cast<std::size_t>(k)];
    for (std::size_t i = 0; i < per_cell; ++i) out.values[static_cast<std::size_t>(k) * per_cell + i] /= a;
  }
  return out;
}

CellwiseField two_scale_compose_S(const NodalField& v, double eps, const CellGrid& cell)
{
  const int K = inverse_scale(eps);
  CellwiseField out(eps, K, cell, v.components);
  for (int k2 = 0; k2 <= K; ++k2)
    for (int k1 = 0; k1 <= K; ++k1)
      for (int ce = 0; ce < cell.element_count(); ++ce)
        for (int cq = 0; cq < 4; ++cq) {
          const Vec2 x = eps * (Vec2(k1, k2) + cell.qp_point(ce, cq));
          if (x(0) < 0.0 || x(1) < 0.0 || x(0) > 1.0 || x(1) > 1.0) continue;
          for (int c = 0; c < v.components; ++c) out.at(k1, k2, ce, cq, c) = value_at(v, x, c);
        }
  return out;
}

double lp_norm(const CellwiseField& v, double p, bool interior_only)
{
  double s = 0.0;
  const double e2 = v.eps * v.eps;
  for (int k2 = 0; k2 <= v.K; ++k2)
    for (int k1 = 0; k1 <= v.K; ++k1) {
      const bool inner = k1 > 0 && k2 > 0 && k1 < v.K && k2 < v.K;
      if (interior_only && !inner) continue;
      const double a = e2 * side_fraction(k1, v.K) * side_fraction(k2, v.K);
      double cs = 0.0;
      for (int ce = 0; ce < v.cell.element_count(); ++ce)
        for (int cq = 0; cq < 4; ++cq) {
          double m2 = 0.0;
          for (int c = 0; c < v.components; ++c) m2 += v.at(k1, k2, ce, cq, c) * v.at(k1, k2, ce, cq, c);
          cs += v.cell.qp_weight(cq) * std::pow(std::sqrt(m2), p);
        }
      s += a * cs;
    }
  return std::pow(s, 1.0 / p);
}

double lp_norm(const QuadField& v, double p)
{
  double s = 0.0;
  for (int e = 0; e < v.grid.element_count(); ++e)
    for (int q = 0; q < 4; ++q) {
      double m2 = 0.0;
      for (int c = 0; c < v.components; ++c) m2 += v(e, q, c) * v(e, q, c);
      s += v.grid.qp_weight(q) * std::pow(std::sqrt(m2), p);
    }
  return std::pow(s, 1.0 / p);
}

namespace {

// L^p norm over the domain of d(e, q), optionally restricted to interior eps-cells.
double domain_norm(const StructuredGrid& g, double p, const EpsLayout* lay,
                   const std::function<Vec2(int, int, int, int, int)>& d)
{
  double s = 0.0;
  int k1 = 0, k2 = 0, ce = 0;
  for (int e = 0; e < g.element_count(); ++e) {
    if (lay) lay->locate(e, k1, k2, ce);
    for (int q = 0; q < 4; ++q) s += g.qp_weight(q) * std::pow(d(e, q, k1, k2, ce).norm(), p);
  }
  return std::pow(s, 1.0 / p);
}

struct Restrict {
  const EpsLayout& lay;
  bool interior_only;
  bool skip(int k1, int k2) const { return interior_only && !lay.interior(k1, k2); }
};

}  // namespace

double corrector_error_explicit(const NodalField& phi_eps, const HomogenizedElectrostatic& hom,
                                const TwoScaleField& phi1, double eps, double p, bool averaged, bool interior_only)
{
  const auto& g = phi_eps.grid;
  if (!(hom.phi0.grid == g)) throw InvalidArgument("phi^eps and phi^0 on different grids");
  const EpsLayout lay(eps, g);
  if (lay.n != phi1.cell.n()) throw InvalidArgument("cell grid must match the fine resolution per eps-cell");
  const QuadField ge = gradient(phi_eps);
  CellwiseField mm;
  if (averaged)
    mm = coarse_average_MM([&](int e, int q) { return phi1.grad_y_field(e, q); }, g, phi1.cell, eps);
  const Restrict r{lay, interior_only};
  return domain_norm(g, p, &lay, [&](int e, int q, int k1, int k2, int ce) -> Vec2 {
    if (r.skip(k1, k2)) return Vec2::Zero();
    const Vec2 y = averaged ? Vec2(mm.at(k1, k2, ce, q, 0), mm.at(k1, k2, ce, q, 1)) : phi1.grad_y(e, q, ce, q);
    return ge.vector(e, q) - hom.grad[static_cast<std::size_t>(e * 4 + q)] - y;
  });
}

double corrector_error_dalmaso(const NodalField& phi_eps, const HomogenizedElectrostatic& hom,
                               const EffectiveLaw& law, double eps, double p, bool interior_only, int threads)
{
  const auto& g = phi_eps.grid;
  const EpsLayout lay(eps, g);
  if (lay.n != law.grid().n()) throw InvalidArgument("cell grid must match the fine resolution per eps-cell");
  QuadField g0(g, 2);
  for (int e = 0; e < g.element_count(); ++e)
    for (int q = 0; q < 4; ++q) g0.set_vector(e, q, hom.grad[static_cast<std::size_t>(e * 4 + q)]);
  const QuadField m = coarse_average_M(g0, eps);
  // one loading per eps-cell
  std::vector<Vec2> loading(static_cast<std::size_t>(lay.cell_count()), Vec2::Zero());
  int k1 = 0, k2 = 0, ce = 0;
  for (int e = 0; e < g.element_count(); ++e) {
    lay.locate(e, k1, k2, ce);
    loading[static_cast<std::size_t>(k2 * (lay.K + 1) + k1)] = m.vector(e, 0);
  }
  std::vector<QuadField> pfield(loading.size());
  parallel_for(static_cast<int>(loading.size()), threads, [&](int b, int e) {
    for (int k = b; k < e; ++k)
      pfield[static_cast<std::size_t>(k)] = corrector_flux(*law.evaluate_uncached(loading[static_cast<std::size_t>(k)]).cell);
  });
  const QuadField ge = gradient(phi_eps);
  const Restrict r{lay, interior_only};
  return domain_norm(g, p, &lay, [&](int e, int q, int a1, int a2, int c) -> Vec2 {
    if (r.skip(a1, a2)) return Vec2::Zero();
    return ge.vector(e, q) - pfield[static_cast<std::size_t>(a2 * (lay.K + 1) + a1)].vector(c, q);
  });
}

double nocorrector_error(const NodalField& phi_eps, const HomogenizedElectrostatic& hom, double p,
                         bool interior_only, double eps)
{
  const auto& g = phi_eps.grid;
  const QuadField ge = gradient(phi_eps);
  std::optional<EpsLayout> lay;
  if (interior_only) lay.emplace(eps, g);
  return domain_norm(g, p, lay ? &*lay : nullptr, [&](int e, int q, int k1, int k2, int) -> Vec2 {
    if (lay && !lay->interior(k1, k2)) return Vec2::Zero();
    return ge.vector(e, q) - hom.grad[static_cast<std::size_t>(e * 4 + q)];
  });
}

CorrectorErrors corrector_errors(const NodalField& phi_eps, const HomogenizedElectrostatic& hom,
                                 const TwoScaleField& phi1, const EffectiveLaw& law, double eps, double p,
                                 int threads)
{
  CorrectorErrors r;
  r.E_exp = corrector_error_explicit(phi_eps, hom, phi1, eps, p, false, false);
  r.E_exp_interior = corrector_error_explicit(phi_eps, hom, phi1, eps, p, false, true);
  r.E_avg = corrector_error_explicit(phi_eps, hom, phi1, eps, p, true, false);
  r.E_avg_interior = corrector_error_explicit(phi_eps, hom, phi1, eps, p, true, true);
  r.E_dm = corrector_error_dalmaso(phi_eps, hom, law, eps, p, false, threads);
  r.E_dm_interior = corrector_error_dalmaso(phi_eps, hom, law, eps, p, true, threads);
  r.E_nocorr = nocorrector_error(phi_eps, hom, p, false, eps);
  r.E_nocorr_interior = nocorrector_error(phi_eps, hom, p, true, eps);
  return r;
}

double two_scale_pairing(const QuadField& v, int component, const ScalarFn& psi_x, const ScalarFn& psi_y,
                         double eps)
{
  const auto& g = v.grid;
  double s = 0.0;
  for (int e = 0; e < g.element_count(); ++e)
    for (int q = 0; q < 4; ++q) {
      const Vec2 x = g.qp_point(e, q);
      s += g.qp_weight(q) * v(e, q, component) * psi_x(x) * psi_y(wrap_to_cell(x / eps));
    }
  return s;
}

double two_scale_pairing(const NodalField& v, const ScalarFn& psi_x, const ScalarFn& psi_y, double eps)
{
  return two_scale_pairing(to_quadrature(v), 0, psi_x, psi_y, eps);
}

double domain_integral(const ScalarFn& f, int cells)
{
  const DomainGrid d(cells);
  double s = 0.0;
  for (int e = 0; e < d.element_count(); ++e)
    for (int q = 0; q < 4; ++q) s += d.qp_weight(q) * f(d.qp_point(e, q));
  return s;
}

double oscillation_limit(const NodalField& g, const ScalarFn& psi_x, const ScalarFn& psi_y)
{
  const QuadField gq = to_quadrature(g);
  double sy = 0.0;
  for (int e = 0; e < gq.grid.element_count(); ++e)
    for (int q = 0; q < 4; ++q) sy += gq.grid.qp_weight(q) * gq(e, q) * psi_y(gq.grid.qp_point(e, q));
  return domain_integral(psi_x) * sy;
}

Mat2 maxwell_limit(const HomogenizedElectrostatic& hom, const TwoScaleField& phi1, const ScalarFn& psi_x,
                   const ScalarFn& psi_y)
{
  const auto& g = hom.phi0.grid;
  const auto& cell = phi1.cell;
  std::vector<double> py(static_cast<std::size_t>(cell.qp_count()));
  for (int ce = 0; ce < cell.element_count(); ++ce)
    for (int cq = 0; cq < 4; ++cq) py[static_cast<std::size_t>(ce * 4 + cq)] = cell.qp_weight(cq) * psi_y(cell.qp_point(ce, cq));
  Mat2 s = Mat2::Zero();
  for (int e = 0; e < g.element_count(); ++e)
    for (int q = 0; q < 4; ++q) {
      const Vec2 g0 = hom.grad[static_cast<std::size_t>(e * 4 + q)];
      Mat2 inner = Mat2::Zero();
      for (int ce = 0; ce < cell.element_count(); ++ce)
        for (int cq = 0; cq < 4; ++cq) {
          const Vec2 pv = g0 + phi1.grad_y(e, q, ce, cq);
          inner += py[static_cast<std::size_t>(ce * 4 + cq)] * outer(pv, pv);
        }
      s += g.qp_weight(q) * psi_x(g.qp_point(e, q)) * inner;
    }
  return s;
}

Mat2 maxwell_pairing(const QuadField& sigma, const ScalarFn& psi_x, const ScalarFn& psi_y, double eps)
{
  Mat2 m;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m(i, j) = two_scale_pairing(sigma, flat(i, j), psi_x, psi_y, eps);
  return m;
}

double displacement_functional(const NodalField& u, const ScalarFn& psi_x)
{
  const QuadField uq = to_quadrature(u);
  double s = 0.0;
  for (int e = 0; e < uq.grid.element_count(); ++e)
    for (int q = 0; q < 4; ++q) s += uq.grid.qp_weight(q) * psi_x(uq.grid.qp_point(e, q)) * (uq(e, q, 0) + uq(e, q, 1));
  return s;
}

RateFit fit_rate(const std::vector<double>& eps, const std::vector<double>& err)
{
  if (eps.size() != err.size() || eps.size() < 3) throw InvalidArgument("rate fit needs at least 3 ladder points");
  RateFit r;
  for (double e : err)
    if (!(e > 0.0)) {
      r.floor_reached = true;
      return r;
    }
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) {
    mx += std::log(eps[i]);
    my += std::log(err[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const double dx = std::log(eps[i]) - mx;
    sxy += dx * (std::log(err[i]) - my);
    sxx += dx * dx;
  }
  r.slope = sxy / sxx;
  return r;
}

bool strictly_decreasing(const std::vector<double>& v)
{
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

namespace {

NodalField nodal_scalar(const DomainGrid& d, const std::function<double(const Vec2&)>& f)
{
  NodalField out(d, 1);
  for (int nd = 0; nd < d.node_count(); ++nd) out(nd) = f(d.node_point(nd));
  return out;
}

NodalField nodal_vector(const DomainGrid& d, const std::function<Vec2(const Vec2&)>& f)
{
  NodalField out(d, 2);
  for (int nd = 0; nd < d.node_count(); ++nd) {
    const Vec2 v = f(d.node_point(nd));
    out(nd, 0) = v(0);
    out(nd, 1) = v(1);
  }
  return out;
}

}  // namespace

CorrectorReport run_corrector_study(const StudyConfig& cfg)
{
  if (cfg.ladder.empty()) throw InvalidArgument("empty eps ladder");
  for (std::size_t i = 0; i < cfg.ladder.size(); ++i) {
    inverse_scale(cfg.ladder[i]);
    if (i > 0 && !(cfg.ladder[i] < cfg.ladder[i - 1])) throw InvalidArgument("eps ladder must be strictly decreasing");
  }
  const CellGrid cell = make_cell_grid(cfg.n);
  EffectiveLaw law(cfg.spec, cell, cfg.cell);
  CorrectorReport rep;
  rep.norm_p = cfg.spec.p;
  rep.variant = to_string(cfg.variant);

  const bool elastic = cfg.B && cfg.C;
  std::optional<BHomResult> bh;
  std::optional<CHomResult> ch;
  if (elastic) {
    bh = assemble_B_hom(*cfg.B, cell, cfg.cell);
    const std::array<ScalarCellSolution, 2> se{*law.evaluate(unit(0)).cell, *law.evaluate(unit(1)).cell};
    ch = assemble_C_hom(*cfg.C, se, cell, cfg.variant, &*cfg.B, cfg.cell);
    rep.B_hom = bh->B_hom;
    rep.C_hom = ch->C_hom;
  }
  HomogenizedOptions ho = cfg.hom;
  ho.threads = cfg.threads;

  for (double eps : cfg.ladder) {
    LadderEntry le;
    le.eps = eps;
    le.N = cfg.n * inverse_scale(eps);
    const DomainGrid dom(le.N);
    const NodalField f = nodal_scalar(dom, cfg.f);

    const auto fine = solve_fine_electrostatic(cfg.spec, eps, f, dom, cfg.fine);
    const auto hom = solve_homogenized_electrostatic(law, f, dom, ho);
    const auto phi1 = reconstruct_phi1(law, hom, cfg.threads);
    le.fine_iterations = fine.iterations;
    le.fine_residual = fine.residual;
    le.hom_iterations = hom.iterations;
    le.hom_residual = hom.residual;

    le.errors = corrector_errors(fine.phi, hom, phi1, law, eps, rep.norm_p, cfg.threads);
    for (double v : flux_identity_residuals(law, hom, phi1)) le.flux_identity_max = std::max(le.flux_identity_max, v);
    le.energy_ratio = gradient_energy(fine.phi, rep.norm_p) / source_energy(f, rep.norm_p);

    const QuadField sigma = maxwell_stress(fine.phi);
    le.maxwell_pairing = maxwell_pairing(sigma, cfg.psi_x, cfg.psi_y, eps);
    le.maxwell_limit = maxwell_limit(hom, phi1, cfg.psi_x, cfg.psi_y);
    le.maxwell_discrepancy = (le.maxwell_pairing - le.maxwell_limit).cwiseAbs().maxCoeff();

    if (elastic) {
      const NodalField g = nodal_vector(dom, cfg.g);
      const auto ue = solve_fine_elasticity(*cfg.B, *cfg.C, eps, g, sigma, dom, cfg.fine);
      const auto u0 = solve_homogenized_elasticity(bh->B_hom, ch->C_hom, g, hom.phi0, dom, cfg.fine);
      le.elastic_functional_eps = displacement_functional(ue.u, cfg.psi_x);
      le.elastic_functional_hom = displacement_functional(u0.u, cfg.psi_x);
      le.elastic_discrepancy = std::abs(le.elastic_functional_eps - le.elastic_functional_hom);
    }
    law.clear_cache();
    rep.entries.push_back(le);
  }

  std::vector<double> eps, ex, av, dm, nc, mx, el;
  for (const auto& e : rep.entries) {
    eps.push_back(e.eps);
    ex.push_back(e.errors.E_exp);
    av.push_back(e.errors.E_avg);
    dm.push_back(e.errors.E_dm);
    nc.push_back(e.errors.E_nocorr);
    mx.push_back(e.maxwell_discrepancy);
    el.push_back(e.elastic_discrepancy);
  }
  if (eps.size() >= 3) {
    rep.rate_exp = fit_rate(eps, ex);
    rep.rate_avg = fit_rate(eps, av);
    rep.rate_dm = fit_rate(eps, dm);
    rep.rate_nocorr = fit_rate(eps, nc);
    rep.rate_maxwell = fit_rate(eps, mx);
    if (elastic) rep.rate_elastic = fit_rate(eps, el);
  }
  return rep;
}

std::string corrector_csv(const CorrectorReport& r)
{
  std::ostringstream os;
  os << "epsilon,E_exp,E_avg,E_dm,E_nocorr\n";
  char buf[160];
  for (const auto& e : r.entries) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", e.eps, e.errors.E_exp, e.errors.E_avg,
                  e.errors.E_dm, e.errors.E_nocorr);
    os << buf;
  }
  return os.str();
}

}  // namespace hk

#include "hk/homogenized.hpp"

namespace hk {

namespace {

// a^hom at every macroscopic quadrature point, warm-starting each cell solve
// from the latest solution at the same point.
class AhomQuadratureLaw final : public QuadratureLaw {
 public:
  AhomQuadratureLaw(const EffectiveLaw& law, int qp_count, int threads)
      : law_(law), threads_(threads), state_(static_cast<std::size_t>(qp_count))
  {
  }

  void evaluate(std::span<const Vec2> grads, std::span<Vec2> flux, std::span<Mat2> tangent) override
  {
    parallel_for(static_cast<int>(grads.size()), threads_, [&](int b, int e) {
      for (int k = b; k < e; ++k) {
        const auto i = static_cast<std::size_t>(k);
        const NodalField* warm = state_[i] ? &state_[i]->eta : nullptr;
        auto ev = law_.evaluate_uncached(grads[i], warm);
        flux[i] = ev.flux;
        state_[i] = ev.cell;
        if (!tangent.empty()) tangent[i] = jac(grads[i], i);
      }
    });
  }

  void tangent(std::span<const Vec2> grads, std::span<Mat2> t) override
  {
    parallel_for(static_cast<int>(grads.size()), threads_, [&](int b, int e) {
      for (int k = b; k < e; ++k) t[static_cast<std::size_t>(k)] = jac(grads[static_cast<std::size_t>(k)], static_cast<std::size_t>(k));
    });
  }

  bool symmetric() const override
  {
    const auto& s = law_.spec();
    if (s.family != Family::Linear) return true;
    for (const auto& ph : s.phases)
      if ((ph.matrix - ph.matrix.transpose()).norm() != 0.0) return false;
    return true;
  }

  void initial_operator(std::span<Mat2> out) override
  {
    Mat2 a0;
    a0.col(0) = law_.a_hom(unit(0));
    a0.col(1) = law_.a_hom(unit(1));
    std::fill(out.begin(), out.end(), a0);
  }

  const std::vector<std::shared_ptr<const ScalarCellSolution>>& state() const { return state_; }

 private:
  Mat2 jac(const Vec2& xi, std::size_t i) const
  {
    Mat2 j = law_.jacobian(xi, state_[i] ? &state_[i]->eta : nullptr);
    // Cholesky path needs a symmetric matrix; a^hom of a symmetric law has
    // a symmetric derivative, so this only removes difference noise
    if (symmetric()) j = sym(j);
    return j;
  }

  const EffectiveLaw& law_;
  int threads_;
  std::vector<std::shared_ptr<const ScalarCellSolution>> state_;
};

}  // namespace

Vec2 TwoScaleField::grad_y(int e, int q, int ce, int cq) const
{
  const auto& eta = cells[static_cast<std::size_t>(e * 4 + q)]->eta;
  const auto& rule = QuadratureRule::gauss2x2();
  const auto en = cell.element_nodes(ce);
  Vec2 g = Vec2::Zero();
  for (int a = 0; a < 4; ++a) g += eta(en[static_cast<std::size_t>(a)]) * rule.dshape[cq][a];
  return g / cell.h();
}

QuadField TwoScaleField::grad_y_field(int e, int q) const
{
  return gradient(cells[static_cast<std::size_t>(e * 4 + q)]->eta);
}

HomogenizedElectrostatic solve_homogenized_electrostatic(const EffectiveLaw& law, const NodalField& f,
                                                         const DomainGrid& domain, const HomogenizedOptions& opts)
{
  if (!(f.grid == static_cast<const StructuredGrid&>(domain))) throw InvalidArgument("source on a different grid");
  const auto load = scalar_load(f);
  HomogenizedElectrostatic hom;
  hom.phi0 = NodalField(domain, 1, 0.0);
  hom.grad.assign(static_cast<std::size_t>(domain.qp_count()), Vec2::Zero());

  AhomQuadratureLaw qlaw(law, domain.qp_count(), opts.threads);
  NewtonOptions no;
  no.tol = opts.tol;
  no.max_newton = opts.max_newton;
  no.max_picard = 0;
  no.direct = opts.direct;
  no.initial_linear_solve = opts.linear_predictor;
  no.residual_scale = max_abs(load);
  if (no.residual_scale > 0.0) {
    const auto st = solve_monotone(domain, qlaw, Vec2::Zero(), load, hom.phi0.values, no);
    hom.residual = st.residual;
    hom.iterations = st.newton_iterations;
    hom.history = st.history;
  }
  gradients_at_qp(domain, hom.phi0.values, Vec2::Zero(), hom.grad);
  // hand the final cell solutions to the cache
  const auto& state = qlaw.state();
  for (std::size_t k = 0; k < hom.grad.size(); ++k) {
    if (!state[k] || state[k]->xi != hom.grad[k]) continue;
    EffectiveLaw::Evaluation ev;
    ev.cell = state[k];
    ev.flux = average_flux(law.spec(), *state[k]);
    law.insert(hom.grad[k], ev);
  }
  return hom;
}

TwoScaleField reconstruct_phi1(const EffectiveLaw& law, const HomogenizedElectrostatic& hom, int threads)
{
  TwoScaleField t;
  t.macro = hom.phi0.grid;
  t.cell = law.grid();
  t.cells.resize(hom.grad.size());
  parallel_for(static_cast<int>(hom.grad.size()), threads, [&](int b, int e) {
    for (int k = b; k < e; ++k) t.cells[static_cast<std::size_t>(k)] = law.evaluate(hom.grad[static_cast<std::size_t>(k)]).cell;
  });
  return t;
}

std::vector<double> flux_identity_residuals(const EffectiveLaw& law, const HomogenizedElectrostatic& hom,
                                            const TwoScaleField& phi1)
{
  std::vector<double> out(hom.grad.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = verify_flux_identity(law.spec(), hom.grad[k], *phi1.cells[k]);
  return out;
}

VectorDomainSolution solve_homogenized_elasticity(const Tensor4& b_hom, const Tensor4& c_hom, const NodalField& g,
                                                  const NodalField& phi0, const DomainGrid& domain,
                                                  const DomainSolveOptions& opts)
{
  auto load = body_load(g);
  QuadField s = maxwell_stress(phi0);
  for (int e = 0; e < domain.element_count(); ++e)
    for (int q = 0; q < 4; ++q) s.set_matrix(e, q, apply(c_hom, s.matrix(e, q)));
  const auto sl = stress_load(s);
  for (std::size_t i = 0; i < load.size(); ++i) load[i] -= sl[i];
  const std::vector<int> phases(static_cast<std::size_t>(domain.qp_count()), 0);
  return solve_dirichlet_elasticity(domain, phases, {b_hom, b_hom}, load, opts);
}

U1Corrector::U1Corrector(const std::array<ElasticCellSolution, 4>& upsilon,
                         const std::array<ElasticCellSolution, 4>& chi, const NodalField& u0, const NodalField& phi0)
    : cell_(upsilon[0].field.grid.cells()), strain0_(sym_gradient(u0)), grad_phi0_(gradient(phi0))
{
  for (std::size_t k = 0; k < 4; ++k) {
    dups_[k] = displacement_gradient(upsilon[k].field);
    dchi_[k] = displacement_gradient(chi[k].field);
  }
}

Mat2 U1Corrector::grad_y(int e, int q, int ce, int cq) const
{
  const Mat2 d0 = strain0_.matrix(e, q);
  const Vec2 gp = grad_phi0_.vector(e, q);
  Mat2 out = Mat2::Zero();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const auto k = static_cast<std::size_t>(flat(i, j));
      out += -d0(i, j) * dups_[k].matrix(ce, cq) + gp(i) * gp(j) * dchi_[k].matrix(ce, cq);
    }
  return out;
}

QuadField U1Corrector::grad_y_field(int e, int q) const
{
  QuadField f(cell_, 4);
  for (int ce = 0; ce < cell_.element_count(); ++ce)
    for (int cq = 0; cq < 4; ++cq) f.set_matrix(ce, cq, grad_y(e, q, ce, cq));
  return f;
}

}  // namespace hk

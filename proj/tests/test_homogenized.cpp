#include "hk/homogenized.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace hk;

namespace {

double max_diff(const NodalField& a, const NodalField& b)
{
  double m = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) m = std::max(m, std::abs(a.values[k] - b.values[k]));
  return m;
}

double max_abs(const NodalField& a)
{
  double m = 0.0;
  for (double v : a.values) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST(HomogenizedElectrostatic, ZeroSourceGivesZero)
{
  EffectiveLaw law(OperatorSpec::power_law(3.0, 1.0, 4.0, Geometry::laminate(0.5)), make_cell_grid(8));
  const DomainGrid d(8);
  const auto h = solve_homogenized_electrostatic(law, NodalField(d, 1), d);
  EXPECT_EQ(max_abs(h.phi0), 0.0);
}

TEST(HomogenizedElectrostatic, LinearLawMatchesDirectSolve)
{
  const auto s = OperatorSpec::linear(Mat2::Identity(), 4.0 * Mat2::Identity(), Geometry::square(0.5));
  const CellGrid cell = make_cell_grid(16);
  EffectiveLaw law(s, cell);
  const Mat2 b = linear_case_b_hom(s, cell);
  const DomainGrid d(16);
  const auto f = constant_field(d, 1, {1.0});
  const auto h = solve_homogenized_electrostatic(law, f, d, {.tol = 1e-12});
  DomainSolveOptions o;
  o.tol = 1e-13;
  const auto ref = solve_fine_electrostatic(OperatorSpec::linear(b, b, Geometry::homogeneous()), 1.0, f, d, o);
  EXPECT_LE(max_diff(h.phi0, ref.phi), 1e-10 * max_abs(ref.phi));
}

TEST(HomogenizedElectrostatic, ConstantCoefficientsReproduceFineSolution)
{
  for (double p : {2.0, 3.0}) {
    const auto s = OperatorSpec::power_law(p, 2.0, 2.0, Geometry::laminate(0.5));
    EffectiveLaw law(s, make_cell_grid(8), {.tol = 1e-13});
    const DomainGrid d(16);
    const auto f = constant_field(d, 1, {1.0});
    const auto h = solve_homogenized_electrostatic(law, f, d, {.tol = 1e-13});
    DomainSolveOptions o;
    o.tol = 1e-13;
    const auto fine = solve_fine_electrostatic(s, 0.5, f, d, o);
    EXPECT_LE(max_diff(h.phi0, fine.phi), 1e-12) << p;
  }
}

TEST(HomogenizedElasticity, ConstantCoefficientsReproduceFineSolution)
{
  const auto s = OperatorSpec::power_law(2.0, 1.5, 1.5, Geometry::homogeneous());
  const CellGrid cell = make_cell_grid(8);
  EffectiveLaw law(s, cell, {.tol = 1e-13});
  const DomainGrid d(16);
  const auto f = constant_field(d, 1, {1.0});
  const auto h = solve_homogenized_electrostatic(law, f, d, {.tol = 1e-13});
  const auto b = ElasticTensorField::uniform(isotropic_tensor(1.0, 1.0));
  const auto c = ElasticTensorField::uniform(isotropic_tensor(0.5, 0.7));
  const std::array<ScalarCellSolution, 2> se{law.evaluate(unit(0)).cell ? *law.evaluate(unit(0)).cell : ScalarCellSolution{},
                                             law.evaluate(unit(1)).cell ? *law.evaluate(unit(1)).cell : ScalarCellSolution{}};
  const Tensor4 bh = assemble_B_hom(b, cell).B_hom;
  const Tensor4 ch = assemble_C_hom(c, se, cell, ChomVariant::CApplied).C_hom;
  const auto g = constant_field(d, 2, {0.0, -1.0});
  DomainSolveOptions o;
  o.tol = 1e-13;
  const auto u0 = solve_homogenized_elasticity(bh, ch, g, h.phi0, d, o);
  const auto fine_phi = solve_fine_electrostatic(s, 0.5, f, d, o);
  const auto ue = solve_fine_elasticity(b, c, 0.5, g, maxwell_stress(fine_phi.phi), d, o);
  EXPECT_LE(max_diff(u0.u, ue.u), 1e-12);
}

TEST(Reconstruction, LaminateCorrectorGradient)
{
  // p = 2 laminate: grad_y phi^1 = (h xi_1 / sigma(y) - xi_1, 0)
  const auto s = OperatorSpec::power_law(2.0, 1.0, 4.0, Geometry::laminate(0.5));
  const CellGrid cell = make_cell_grid(16);
  EffectiveLaw law(s, cell);
  const DomainGrid d(8);
  const auto h = solve_homogenized_electrostatic(law, constant_field(d, 1, {1.0}), d);
  const auto t = reconstruct_phi1(law, h);
  const double hm = oracle::harmonic(0.5, 1.0, 4.0);
  double err = 0.0;
  for (int e = 0; e < d.element_count(); e += 7)
    for (int q = 0; q < 4; ++q) {
      const Vec2 xi = h.grad[static_cast<std::size_t>(e * 4 + q)];
      for (int ce = 0; ce < cell.element_count(); ++ce)
        for (int cq = 0; cq < 4; ++cq) {
          const double sig = cell.qp_point(ce, cq)(0) >= 0.0 ? 4.0 : 1.0;
          const Vec2 ref(hm * xi(0) / sig - xi(0), 0.0);
          err = std::max(err, (t.grad_y(e, q, ce, cq) - ref).norm() / (1.0 + xi.norm()));
        }
    }
  EXPECT_LE(err, 1e-8);
}

TEST(Reconstruction, ZeroMeanCorrectorsAndFluxIdentity)
{
  const auto s = OperatorSpec::power_law(3.0, 1.0, 4.0, Geometry::square(0.5));
  const CellGrid cell = make_cell_grid(16);
  EffectiveLaw law(s, cell);
  const DomainGrid d(4);
  const auto h = solve_homogenized_electrostatic(law, constant_field(d, 1, {1.0}), d);
  const auto t = reconstruct_phi1(law, h);
  for (const auto& c : t.cells) EXPECT_LE(std::abs(cell_average(c->eta)[0]), 1e-12);
  const auto r = flux_identity_residuals(law, h, t);
  for (std::size_t k = 0; k < r.size(); ++k) {
    const Vec2 xi = h.grad[k];
    EXPECT_LE(r[k], 1e-9 * std::max(1.0, std::pow(xi.norm(), s.p)));
  }
}

TEST(Reconstruction, DisplacementCorrectorZeroMean)
{
  const CellGrid cell = make_cell_grid(8);
  const auto b = ElasticTensorField::isotropic(1.0, 1.0, 4.0, 4.0, Geometry::square(0.5));
  const auto br = assemble_B_hom(b, cell);
  for (const auto& u : br.upsilon) {
    const auto m = cell_average(u.field);
    EXPECT_LE(std::abs(m[0]) + std::abs(m[1]), 1e-12);
  }
  const auto s = OperatorSpec::power_law(2.0, 1.0, 4.0, Geometry::square(0.5));
  const std::array<ScalarCellSolution, 2> se{solve_scalar_cell(s, unit(0), cell), solve_scalar_cell(s, unit(1), cell)};
  const auto cr = assemble_C_hom(ElasticTensorField::isotropic(0.5, 0.5, 1.0, 2.0, Geometry::square(0.5)), se, cell,
                                 ChomVariant::CApplied);
  for (const auto& u : cr.chi) {
    const auto m = cell_average(u.field);
    EXPECT_LE(std::abs(m[0]) + std::abs(m[1]), 1e-12);
  }
  // a periodic field has zero-mean gradient, so grad_y u^1 averages to zero
  const DomainGrid d(2);
  NodalField u0(d, 2), phi0(d, 1);
  for (int nd = 0; nd < d.node_count(); ++nd) {
    const Vec2 x = d.node_point(nd);
    u0(nd, 0) = x(0) * (1 - x(0));
    phi0(nd) = x(1) * x(0);
  }
  U1Corrector u1(br.upsilon, cr.chi, u0, phi0);
  for (int e = 0; e < d.element_count(); ++e)
    for (int q = 0; q < 4; ++q) {
      const auto g = u1.grad_y_field(e, q);
      for (double v : cell_average(g)) EXPECT_LE(std::abs(v), 1e-12);
    }
}

TEST(HomogenizedElectrostatic, NewtonConvergesFast)
{
  for (double p : {2.0, 3.0}) {
    EffectiveLaw law(OperatorSpec::power_law(p, 1.0, 4.0, Geometry::laminate(0.5)), make_cell_grid(8));
    const DomainGrid d(8);
    HomogenizedOptions o;
    o.linear_predictor = false;  // otherwise p = 2 is solved before the first Newton step
    const auto h = solve_homogenized_electrostatic(law, constant_field(d, 1, {1.0}), d, o);
    EXPECT_LE(h.residual, o.tol);
    // tighter targets only measure the round-off floor of the cell solves
    const auto& r = h.history;
    // p = 2 is linear and finishes in one step; p = 3 needs a real Newton phase
    ASSERT_GE(r.size(), p == 2.0 ? 2u : 3u) << p;
    for (std::size_t k = std::max<std::size_t>(1, r.size() - 2); k < r.size(); ++k)
      EXPECT_LT(r[k] / r[k - 1], 0.2) << p << " it " << k;
  }
}

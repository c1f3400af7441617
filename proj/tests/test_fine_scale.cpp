#include "hk/fine_scale.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace hk;

namespace {

NodalField nodal(const DomainGrid& d, int comps, const std::function<double(const Vec2&, int)>& fn)
{
  NodalField f(d, comps);
  for (int nd = 0; nd < d.node_count(); ++nd)
    for (int c = 0; c < comps; ++c) f(nd, c) = fn(d.node_point(nd), c);
  return f;
}

const OperatorSpec& identity_law()
{
  static const auto s = OperatorSpec::linear(Mat2::Identity(), Mat2::Identity(), Geometry::homogeneous());
  return s;
}

}  // namespace

TEST(FineElectrostatic, ZeroSourceGivesZero)
{
  const DomainGrid d(16);
  for (double p : {2.0, 3.0}) {
    const auto r = solve_fine_electrostatic(OperatorSpec::power_law(p, 1.0, 4.0, Geometry::laminate(0.5)), 0.25,
                                            NodalField(d, 1), d);
    for (double v : r.phi.values) EXPECT_EQ(v, 0.0);
  }
}

TEST(FineElectrostatic, ManufacturedLaplaceSecondOrder)
{
  std::vector<double> hs, errs;
  for (int N : {8, 16, 32, 64}) {
    const DomainGrid d(N);
    const auto f = nodal(d, 1, [](const Vec2& x, int) { return oracle::laplace_f(x); });
    const auto r = solve_fine_electrostatic(identity_law(), 1.0, f, d);
    hs.push_back(1.0 / N);
    errs.push_back(oracle::l2_error(r.phi, [](const Vec2& x, int) { return oracle::laplace_u(x); }));
  }
  const double slope = oracle::loglog_slope(hs, errs);
  EXPECT_GE(slope, 1.8);
  EXPECT_LE(slope, 2.2);
}

TEST(FineElectrostatic, BoundaryValuesVanish)
{
  const DomainGrid d(16);
  const auto r = solve_fine_electrostatic(OperatorSpec::power_law(3.0, 1.0, 4.0, Geometry::square(0.5)), 0.25,
                                          constant_field(d, 1, {1.0}), d);
  const auto mask = d.boundary_mask();
  for (int nd = 0; nd < d.node_count(); ++nd)
    if (mask[static_cast<std::size_t>(nd)]) {
      EXPECT_EQ(r.phi(nd), 0.0);
    }
  EXPECT_LE(r.residual, 1e-10);
}

TEST(FineElectrostatic, Commensurability)
{
  const DomainGrid d(16);
  EXPECT_NO_THROW(check_commensurate(0.25, d));
  EXPECT_THROW(check_commensurate(1.0 / 3.0, d), InvalidArgument);
  EXPECT_THROW(check_commensurate(1.0 / 32.0, d), InvalidArgument);
  EXPECT_THROW(solve_fine_electrostatic(identity_law(), 0.3, NodalField(d, 1), d), InvalidArgument);
}

TEST(FineElectrostatic, InterfaceFluxBalance)
{
  const DomainGrid d(32);
  for (double p : {2.0, 3.0}) {
    const auto s = OperatorSpec::power_law(p, 1.0, 4.0, Geometry::laminate(0.5));
    const auto f = constant_field(d, 1, {1.0});
    const auto r = solve_fine_electrostatic(s, 0.125, f, d);
    EXPECT_LE(interface_flux_balance(s, 0.125, r.phi, f), 1e-8) << p;
  }
}

TEST(FineElectrostatic, EnergyRatioBoundedAcrossEps)
{
  for (double p : {2.0, 3.0}) {
    const auto s = OperatorSpec::power_law(p, 1.0, 4.0, Geometry::square(0.5));
    std::vector<double> ratios;
    for (double eps : {0.25, 0.125, 0.0625}) {
      const DomainGrid d(static_cast<int>(4 / eps));
      const auto f = constant_field(d, 1, {1.0});
      const auto r = solve_fine_electrostatic(s, eps, f, d);
      ratios.push_back(gradient_energy(r.phi, p) / source_energy(f, p));
    }
    // uniform in eps: lambda_o^{-p'} with lambda_o = min sigma = 1 and Poincare <= 1
    for (double q : ratios) {
      EXPECT_GT(q, 0.0);
      EXPECT_LE(q, 1.0);
    }
    EXPECT_LE(*std::max_element(ratios.begin(), ratios.end()) / *std::min_element(ratios.begin(), ratios.end()),
              1.5);
  }
}

TEST(MaxwellStress, Examples)
{
  const DomainGrid d(4);
  const auto s1 = maxwell_stress(nodal(d, 1, [](const Vec2& x, int) { return x(0); }));
  const auto s2 = maxwell_stress(nodal(d, 1, [](const Vec2& x, int) { return x(0) + x(1); }));
  for (int e = 0; e < d.element_count(); ++e)
    for (int q = 0; q < 4; ++q) {
      Mat2 a;
      a << 1, 0, 0, 0;
      EXPECT_LE((s1.matrix(e, q) - a).cwiseAbs().maxCoeff(), 1e-13);
      EXPECT_LE((s2.matrix(e, q) - Mat2::Constant(1.0)).cwiseAbs().maxCoeff(), 1e-13);
    }
}

TEST(MaxwellStress, TraceAndDeterminant)
{
  const DomainGrid d(6);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  NodalField phi(d, 1);
  for (double& v : phi.values) v = n(rng);
  const auto s = maxwell_stress(phi);
  const auto g = gradient(phi);
  for (int e = 0; e < d.element_count(); ++e)
    for (int q = 0; q < 4; ++q) {
      const Mat2 m = s.matrix(e, q);
      EXPECT_NEAR(m.trace(), g.vector(e, q).squaredNorm(), 1e-12 * (1.0 + m.trace()));
      EXPECT_NEAR(m.determinant(), 0.0, 1e-10 * (1.0 + m.trace() * m.trace()));
      EXPECT_EQ(m(0, 1), m(1, 0));
    }
}

TEST(FineElasticity, ManufacturedSecondOrder)
{
  const double lam = 1.0, mu = 1.0;
  const auto b = ElasticTensorField::uniform(isotropic_tensor(lam, mu));
  const auto c = ElasticTensorField::uniform(isotropic_tensor(0.5, 0.5));
  std::vector<double> hs, errs;
  for (int N : {8, 16, 32, 64}) {
    const DomainGrid d(N);
    const auto g = nodal(d, 2, [&](const Vec2& x, int k) { return oracle::elastic_g(x, lam, mu)(k); });
    const auto r = solve_fine_elasticity(b, c, 1.0, g, QuadField(d, 4), d);
    hs.push_back(1.0 / N);
    errs.push_back(oracle::l2_error(r.u, [](const Vec2& x, int k) { return oracle::elastic_u(x)(k); }));
  }
  const double slope = oracle::loglog_slope(hs, errs);
  EXPECT_GE(slope, 1.8);
  EXPECT_LE(slope, 2.2);
}

TEST(FineElasticity, ManufacturedLoadMatchesFiniteDifferences)
{
  // g = -div(lambda tr(Du) I + 2 mu Du), checked by nested central differences
  const double lam = 1.3, mu = 0.7, h = 1e-4;
  auto stress = [&](const Vec2& x) {
    Mat2 gu;
    for (int j = 0; j < 2; ++j) gu.col(j) = (oracle::elastic_u(x + h * unit(j)) - oracle::elastic_u(x - h * unit(j))) / (2 * h);
    return oracle::iso_stress(lam, mu, sym(gu));
  };
  for (const Vec2& x : {Vec2(0.3, 0.6), Vec2(0.71, 0.22)}) {
    Vec2 div = Vec2::Zero();
    for (int j = 0; j < 2; ++j) div += (stress(x + h * unit(j)).col(j) - stress(x - h * unit(j)).col(j)) / (2 * h);
    EXPECT_LE((-div - oracle::elastic_g(x, lam, mu)).norm(), 1e-4);
  }
}

TEST(FineElasticity, LinearInSigma)
{
  const DomainGrid d(16);
  const auto b = ElasticTensorField::isotropic(1.0, 1.0, 4.0, 4.0, Geometry::laminate(0.5));
  const auto c = ElasticTensorField::isotropic(0.5, 0.5, 1.0, 2.0, Geometry::laminate(0.5));
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  QuadField s1(d, 4), s2(d, 4), s12(d, 4);
  for (std::size_t k = 0; k < s1.values.size(); ++k) {
    s1.values[k] = n(rng);
    s2.values[k] = n(rng);
    s12.values[k] = s1.values[k] + 2.0 * s2.values[k];
  }
  const NodalField g0(d, 2);
  const auto u1 = solve_fine_elasticity(b, c, 0.25, g0, s1, d).u;
  const auto u2 = solve_fine_elasticity(b, c, 0.25, g0, s2, d).u;
  const auto u12 = solve_fine_elasticity(b, c, 0.25, g0, s12, d).u;
  double m = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < u1.values.size(); ++k) {
    m = std::max(m, std::abs(u12.values[k] - u1.values[k] - 2.0 * u2.values[k]));
    scale = std::max(scale, std::abs(u12.values[k]));
  }
  EXPECT_LE(m, 1e-9 * scale);
  EXPECT_GT(scale, 0.0);
}

TEST(FineElasticity, ZeroLoadGivesZero)
{
  const DomainGrid d(8);
  const auto b = ElasticTensorField::uniform(isotropic_tensor(1.0, 1.0));
  const auto r = solve_fine_elasticity(b, b, 0.5, NodalField(d, 2), QuadField(d, 4), d);
  for (double v : r.u.values) EXPECT_EQ(v, 0.0);
}

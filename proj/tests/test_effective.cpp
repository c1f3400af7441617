#include "hk/effective.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>
#include <thread>

using namespace hk;

namespace {

Tensor4 laminate_B_oracle(double f, std::array<double, 2> lam, std::array<double, 2> mu)
{
  // column flat(m,n) holds the stress response to the unit strain sym(e^m e^n)
  Tensor4 t;
  for (int m = 0; m < 2; ++m)
    for (int n = 0; n < 2; ++n) {
      const Mat2 s = oracle::laminate_effective_stress(f, lam, mu, unit_strain(m, n));
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) t(flat(i, j), flat(m, n)) = s(i, j);
    }
  return t;
}

}  // namespace

TEST(AHom, ConstantLinearLaw)
{
  Mat2 b;
  b << 2.0, 0.3, 0.3, 1.0;
  EffectiveLaw law(OperatorSpec::linear(b, b, Geometry::square(0.5)), make_cell_grid(8));
  for (const Vec2& xi : {Vec2(1, 0), Vec2(0.3, -2.0)}) EXPECT_LE((law.a_hom(xi) - b * xi).norm(), 1e-12);
}

TEST(AHom, LinearLaminateMeans)
{
  EffectiveLaw law(OperatorSpec::power_law(2.0, 1.0, 4.0, Geometry::laminate(0.5)), make_cell_grid(32));
  const Vec2 a1 = law.a_hom(unit(0)), a2 = law.a_hom(unit(1));
  EXPECT_NEAR(a1(0), oracle::harmonic(0.5, 1.0, 4.0), 1e-3 * 1.6);
  EXPECT_NEAR(a2(1), oracle::arithmetic(0.5, 1.0, 4.0), 1e-3 * 2.5);
  EXPECT_NEAR(a1(1), 0.0, 1e-10);
  EXPECT_NEAR(a2(0), 0.0, 1e-10);
}

TEST(AHom, NonlinearLaminateFluxBalance)
{
  const double q = oracle::laminate_normal_flux(0.5, {1.0, 4.0}, {3.0, 3.0}, 1.0);
  EXPECT_NEAR(q, 16.0 / 9.0, 1e-12);
  EffectiveLaw law(OperatorSpec::power_law(3.0, 1.0, 4.0, Geometry::laminate(0.5)), make_cell_grid(16));
  EXPECT_NEAR(law.a_hom(unit(0))(0), q, 1e-3 * q);
  // along the layers p = xi in both phases: arithmetic mean of sigma
  EXPECT_NEAR(law.a_hom(unit(1))(1), 2.5, 1e-9);
  // scaled loading s e1: q(s) from the same oracle
  const double q2 = oracle::laminate_normal_flux(0.5, {1.0, 4.0}, {3.0, 3.0}, 1.7);
  EXPECT_NEAR(law.a_hom(Vec2(1.7, 0.0))(0), q2, 1e-3 * q2);
}

TEST(AHom, VariableExponentLaminateFluxBalance)
{
  const auto s = OperatorSpec::variable_exponent(3.0, 2.0, 1.0, 2.0, Geometry::laminate(0.5));
  EffectiveLaw law(s, make_cell_grid(16));
  for (double t : {0.5, 1.0, 2.0}) {
    const double q = oracle::laminate_normal_flux(0.5, {1.0, 2.0}, {3.0, 2.0}, t);
    EXPECT_NEAR(law.a_hom(Vec2(t, 0.0))(0), q, 1e-8 * q);
  }
}

TEST(AHom, ZeroAtZero)
{
  EffectiveLaw law(OperatorSpec::power_law(3.0, 1.0, 4.0, Geometry::square(0.5)), make_cell_grid(8));
  EXPECT_LE(law.a_hom(Vec2::Zero()).norm(), 1e-14);
}

TEST(AHom, HomogeneityOfPowerLaw)
{
  for (double p : {2.0, 3.0}) {
    EffectiveLaw law(OperatorSpec::power_law(p, 1.0, 4.0, Geometry::square(0.5)), make_cell_grid(16));
    const Vec2 xi(0.8, -0.35);
    const Vec2 a = law.a_hom(xi);
    for (double t : {0.5, 2.0}) {
      const Vec2 at = law.a_hom(t * xi);
      EXPECT_LE((at - std::pow(t, p - 1.0) * a).norm(), 1e-6 * at.norm()) << p << " " << t;
    }
  }
}

TEST(AHom, CheckerboardRotationEquivariance)
{
  Mat2 r;
  r << 0, -1, 1, 0;
  for (double p : {2.0, 3.0}) {
    EffectiveLaw law(OperatorSpec::power_law(p, 1.0, 4.0, Geometry::checkerboard()), make_cell_grid(16));
    for (const Vec2& xi : {Vec2(1.0, 0.0), Vec2(0.6, 0.3), Vec2(-1.1, 0.7)}) {
      const Vec2 lhs = law.a_hom(r * xi), rhs = r * law.a_hom(xi);
      EXPECT_LE((lhs - rhs).norm(), 1e-6 * rhs.norm());
    }
  }
}

TEST(AHom, HillBounds)
{
  const double h = oracle::harmonic(0.25, 1.0, 4.0), a = oracle::arithmetic(0.25, 1.0, 4.0);
  const auto s = OperatorSpec::linear(Mat2::Identity(), 4.0 * Mat2::Identity(), Geometry::square(0.5));
  const Mat2 b = linear_case_b_hom(s, make_cell_grid(32));
  const Eigen::Vector2d ev = Eigen::SelfAdjointEigenSolver<Mat2>(sym(b)).eigenvalues();
  EXPECT_GE(ev.minCoeff(), h - 1e-12);
  EXPECT_LE(ev.maxCoeff(), a + 1e-12);
  EXPECT_GT(ev.minCoeff(), h + 1e-3);  // strict for a square inclusion
}

TEST(AHom, CacheBehaviour)
{
  EffectiveLaw law(OperatorSpec::power_law(3.0, 1.0, 4.0, Geometry::square(0.5)), make_cell_grid(8));
  EXPECT_EQ(law.cache_size(), 0u);
  const Vec2 a = law.a_hom(Vec2(0.5, 0.25));
  EXPECT_TRUE(law.cached(Vec2(0.5, 0.25)));
  EXPECT_EQ(law.cache_size(), 1u);
  EXPECT_EQ(law.a_hom(Vec2(0.5, 0.25)), a);
  EXPECT_EQ(law.cache_size(), 1u);
  // no merging of nearby keys
  law.a_hom(Vec2(0.5, 0.25 + 1e-13));
  EXPECT_EQ(law.cache_size(), 2u);
  // +0 and -0 are one key
  law.a_hom(Vec2(0.0, 1.0));
  law.a_hom(Vec2(-0.0, 1.0));
  EXPECT_EQ(law.cache_size(), 3u);
  law.clear_cache();
  EXPECT_EQ(law.cache_size(), 0u);
}

TEST(AHom, ConcurrentLookupsAgree)
{
  EffectiveLaw law(OperatorSpec::power_law(3.0, 1.0, 4.0, Geometry::square(0.5)), make_cell_grid(8));
  std::vector<Vec2> xs;
  for (int k = 0; k < 16; ++k) xs.emplace_back(0.1 * k, 1.0 - 0.05 * k);
  std::vector<Vec2> out(xs.size() * 4);
  std::vector<std::thread> pool;
  for (int t = 0; t < 4; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t k = 0; k < xs.size(); ++k) out[static_cast<std::size_t>(t) * xs.size() + k] = law.a_hom(xs[k]);
    });
  for (auto& th : pool) th.join();
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const Vec2 ref = law.evaluate_uncached(xs[k]).flux;
    for (int t = 0; t < 4; ++t) EXPECT_LE((out[static_cast<std::size_t>(t) * xs.size() + k] - ref).norm(), 1e-12);
  }
  EXPECT_EQ(law.cache_size(), xs.size());
}

TEST(AHom, JacobianOfLinearLaminate)
{
  EffectiveLaw law(OperatorSpec::power_law(2.0, 1.0, 4.0, Geometry::laminate(0.5)), make_cell_grid(16));
  const Mat2 j = law.jacobian(Vec2(0.3, 0.7));
  EXPECT_NEAR(j(0, 0), 1.6, 1e-6);
  EXPECT_NEAR(j(1, 1), 2.5, 1e-6);
  EXPECT_NEAR(j(0, 1), 0.0, 1e-6);
  EXPECT_NEAR(j(1, 0), 0.0, 1e-6);
}

TEST(BHom, ConstantTensorIsRecovered)
{
  const Tensor4 b = isotropic_tensor(1.5, 0.75);
  const auto r = assemble_B_hom(ElasticTensorField::uniform(b), make_cell_grid(8));
  EXPECT_LE((r.B_hom - b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(BHom, LaminateMatchesTractionContinuityOracle)
{
  const std::array<double, 2> lam{1.0, 4.0}, mu{1.0, 3.0};
  const auto r = assemble_B_hom(ElasticTensorField::isotropic(lam[0], mu[0], lam[1], mu[1], Geometry::laminate(0.5)),
                                make_cell_grid(16));
  const Tensor4 ref = laminate_B_oracle(0.5, lam, mu);
  EXPECT_LE((r.B_hom - ref).cwiseAbs().maxCoeff(), 1e-3 * ref.cwiseAbs().maxCoeff());
}

TEST(BHom, SymmetriesAndEllipticity)
{
  for (const auto& g : {Geometry::laminate(0.5), Geometry::square(0.5), Geometry::checkerboard(), Geometry::disc(0.3)}) {
    const auto r = assemble_B_hom(ElasticTensorField::isotropic(1.0, 1.0, 6.0, 4.0, g), make_cell_grid(16));
    EXPECT_LE(symmetry_defect(r.B_hom, true), 1e-10) << g.name();
    EXPECT_GT(min_symmetric_eigenvalue(r.B_hom), 0.0);
  }
}

TEST(CHom, ConstantCoefficientVariants)
{
  const Tensor4 c = isotropic_tensor(0.7, 1.3);
  const CellGrid g = make_cell_grid(8);
  const auto s = OperatorSpec::power_law(2.0, 1.0, 1.0, Geometry::homogeneous());
  const std::array<ScalarCellSolution, 2> se{solve_scalar_cell(s, unit(0), g), solve_scalar_cell(s, unit(1), g)};
  const auto cf = ElasticTensorField::uniform(c);
  const auto applied = assemble_C_hom(cf, se, g, ChomVariant::CApplied);
  EXPECT_LE((applied.C_hom - c).cwiseAbs().maxCoeff(), 1e-12);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const Mat2 m = outer(unit(i), unit(j));
      EXPECT_LE((apply(applied.C_hom, m) - apply(c, m)).norm(), 1e-12);
    }
  const auto written = assemble_C_hom(cf, se, g, ChomVariant::AsWritten);
  EXPECT_LE((written.C_hom - Tensor4::Identity()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CHom, HeterogeneousVariantsDiffer)
{
  const CellGrid g = make_cell_grid(8);
  const auto s = OperatorSpec::power_law(2.0, 1.0, 4.0, Geometry::laminate(0.5));
  const std::array<ScalarCellSolution, 2> se{solve_scalar_cell(s, unit(0), g), solve_scalar_cell(s, unit(1), g)};
  const auto c = ElasticTensorField::isotropic(0.5, 0.5, 1.0, 2.0, Geometry::laminate(0.5));
  const auto b = ElasticTensorField::isotropic(1.0, 1.0, 4.0, 4.0, Geometry::laminate(0.5));
  const auto a = assemble_C_hom(c, se, g, ChomVariant::AsWritten).C_hom;
  const auto ca = assemble_C_hom(c, se, g, ChomVariant::CApplied).C_hom;
  const auto ts = assemble_C_hom(c, se, g, ChomVariant::TwoScale, &b).C_hom;
  EXPECT_GT((a - ca).cwiseAbs().maxCoeff(), 1e-3);
  EXPECT_GT((ts - ca).cwiseAbs().maxCoeff(), 1e-3);
  // two-scale variant with B = C coincides with C-applied
  const auto same = assemble_C_hom(c, se, g, ChomVariant::TwoScale, &c).C_hom;
  EXPECT_LE((same - ca).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(AHomProperties, ThetaAndLinearRatios)
{
  EXPECT_DOUBLE_EQ(hom_theta(1.0), 1.0);
  EXPECT_DOUBLE_EQ(hom_theta(0.5), 0.5 / 1.5);
  EffectiveLaw law(OperatorSpec::linear(2.0 * Mat2::Identity(), 2.0 * Mat2::Identity(), Geometry::homogeneous()),
                   make_cell_grid(4));
  const auto r = check_a_hom_properties(law, 30, 5);
  EXPECT_NEAR(r.min_monotonicity, 2.0, 1e-10);
  EXPECT_NEAR(r.max_monotonicity, 2.0, 1e-10);
  EXPECT_DOUBLE_EQ(r.theta, 1.0);
  EXPECT_FALSE(r.violation);
  EXPECT_THROW(check_a_hom_properties(law, 19, 5), InvalidArgument);
}

TEST(AHomProperties, NonlinearLaminateMonotone)
{
  EffectiveLaw law(OperatorSpec::power_law(3.0, 1.0, 4.0, Geometry::laminate(0.5)), make_cell_grid(8));
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto r = check_a_hom_properties(law, 100, seed);
    EXPECT_FALSE(r.violation);
    EXPECT_GT(r.min_monotonicity, 0.0);
    EXPECT_TRUE(std::isfinite(r.max_continuity));
  }
}

TEST(LinearBHom, Examples)
{
  const CellGrid g = make_cell_grid(16);
  const auto id = OperatorSpec::linear(Mat2::Identity(), Mat2::Identity(), Geometry::laminate(0.5));
  EXPECT_LE((linear_case_b_hom(id, g) - Mat2::Identity()).norm(), 1e-12);
  const auto lam = OperatorSpec::linear(Mat2::Identity(), 4.0 * Mat2::Identity(), Geometry::laminate(0.5));
  const Mat2 b = linear_case_b_hom(lam, g);
  EXPECT_NEAR(b(0, 0), 1.6, 1.6e-3);
  EXPECT_NEAR(b(1, 1), 2.5, 2.5e-3);
  EXPECT_THROW(linear_case_b_hom(OperatorSpec::power_law(3.0, 1.0, 1.0, Geometry::homogeneous()), g), InvalidArgument);
}

TEST(LinearBHom, AgreesWithAHom)
{
  Mat2 m;
  m << 3.0, 0.4, 0.4, 1.0;
  const auto s = OperatorSpec::linear(Mat2::Identity(), m, Geometry::square(0.5));
  const CellGrid g = make_cell_grid(16);
  const Mat2 b = linear_case_b_hom(s, g);
  EffectiveLaw law(s, g);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n;
  for (int k = 0; k < 10; ++k) {
    const Vec2 xi(n(rng), n(rng));
    const Vec2 a = law.a_hom(xi);
    EXPECT_LE((a - b * xi).norm(), 1e-8 * a.norm());
  }
}

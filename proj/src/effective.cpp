#include "hk/effective.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>

namespace hk {

namespace {

std::pair<std::uint64_t, std::uint64_t> key_of(const Vec2& xi)
{
  // +0.0 and -0.0 are the same loading
  const double a = xi(0) == 0.0 ? 0.0 : xi(0);
  const double b = xi(1) == 0.0 ? 0.0 : xi(1);
  return {std::bit_cast<std::uint64_t>(a), std::bit_cast<std::uint64_t>(b)};
}

}  // namespace

EffectiveLaw::EffectiveLaw(const OperatorSpec& spec, const CellGrid& grid, SolverOptions opts)
    : solver_(spec, grid, opts)
{
}

EffectiveLaw::Evaluation EffectiveLaw::evaluate_uncached(const Vec2& xi, const NodalField* warm) const
{
  auto sol = std::make_shared<ScalarCellSolution>(solver_.solve(xi, warm));
  Evaluation ev;
  ev.flux = average_flux(solver_.spec(), *sol);
  ev.cell = std::move(sol);
  return ev;
}

EffectiveLaw::Evaluation EffectiveLaw::evaluate(const Vec2& xi, const NodalField* warm) const
{
  const auto key = key_of(xi);
  {
    std::shared_lock lock(mutex_);
    const auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  Evaluation ev = evaluate_uncached(xi, warm);
  std::unique_lock lock(mutex_);
  // another thread may have inserted the same key meanwhile; keep the first
  return cache_.emplace(key, ev).first->second;
}

void EffectiveLaw::insert(const Vec2& xi, const Evaluation& ev) const
{
  std::unique_lock lock(mutex_);
  cache_.emplace(key_of(xi), ev);
}

bool EffectiveLaw::cached(const Vec2& xi) const
{
  std::shared_lock lock(mutex_);
  return cache_.count(key_of(xi)) > 0;
}

std::size_t EffectiveLaw::cache_size() const
{
  std::shared_lock lock(mutex_);
  return cache_.size();
}

void EffectiveLaw::clear_cache() const
{
  std::unique_lock lock(mutex_);
  cache_.clear();
}

Mat2 EffectiveLaw::jacobian(const Vec2& xi, const NodalField* base) const
{
  const double h = fd_step(xi);
  Mat2 j;
  for (int k = 0; k < 2; ++k) {
    const Vec2 fp = evaluate_uncached(xi + h * unit(k), base).flux;
    const Vec2 fm = evaluate_uncached(xi - h * unit(k), base).flux;
    j.col(k) = (fp - fm) / (2.0 * h);
  }
  return j;
}

std::string EffectiveLaw::fingerprint() const
{
  std::ostringstream os;
  os << spec().fingerprint() << "|n=" << grid().n() << "|tol=" << solver_.options().tol;
  return os.str();
}

BHomResult assemble_B_hom(const ElasticTensorField& b, const CellGrid& grid, const SolverOptions& opts)
{
  BHomResult r;
  ElasticCellOperator op(b, grid);
  // strain E^ij - D(Upsilon^ij) at quadrature points, per load
  std::array<QuadField, 4> strain;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const auto load = stress_load(apply_constant(b, grid, unit_strain(i, j)));
      auto sol = op.solve(load, opts);
      sol.i = i;
      sol.j = j;
      QuadField s = sym_gradient(sol.field);
      const Mat2 e = unit_strain(i, j);
      for (int el = 0; el < grid.element_count(); ++el)
        for (int q = 0; q < 4; ++q) s.set_matrix(el, q, e - s.matrix(el, q));
      strain[static_cast<std::size_t>(flat(i, j))] = std::move(s);
      r.upsilon[static_cast<std::size_t>(flat(i, j))] = std::move(sol);
    }
  const auto& ph = op.phases();
  for (int a = 0; a < 4; ++a)
    for (int c = 0; c < 4; ++c) {
      double s = 0.0;
      for (int el = 0; el < grid.element_count(); ++el)
        for (int q = 0; q < 4; ++q) {
          const Tensor4& t = op.tensors()[static_cast<std::size_t>(ph[static_cast<std::size_t>(4 * el + q)])];
          s += grid.qp_weight(q) *
               vec(strain[static_cast<std::size_t>(c)].matrix(el, q)).dot(t * vec(strain[static_cast<std::size_t>(a)].matrix(el, q)));
        }
      r.B_hom(a, c) = s;
    }
  return r;
}

CHomResult assemble_C_hom(const ElasticTensorField& c, const std::array<ScalarCellSolution, 2>& sol_e,
                          const CellGrid& grid, ChomVariant variant, const ElasticTensorField* b,
                          const SolverOptions& opts)
{
  CHomResult r;
  r.variant = variant;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const auto idx = static_cast<std::size_t>(flat(i, j));
      r.zeta[idx] = assemble_zeta(sol_e[static_cast<std::size_t>(i)], sol_e[static_cast<std::size_t>(j)]);
      auto chi = solve_electrostriction_cell(c, r.zeta[idx], grid, variant, b, opts);
      chi.i = i;
      chi.j = j;
      const QuadField dchi = sym_gradient(chi.field);
      QuadField flux(grid, 4);
      switch (variant) {
        case ChomVariant::AsWritten: {
          const QuadField cd = apply_field(c, dchi);
          for (std::size_t k = 0; k < flux.values.size(); ++k) flux.values[k] = cd.values[k] + r.zeta[idx].values[k];
          break;
        }
        case ChomVariant::CApplied: {
          QuadField sum = dchi;
          for (std::size_t k = 0; k < sum.values.size(); ++k) sum.values[k] += r.zeta[idx].values[k];
          flux = apply_field(c, sum);
          break;
        }
        case ChomVariant::TwoScale: {
          const QuadField bd = apply_field(*b, dchi);
          const QuadField cz = apply_field(c, r.zeta[idx]);
          for (std::size_t k = 0; k < flux.values.size(); ++k) flux.values[k] = bd.values[k] + cz.values[k];
          break;
        }
      }
      const auto avg = cell_average(flux);
      for (int k = 0; k < 4; ++k) r.C_hom(k, static_cast<int>(idx)) = avg[static_cast<std::size_t>(k)];
      r.chi[idx] = std::move(chi);
    }
  return r;
}

double hom_theta(double alpha) { return alpha / (2.0 - alpha); }

AHomPropertyReport check_a_hom_properties(const EffectiveLaw& law, int m, std::uint64_t seed, double radius)
{
  if (m < 20) throw InvalidArgument("a^hom property check needs at least 20 pairs");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto draw = [&] {
    for (;;) {
      Vec2 v(u(rng), u(rng));
      if (v.squaredNorm() <= 1.0) return Vec2(radius * v);
    }
  };
  const double p = law.spec().p;
  AHomPropertyReport r;
  r.pairs = m;
  r.theta = hom_theta(law.spec().alpha);
  r.min_monotonicity = std::numeric_limits<double>::infinity();
  r.max_monotonicity = 0.0;
  for (int k = 0; k < m; ++k) {
    const Vec2 x1 = draw(), x2 = draw();
    const Vec2 d = x1 - x2;
    const double dn = d.norm();
    if (dn == 0.0) continue;
    const Vec2 da = law.a_hom(x1) - law.a_hom(x2);
    const double w = 1.0 + x1.squaredNorm() + x2.squaredNorm();
    const double mono = da.dot(d) / (std::pow(w, 0.5 * (p - 2.0)) * dn * dn);
    const double cont = da.norm() / (std::pow(w, 0.5 * (p - 2.0 - r.theta)) * std::pow(dn, r.theta));
    r.min_monotonicity = std::min(r.min_monotonicity, mono);
    r.max_monotonicity = std::max(r.max_monotonicity, mono);
    r.max_continuity = std::max(r.max_continuity, cont);
  }
  r.violation = !(r.min_monotonicity > 0.0);
  return r;
}

Mat2 linear_case_b_hom(const OperatorSpec& spec, const CellGrid& grid, const SolverOptions& opts)
{
  if (spec.family != Family::Linear) throw InvalidArgument("b^hom formula requires the linear family");
  ScalarCellSolver solver(spec, grid, opts);
  std::array<QuadField, 2> p;
  for (int k = 0; k < 2; ++k) p[static_cast<std::size_t>(k)] = corrector_flux(solver.solve(unit(k)));
  const auto& ph = solver.phases();
  Mat2 out = Mat2::Zero();
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k) {
      double s = 0.0;
      for (int e = 0; e < grid.element_count(); ++e)
        for (int q = 0; q < 4; ++q) {
          const Mat2& b = spec.phases[static_cast<std::size_t>(ph[static_cast<std::size_t>(4 * e + q)])].matrix;
          s += grid.qp_weight(q) * (b * p[static_cast<std::size_t>(k)].vector(e, q)).dot(p[static_cast<std::size_t>(j)].vector(e, q));
        }
      out(j, k) = s;
    }
  return out;
}

}  // namespace hk

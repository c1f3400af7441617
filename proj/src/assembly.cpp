#include "hk/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace hk {

void SpecQuadratureLaw::evaluate(std::span<const Vec2> grads, std::span<Vec2> flux, std::span<Mat2> tangent)
{
  for (std::size_t k = 0; k < grads.size(); ++k) {
    const int ph = phases_[k];
    flux[k] = spec_.flux(ph, grads[k]);
    if (!tangent.empty()) tangent[k] = spec_.tangent(ph, grads[k]);
  }
}

void SpecQuadratureLaw::secant(std::span<const Vec2> grads, std::span<Mat2> s)
{
  for (std::size_t k = 0; k < grads.size(); ++k) s[k] = spec_.secant(phases_[k], grads[k]);
}

void QuadratureLaw::initial_operator(std::span<Mat2> out)
{
  const std::size_t n = out.size();
  std::vector<Vec2> g(n), f1(n), f2(n);
  std::fill(g.begin(), g.end(), unit(0));
  evaluate(g, f1, {});
  std::fill(g.begin(), g.end(), unit(1));
  evaluate(g, f2, {});
  for (std::size_t k = 0; k < n; ++k) {
    out[k].col(0) = f1[k];
    out[k].col(1) = f2[k];
  }
}

void QuadratureLaw::tangent(std::span<const Vec2> grads, std::span<Mat2> t)
{
  std::vector<Vec2> f(grads.size());
  evaluate(grads, f, t);
}

void SpecQuadratureLaw::tangent(std::span<const Vec2> grads, std::span<Mat2> t)
{
  for (std::size_t k = 0; k < grads.size(); ++k) t[k] = spec_.tangent(phases_[k], grads[k]);
}

bool SpecQuadratureLaw::symmetric() const
{
  if (spec_.family != Family::Linear) return true;
  for (const auto& ph : spec_.phases)
    if ((ph.matrix - ph.matrix.transpose()).norm() != 0.0) return false;
  return true;
}

void gradients_at_qp(const StructuredGrid& grid, std::span<const double> u, const Vec2& background,
                     std::span<Vec2> out)
{
  const auto& rule = QuadratureRule::gauss2x2();
  const double inv_h = 1.0 / grid.h();
  for (int e = 0; e < grid.element_count(); ++e) {
    const auto en = grid.element_nodes(e);
    for (int q = 0; q < 4; ++q) {
      Vec2 g = Vec2::Zero();
      for (int a = 0; a < 4; ++a) g += u[static_cast<std::size_t>(en[static_cast<std::size_t>(a)])] * rule.dshape[q][a];
      out[static_cast<std::size_t>(e * 4 + q)] = background + inv_h * g;
    }
  }
}

void scalar_residual(const StructuredGrid& grid, std::span<const Vec2> flux, std::span<const double> load,
                     std::span<double> r)
{
  const auto& rule = QuadratureRule::gauss2x2();
  std::fill(r.begin(), r.end(), 0.0);
  // w_q / h with w_q = h^2/4
  const double s = 0.25 * grid.h();
  for (int e = 0; e < grid.element_count(); ++e) {
    const auto en = grid.element_nodes(e);
    for (int q = 0; q < 4; ++q) {
      const Vec2& f = flux[static_cast<std::size_t>(e * 4 + q)];
      for (int a = 0; a < 4; ++a) r[static_cast<std::size_t>(en[static_cast<std::size_t>(a)])] += s * f.dot(rule.dshape[q][a]);
    }
  }
  if (!load.empty())
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= load[i];
}

void assemble_scalar_operator(const StructuredGrid& grid, std::span<const Mat2> coeff, StencilMatrix& k)
{
  const auto& rule = QuadratureRule::gauss2x2();
  k.set_zero();
  double local[16];
  for (int e = 0; e < grid.element_count(); ++e) {
    std::fill(local, local + 16, 0.0);
    for (int q = 0; q < 4; ++q) {
      const Mat2& t = coeff[static_cast<std::size_t>(e * 4 + q)];
      for (int b = 0; b < 4; ++b) {
        const Vec2 tb = t * rule.dshape[q][b];
        // w_q / h^2 = 1/4 in two dimensions
        for (int a = 0; a < 4; ++a) local[a * 4 + b] += 0.25 * rule.dshape[q][a].dot(tb);
      }
    }
    k.add_element(e, local);
  }
}

std::vector<double> scalar_load(const NodalField& f)
{
  const auto& g = f.grid;
  const auto& rule = QuadratureRule::gauss2x2();
  std::vector<double> out(static_cast<std::size_t>(g.node_count()), 0.0);
  for (int e = 0; e < g.element_count(); ++e) {
    const auto en = g.element_nodes(e);
    for (int q = 0; q < 4; ++q) {
      double fq = 0.0;
      for (int a = 0; a < 4; ++a) fq += rule.shape[q][a] * f(en[static_cast<std::size_t>(a)]);
      const double w = g.qp_weight(q);
      for (int a = 0; a < 4; ++a) out[static_cast<std::size_t>(en[static_cast<std::size_t>(a)])] += w * fq * rule.shape[q][a];
    }
  }
  return out;
}

double free_residual_norm(const StructuredGrid& grid, std::span<const double> r, int components)
{
  if (grid.periodic()) return max_abs(r);
  double m = 0.0;
  const int nps = grid.nodes_per_side();
  for (int node = 0; node < grid.node_count(); ++node) {
    const int i = node % nps, j = node / nps;
    if (i == 0 || j == 0 || i == nps - 1 || j == nps - 1) continue;
    for (int c = 0; c < components; ++c) m = std::max(m, std::abs(r[static_cast<std::size_t>(node * components + c)]));
  }
  return m;
}

namespace {

std::vector<char> dirichlet_mask(const StructuredGrid& grid)
{
  std::vector<char> mask(static_cast<std::size_t>(grid.node_count()), 0);
  if (grid.periodic()) return mask;
  const int nps = grid.nodes_per_side();
  for (int node = 0; node < grid.node_count(); ++node) {
    const int i = node % nps, j = node / nps;
    mask[static_cast<std::size_t>(node)] = (i == 0 || j == 0 || i == nps - 1 || j == nps - 1) ? 1 : 0;
  }
  return mask;
}

struct Workspace {
  const StructuredGrid& grid;
  QuadratureLaw& law;
  Vec2 background;
  std::span<const double> load;
  std::vector<char> mask;
  std::vector<Vec2> grads, flux;
  std::vector<Mat2> tang;
  std::vector<double> r;
  std::optional<StencilMatrix> own;
  StencilMatrix& k;

  Workspace(const StructuredGrid& g, QuadratureLaw& l, const Vec2& bg, std::span<const double> ld,
            StencilMatrix* pattern)
      : grid(g), law(l), background(bg), load(ld), mask(dirichlet_mask(g)),
        grads(static_cast<std::size_t>(g.qp_count())), flux(grads.size()), tang(grads.size()),
        r(static_cast<std::size_t>(g.node_count())),
        own(pattern ? std::nullopt : std::optional<StencilMatrix>(StencilMatrix(g, 1))),
        k(pattern ? *pattern : *own)
  {
  }

  // residual at u; returns free max-norm. Fills grads/flux.
  double residual(std::span<const double> u, bool with_tangent)
  {
    gradients_at_qp(grid, u, background, grads);
    law.evaluate(grads, flux, with_tangent ? std::span<Mat2>(tang) : std::span<Mat2>());
    scalar_residual(grid, flux, load, r);
    for (std::size_t i = 0; i < r.size(); ++i)
      if (mask[i]) r[i] = 0.0;
    return max_abs(r);
  }

  double flux_floor() const
  {
    double m = 0.0;
    for (const auto& f : flux) m = std::max(m, f.norm());
    return 1e-13 * m * grid.h();
  }

  // K x = rhs with the boundary/mean treatment of the grid.
  void linear_solve(std::span<const double> rhs, std::span<double> x, const NewtonOptions& opts)
  {
    if (grid.periodic()) {
      PcgOptions lo = opts.linear;
      lo.mean_components = 1;
      std::fill(x.begin(), x.end(), 0.0);
      pcg(k, rhs, x, lo);
      return;
    }
    k.constrain(mask);
    std::vector<double> b(rhs.begin(), rhs.end());
    for (std::size_t i = 0; i < b.size(); ++i)
      if (mask[i]) b[i] = 0.0;
    if (opts.direct) {
      const auto sol = solve_direct(k, b, law.symmetric());
      std::copy(sol.begin(), sol.end(), x.begin());
    } else {
      std::fill(x.begin(), x.end(), 0.0);
      pcg(k, b, x, opts.linear);
    }
  }
};

}  // namespace

NewtonStats solve_monotone(const StructuredGrid& grid, QuadratureLaw& law, const Vec2& background,
                           std::span<const double> load, std::span<double> u, const NewtonOptions& opts,
                           StencilMatrix* pattern)
{
  Workspace ws(grid, law, background, load, pattern);
  const std::size_t n = u.size();
  if (grid.periodic()) project_mean(u, 1);
  for (std::size_t i = 0; i < n; ++i)
    if (ws.mask[i]) u[i] = 0.0;

  if (!grid.periodic() && opts.initial_linear_solve && max_abs(u) == 0.0 && max_abs(load) > 0.0) {
    law.initial_operator(ws.tang);
    assemble_scalar_operator(grid, ws.tang, ws.k);
    ws.linear_solve(load, u, opts);
  }

  double scale = opts.residual_scale;
  if (!(scale > 0.0)) {
    std::vector<double> zero(n, 0.0);
    scale = ws.residual(zero, false);
  }

  NewtonStats st;
  double res = ws.residual(u, false);
  double target = std::max(opts.tol * std::min(1.0, scale), ws.flux_floor());
  st.history.push_back(res);
  st.residual = res;
  if (res <= target) return st;

  std::vector<double> du(n), trial(n), rhs(n);
  bool newton_ok = true;
  while (st.newton_iterations < opts.max_newton) {
    ++st.newton_iterations;
    law.tangent(ws.grads, ws.tang);
    assemble_scalar_operator(grid, ws.tang, ws.k);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = -ws.r[i];
    try {
      ws.linear_solve(rhs, du, opts);
    } catch (const Error&) {
      newton_ok = false;
      break;
    }
    // Armijo backtracking on the Euclidean residual norm.
    const double r0 = norm2(ws.r);
    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = u[i] + t * du[i];
      ws.residual(trial, false);
      if (norm2(ws.r) <= (1.0 - 1e-4 * t) * r0) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      ws.residual(u, false);
      newton_ok = false;
      break;
    }
    std::copy(trial.begin(), trial.end(), u.begin());
    if (grid.periodic()) project_mean(u, 1);
    res = ws.residual(u, false);
    target = std::max(opts.tol * std::min(1.0, scale), ws.flux_floor());
    st.history.push_back(res);
    st.residual = res;
    if (res <= target) return st;
  }
  (void)newton_ok;

  if (!law.has_secant() || opts.max_picard <= 0)
    throw NonConvergence("Newton iteration did not converge", st.newton_iterations, res);

  // Kacanov: freeze S(grad) and solve the linear problem for the new iterate.
  st.used_picard = true;
  std::vector<Mat2> sec(ws.grads.size());
  std::vector<Vec2> sb(ws.grads.size());
  while (st.picard_iterations < opts.max_picard) {
    ++st.picard_iterations;
    law.secant(ws.grads, sec);
    assemble_scalar_operator(grid, sec, ws.k);
    // rhs = load - int S background . grad v
    for (std::size_t q = 0; q < sb.size(); ++q) sb[q] = sec[q] * background;
    scalar_residual(grid, sb, load, rhs);
    for (double& v : rhs) v = -v;
    std::copy(u.begin(), u.end(), trial.begin());
    ws.linear_solve(rhs, trial, opts);
    std::copy(trial.begin(), trial.end(), u.begin());
    if (grid.periodic()) project_mean(u, 1);
    res = ws.residual(u, false);
    target = std::max(opts.tol * std::min(1.0, scale), ws.flux_floor());
    st.history.push_back(res);
    st.residual = res;
    if (res <= target) return st;
  }
  throw NonConvergence("Newton and Kacanov iterations did not converge",
                       st.newton_iterations + st.picard_iterations, res);
}

// --- elasticity ---------------------------------------------------------------

Mat2 basis_strain(int q, int a, int c, double h)
{
  const auto& rule = QuadratureRule::gauss2x2();
  const Vec2 g = rule.dshape[q][a] / h;
  Mat2 m = Mat2::Zero();
  m.row(c) = g.transpose();  // grad(N_a e_c)_{ij} = delta_ic d_j N_a
  return sym(m);
}

void assemble_elasticity(const StructuredGrid& grid, std::span<const int> phases,
                         const std::array<Tensor4, 2>& tensors, StencilMatrix& k)
{
  const double h = grid.h();
  std::array<std::array<Eigen::Vector4d, 8>, 4> strain;
  for (int q = 0; q < 4; ++q)
    for (int a = 0; a < 4; ++a)
      for (int c = 0; c < 2; ++c) strain[q][a * 2 + c] = vec(basis_strain(q, a, c, h));

  // element matrices only depend on the phase pattern of the element
  k.set_zero();
  double local[64];
  for (int e = 0; e < grid.element_count(); ++e) {
    std::fill(local, local + 64, 0.0);
    for (int q = 0; q < 4; ++q) {
      const Tensor4& t = tensors[static_cast<std::size_t>(phases[static_cast<std::size_t>(e * 4 + q)])];
      const double w = grid.qp_weight(q);
      for (int j = 0; j < 8; ++j) {
        const Eigen::Vector4d ts = t * strain[q][j];
        for (int i = 0; i < 8; ++i) local[i * 8 + j] += w * strain[q][i].dot(ts);
      }
    }
    k.add_element(e, local);
  }
}

std::vector<double> stress_load(const QuadField& stress)
{
  const auto& g = stress.grid;
  const double h = g.h();
  std::vector<double> out(static_cast<std::size_t>(g.node_count() * 2), 0.0);
  for (int e = 0; e < g.element_count(); ++e) {
    const auto en = g.element_nodes(e);
    for (int q = 0; q < 4; ++q) {
      const Mat2 s = stress.matrix(e, q);
      const double w = g.qp_weight(q);
      for (int a = 0; a < 4; ++a)
        for (int c = 0; c < 2; ++c)
          out[static_cast<std::size_t>(en[static_cast<std::size_t>(a)] * 2 + c)] += w * frobenius(s, basis_strain(q, a, c, h));
    }
  }
  return out;
}

std::vector<double> body_load(const NodalField& gf)
{
  const auto& g = gf.grid;
  const auto& rule = QuadratureRule::gauss2x2();
  std::vector<double> out(static_cast<std::size_t>(g.node_count() * 2), 0.0);
  for (int e = 0; e < g.element_count(); ++e) {
    const auto en = g.element_nodes(e);
    for (int q = 0; q < 4; ++q) {
      Vec2 v = Vec2::Zero();
      for (int a = 0; a < 4; ++a)
        for (int c = 0; c < 2; ++c) v(c) += rule.shape[q][a] * gf(en[static_cast<std::size_t>(a)], c);
      const double w = g.qp_weight(q);
      for (int a = 0; a < 4; ++a)
        for (int c = 0; c < 2; ++c)
          out[static_cast<std::size_t>(en[static_cast<std::size_t>(a)] * 2 + c)] += w * v(c) * rule.shape[q][a];
    }
  }
  return out;
}

}  // namespace hk

#include "hk/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace hk {

std::array<double, 4> q1_shape(const Vec2& r)
{
  const double s = r(0), t = r(1);
  return {(1 - s) * (1 - t), s * (1 - t), s * t, (1 - s) * t};
}

std::array<Vec2, 4> q1_dshape(const Vec2& r)
{
  const double s = r(0), t = r(1);
  return {Vec2(-(1 - t), -(1 - s)), Vec2(1 - t, -s), Vec2(t, s), Vec2(-t, 1 - s)};
}

const QuadratureRule& QuadratureRule::gauss2x2()
{
  static const QuadratureRule rule = [] {
    QuadratureRule r{};
    const double g = 0.5 / std::sqrt(3.0);
    const double lo = 0.5 - g, hi = 0.5 + g;
    r.points = {Vec2(lo, lo), Vec2(hi, lo), Vec2(hi, hi), Vec2(lo, hi)};
    r.weights = {0.25, 0.25, 0.25, 0.25};
    for (int q = 0; q < 4; ++q) {
      r.shape[q] = q1_shape(r.points[q]);
      r.dshape[q] = q1_dshape(r.points[q]);
    }
    return r;
  }();
  return rule;
}

StructuredGrid::StructuredGrid(int cells, double origin, double length, bool periodic)
    : cells_(cells), origin_(origin), length_(length), h_(length / cells), periodic_(periodic)
{
  if (cells < 1) throw InvalidArgument("grid needs at least one cell");
}

int StructuredGrid::node(int i, int j) const
{
  if (periodic_) {
    i %= cells_;
    j %= cells_;
    if (i < 0) i += cells_;
    if (j < 0) j += cells_;
    return i + cells_ * j;
  }
  return i + (cells_ + 1) * j;
}

std::array<int, 2> StructuredGrid::node_ij(int node) const
{
  const int m = nodes_per_side();
  return {node % m, node / m};
}

Vec2 StructuredGrid::node_point(int node) const
{
  const auto [i, j] = node_ij(node);
  return {origin_ + i * h_, origin_ + j * h_};
}

std::array<int, 4> StructuredGrid::element_nodes(int e) const
{
  const int i = e % cells_, j = e / cells_;
  return {node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)};
}

Vec2 StructuredGrid::element_origin(int e) const
{
  return {origin_ + (e % cells_) * h_, origin_ + (e / cells_) * h_};
}

Vec2 StructuredGrid::qp_point(int e, int q) const
{
  return element_origin(e) + h_ * QuadratureRule::gauss2x2().points[q];
}

double StructuredGrid::qp_weight(int q) const { return QuadratureRule::gauss2x2().weights[q] * h_ * h_; }

int StructuredGrid::locate(const Vec2& x, Vec2& ref) const
{
  std::array<int, 2> idx{};
  for (int d = 0; d < 2; ++d) {
    double s = (x(d) - origin_) / h_;
    if (periodic_) s -= cells_ * std::floor(s / cells_);
    int k = static_cast<int>(std::floor(s));
    k = std::clamp(k, 0, cells_ - 1);
    idx[d] = k;
    ref(d) = s - k;
  }
  return idx[0] + cells_ * idx[1];
}

CellGrid::CellGrid(int n) : StructuredGrid(n, -0.5, 1.0, true) {}

CellGrid make_cell_grid(int n)
{
  if (n < 4 || (n & (n - 1)) != 0) throw InvalidArgument("unsupported n: " + std::to_string(n));
  return CellGrid(n);
}

DomainGrid::DomainGrid(int N) : StructuredGrid(N, 0.0, 1.0, false) {}

bool DomainGrid::is_boundary(int node) const
{
  const auto [i, j] = node_ij(node);
  return i == 0 || j == 0 || i == N() || j == N();
}

std::vector<char> DomainGrid::boundary_mask() const
{
  std::vector<char> mask(static_cast<std::size_t>(node_count()));
  for (int k = 0; k < node_count(); ++k) mask[static_cast<std::size_t>(k)] = is_boundary(k) ? 1 : 0;
  return mask;
}

Vec2 wrap_to_cell(const Vec2& y)
{
  return {y(0) - std::floor(y(0) + 0.5), y(1) - std::floor(y(1) + 0.5)};
}

QuadField gradient(const NodalField& f, const QuadratureRule& rule)
{
  if (f.components != 1) throw InvalidArgument("gradient expects a scalar field");
  QuadField out(f.grid, 2);
  const double inv_h = 1.0 / f.grid.h();
  for (int e = 0; e < f.grid.element_count(); ++e) {
    const auto nodes = f.grid.element_nodes(e);
    for (int q = 0; q < 4; ++q) {
      Vec2 g = Vec2::Zero();
      for (int a = 0; a < 4; ++a) g += f(nodes[a]) * rule.dshape[q][a];
      out.set_vector(e, q, g * inv_h);
    }
  }
  return out;
}

QuadField displacement_gradient(const NodalField& u, const QuadratureRule& rule)
{
  if (u.components != 2) throw InvalidArgument("displacement gradient expects a vector field");
  QuadField out(u.grid, 4);
  const double inv_h = 1.0 / u.grid.h();
  for (int e = 0; e < u.grid.element_count(); ++e) {
    const auto nodes = u.grid.element_nodes(e);
    for (int q = 0; q < 4; ++q) {
      Mat2 g = Mat2::Zero();
      for (int a = 0; a < 4; ++a) {
        const Vec2 dn = rule.dshape[q][a] * inv_h;
        g.row(0) += u(nodes[a], 0) * dn.transpose();
        g.row(1) += u(nodes[a], 1) * dn.transpose();
      }
      out.set_matrix(e, q, g);
    }
  }
  return out;
}

QuadField sym_gradient(const NodalField& u, const QuadratureRule& rule)
{
  QuadField g = displacement_gradient(u, rule);
  for (int e = 0; e < g.grid.element_count(); ++e)
    for (int q = 0; q < 4; ++q) g.set_matrix(e, q, sym(g.matrix(e, q)));
  return g;
}

QuadField to_quadrature(const NodalField& f, const QuadratureRule& rule)
{
  QuadField out(f.grid, f.components);
  for (int e = 0; e < f.grid.element_count(); ++e) {
    const auto nodes = f.grid.element_nodes(e);
    for (int q = 0; q < 4; ++q)
      for (int c = 0; c < f.components; ++c) {
        double v = 0.0;
        for (int a = 0; a < 4; ++a) v += rule.shape[q][a] * f(nodes[a], c);
        out(e, q, c) = v;
      }
  }
  return out;
}

std::vector<double> cell_average(const QuadField& f)
{
  std::vector<double> sum(static_cast<std::size_t>(f.components), 0.0);
  double area = 0.0;
  for (int e = 0; e < f.grid.element_count(); ++e)
    for (int q = 0; q < 4; ++q) {
      const double w = f.grid.qp_weight(q);
      area += w;
      for (int c = 0; c < f.components; ++c) sum[static_cast<std::size_t>(c)] += w * f(e, q, c);
    }
  for (double& s : sum) s /= area;
  return sum;
}

std::vector<double> cell_average(const NodalField& f) { return cell_average(to_quadrature(f)); }

double value_at(const NodalField& f, const Vec2& x, int c)
{
  Vec2 ref;
  const int e = f.grid.locate(x, ref);
  const auto nodes = f.grid.element_nodes(e);
  const auto n = q1_shape(ref);
  double v = 0.0;
  for (int a = 0; a < 4; ++a) v += n[a] * f(nodes[a], c);
  return v;
}

Vec2 gradient_at(const NodalField& f, const Vec2& x, int c)
{
  Vec2 ref;
  const int e = f.grid.locate(x, ref);
  const auto nodes = f.grid.element_nodes(e);
  const auto dn = q1_dshape(ref);
  Vec2 g = Vec2::Zero();
  for (int a = 0; a < 4; ++a) g += f(nodes[a], c) * dn[a];
  return g / f.grid.h();
}

int inverse_scale(double eps)
{
  if (!(eps > 0.0) || eps > 1.0) throw InvalidArgument("epsilon must lie in (0, 1]");
  const double inv = 1.0 / eps;
  const long k = std::lround(inv);
  if (std::abs(inv - static_cast<double>(k)) > 1e-9 * inv)
    throw InvalidArgument("1/epsilon must be an integer");
  return static_cast<int>(k);
}

NodalField sample_oscillatory(const NodalField& g, double eps, const DomainGrid& target)
{
  if (!g.grid.periodic()) throw InvalidArgument("sample_oscillatory expects a cell-grid field");
  const int k = inverse_scale(eps);
  const int n = g.grid.cells();
  if (target.N() != n * k)
    throw InvalidArgument("incommensurate epsilon and domain resolution (need N = n/eps)");
  NodalField out(target, g.components);
  const int half = n / 2;
  for (int node = 0; node < target.node_count(); ++node) {
    const auto [I, J] = target.node_ij(node);
    // x/eps = I/n, so {x/eps}_Y lands on cell node (I + n/2) mod n.
    for (int c = 0; c < g.components; ++c) out(node, c) = g.at(I + half, J + half, c);
  }
  return out;
}

void write_field(std::ostream& out, const std::string& name, const NodalField& f)
{
  out << "FIELD " << name << " grid=" << f.grid.cells() << " components=" << f.components << '\n';
  char buf[64];
  for (int node = 0; node < f.grid.node_count(); ++node) {
    const auto [i, j] = f.grid.node_ij(node);
    out << i << ' ' << j;
    for (int c = 0; c < f.components; ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", f(node, c));
      out << ' ' << buf;
    }
    out << '\n';
  }
}

NodalField read_field(std::istream& in, bool periodic, std::string* name)
{
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("empty field dump");
  std::istringstream head(line);
  std::string tag, nm, grid_tok, comp_tok;
  head >> tag >> nm >> grid_tok >> comp_tok;
  if (tag != "FIELD" || grid_tok.rfind("grid=", 0) != 0 || comp_tok.rfind("components=", 0) != 0)
    throw InvalidArgument("malformed field header: " + line);
  const int cells = std::stoi(grid_tok.substr(5));
  const int comps = std::stoi(comp_tok.substr(11));
  if (name) *name = nm;
  const StructuredGrid grid = periodic ? StructuredGrid(CellGrid(cells)) : StructuredGrid(DomainGrid(cells));
  NodalField f(grid, comps);
  for (int k = 0; k < grid.node_count(); ++k) {
    int i = 0, j = 0;
    if (!(in >> i >> j)) throw InvalidArgument("truncated field dump");
    for (int c = 0; c < comps; ++c) in >> f(grid.node(i, j), c);
  }
  return f;
}

}  // namespace hk

#pragma once

// Structured Q1 grids on the periodic unit cell and on the macroscopic
// domain, nodal and quadrature-point fields, and the discrete differential
// operators acting on them.

#include "hk/types.hpp"

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace hk {

/// 2x2 Gauss rule on the reference square [0,1]^2 together with the Q1 shape
/// data evaluated at its points. Local node order is counter-clockwise from
/// the lower-left corner.
struct QuadratureRule {
  std::array<Vec2, 4> points;
  std::array<double, 4> weights;
  std::array<std::array<double, 4>, 4> shape;   // [q][a]
  std::array<std::array<Vec2, 4>, 4> dshape;    // reference derivatives [q][a]

  static const QuadratureRule& gauss2x2();
  int size() const { return 4; }
};

std::array<double, 4> q1_shape(const Vec2& ref);
std::array<Vec2, 4> q1_dshape(const Vec2& ref);

/// Uniform square grid of `cells` x `cells` bilinear elements covering
/// [origin, origin + length]^2. A periodic grid identifies node i with i+cells.
class StructuredGrid {
 public:
  StructuredGrid() = default;
  StructuredGrid(int cells, double origin, double length, bool periodic);

  int cells() const { return cells_; }
  double h() const { return h_; }
  double origin() const { return origin_; }
  double length() const { return length_; }
  bool periodic() const { return periodic_; }

  int nodes_per_side() const { return periodic_ ? cells_ : cells_ + 1; }
  int node_count() const { return nodes_per_side() * nodes_per_side(); }
  int element_count() const { return cells_ * cells_; }
  int qp_count() const { return 4 * element_count(); }

  /// Node index for lattice coordinates; periodic grids wrap i and j.
  int node(int i, int j) const;
  std::array<int, 2> node_ij(int node) const;
  Vec2 node_point(int node) const;

  std::array<int, 4> element_nodes(int e) const;
  Vec2 element_origin(int e) const;
  Vec2 qp_point(int e, int q) const;
  double qp_weight(int q) const;

  /// Element containing `x` (wrapped for periodic grids, clamped otherwise)
  /// and the reference coordinates of `x` inside it.
  int locate(const Vec2& x, Vec2& ref) const;

  bool operator==(const StructuredGrid& o) const
  {
    return cells_ == o.cells_ && origin_ == o.origin_ && length_ == o.length_ &&
           periodic_ == o.periodic_;
  }

 private:
  int cells_ = 0;
  double origin_ = 0.0;
  double length_ = 1.0;
  double h_ = 1.0;
  bool periodic_ = false;
};

/// Periodic mesh of the unit cell Y = [-1/2, 1/2)^2.
class CellGrid : public StructuredGrid {
 public:
  CellGrid() = default;
  explicit CellGrid(int n);
  int n() const { return cells(); }
};

/// Throws InvalidArgument("unsupported n") unless n >= 4 and n is a power of 2.
CellGrid make_cell_grid(int n);

/// Mesh of the unit square (0,1)^2 with homogeneous Dirichlet boundary.
/// N counts elements per side, so there are (N+1)^2 nodes.
class DomainGrid : public StructuredGrid {
 public:
  DomainGrid() = default;
  explicit DomainGrid(int N);
  int N() const { return cells(); }
  bool is_boundary(int node) const;
  std::vector<char> boundary_mask() const;
  int interior_node_count() const { return (N() - 1) * (N() - 1); }
};

/// Wraps a point into Y = [-1/2, 1/2)^2.
Vec2 wrap_to_cell(const Vec2& y);

/// Values at grid nodes; `components` values per node, node-major.
struct NodalField {
  StructuredGrid grid;
  int components = 1;
  std::vector<double> values;

  NodalField() = default;
  NodalField(const StructuredGrid& g, int comps, double init = 0.0)
      : grid(g), components(comps), values(static_cast<std::size_t>(g.node_count() * comps), init)
  {
  }

  double& operator()(int node, int c = 0) { return values[static_cast<std::size_t>(node * components + c)]; }
  double operator()(int node, int c = 0) const
  {
    return values[static_cast<std::size_t>(node * components + c)];
  }
  /// Lattice access; periodic grids wrap.
  double at(int i, int j, int c = 0) const { return (*this)(grid.node(i, j), c); }
};

/// Values at element quadrature points; index ((e*4 + q) * components + c).
/// Tensor fields use 4 components in row-major order.
struct QuadField {
  StructuredGrid grid;
  int components = 1;
  std::vector<double> values;

  QuadField() = default;
  QuadField(const StructuredGrid& g, int comps, double init = 0.0)
      : grid(g), components(comps), values(static_cast<std::size_t>(g.qp_count() * comps), init)
  {
  }

  double& operator()(int e, int q, int c = 0)
  {
    return values[static_cast<std::size_t>((e * 4 + q) * components + c)];
  }
  double operator()(int e, int q, int c = 0) const
  {
    return values[static_cast<std::size_t>((e * 4 + q) * components + c)];
  }
  Vec2 vector(int e, int q) const { return {(*this)(e, q, 0), (*this)(e, q, 1)}; }
  Mat2 matrix(int e, int q) const
  {
    Mat2 m;
    m << (*this)(e, q, 0), (*this)(e, q, 1), (*this)(e, q, 2), (*this)(e, q, 3);
    return m;
  }
  void set_vector(int e, int q, const Vec2& v)
  {
    (*this)(e, q, 0) = v(0);
    (*this)(e, q, 1) = v(1);
  }
  void set_matrix(int e, int q, const Mat2& m)
  {
    (*this)(e, q, 0) = m(0, 0);
    (*this)(e, q, 1) = m(0, 1);
    (*this)(e, q, 2) = m(1, 0);
    (*this)(e, q, 3) = m(1, 1);
  }
};

/// Gradient of a bilinear scalar field at every quadrature point.
QuadField gradient(const NodalField& f, const QuadratureRule& rule = QuadratureRule::gauss2x2());

/// Full displacement gradient (grad u)_{ij} = d_j u_i at quadrature points.
QuadField displacement_gradient(const NodalField& u,
                                const QuadratureRule& rule = QuadratureRule::gauss2x2());

/// Linearized strain (grad u + grad u^T)/2 at quadrature points.
QuadField sym_gradient(const NodalField& u, const QuadratureRule& rule = QuadratureRule::gauss2x2());

/// Bilinear interpolation of a nodal field to quadrature points.
QuadField to_quadrature(const NodalField& f, const QuadratureRule& rule = QuadratureRule::gauss2x2());

/// Componentwise quadrature mean over the grid (|Y| = 1 for the cell grid).
std::vector<double> cell_average(const QuadField& f);
std::vector<double> cell_average(const NodalField& f);

/// Point evaluation of the bilinear interpolant and of its gradient.
double value_at(const NodalField& f, const Vec2& x, int c = 0);
Vec2 gradient_at(const NodalField& f, const Vec2& x, int c = 0);

/// Nodal tiling g({x/eps}_Y) of a periodic cell field onto the domain.
/// Requires 1/eps integral and N = n/eps so that cell nodes land on domain
/// nodes; anything else throws InvalidArgument (aliasing).
NodalField sample_oscillatory(const NodalField& g, double eps, const DomainGrid& target);

/// Returns 1/eps, throwing InvalidArgument when it is not an integer.
int inverse_scale(double eps);

/// FIELD <name> grid=<n> components=<c>, then `i j v_1 ... v_c` per node.
void write_field(std::ostream& out, const std::string& name, const NodalField& f);
NodalField read_field(std::istream& in, bool periodic, std::string* name = nullptr);

}  // namespace hk

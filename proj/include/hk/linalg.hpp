#pragma once

// Sparse storage with the fixed 9-point (per component) stencil of a
// structured Q1 grid, Jacobi-preconditioned CG, and a sparse Cholesky path
// for Dirichlet problems.

#include "hk/grid.hpp"

#include <Eigen/SparseCore>

#include <functional>
#include <span>
#include <vector>

namespace hk {

class StencilMatrix {
 public:
  StencilMatrix() = default;
  StencilMatrix(const StructuredGrid& grid, int components);

  int rows() const { return rows_; }
  int components() const { return comps_; }
  const StructuredGrid& grid() const { return grid_; }

  void set_zero();
  /// Adds a dense (4c x 4c) row-major element matrix; local dof (a, c) maps
  /// to row a*c_total + c.
  void add_element(int e, const double* local);
  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> diagonal() const;
  /// Replaces constrained rows and columns by the identity (homogeneous
  /// Dirichlet data); mask is per node.
  void constrain(const std::vector<char>& node_mask);
  Eigen::SparseMatrix<double> to_eigen() const;

 private:
  StructuredGrid grid_;
  int rows_ = 0;
  int comps_ = 1;
  std::vector<int> row_ptr_;
  std::vector<int> cols_;
  std::vector<double> vals_;
  std::vector<int> elem_pos_;
  std::vector<int> diag_pos_;

  int find(int row, int col) const;
};

struct PcgOptions {
  double rel_tol = 1e-12;
  double abs_tol = 0.0;
  int max_iter = 50000;
  /// Periodic systems: project every component onto mean zero (the constant
  /// null space). Zero disables the projection.
  int mean_components = 0;
};

struct SolveStats {
  int iterations = 0;
  double residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients. `x` holds the initial guess.
/// Throws NonConvergence after max_iter.
SolveStats pcg(const StencilMatrix& a, std::span<const double> b, std::span<double> x, const PcgOptions& opts);

/// Sparse LDL^T solve (LU when `symmetric` is false); throws SingularSystem
/// if the factorization fails.
std::vector<double> solve_direct(const StencilMatrix& a, std::span<const double> b, bool symmetric = true);

/// Removes the per-component mean of an interleaved vector.
void project_mean(std::span<double> x, int components);

double max_abs(std::span<const double> x);
double norm2(std::span<const double> x);

/// Thread count from HK_THREADS, defaulting to 1.
int default_threads();

/// Runs fn(begin, end) over `threads` contiguous chunks of [0, count).
/// Chunking is static, so writes indexed by position are deterministic.
void parallel_for(int count, int threads, const std::function<void(int, int)>& fn);

}  // namespace hk

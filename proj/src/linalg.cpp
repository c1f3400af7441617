#include "hk/linalg.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>

namespace hk {

StencilMatrix::StencilMatrix(const StructuredGrid& grid, int components)
    : grid_(grid), rows_(grid.node_count() * components), comps_(components)
{
  const int nodes = grid.node_count();
  std::vector<std::vector<int>> nbr(static_cast<std::size_t>(nodes));
  for (int e = 0; e < grid.element_count(); ++e) {
    const auto en = grid.element_nodes(e);
    for (int a : en)
      for (int b : en) nbr[static_cast<std::size_t>(a)].push_back(b);
  }
  row_ptr_.assign(static_cast<std::size_t>(rows_ + 1), 0);
  for (int nd = 0; nd < nodes; ++nd) {
    auto& v = nbr[static_cast<std::size_t>(nd)];
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    for (int c = 0; c < comps_; ++c) {
      const int row = nd * comps_ + c;
      row_ptr_[static_cast<std::size_t>(row + 1)] = static_cast<int>(v.size()) * comps_;
    }
  }
  for (int r = 0; r < rows_; ++r) row_ptr_[static_cast<std::size_t>(r + 1)] += row_ptr_[static_cast<std::size_t>(r)];
  cols_.resize(static_cast<std::size_t>(row_ptr_.back()));
  for (int nd = 0; nd < nodes; ++nd) {
    const auto& v = nbr[static_cast<std::size_t>(nd)];
    for (int c = 0; c < comps_; ++c) {
      int pos = row_ptr_[static_cast<std::size_t>(nd * comps_ + c)];
      for (int m : v)
        for (int d = 0; d < comps_; ++d) cols_[static_cast<std::size_t>(pos++)] = m * comps_ + d;
    }
  }
  vals_.assign(cols_.size(), 0.0);

  const int ld = 4 * comps_;
  elem_pos_.resize(static_cast<std::size_t>(grid.element_count() * ld * ld));
  for (int e = 0; e < grid.element_count(); ++e) {
    const auto en = grid.element_nodes(e);
    for (int a = 0; a < 4; ++a)
      for (int ca = 0; ca < comps_; ++ca)
        for (int b = 0; b < 4; ++b)
          for (int cb = 0; cb < comps_; ++cb) {
            const int li = a * comps_ + ca, lj = b * comps_ + cb;
            elem_pos_[static_cast<std::size_t>((e * ld + li) * ld + lj)] =
                find(en[static_cast<std::size_t>(a)] * comps_ + ca, en[static_cast<std::size_t>(b)] * comps_ + cb);
          }
  }
  diag_pos_.resize(static_cast<std::size_t>(rows_));
  for (int r = 0; r < rows_; ++r) diag_pos_[static_cast<std::size_t>(r)] = find(r, r);
}

int StencilMatrix::find(int row, int col) const
{
  const auto b = cols_.begin() + row_ptr_[static_cast<std::size_t>(row)];
  const auto e = cols_.begin() + row_ptr_[static_cast<std::size_t>(row + 1)];
  const auto it = std::lower_bound(b, e, col);
  if (it == e || *it != col) throw Error("stencil entry outside pattern");
  return static_cast<int>(it - cols_.begin());
}

void StencilMatrix::set_zero() { std::fill(vals_.begin(), vals_.end(), 0.0); }

void StencilMatrix::add_element(int e, const double* local)
{
  const int ld = 4 * comps_;
  const int* pos = elem_pos_.data() + static_cast<std::size_t>(e) * ld * ld;
  for (int k = 0; k < ld * ld; ++k) vals_[static_cast<std::size_t>(pos[k])] += local[k];
}

void StencilMatrix::multiply(std::span<const double> x, std::span<double> y) const
{
  for (int r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (int k = row_ptr_[static_cast<std::size_t>(r)]; k < row_ptr_[static_cast<std::size_t>(r + 1)]; ++k)
      s += vals_[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(cols_[static_cast<std::size_t>(k)])];
    y[static_cast<std::size_t>(r)] = s;
  }
}

std::vector<double> StencilMatrix::diagonal() const
{
  std::vector<double> d(static_cast<std::size_t>(rows_));
  for (int r = 0; r < rows_; ++r) d[static_cast<std::size_t>(r)] = vals_[static_cast<std::size_t>(diag_pos_[static_cast<std::size_t>(r)])];
  return d;
}

void StencilMatrix::constrain(const std::vector<char>& node_mask)
{
  for (int r = 0; r < rows_; ++r) {
    if (!node_mask[static_cast<std::size_t>(r / comps_)]) continue;
    for (int k = row_ptr_[static_cast<std::size_t>(r)]; k < row_ptr_[static_cast<std::size_t>(r + 1)]; ++k) {
      const int c = cols_[static_cast<std::size_t>(k)];
      vals_[static_cast<std::size_t>(k)] = (c == r) ? 1.0 : 0.0;
      if (c != r) vals_[static_cast<std::size_t>(find(c, r))] = 0.0;
    }
  }
}

Eigen::SparseMatrix<double> StencilMatrix::to_eigen() const
{
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(vals_.size());
  for (int r = 0; r < rows_; ++r)
    for (int k = row_ptr_[static_cast<std::size_t>(r)]; k < row_ptr_[static_cast<std::size_t>(r + 1)]; ++k)
      if (vals_[static_cast<std::size_t>(k)] != 0.0)
        trip.emplace_back(r, cols_[static_cast<std::size_t>(k)], vals_[static_cast<std::size_t>(k)]);
  Eigen::SparseMatrix<double> m(rows_, rows_);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

void project_mean(std::span<double> x, int components)
{
  if (components <= 0) return;
  const std::size_t n = x.size() / static_cast<std::size_t>(components);
  for (int c = 0; c < components; ++c) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i * static_cast<std::size_t>(components) + static_cast<std::size_t>(c)];
    s /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) x[i * static_cast<std::size_t>(components) + static_cast<std::size_t>(c)] -= s;
  }
}

double max_abs(std::span<const double> x)
{
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

double norm2(std::span<const double> x)
{
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

namespace {

double dot(std::span<const double> a, std::span<const double> b)
{
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

SolveStats pcg(const StencilMatrix& a, std::span<const double> b_in, std::span<double> x, const PcgOptions& opts)
{
  const std::size_t n = static_cast<std::size_t>(a.rows());
  std::vector<double> b(b_in.begin(), b_in.end());
  project_mean(b, opts.mean_components);
  project_mean(x, opts.mean_components);
  const double bnorm = norm2(b);
  const double target = std::max(opts.rel_tol * bnorm, opts.abs_tol);

  std::vector<double> r(n), z(n), p(n), ap(n);
  a.multiply(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  project_mean(r, opts.mean_components);
  double rnorm = norm2(r);
  SolveStats stats{0, rnorm};
  if (rnorm <= target || bnorm == 0.0) {
    if (bnorm == 0.0) std::fill(x.begin(), x.end(), 0.0);
    stats.residual = bnorm == 0.0 ? 0.0 : rnorm;
    return stats;
  }

  std::vector<double> inv_diag = a.diagonal();
  for (double& d : inv_diag) d = d > 0.0 ? 1.0 / d : 1.0;

  auto precondition = [&] {
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    project_mean(z, opts.mean_components);
  };
  precondition();
  p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= opts.max_iter; ++it) {
    a.multiply(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) {
      if (rnorm <= 1e3 * target) {
        stats = {it, rnorm};
        project_mean(x, opts.mean_components);
        return stats;
      }
      throw SingularSystem("CG encountered a non-positive curvature direction");
    }
    const double alpha = rz / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    project_mean(r, opts.mean_components);
    rnorm = norm2(r);
    if (rnorm <= target) {
      project_mean(x, opts.mean_components);
      return {it, rnorm};
    }
    precondition();
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw NonConvergence("CG did not converge", opts.max_iter, rnorm);
}

std::vector<double> solve_direct(const StencilMatrix& a, std::span<const double> b, bool symmetric)
{
  if (!symmetric) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    Eigen::SparseMatrix<double> m = a.to_eigen();
    m.makeCompressed();
    lu.compute(m);
    if (lu.info() != Eigen::Success) throw SingularSystem("sparse LU factorization failed");
    Eigen::Map<const Eigen::VectorXd> rhs(b.data(), static_cast<Eigen::Index>(b.size()));
    Eigen::VectorXd x = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !x.allFinite()) throw SingularSystem("sparse LU solve failed");
    return {x.data(), x.data() + x.size()};
  }
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(a.to_eigen());
  if (ldlt.info() != Eigen::Success) throw SingularSystem("sparse LDL^T factorization failed");
  Eigen::Map<const Eigen::VectorXd> rhs(b.data(), static_cast<Eigen::Index>(b.size()));
  Eigen::VectorXd x = ldlt.solve(rhs);
  if (ldlt.info() != Eigen::Success || !x.allFinite()) throw SingularSystem("sparse LDL^T solve failed");
  return {x.data(), x.data() + x.size()};
}

int default_threads()
{
  if (const char* env = std::getenv("HK_THREADS")) {
    try {
      const int k = std::stoi(env);
      if (k > 0) return k;
    } catch (...) {
    }
  }
  return 1;
}

void parallel_for(int count, int threads, const std::function<void(int, int)>& fn)
{
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    if (count > 0) fn(0, count);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  const int chunk = (count + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int b = t * chunk, e = std::min(count, b + chunk);
    if (b >= e) continue;
    pool.emplace_back([&fn, &errors, t, b, e] {
      try {
        fn(b, e);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);
}

}  // namespace hk

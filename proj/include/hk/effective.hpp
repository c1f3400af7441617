#pragma once

// Effective coefficients: the nonlinear map a^hom evaluated on demand from
// cell solves, and the constant tensors B^hom and C^hom.

#include "hk/cell_problems.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <shared_mutex>
#include <utility>

namespace hk {

/// a^hom(xi) = <a(y, xi + grad eta_xi)>, with a cache of cell solutions keyed
/// by the exact bits of xi. Lookups may run concurrently; inserts take an
/// exclusive lock.
class EffectiveLaw {
 public:
  EffectiveLaw(const OperatorSpec& spec, const CellGrid& grid, SolverOptions opts = {});

  struct Evaluation {
    Vec2 flux = Vec2::Zero();
    std::shared_ptr<const ScalarCellSolution> cell;
  };

  Vec2 a_hom(const Vec2& xi) const { return evaluate(xi).flux; }
  /// Cached evaluation (solves and inserts on a miss).
  Evaluation evaluate(const Vec2& xi, const NodalField* warm = nullptr) const;
  /// Solve without touching the cache.
  Evaluation evaluate_uncached(const Vec2& xi, const NodalField* warm = nullptr) const;
  /// Central differences with step 1e-6 (1 + |xi|), perturbed solves warm
  /// started from `base`.
  Mat2 jacobian(const Vec2& xi, const NodalField* base = nullptr) const;

  void insert(const Vec2& xi, const Evaluation& ev) const;
  bool cached(const Vec2& xi) const;
  std::size_t cache_size() const;
  void clear_cache() const;

  const OperatorSpec& spec() const { return solver_.spec(); }
  const CellGrid& grid() const { return solver_.grid(); }
  const ScalarCellSolver& solver() const { return solver_; }
  std::string fingerprint() const;

  static double fd_step(const Vec2& xi) { return 1e-6 * (1.0 + xi.norm()); }

 private:
  ScalarCellSolver solver_;
  mutable std::shared_mutex mutex_;
  mutable std::map<std::pair<std::uint64_t, std::uint64_t>, Evaluation> cache_;
};

struct BHomResult {
  Tensor4 B_hom = Tensor4::Zero();  // (flat(i,j), flat(m,n))
  std::array<ElasticCellSolution, 4> upsilon;  // index flat(i,j)
};

BHomResult assemble_B_hom(const ElasticTensorField& b, const CellGrid& grid, const SolverOptions& opts = {});

struct CHomResult {
  /// (flat(k,l), flat(i,j)) = (C^hom_ij)_kl, so apply(C_hom, M) = (C^hom_ij) M_ij.
  Tensor4 C_hom = Tensor4::Zero();
  ChomVariant variant = ChomVariant::CApplied;
  std::array<ElasticCellSolution, 4> chi;
  std::array<QuadField, 4> zeta;
};

/// `sol_e` are the scalar cell solutions for xi = e^1, e^2. `b` is required
/// by the two-scale variant only.
CHomResult assemble_C_hom(const ElasticTensorField& c, const std::array<ScalarCellSolution, 2>& sol_e,
                          const CellGrid& grid, ChomVariant variant, const ElasticTensorField* b = nullptr,
                          const SolverOptions& opts = {});

struct AHomPropertyReport {
  int pairs = 0;
  double theta = 0.0;
  double min_monotonicity = 0.0;
  double max_monotonicity = 0.0;
  double max_continuity = 0.0;
  bool violation = false;
};

/// theta = alpha / (2 - alpha)
double hom_theta(double alpha);

/// Samples m pairs (xi_1, xi_2) in a ball of radius `radius`.
AHomPropertyReport check_a_hom_properties(const EffectiveLaw& law, int m, std::uint64_t seed,
                                          double radius = 2.0);

/// b^hom_jk = <b (e^k + grad w^k) . (e^j + grad w^j)> for the linear family.
Mat2 linear_case_b_hom(const OperatorSpec& spec, const CellGrid& grid, const SolverOptions& opts = {});

}  // namespace hk

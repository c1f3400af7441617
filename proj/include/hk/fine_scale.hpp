#pragma once

// The eps-periodic coupled problem on the unit square: monotone
// electrostatics, Maxwell stress, and elasticity with electrostriction load.

#include "hk/cell_problems.hpp"

namespace hk {

struct DomainSolveOptions {
  double tol = 1e-10;   // Newton: max-norm nodal residual relative to min(1, |load|)
  int max_newton = 50;
  int max_picard = 200;
  bool direct = true;   // sparse direct linear solves (CG otherwise)
  double cg_tol = 1e-12;
  int max_linear = 100000;
};

struct ScalarDomainSolution {
  NodalField phi;
  double residual = 0.0;
  int iterations = 0;
  bool used_picard = false;
  std::vector<double> history;
};

/// Throws InvalidArgument unless 1/eps is an integer dividing N.
void check_commensurate(double eps, const DomainGrid& domain);

/// int a(x/eps, grad phi) . grad v = int f v, phi = 0 on the boundary.
ScalarDomainSolution solve_fine_electrostatic(const OperatorSpec& spec, double eps, const NodalField& f,
                                              const DomainGrid& domain, const DomainSolveOptions& opts = {});

/// grad phi (x) grad phi at quadrature points (4 components).
QuadField maxwell_stress(const NodalField& phi);

struct VectorDomainSolution {
  NodalField u;
  double residual = 0.0;
  int iterations = 0;
};

/// Solves K u = load for a Dirichlet elasticity operator with per-qp phases.
VectorDomainSolution solve_dirichlet_elasticity(const DomainGrid& domain, std::span<const int> phases,
                                                const std::array<Tensor4, 2>& tensors,
                                                std::span<const double> load, const DomainSolveOptions& opts);

/// int B(x/eps) D(u):D(v) = int g.v - int C(x/eps) Sigma : D(v), u = 0 on the boundary.
VectorDomainSolution solve_fine_elasticity(const ElasticTensorField& b, const ElasticTensorField& c, double eps,
                                           const NodalField& g, const QuadField& sigma, const DomainGrid& domain,
                                           const DomainSolveOptions& opts = {});

/// int |grad phi|^p, the left side of the a-priori energy bound.
double gradient_energy(const NodalField& phi, double p);

/// int |f|^{p'} with p' = p/(p-1).
double source_energy(const NodalField& f, double p);

/// Max-norm over nodes adjacent to a material interface of the weak
/// (nodal) flux balance; zero up to solver tolerance for a converged solve.
double interface_flux_balance(const OperatorSpec& spec, double eps, const NodalField& phi, const NodalField& f);

/// Named or constant sources on the unit square.
NodalField constant_field(const DomainGrid& domain, int components, const std::vector<double>& value);

}  // namespace hk

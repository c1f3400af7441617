#include "hk/constitutive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace hk {

int Geometry::phase(const Vec2& point) const
{
  const Vec2 y = wrap_to_cell(point);
  switch (kind) {
    case Kind::Homogeneous:
      return 0;
    case Kind::Laminate:
      return y(0) >= 0.5 - size ? 1 : 0;
    case Kind::SquareInclusion:
      return (std::abs(y(0)) < 0.5 * size && std::abs(y(1)) < 0.5 * size) ? 1 : 0;
    case Kind::Disc:
      return y.squaredNorm() < size * size ? 1 : 0;
    case Kind::Checkerboard:
      return ((y(0) >= 0.0) != (y(1) >= 0.0)) ? 1 : 0;
  }
  return 0;
}

std::string Geometry::name() const
{
  switch (kind) {
    case Kind::Homogeneous:
      return "homogeneous";
    case Kind::Laminate:
      return "laminate";
    case Kind::SquareInclusion:
      return "square";
    case Kind::Disc:
      return "disc";
    case Kind::Checkerboard:
      return "checkerboard";
  }
  return "unknown";
}

std::vector<int> qp_phases(const Geometry& geometry, const StructuredGrid& grid, double eps)
{
  std::vector<int> out(static_cast<std::size_t>(grid.qp_count()));
  for (int e = 0; e < grid.element_count(); ++e)
    for (int q = 0; q < 4; ++q)
      out[static_cast<std::size_t>(4 * e + q)] = geometry.phase(grid.qp_point(e, q) / eps);
  return out;
}

std::string to_string(Family f)
{
  switch (f) {
    case Family::Linear:
      return "linear";
    case Family::PowerLaw:
      return "power-law";
    case Family::VariableExponent:
      return "variable-exponent";
  }
  return "unknown";
}

OperatorSpec OperatorSpec::linear(const Mat2& matrix_phase, const Mat2& inclusion_phase, Geometry g)
{
  OperatorSpec s;
  s.family = Family::Linear;
  s.p = 2.0;
  s.alpha = 1.0;
  s.phases[0].matrix = matrix_phase;
  s.phases[1].matrix = inclusion_phase;
  s.geometry = g;
  const double lo = std::min(matrix_phase.eigenvalues().real().minCoeff(),
                             inclusion_phase.eigenvalues().real().minCoeff());
  const double hi = std::max(matrix_phase.norm(), inclusion_phase.norm());
  s.lambda_o = lo > 0 ? lo : 1.0;
  s.Lambda_o = hi;
  return s;
}

OperatorSpec OperatorSpec::power_law(double p, double sigma_matrix, double sigma_inclusion, Geometry g,
                                     double delta)
{
  OperatorSpec s;
  s.family = Family::PowerLaw;
  s.p = p;
  s.alpha = std::min(1.0, p - 1.0);
  s.delta = (p < 2.0 && delta == 0.0) ? 1e-8 : delta;
  s.phases[0] = {sigma_matrix, p, Mat2::Identity()};
  s.phases[1] = {sigma_inclusion, p, Mat2::Identity()};
  s.geometry = g;
  s.lambda_o = std::min(sigma_matrix, sigma_inclusion);
  s.Lambda_o = std::max(sigma_matrix, sigma_inclusion) * std::max(1.0, p - 1.0);
  return s;
}

OperatorSpec OperatorSpec::variable_exponent(double p_matrix, double p_inclusion, double sigma_matrix,
                                             double sigma_inclusion, Geometry g, double delta)
{
  OperatorSpec s;
  s.family = Family::VariableExponent;
  s.p = p_inclusion;
  s.alpha = std::min(1.0, s.p - 1.0);
  s.delta = delta;
  s.phases[0] = {sigma_matrix, p_matrix, Mat2::Identity()};
  s.phases[1] = {sigma_inclusion, p_inclusion, Mat2::Identity()};
  s.geometry = g;
  s.lambda_o = std::min(sigma_matrix, sigma_inclusion);
  s.Lambda_o = std::max(sigma_matrix, sigma_inclusion) * std::max(1.0, p_matrix - 1.0);
  return s;
}

void OperatorSpec::validate() const
{
  if (!(p > 1.0)) throw InvalidArgument("operator: p must exceed 1");
  if (alpha < 0.0 || alpha > std::min(1.0, p - 1.0) + 1e-15)
    throw InvalidArgument("operator: alpha must lie in [0, min(1, p-1)]");
  if (!(lambda_o > 0.0) || !(Lambda_o > 0.0) || !(Lambda_star > 0.0))
    throw InvalidArgument("operator: structure constants must be positive");
  if (delta < 0.0) throw InvalidArgument("operator: delta must be non-negative");
  if (family != Family::Linear) {
    for (const auto& ph : phases) {
      if (!(ph.sigma > 0.0)) throw InvalidArgument("operator: sigma must be positive");
      if (!(ph.exponent > 1.0)) throw InvalidArgument("operator: exponent must exceed 1");
      if (ph.exponent < 2.0 && delta == 0.0)
        throw InvalidArgument("operator: exponents below 2 need delta > 0");
    }
  }
  if (family == Family::PowerLaw && phases[0].exponent != phases[1].exponent)
    throw InvalidArgument("operator: power law needs one exponent");
  if (family == Family::VariableExponent) {
    // the inclusion F carries p_1, the matrix p_2, with 2 <= p_1 <= p_2
    if (!(phases[1].exponent >= 2.0 && phases[1].exponent <= phases[0].exponent))
      throw InvalidArgument("operator: variable exponent needs 2 <= p_inclusion <= p_matrix");
  }
}

Vec2 OperatorSpec::flux(int phase, const Vec2& xi) const
{
  const PhaseLaw& law = phases[static_cast<std::size_t>(phase)];
  if (family == Family::Linear) return law.matrix * xi;
  const double s = delta * delta + xi.squaredNorm();
  if (s == 0.0) return Vec2::Zero();
  const double e = law.exponent;
  const double scale = e == 2.0 ? 1.0 : (e == 3.0 ? std::sqrt(s) : std::pow(s, 0.5 * (e - 2.0)));
  return law.sigma * scale * xi;
}

Mat2 OperatorSpec::tangent(int phase, const Vec2& xi) const
{
  const PhaseLaw& law = phases[static_cast<std::size_t>(phase)];
  if (family == Family::Linear) return law.matrix;
  const double e = law.exponent;
  if (e == 2.0) return law.sigma * Mat2::Identity();
  const double s = delta * delta + xi.squaredNorm();
  if (s == 0.0) return Mat2::Zero();
  const double base = std::pow(s, 0.5 * (e - 2.0));
  return law.sigma * (base * Mat2::Identity() + (e - 2.0) * base / s * xi * xi.transpose());
}

Mat2 OperatorSpec::secant(int phase, const Vec2& xi) const
{
  const PhaseLaw& law = phases[static_cast<std::size_t>(phase)];
  if (family == Family::Linear) return law.matrix;
  const double s = delta * delta + xi.squaredNorm();
  if (s == 0.0) return law.exponent == 2.0 ? Mat2(law.sigma * Mat2::Identity()) : Mat2(Mat2::Zero());
  return law.sigma * std::pow(s, 0.5 * (law.exponent - 2.0)) * Mat2::Identity();
}

bool OperatorSpec::is_y_independent() const
{
  if (geometry.kind == Geometry::Kind::Homogeneous) return true;
  const PhaseLaw& a = phases[0];
  const PhaseLaw& b = phases[1];
  if (family == Family::Linear) return a.matrix == b.matrix;
  return a.sigma == b.sigma && a.exponent == b.exponent;
}

double OperatorSpec::max_exponent() const
{
  if (family == Family::Linear) return 2.0;
  if (geometry.kind == Geometry::Kind::Homogeneous) return phases[0].exponent;
  return std::max(phases[0].exponent, phases[1].exponent);
}

std::string OperatorSpec::fingerprint() const
{
  std::ostringstream os;
  os.precision(17);
  os << to_string(family) << '|' << p << '|' << alpha << '|' << delta << '|' << geometry.name() << ':'
     << geometry.size;
  for (const auto& ph : phases)
    os << '|' << ph.sigma << ',' << ph.exponent << ',' << ph.matrix(0, 0) << ',' << ph.matrix(0, 1) << ','
       << ph.matrix(1, 0) << ',' << ph.matrix(1, 1);
  return os.str();
}

namespace {

Vec2 sample_ball(std::mt19937_64& rng, double radius)
{
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    Vec2 v(u(rng), u(rng));
    if (v.squaredNorm() <= 1.0) return radius * v;
  }
}

}  // namespace

GrowthReport check_growth_conditions(const OperatorSpec& spec, int m, std::uint64_t seed, double radius)
{
  if (m < 100) throw InvalidArgument("growth audit needs at least 100 samples");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uy(-0.5, 0.5);
  GrowthReport r;
  r.samples = m;
  r.empirical_lambda_o = std::numeric_limits<double>::infinity();
  const double p = spec.p, alpha = spec.alpha;
  for (int k = 0; k < m; ++k) {
    const Vec2 y(uy(rng), uy(rng));
    const Vec2 x1 = sample_ball(rng, radius);
    const Vec2 x2 = sample_ball(rng, radius);
    const Vec2 d = x1 - x2;
    const double dn = d.norm();
    r.max_a_at_zero = std::max(r.max_a_at_zero, spec.eval(y, Vec2::Zero()).norm());
    if (dn == 0.0) continue;
    const Vec2 da = spec.eval(y, x1) - spec.eval(y, x2);
    const double w = 1.0 + x1.squaredNorm() + x2.squaredNorm();
    const double cont = da.norm() / (std::pow(w, 0.5 * (p - 1.0 - alpha)) * std::pow(dn, alpha));
    const double mono = da.dot(d) / (std::pow(w, 0.5 * (p - 2.0)) * dn * dn);
    r.empirical_Lambda_o = std::max(r.empirical_Lambda_o, cont);
    r.empirical_lambda_o = std::min(r.empirical_lambda_o, mono);
  }
  r.zero_bound_ok = r.max_a_at_zero <= spec.Lambda_star;
  r.violation = !(r.empirical_lambda_o > 0.0);
  return r;
}

Tensor4 isotropic_tensor(double lambda, double mu)
{
  Tensor4 t = Tensor4::Zero();
  auto d = [](int a, int b) { return a == b ? 1.0 : 0.0; };
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          t(flat(i, j), flat(k, l)) = lambda * d(i, j) * d(k, l) + mu * (d(i, k) * d(j, l) + d(i, l) * d(j, k));
  return t;
}

ElasticTensorField ElasticTensorField::isotropic(double lambda_matrix, double mu_matrix,
                                                 double lambda_inclusion, double mu_inclusion, Geometry g)
{
  ElasticTensorField f;
  f.geometry = g;
  f.phases = {isotropic_tensor(lambda_matrix, mu_matrix), isotropic_tensor(lambda_inclusion, mu_inclusion)};
  return f;
}

ElasticTensorField ElasticTensorField::uniform(const Tensor4& t)
{
  ElasticTensorField f;
  f.geometry = Geometry::homogeneous();
  f.phases = {t, t};
  return f;
}

bool ElasticTensorField::is_uniform() const
{
  return geometry.kind == Geometry::Kind::Homogeneous || phases[0] == phases[1];
}

double symmetry_defect(const Tensor4& t, bool major)
{
  double worst = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) {
          const double v = t(flat(i, j), flat(k, l));
          worst = std::max(worst, std::abs(v - t(flat(j, i), flat(k, l))));
          worst = std::max(worst, std::abs(v - t(flat(i, j), flat(l, k))));
          if (major) worst = std::max(worst, std::abs(v - t(flat(k, l), flat(i, j))));
        }
  return worst;
}

double min_symmetric_eigenvalue(const Tensor4& t)
{
  // orthonormal basis of symmetric matrices
  const double r = 1.0 / std::sqrt(2.0);
  std::array<Mat2, 3> basis;
  basis[0] << 1, 0, 0, 0;
  basis[1] << 0, 0, 0, 1;
  basis[2] << 0, r, r, 0;
  Eigen::Matrix3d q;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) q(a, b) = frobenius(apply(t, basis[static_cast<std::size_t>(b)]),
                                                     basis[static_cast<std::size_t>(a)]);
  const Eigen::Matrix3d qs = 0.5 * (q + q.transpose());
  return Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(qs).eigenvalues().minCoeff();
}

ElasticAudit audit_elastic_tensor(const ElasticTensorField& field, int samples, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> uy(-0.5, 0.5);
  ElasticAudit audit;
  audit.sampled_ellipticity = std::numeric_limits<double>::infinity();
  for (const auto& t : field.phases) {
    audit.symmetry_defect = std::max(audit.symmetry_defect, symmetry_defect(t, false));
    audit.max_norm = std::max(audit.max_norm, t.cwiseAbs().maxCoeff());
  }
  for (int k = 0; k < samples; ++k) {
    const Vec2 y(uy(rng), uy(rng));
    Mat2 c;
    c << u(rng), u(rng), 0.0, u(rng);
    c(1, 0) = c(0, 1);
    const double n2 = c.squaredNorm();
    if (n2 == 0.0) continue;
    audit.sampled_ellipticity = std::min(audit.sampled_ellipticity, frobenius(field.apply(y, c), c) / n2);
  }
  return audit;
}

}  // namespace hk

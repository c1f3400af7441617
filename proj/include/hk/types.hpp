#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace hk {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Fourth-order tensor in 2D stored as a 4x4 matrix acting on row-major
/// flattened 2x2 matrices: T(2i+j, 2k+l) = T_{ijkl}.
using Tensor4 = Eigen::Matrix4d;

inline constexpr int kDim = 2;

inline int flat(int i, int j) { return 2 * i + j; }

inline Eigen::Vector4d vec(const Mat2& m)
{
  return {m(0, 0), m(0, 1), m(1, 0), m(1, 1)};
}

inline Mat2 unvec(const Eigen::Vector4d& v)
{
  Mat2 m;
  m << v(0), v(1), v(2), v(3);
  return m;
}

/// (T M)_{ij} = T_{ijkl} M_{kl}
inline Mat2 apply(const Tensor4& t, const Mat2& m) { return unvec(t * vec(m)); }

inline double frobenius(const Mat2& a, const Mat2& b) { return (a.array() * b.array()).sum(); }

inline Mat2 sym(const Mat2& m) { return 0.5 * (m + m.transpose()); }

inline Mat2 outer(const Vec2& a, const Vec2& b) { return a * b.transpose(); }

inline Vec2 unit(int i) { return i == 0 ? Vec2(1.0, 0.0) : Vec2(0.0, 1.0); }

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative solver ran out of iterations before meeting its tolerance.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, int iterations, double residual)
      : Error(what), iterations_(iterations), residual_(residual)
  {
  }
  int iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  int iterations_;
  double residual_;
};

class SingularSystem : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace hk

#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ccn32 {

// Error taxonomy shared by all modules.
struct NumericsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DomainError : NumericsError {
  using NumericsError::NumericsError;
};
struct PoleProximityError : NumericsError {
  using NumericsError::NumericsError;
};
struct ConvergenceError : NumericsError {
  using NumericsError::NumericsError;
};
struct BoundaryInputError : NumericsError {
  using NumericsError::NumericsError;
};
struct ToleranceError : NumericsError {
  using NumericsError::NumericsError;
};
struct RegimeMismatchError : NumericsError {
  using NumericsError::NumericsError;
};
struct NoisyGradientError : NumericsError {
  using NumericsError::NumericsError;
};
struct ConstraintError : NumericsError {
  using NumericsError::NumericsError;
};

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;  // row-major

inline double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline Vec3 operator+(const Vec3& a, const Vec3& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Vec3 operator-(const Vec3& a, const Vec3& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Vec3 operator*(double c, const Vec3& a) {
  return {c * a[0], c * a[1], c * a[2]};
}

inline Vec3 mat_apply(const Mat3& m, const Vec3& v) {
  return {dot(m[0], v), dot(m[1], v), dot(m[2], v)};
}

inline Vec3 mat_apply_transposed(const Mat3& m, const Vec3& v) {
  return {m[0][0] * v[0] + m[1][0] * v[1] + m[2][0] * v[2],
          m[0][1] * v[0] + m[1][1] * v[1] + m[2][1] * v[2],
          m[0][2] * v[0] + m[1][2] * v[1] + m[2][2] * v[2]};
}

}  // namespace ccn32

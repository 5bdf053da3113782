// Shared value types, constants and the error hierarchy used across the
// phasespace library.
#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace phasespace {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Plain 2-vector used for positions, directions and wavevectors.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double a) const { return {a * x, a * y}; }
  constexpr Vec2 operator/(double a) const { return {x / a, y / a}; }
  friend constexpr Vec2 operator*(double a, Vec2 v) { return v * a; }
  constexpr bool operator==(const Vec2&) const = default;

  [[nodiscard]] constexpr double dot(Vec2 o) const { return x * o.x + y * o.y; }
  /// z-component of the 3D cross product.
  [[nodiscard]] constexpr double cross(Vec2 o) const { return x * o.y - y * o.x; }
  [[nodiscard]] double norm() const { return std::hypot(x, y); }
  [[nodiscard]] Vec2 normalized() const { return *this / norm(); }
  [[nodiscard]] double angle() const { return std::atan2(y, x); }

  static Vec2 polar(double r, double phi) { return {r * std::cos(phi), r * std::sin(phi)}; }
};

/// Out-of-plane field naming follows the optics convention:
/// TE has the magnetic field along z (in-plane E, Brewster zero),
/// TM has the electric field along z.
enum class Polarization { TE, TM };

inline std::string_view to_string(Polarization p) { return p == Polarization::TE ? "TE" : "TM"; }

inline Polarization parse_polarization(std::string_view s) {
  if (s == "TE" || s == "te") return Polarization::TE;
  if (s == "TM" || s == "tm") return Polarization::TM;
  throw std::invalid_argument("unknown polarization '" + std::string(s) + "' (expected TE or TM)");
}

/// Wraps an angle into [0, 2pi).
inline double wrap_angle(double a) {
  double w = std::fmod(a, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

/// Base of all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A ray met the boundary tangentially within tolerance.
class GrazingError : public Error {
 public:
  explicit GrazingError(const std::string& what, long bounce = -1)
      : Error(bounce >= 0 ? what + " (bounce " + std::to_string(bounce) + ")" : what), bounce_(bounce) {}
  [[nodiscard]] long bounce() const { return bounce_; }

 private:
  long bounce_;
};

/// Iterative solver failed to converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Boundary data too coarse for the requested transform.
class SamplingError : public Error {
 public:
  using Error::Error;
};

/// Every ray lost its intensity before anything could be recorded.
class EmptyDistributionError : public Error {
 public:
  using Error::Error;
};

}  // namespace phasespace

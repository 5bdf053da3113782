// Star-shaped cavity boundaries r(phi) = R0 (1 + sum_m eps_m cos(m phi)):
// differential geometry, cached arc length, and ray-boundary intersection.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "phasespace/core.hpp"

namespace phasespace {

/// One cosine harmonic of the boundary deformation.
struct Harmonic {
  int m = 0;
  double eps = 0.0;
  bool operator==(const Harmonic&) const = default;
};

/// A point on the boundary with its local frame. The tangent follows the
/// counterclockwise orientation and the normal points outward.
struct BoundaryPoint {
  double phi = 0.0;
  Vec2 position;
  double s = 0.0;
  Vec2 tangent;
  Vec2 normal;
  double curvature = 0.0;
};

/// Result of marching a ray to the wall.
struct Intersection {
  BoundaryPoint point;
  double distance = 0.0;
  /// |cos chi| between the ray and the local normal.
  double cos_incidence = 0.0;
  bool grazing = false;
};

inline constexpr double kGrazingTolerance = 1e-9;

namespace detail {

// 8-point Gauss-Legendre on [-1, 1].
inline constexpr std::array<double, 8> kGaussNodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
inline constexpr std::array<double, 8> kGaussWeights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

template <class F>
double gauss_legendre(F&& f, double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t i = 0; i < kGaussNodes.size(); ++i) sum += kGaussWeights[i] * f(mid + half * kGaussNodes[i]);
  return sum * half;
}

}  // namespace detail

/// Cosine-harmonic cavity boundary. Immutable after construction; the arc
/// length table is shared between copies.
class BoundaryShape {
 public:
  static constexpr int kArcKnots = 4096;

  explicit BoundaryShape(double R0 = 1.0, std::vector<Harmonic> harmonics = {})
      : R0_(R0), harmonics_(std::move(harmonics)) {
    if (!(R0_ > 0.0) || !std::isfinite(R0_)) throw DomainError("boundary mean radius R0 must be positive");
    int max_m = 1;
    for (const auto& h : harmonics_) {
      if (h.m < 1) throw DomainError("harmonic order m must be a positive integer");
      if (!std::isfinite(h.eps)) throw DomainError("harmonic amplitude must be finite");
      max_m = std::max(max_m, h.m);
    }
    const int samples = 8192 + 64 * max_m;
    double rmin = R0_ * 10.0;
    double rmax = 0.0;
    for (int i = 0; i < samples; ++i) {
      const double r = radius(kTwoPi * i / samples);
      rmin = std::min(rmin, r);
      rmax = std::max(rmax, r);
    }
    if (!(rmin > 0.0)) throw DomainError("boundary radius r(phi) must stay positive (min r = " + std::to_string(rmin) + ")");
    rmax_ = rmax;
    rmin_ = rmin;
    build_arc_table();
  }

  static BoundaryShape circle(double R0 = 1.0) { return BoundaryShape(R0); }
  static BoundaryShape quadrupole(double eps2, double R0 = 1.0) { return BoundaryShape(R0, {{2, eps2}}); }
  static BoundaryShape onigiri(double eps3, double R0 = 1.0) { return BoundaryShape(R0, {{3, eps3}}); }
  static BoundaryShape limacon(double eps1, double R0 = 1.0) { return BoundaryShape(R0, {{1, eps1}}); }

  [[nodiscard]] double R0() const { return R0_; }
  [[nodiscard]] const std::vector<Harmonic>& harmonics() const { return harmonics_; }
  [[nodiscard]] double perimeter() const { return arc_->back(); }
  [[nodiscard]] double max_radius() const { return rmax_; }
  [[nodiscard]] double min_radius() const { return rmin_; }
  [[nodiscard]] bool is_circle() const {
    return std::all_of(harmonics_.begin(), harmonics_.end(), [](const Harmonic& h) { return h.eps == 0.0; });
  }

  [[nodiscard]] double radius(double phi) const {
    double r = 1.0;
    for (const auto& h : harmonics_) r += h.eps * std::cos(h.m * phi);
    return R0_ * r;
  }
  [[nodiscard]] double radius_d1(double phi) const {
    double d = 0.0;
    for (const auto& h : harmonics_) d -= h.eps * h.m * std::sin(h.m * phi);
    return R0_ * d;
  }
  [[nodiscard]] double radius_d2(double phi) const {
    double d = 0.0;
    for (const auto& h : harmonics_) d -= h.eps * h.m * h.m * std::cos(h.m * phi);
    return R0_ * d;
  }
  /// |dP/dphi|
  [[nodiscard]] double speed(double phi) const { return std::hypot(radius(phi), radius_d1(phi)); }

  /// Arc length measured counterclockwise from phi = 0.
  [[nodiscard]] double arc_length(double phi) const {
    if (phi >= kTwoPi) return perimeter();
    if (phi <= 0.0) return 0.0;
    const double step = kTwoPi / kArcKnots;
    const auto i = std::min(static_cast<int>(phi / step), kArcKnots - 1);
    const double a = i * step;
    return (*arc_)[i] + detail::gauss_legendre([this](double p) { return speed(p); }, a, phi);
  }

  /// Inverse of arc_length on [0, perimeter).
  [[nodiscard]] double arc_length_inverse(double s) const {
    const double L = perimeter();
    if (!(s >= 0.0 && s < L)) throw std::out_of_range("arc length outside [0, perimeter)");
    const auto& tab = *arc_;
    const auto it = std::upper_bound(tab.begin(), tab.end(), s);
    const auto i = static_cast<int>(std::distance(tab.begin(), it)) - 1;
    const double step = kTwoPi / kArcKnots;
    const double lo = i * step;
    const double hi = lo + step;
    double phi = lo + step * (s - tab[i]) / (tab[i + 1] - tab[i]);
    for (int iter = 0; iter < 20; ++iter) {
      const double f = (tab[i] + detail::gauss_legendre([this](double p) { return speed(p); }, lo, phi)) - s;
      const double dphi = f / speed(phi);
      phi = std::clamp(phi - dphi, lo, hi);
      if (std::abs(dphi) < 1e-15) break;
    }
    return std::min(phi, std::nextafter(kTwoPi, 0.0));
  }

  [[nodiscard]] BoundaryPoint point(double phi) const {
    phi = wrap_angle(phi);
    const double r = radius(phi);
    const double r1 = radius_d1(phi);
    const double r2 = radius_d2(phi);
    const double c = std::cos(phi);
    const double sn = std::sin(phi);
    BoundaryPoint bp;
    bp.phi = phi;
    bp.position = {r * c, r * sn};
    const Vec2 d1{r1 * c - r * sn, r1 * sn + r * c};
    const double v = d1.norm();
    bp.tangent = d1 / v;
    bp.normal = {bp.tangent.y, -bp.tangent.x};
    bp.curvature = (r * r + 2.0 * r1 * r1 - r * r2) / (v * v * v);
    bp.s = arc_length(phi);
    return bp;
  }

  [[nodiscard]] BoundaryPoint point_at_arc_length(double s) const { return point(arc_length_inverse(s)); }

  [[nodiscard]] bool contains(Vec2 p) const {
    const double rho = p.norm();
    if (rho == 0.0) return true;
    return rho < radius(p.angle());
  }

  /// First boundary crossing along origin + t * direction, t > 0.
  [[nodiscard]] Intersection next_intersection(Vec2 origin, Vec2 direction) const {
    if (!contains(origin)) throw DomainError("ray origin lies outside the boundary");
    const auto f = [&](double t) {
      const Vec2 p = origin + direction * t;
      return p.norm() - radius(p.angle());
    };
    const auto fprime = [&](double t) {
      const Vec2 p = origin + direction * t;
      const double rho = p.norm();
      if (rho == 0.0) return 1.0;
      const double dphi_dt = p.cross(direction) / (rho * rho);
      return p.dot(direction) / rho - radius_d1(p.angle()) * dphi_dt;
    };

    const double step = rmax_ / 48.0;
    const double tmax = 2.0 * rmax_ + step;
    double a = 0.0;
    double fa = f(a);
    double b = step;
    double fb = f(b);
    while (fb < 0.0) {
      a = b;
      fa = fb;
      b += step;
      if (b > tmax + step) throw ConvergenceError("ray did not reach the boundary");
      fb = f(b);
    }
    (void)fa;
    // Safeguarded Newton on the bracket [a, b].
    double t = 0.5 * (a + b);
    for (int iter = 0; iter < 200; ++iter) {
      const double ft = f(t);
      if (ft < 0.0) a = t; else b = t;
      if (std::abs(ft) < 1e-15 * R0_ || (b - a) < 1e-15 * R0_) break;
      const double d = fprime(t);
      double next = t - ft / d;
      if (!(next > a && next < b) || !std::isfinite(next)) next = 0.5 * (a + b);
      if (std::abs(next - t) < 1e-16 * R0_) {
        t = next;
        break;
      }
      t = next;
    }
    Intersection hit;
    hit.distance = t;
    const Vec2 p = origin + direction * t;
    hit.point = point(p.angle());
    hit.cos_incidence = std::abs(direction.dot(hit.point.normal));
    hit.grazing = hit.cos_incidence < kGrazingTolerance;
    return hit;
  }

 private:
  void build_arc_table() {
    auto tab = std::make_shared<std::vector<double>>(kArcKnots + 1, 0.0);
    const double step = kTwoPi / kArcKnots;
    for (int i = 0; i < kArcKnots; ++i) {
      const double a = i * step;
      (*tab)[i + 1] = (*tab)[i] + detail::gauss_legendre([this](double p) { return speed(p); }, a, a + step);
    }
    arc_ = std::move(tab);
  }

  double R0_;
  std::vector<Harmonic> harmonics_;
  double rmax_ = 0.0;
  double rmin_ = 0.0;
  std::shared_ptr<const std::vector<double>> arc_;
};

}  // namespace phasespace

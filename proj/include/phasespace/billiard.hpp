// Hard-wall billiard dynamics: specular reflection, the bounce map in
// Birkhoff coordinates (s, sin chi), surface-of-section traces and the
// two-trajectory Lyapunov estimate.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "phasespace/core.hpp"
#include "phasespace/geometry.hpp"

namespace phasespace {

/// One point of the Poincare surface of section.
struct PsosPoint {
  double s_norm = 0.0;  ///< arc length / perimeter in [0, 1)
  double p = 0.0;       ///< tangential momentum measure in [-1, 1]
  double weight = 1.0;
};

/// Ray sitting on the boundary right after a reflection. sin_chi is the
/// tangential component of the unit direction, positive for counterclockwise
/// circulation.
struct RayState {
  BoundaryPoint point;
  Vec2 direction;

  [[nodiscard]] double sin_chi() const { return direction.dot(point.tangent); }
  [[nodiscard]] double chi() const { return std::asin(std::clamp(std::abs(sin_chi()), 0.0, 1.0)); }
  [[nodiscard]] int orientation() const { return sin_chi() >= 0.0 ? 1 : -1; }
};

/// d' = d - 2 (d.n) n for a ray hitting a wall with outward normal n.
inline Vec2 specular_reflect(Vec2 d, Vec2 n) {
  const double dn = d.dot(n);
  if (std::abs(dn) < 1e-12) throw GrazingError("grazing incidence in specular reflection");
  if (dn < 0.0) throw DomainError("ray travels away from the wall");
  const Vec2 out = d - n * (2.0 * dn);
  return out / out.norm();
}

/// Inward unit direction leaving a boundary point with the given sin chi.
inline Vec2 inward_direction(const BoundaryPoint& bp, double sin_chi) {
  if (!(sin_chi > -1.0 && sin_chi < 1.0)) throw DomainError("launch requires |sin chi| < 1");
  const double c = std::sqrt(1.0 - sin_chi * sin_chi);
  return (bp.tangent * sin_chi - bp.normal * c).normalized();
}

/// Boundary launch at polar angle phi.
inline RayState launch(const BoundaryShape& shape, double phi, double sin_chi) {
  RayState st;
  st.point = shape.point(phi);
  st.direction = inward_direction(st.point, sin_chi);
  return st;
}

/// Boundary launch at Birkhoff coordinates (arc length, sin chi).
inline RayState launch_birkhoff(const BoundaryShape& shape, double s, double sin_chi) {
  const double L = shape.perimeter();
  double w = std::fmod(s, L);
  if (w < 0.0) w += L;
  if (w >= L) w = 0.0;
  RayState st;
  st.point = shape.point(shape.arc_length_inverse(w));
  st.direction = inward_direction(st.point, sin_chi);
  return st;
}

/// Interior launch, normalized to the boundary state after the first wall hit.
inline RayState launch_interior(const BoundaryShape& shape, Vec2 origin, Vec2 direction) {
  const Vec2 d = direction.normalized();
  const auto hit = shape.next_intersection(origin, d);
  if (hit.grazing) throw GrazingError("interior launch grazes the wall", 0);
  RayState st;
  st.point = hit.point;
  st.direction = specular_reflect(d, hit.point.normal);
  return st;
}

/// Straight flight from the current reflection point to the next wall hit.
/// The start is pushed along the ray (not the normal) so the chord stays
/// on the same line.
inline Intersection fly(const BoundaryShape& shape, const BoundaryPoint& from, Vec2 direction) {
  const double eps = 1e-9 * shape.R0();
  const auto hit = shape.next_intersection(from.position + direction * eps, direction);
  Intersection out = hit;
  out.distance += eps;
  return out;
}

/// Advances one reflection. Throws GrazingError if the wall is met
/// tangentially.
inline RayState bounce(const BoundaryShape& shape, const RayState& st, double* flight = nullptr, long index = -1) {
  const auto hit = fly(shape, st.point, st.direction);
  if (hit.grazing) throw GrazingError("grazing incidence", index);
  if (flight) *flight = hit.distance;
  RayState next;
  next.point = hit.point;
  next.direction = specular_reflect(st.direction, hit.point.normal);
  return next;
}

inline PsosPoint to_psos(const BoundaryShape& shape, const RayState& st, double weight = 1.0) {
  double s = st.point.s / shape.perimeter();
  if (s >= 1.0) s -= 1.0;
  return {s, std::clamp(st.sin_chi(), -1.0, 1.0), weight};
}

/// The n reflections following the launch state, one PSOS point each.
inline std::vector<PsosPoint> trace(const BoundaryShape& shape, const RayState& initial, long n_bounces) {
  if (n_bounces < 1) throw DomainError("trace needs at least one bounce");
  std::vector<PsosPoint> out;
  out.reserve(static_cast<std::size_t>(n_bounces));
  RayState st = initial;
  for (long i = 1; i <= n_bounces; ++i) {
    st = bounce(shape, st, nullptr, i);
    out.push_back(to_psos(shape, st));
  }
  return out;
}

/// Same as trace but keeps the full boundary states.
inline std::vector<RayState> trace_states(const BoundaryShape& shape, const RayState& initial, long n_bounces) {
  std::vector<RayState> out;
  out.reserve(static_cast<std::size_t>(n_bounces) + 1);
  out.push_back(initial);
  for (long i = 1; i <= n_bounces; ++i) out.push_back(bounce(shape, out.back(), nullptr, i));
  return out;
}

struct LyapunovResult {
  double exponent = 0.0;        ///< mean ln(growth) per bounce
  double mean_free_path = 0.0;  ///< average chord length of the reference orbit
  long bounces_used = 0;
  long skipped = 0;
  bool quality_warning = false;  ///< more than 1% of bounces skipped
};

/// Benettin two-trajectory estimate on the bounce map. Separations are
/// measured in (s / R0, sin chi) and renormalized to delta0 / R0 after every
/// bounce. The shadow starts displaced along the boundary.
inline LyapunovResult lyapunov(const BoundaryShape& shape, const RayState& initial, long n_bounces,
                               std::optional<double> delta0 = std::nullopt) {
  if (n_bounces < 1) throw DomainError("lyapunov needs at least one bounce");
  const double R0 = shape.R0();
  const double L = shape.perimeter();
  const double delta = delta0.value_or(1e-8 * R0) / R0;
  if (!(delta > 0.0 && delta < 1e-3)) throw DomainError("delta0 must be small compared with R0");

  const auto wrap_ds = [L](double ds) {
    ds = std::fmod(ds, L);
    if (ds > 0.5 * L) ds -= L;
    if (ds < -0.5 * L) ds += L;
    return ds;
  };
  const auto make_shadow = [&](const RayState& ref, double us, double up) {
    double p = ref.sin_chi() + delta * up;
    if (std::abs(p) >= 1.0) {
      p = ref.sin_chi() - delta * up;
      us = -us;
    }
    return launch_birkhoff(shape, ref.point.s + delta * us * R0, p);
  };

  LyapunovResult res;
  RayState main = initial;
  double us = 1.0;
  double up = 0.0;
  RayState shadow = make_shadow(main, us, up);
  double log_sum = 0.0;
  double path = 0.0;
  long path_count = 0;

  for (long i = 1; i <= n_bounces; ++i) {
    RayState next_main;
    double flight = 0.0;
    try {
      next_main = bounce(shape, main, &flight, i);
    } catch (const GrazingError&) {
      ++res.skipped;
      main = launch_birkhoff(shape, main.point.s, std::clamp(main.sin_chi() * (1.0 - 1e-7), -1.0 + 1e-12, 1.0 - 1e-12));
      shadow = make_shadow(main, us, up);
      continue;
    }
    path += flight;
    ++path_count;
    RayState next_shadow;
    try {
      next_shadow = bounce(shape, shadow, nullptr, i);
    } catch (const GrazingError&) {
      ++res.skipped;
      main = next_main;
      shadow = make_shadow(main, us, up);
      continue;
    }
    const double ds = wrap_ds(next_shadow.point.s - next_main.point.s) / R0;
    const double dp = next_shadow.sin_chi() - next_main.sin_chi();
    const double d = std::hypot(ds, dp);
    main = next_main;
    if (!(d > 0.0) || !std::isfinite(d)) {
      ++res.skipped;
      shadow = make_shadow(main, us, up);
      continue;
    }
    log_sum += std::log(d / delta);
    ++res.bounces_used;
    us = ds / d;
    up = dp / d;
    shadow = make_shadow(main, us, up);
  }
  res.exponent = res.bounces_used > 0 ? log_sum / static_cast<double>(res.bounces_used) : 0.0;
  res.mean_free_path = path_count > 0 ? path / static_cast<double>(path_count) : 0.0;
  res.quality_warning = static_cast<double>(res.skipped) > 0.01 * static_cast<double>(n_bounces);
  return res;
}

}  // namespace phasespace

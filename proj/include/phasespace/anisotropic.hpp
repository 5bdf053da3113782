// Billiards with a non-circular dispersion (Fermi) contour. Reflections
// conserve the tangential wavevector component k_par; rays travel along the
// group velocity, the outward normal of the contour.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "phasespace/billiard.hpp"
#include "phasespace/core.hpp"
#include "phasespace/geometry.hpp"

namespace phasespace {

/// No wavevector on the contour carries the reflected ray back inside.
class ReflectionError : public Error {
 public:
  explicit ReflectionError(const std::string& what, long bounce = -1)
      : Error(bounce >= 0 ? what + " (bounce " + std::to_string(bounce) + ")" : what), bounce_(bounce) {}
  [[nodiscard]] long bounce() const { return bounce_; }

 private:
  long bounce_;
};

struct ContourHarmonic {
  int m = 0;
  double beta = 0.0;
  double delta = 0.0;
  bool operator==(const ContourHarmonic&) const = default;
};

/// k_F(theta) = k0 (1 + sum beta_m cos(m theta + delta_m)).
class FermiContour {
 public:
  explicit FermiContour(double k0 = 1.0, std::vector<ContourHarmonic> harmonics = {})
      : k0_(k0), harmonics_(std::move(harmonics)) {
    if (!(k0_ > 0.0) || !std::isfinite(k0_)) throw DomainError("contour needs k0 > 0");
    for (const auto& h : harmonics_) {
      if (h.m < 1) throw DomainError("contour harmonic order must be >= 1");
      if (!std::isfinite(h.beta) || !std::isfinite(h.delta)) throw DomainError("contour harmonic must be finite");
    }
    constexpr int N = 8192;
    double kmin = k(0.0);
    int best = 0;
    k_max_ = kmin;
    for (int i = 1; i < N; ++i) {
      const double v = k(kTwoPi * i / N);
      kmin = std::min(kmin, v);
      if (v > k_max_) {
        k_max_ = v;
        best = i;
      }
    }
    if (!(kmin > 0.0)) throw DomainError("Fermi contour must satisfy k_F(theta) > 0");
    // Golden-section refinement of the maximum.
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = kTwoPi * (best - 1) / N;
    double b = kTwoPi * (best + 1) / N;
    for (int it = 0; it < 80; ++it) {
      const double c = b - g * (b - a);
      const double d = a + g * (b - a);
      (k(c) > k(d) ? b : a) = (k(c) > k(d) ? d : c);
    }
    k_max_ = std::max(k_max_, k(0.5 * (a + b)));
    table_.resize(kTableSize + 1);
    for (int i = 0; i <= kTableSize; ++i) table_[i] = wavevector(kTwoPi * i / kTableSize);
  }

  static constexpr int kTableSize = 2048;

  static FermiContour circular(double k0 = 1.0) { return FermiContour(k0); }
  static FermiContour trigonal(double beta3, double k0 = 1.0, double delta = 0.0) {
    return FermiContour(k0, {{3, beta3, delta}});
  }
  /// Two-fold contour, the stand-in for a birefringent medium.
  static FermiContour elliptic(double beta2, double k0 = 1.0) { return FermiContour(k0, {{2, beta2, 0.0}}); }

  [[nodiscard]] double k0() const { return k0_; }
  [[nodiscard]] const std::vector<ContourHarmonic>& harmonics() const { return harmonics_; }
  [[nodiscard]] double k_max() const { return k_max_; }
  [[nodiscard]] bool isotropic() const {
    return std::all_of(harmonics_.begin(), harmonics_.end(), [](const auto& h) { return h.beta == 0.0; });
  }

  /// Wavevectors on the uniform grid theta_i = 2 pi i / kTableSize, closed.
  [[nodiscard]] const std::vector<Vec2>& table() const { return table_; }

  [[nodiscard]] double k(double theta) const {
    double r = 1.0;
    for (const auto& h : harmonics_) r += h.beta * std::cos(h.m * theta + h.delta);
    return k0_ * r;
  }
  [[nodiscard]] double dk(double theta) const {
    double r = 0.0;
    for (const auto& h : harmonics_) r -= h.beta * h.m * std::sin(h.m * theta + h.delta);
    return k0_ * r;
  }
  [[nodiscard]] Vec2 wavevector(double theta) const { return Vec2::polar(k(theta), theta); }
  /// Unit outward normal of the polar curve.
  [[nodiscard]] Vec2 group_direction(double theta) const {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double r = k(theta);
    const double rp = dk(theta);
    return Vec2{r * c + rp * s, r * s - rp * c}.normalized();
  }

  /// theta -> -theta.
  [[nodiscard]] FermiContour mirrored() const {
    auto h = harmonics_;
    for (auto& x : h) x.delta = -x.delta;
    return FermiContour(k0_, std::move(h));
  }
  /// theta -> theta + pi (k -> -k).
  [[nodiscard]] FermiContour inverted() const {
    auto h = harmonics_;
    for (auto& x : h) x.delta += x.m * kPi;
    return FermiContour(k0_, std::move(h));
  }

 private:
  double k0_;
  std::vector<ContourHarmonic> harmonics_;
  double k_max_ = 0.0;
  std::vector<Vec2> table_;
};

/// Ray on the boundary after a reflection, carrying its wavevector.
struct AnisoRayState {
  BoundaryPoint point;
  double theta = 0.0;
  Vec2 wavevector;
  Vec2 group_direction;

  [[nodiscard]] double k_par() const { return wavevector.dot(point.tangent); }
};

struct ContourState {
  double theta = 0.0;
  Vec2 wavevector;
  Vec2 group_direction;
};

inline ContourState contour_state(const FermiContour& c, double theta) {
  return {theta, c.wavevector(theta), c.group_direction(theta)};
}

/// max_theta k_F / k_outer.
inline double effective_index(const FermiContour& inner, double k_outer) {
  if (!(k_outer > 0.0)) throw DomainError("outer wavenumber must be positive");
  return inner.k_max() / k_outer;
}

namespace detail {

/// All contour angles with K . t = k_par, located on a uniform grid and
/// refined by bisection then Newton.
inline std::vector<double> tangential_roots(const FermiContour& c, Vec2 t, double k_par) {
  constexpr int N = FermiContour::kTableSize;
  const double alpha = t.angle();
  const auto h = [&](double th) { return c.k(th) * std::cos(th - alpha) - k_par; };
  const auto dh = [&](double th) { return c.dk(th) * std::cos(th - alpha) - c.k(th) * std::sin(th - alpha); };
  const auto& tab = c.table();
  std::vector<double> grid(N + 1);
  std::vector<double> val(N + 1);
  for (int i = 0; i <= N; ++i) {
    grid[i] = kTwoPi * i / N;
    val[i] = tab[i].dot(t) - k_par;
  }
  const auto bisect = [&](double a, double b) {
    double fa = h(a);
    for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
      const double mid = 0.5 * (a + b);
      const double fm = h(mid);
      if ((fm < 0.0) == (fa < 0.0)) {
        a = mid;
        fa = fm;
      } else {
        b = mid;
      }
    }
    double x = 0.5 * (a + b);
    for (int it = 0; it < 2; ++it) {
      const double d = dh(x);
      if (d == 0.0) break;
      const double nx = x - h(x) / d;
      if (std::abs(nx - x) > 1e-12) break;
      x = nx;
    }
    return x;
  };
  std::vector<double> roots;
  for (int i = 0; i < N; ++i) {
    if (val[i] == 0.0) {
      roots.push_back(grid[i]);
      continue;
    }
    if ((val[i] < 0.0) != (val[i + 1] < 0.0) && val[i + 1] != 0.0) {
      roots.push_back(bisect(grid[i], grid[i + 1]));
      continue;
    }
    // Pairs of roots closer than the grid spacing hide behind a local extremum.
    const double before = i > 0 ? val[i - 1] : val[N - 1];
    if ((val[i] - before) * (val[i + 1] - val[i]) < 0.0 && std::abs(val[i]) < 1e-2 * c.k_max()) {
      const double g = 0.5 * (std::sqrt(5.0) - 1.0);
      const double sign = val[i] > 0.0 ? 1.0 : -1.0;
      const double lo = grid[i] - kTwoPi / N;
      double a = lo;
      double b = grid[i + 1];
      for (int it = 0; it < 80; ++it) {
        const double x1 = b - g * (b - a);
        const double x2 = a + g * (b - a);
        (sign * h(x1) < sign * h(x2) ? b : a) = (sign * h(x1) < sign * h(x2) ? x2 : x1);
      }
      const double e = 0.5 * (a + b);
      if (sign * h(e) < 0.0) {
        roots.push_back(bisect(lo, e));
        roots.push_back(bisect(e, grid[i + 1]));
      }
    }
  }
  return roots;
}

/// Picks the inward-travelling root; ties go to the normal momentum closest
/// to kn_ref in magnitude.
inline std::optional<ContourState> select_inward(const FermiContour& c, const BoundaryPoint& bp, double k_par,
                                                 double kn_ref, bool& grazing) {
  grazing = false;
  std::optional<ContourState> best;
  double best_score = 0.0;
  for (const double th : tangential_roots(c, bp.tangent, k_par)) {
    const auto st = contour_state(c, th);
    const double gn = st.group_direction.dot(bp.normal);
    if (gn > -1e-12) {
      if (gn > -1e-12 && gn < 1e-12) grazing = true;
      continue;
    }
    const double score = std::abs(std::abs(st.wavevector.dot(bp.normal)) - kn_ref);
    if (!best || score < best_score) {
      best = st;
      best_score = score;
    }
  }
  return best;
}

}  // namespace detail

/// Reflection at a wall with the given frame: same k_par, inward group velocity.
inline AnisoRayState aniso_reflect(const FermiContour& c, const AnisoRayState& incoming, const BoundaryPoint& wall,
                                   long index = -1) {
  const double gn = incoming.group_direction.dot(wall.normal);
  if (std::abs(gn) < 1e-12) throw GrazingError("grazing incidence in anisotropic reflection", index);
  if (gn < 0.0) throw DomainError("ray travels away from the wall");
  const double k_par = incoming.wavevector.dot(wall.tangent);
  bool grazing = false;
  const auto out = detail::select_inward(c, wall, k_par, std::abs(incoming.wavevector.dot(wall.normal)), grazing);
  if (!out) {
    if (grazing) throw GrazingError("reflected ray grazes the wall", index);
    throw ReflectionError("no contour state with inward group velocity", index);
  }
  AnisoRayState r;
  r.point = wall;
  r.theta = out->theta;
  r.wavevector = out->wavevector;
  r.group_direction = out->group_direction;
  return r;
}

/// Launch at polar angle phi with k_par = p k_max. Among several inward
/// states the one heading most directly into the cavity is taken.
inline AnisoRayState aniso_launch(const BoundaryShape& shape, const FermiContour& c, double phi, double p) {
  if (!(p > -1.0 && p < 1.0)) throw DomainError("launch requires |p| < 1");
  const auto bp = shape.point(phi);
  std::optional<ContourState> best;
  for (const double th : detail::tangential_roots(c, bp.tangent, p * c.k_max())) {
    const auto st = contour_state(c, th);
    if (st.group_direction.dot(bp.normal) >= -1e-12) continue;
    if (!best || st.group_direction.dot(bp.normal) < best->group_direction.dot(bp.normal)) best = st;
  }
  if (!best) throw DomainError("no inward contour state for the requested k_par at this boundary point");
  AnisoRayState r;
  r.point = bp;
  r.theta = best->theta;
  r.wavevector = best->wavevector;
  r.group_direction = best->group_direction;
  return r;
}

/// Launch with the wavevector angle given directly.
inline AnisoRayState aniso_launch_theta(const BoundaryShape& shape, const FermiContour& c, double phi, double theta) {
  const auto bp = shape.point(phi);
  const auto st = contour_state(c, theta);
  if (!(st.group_direction.dot(bp.normal) < -1e-12)) throw DomainError("group velocity must point into the cavity");
  return {bp, theta, st.wavevector, st.group_direction};
}

inline AnisoRayState aniso_bounce(const BoundaryShape& shape, const FermiContour& c, const AnisoRayState& st,
                                  long index = -1) {
  const auto hit = fly(shape, st.point, st.group_direction);
  if (hit.grazing) throw GrazingError("grazing incidence", index);
  return aniso_reflect(c, st, hit.point, index);
}

inline PsosPoint to_psos(const BoundaryShape& shape, const FermiContour& c, const AnisoRayState& st) {
  double s = st.point.s / shape.perimeter();
  if (s >= 1.0) s -= 1.0;
  return {s, std::clamp(st.k_par() / c.k_max(), -1.0, 1.0), 1.0};
}

/// PSOS of n reflections with p = k_par / k_max.
inline std::vector<PsosPoint> aniso_trace(const BoundaryShape& shape, const FermiContour& c,
                                          const AnisoRayState& initial, long n_bounces) {
  if (n_bounces < 1) throw DomainError("trace needs at least one bounce");
  std::vector<PsosPoint> out;
  out.reserve(static_cast<std::size_t>(n_bounces));
  AnisoRayState st = initial;
  for (long i = 1; i <= n_bounces; ++i) {
    st = aniso_bounce(shape, c, st, i);
    out.push_back(to_psos(shape, c, st));
  }
  return out;
}

inline std::vector<AnisoRayState> aniso_trace_states(const BoundaryShape& shape, const FermiContour& c,
                                                     const AnisoRayState& initial, long n_bounces) {
  std::vector<AnisoRayState> out;
  out.reserve(static_cast<std::size_t>(n_bounces) + 1);
  out.push_back(initial);
  for (long i = 1; i <= n_bounces; ++i) out.push_back(aniso_bounce(shape, c, out.back(), i));
  return out;
}

/// Trace that stops at the first failed reflection instead of throwing.
struct AnisoTraceResult {
  std::vector<PsosPoint> points;
  std::optional<long> failed_at;
  std::string failure;
};

inline AnisoTraceResult aniso_trace_recorded(const BoundaryShape& shape, const FermiContour& c,
                                             const AnisoRayState& initial, long n_bounces) {
  if (n_bounces < 1) throw DomainError("trace needs at least one bounce");
  AnisoTraceResult r;
  AnisoRayState st = initial;
  for (long i = 1; i <= n_bounces; ++i) {
    try {
      st = aniso_bounce(shape, c, st, i);
    } catch (const GrazingError& e) {
      r.failed_at = i;
      r.failure = e.what();
      break;
    } catch (const ReflectionError& e) {
      r.failed_at = i;
      r.failure = e.what();
      break;
    }
    r.points.push_back(to_psos(shape, c, st));
  }
  return r;
}

}  // namespace phasespace

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "phasespace/anisotropic.hpp"

using namespace phasespace;

namespace {

const BoundaryShape kCircle = BoundaryShape::circle();

// T^period(s, p) - (s, p) on the circular cavity.
std::pair<double, double> return_map(const FermiContour& c, double s, double p, int period) {
  auto st = aniso_launch(kCircle, c, kTwoPi * s, p);
  for (int i = 0; i < period; ++i) st = aniso_bounce(kCircle, c, st);
  const auto q = to_psos(kCircle, c, st);
  double ds = q.s_norm - s;
  ds -= std::round(ds);
  return {ds, q.p - p};
}

struct PeriodicOrbit {
  double s = 0.0;
  double p = 0.0;
  double trace = 0.0;
  bool converged = false;
};

// Damped Newton on the return map with forward-difference Jacobian.
PeriodicOrbit find_periodic(const FermiContour& c, double s, double p, int period) {
  PeriodicOrbit out;
  const auto jac = [&](double h, double f, double g) {
    const auto [fs, gs] = return_map(c, s + h, p, period);
    const auto [fp, gp] = return_map(c, s, p + h, period);
    return std::array<double, 4>{(fs - f) / h, (fp - f) / h, (gs - g) / h, (gp - g) / h};
  };
  for (int it = 0; it < 60; ++it) {
    const auto [f, g] = return_map(c, s, p, period);
    if (std::hypot(f, g) < 1e-14) {
      out.converged = true;
      break;
    }
    const auto J = jac(1e-7, f, g);
    const double det = J[0] * J[3] - J[1] * J[2];
    const double ds = (J[3] * f - J[1] * g) / det;
    const double dp = (-J[2] * f + J[0] * g) / det;
    const double lam = std::min(1.0, 0.02 / std::hypot(ds, dp));
    s -= lam * ds;
    p -= lam * dp;
  }
  const auto [f, g] = return_map(c, s, p, period);
  const auto J = jac(1e-6, f, g);
  out.s = s - std::floor(s);
  out.p = p;
  out.trace = J[0] + 1.0 + J[3] + 1.0;
  return out;
}

// Centers of the three s-clusters of the points with p in the given sector,
// and whether successive visits step through them cyclically.
struct ChainInfo {
  std::array<double, 3> centers{};
  double max_spread = 0.0;
  bool cyclic = true;
  int points = 0;
};

ChainInfo chain_of_three(const std::vector<PsosPoint>& pts, double p_lo, double p_hi, double anchor) {
  ChainInfo info;
  std::array<double, 3> sum{};
  std::array<int, 3> count{};
  std::array<double, 3> worst{};
  int prev = -1;
  int step = 0;
  for (const auto& q : pts) {
    if (q.p < p_lo || q.p > p_hi) continue;
    double rel = q.s_norm - anchor;
    rel -= std::floor(rel);
    const int k = static_cast<int>(std::lround(rel * 3.0)) % 3;
    double off = rel - k / 3.0;
    off -= std::round(off);
    sum[k] += off;
    ++count[k];
    worst[k] = std::max(worst[k], std::abs(off));
    if (prev >= 0) {
      const int d = ((k - prev) % 3 + 3) % 3;
      if (d == 0) info.cyclic = false;
      if (step == 0) step = d;
      if (d != step) info.cyclic = false;
    }
    prev = k;
    ++info.points;
  }
  for (int k = 0; k < 3; ++k) {
    if (count[k] == 0) {
      info.cyclic = false;
      continue;
    }
    double c = anchor + k / 3.0 + sum[k] / count[k];
    info.centers[k] = c - std::floor(c);
    info.max_spread = std::max(info.max_spread, worst[k]);
  }
  return info;
}

std::vector<double> psos_histogram(const FermiContour& c, unsigned seed, int launches, long bounces) {
  std::vector<double> H(12 * 10, 0.0);
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> us(0.0, 1.0);
  std::uniform_real_distribution<double> up(-0.9, 0.9);
  for (int l = 0; l < launches; ++l) {
    const double s = us(gen);
    const double p = up(gen);
    AnisoRayState st;
    try {
      st = aniso_launch(kCircle, c, kTwoPi * s, p);
    } catch (const DomainError&) {
      continue;
    }
    for (const auto& q : aniso_trace_recorded(kCircle, c, st, bounces).points) {
      const int i = std::min(11, static_cast<int>(q.s_norm * 12));
      const int j = std::min(9, static_cast<int>((q.p + 1.0) * 5));
      H[i * 10 + j] += 1.0;
    }
  }
  return H;
}

double up_down_asymmetry(const std::vector<double>& H) {
  double a = 0.0;
  double t = 0.0;
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 10; ++j) {
      a += std::abs(H[i * 10 + j] - H[i * 10 + 9 - j]);
      t += H[i * 10 + j];
    }
  return a / t;
}

}  // namespace

TEST(FermiContour, CircularGroupAlongWavevector) {
  const auto c = FermiContour::circular(2.5);
  for (int i = 0; i < 1000; ++i) {
    const double th = kTwoPi * i / 1000.0;
    const auto st = contour_state(c, th);
    EXPECT_NEAR(st.wavevector.norm(), 2.5, 1e-14);
    EXPECT_NEAR(st.group_direction.cross(st.wavevector.normalized()), 0.0, 1e-14);
    EXPECT_GT(st.group_direction.dot(st.wavevector), 0.0);
  }
}

TEST(FermiContour, TrigonalHasThreePreferredDirections) {
  const auto c = FermiContour::trigonal(0.2);
  constexpr int B = 360;
  std::vector<double> H(B, 0.0);
  for (int i = 0; i < 360000; ++i) {
    const double a = wrap_angle(c.group_direction(kTwoPi * i / 360000.0).angle());
    H[std::min(B - 1, static_cast<int>(a / kTwoPi * B))] += 1.0;
  }
  // Circular Gaussian smoothing, 10 degree width.
  std::vector<double> S(B, 0.0);
  for (int i = 0; i < B; ++i)
    for (int d = -40; d <= 40; ++d) S[i] += H[(i + d + B) % B] * std::exp(-0.5 * d * d / 100.0);
  const double top = *std::max_element(S.begin(), S.end());
  std::vector<int> modes;
  for (int i = 0; i < B; ++i)
    if (S[i] > S[(i + B - 1) % B] && S[i] >= S[(i + 1) % B] && S[i] > 0.5 * top) modes.push_back(i);
  ASSERT_EQ(modes.size(), 3u);
  for (int k = 0; k < 3; ++k) {
    const int gap = (modes[(k + 1) % 3] - modes[k] + B) % B;
    EXPECT_NEAR(gap, 120.0, 2.0);
  }
}

TEST(FermiContour, ValidatesPositivity) {
  EXPECT_THROW(FermiContour::trigonal(1.2), DomainError);
  EXPECT_THROW(FermiContour(0.0), DomainError);
  EXPECT_THROW(FermiContour(1.0, {{0, 0.1, 0.0}}), DomainError);
  EXPECT_NO_THROW(FermiContour::trigonal(0.99));
}

TEST(FermiContour, MirrorAndInversion) {
  const auto c = FermiContour(1.0, {{3, 0.2, 0.4}, {2, 0.05, 1.1}});
  const auto m = c.mirrored();
  const auto v = c.inverted();
  for (double th : {0.0, 0.3, 1.7, 4.0}) {
    EXPECT_NEAR(m.k(th), c.k(-th), 1e-15);
    EXPECT_NEAR(v.k(th), c.k(th + kPi), 1e-14);
  }
  // For a trigonal contour at delta = pi/2 the mirror image is the inverted contour.
  const auto t = FermiContour::trigonal(0.2, 1.0, kPi / 2);
  for (double th : {0.0, 0.3, 1.7, 4.0}) EXPECT_NEAR(t.mirrored().k(th), t.inverted().k(th), 1e-14);
}

TEST(EffectiveIndex, Cases) {
  EXPECT_NEAR(effective_index(FermiContour::circular(1.0), 1.0 / 3.3), 3.3, 1e-12);
  EXPECT_NEAR(effective_index(FermiContour::trigonal(0.2, 2.0), 0.5), 2.0 * 1.2 / 0.5, 1e-12);
  EXPECT_EQ(effective_index(FermiContour::trigonal(0.0, 1.0), 0.25), effective_index(FermiContour::circular(1.0), 0.25));
  EXPECT_NEAR(effective_index(FermiContour::elliptic(0.1), 1.0), 1.1, 1e-12);
  EXPECT_THROW(effective_index(FermiContour::circular(), 0.0), DomainError);
}

TEST(AnisoReflect, CircularContourIsSpecular) {
  const auto c = FermiContour::circular(1.7);
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  int checked = 0;
  for (int i = 0; i < 10000; ++i) {
    BoundaryPoint wall;
    wall.normal = Vec2::polar(1.0, u(gen));
    wall.tangent = {-wall.normal.y, wall.normal.x};
    const double th = u(gen);
    const auto in = contour_state(c, th);
    if (in.group_direction.dot(wall.normal) < 1e-3) continue;
    AnisoRayState st{wall, th, in.wavevector, in.group_direction};
    const auto out = aniso_reflect(c, st, wall);
    const Vec2 expect = specular_reflect(in.group_direction, wall.normal) * 1.7;
    EXPECT_LT((out.wavevector - expect).norm(), 1e-9 * 1.7);
    ++checked;
  }
  EXPECT_GT(checked, 4000);
}

TEST(AnisoReflect, TrigonalConservesKParallel) {
  const auto c = FermiContour::trigonal(0.2, 1.3);
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  int checked = 0;
  for (int i = 0; i < 10000; ++i) {
    BoundaryPoint wall;
    wall.normal = Vec2::polar(1.0, u(gen));
    wall.tangent = {-wall.normal.y, wall.normal.x};
    const double th = u(gen);
    const auto in = contour_state(c, th);
    if (in.group_direction.dot(wall.normal) < 1e-6) continue;
    const auto out = aniso_reflect(c, AnisoRayState{wall, th, in.wavevector, in.group_direction}, wall);
    EXPECT_LT(std::abs(out.wavevector.dot(wall.tangent) - in.wavevector.dot(wall.tangent)), 1e-9 * 1.3);
    EXPECT_LT(std::abs(out.wavevector.norm() - c.k(out.theta)), 1e-9 * 1.3);
    EXPECT_LT(out.group_direction.dot(wall.normal), 0.0);
    EXPECT_NEAR(std::abs(out.group_direction.cross(c.group_direction(out.theta))), 0.0, 1e-12);
    ++checked;
  }
  EXPECT_GT(checked, 4000);
}

TEST(AnisoReflect, Preconditions) {
  const auto c = FermiContour::trigonal(0.2);
  BoundaryPoint wall;
  wall.normal = {1.0, 0.0};
  wall.tangent = {0.0, 1.0};
  const auto in = contour_state(c, kPi);
  EXPECT_THROW(aniso_reflect(c, AnisoRayState{wall, kPi, in.wavevector, in.group_direction}, wall), DomainError);
  EXPECT_THROW(aniso_launch(kCircle, c, 0.0, 1.0), DomainError);
  EXPECT_THROW(aniso_trace(kCircle, c, aniso_launch(kCircle, c, 0.0, 0.3), 0), DomainError);
}

TEST(AnisoTrace, CircularContourReproducesIsotropicTrace) {
  const auto c = FermiContour::circular(2.0);
  // Regular cavities: whole trajectories agree.
  for (const auto& [shape, n] : {std::pair{BoundaryShape::circle(), 10000L}, std::pair{BoundaryShape::quadrupole(0.05), 1000L}}) {
    const auto a = trace(shape, launch(shape, 0.3, 0.41), n);
    const auto b = aniso_trace(shape, c, aniso_launch(shape, c, 0.3, 0.41), n);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_NEAR(a[i].s_norm, b[i].s_norm, 1e-9);
      EXPECT_NEAR(a[i].p, b[i].p, 1e-9);
    }
  }
  // Every cavity: each anisotropic bounce reproduces the isotropic one from
  // the same state, so chaotic amplification of round-off is excluded.
  for (const auto& shape : {BoundaryShape::circle(), BoundaryShape::limacon(0.43), BoundaryShape::quadrupole(0.05),
                            BoundaryShape::onigiri(0.08)}) {
    const auto states = trace_states(shape, launch(shape, 0.3, 0.41), 2000);
    for (std::size_t i = 0; i + 1 < states.size(); ++i) {
      const auto& st = states[i];
      const AnisoRayState a{st.point, st.direction.angle(), st.direction * 2.0, st.direction};
      const auto next = to_psos(shape, c, aniso_bounce(shape, c, a));
      const auto ref = to_psos(shape, states[i + 1]);
      double ds = next.s_norm - ref.s_norm;
      ds -= std::round(ds);
      EXPECT_LT(std::abs(ds), 1e-9);
      EXPECT_NEAR(next.p, ref.p, 1e-9);
    }
  }
}

TEST(AnisoTrace, TrigonalCircleConservesKParallel) {
  const auto c = FermiContour::trigonal(0.2);
  const auto states = aniso_trace_states(kCircle, c, aniso_launch(kCircle, c, 0.4, 0.55), 10000);
  for (std::size_t i = 1; i < states.size(); ++i) {
    const auto& wall = states[i].point;
    EXPECT_LT(std::abs(states[i - 1].wavevector.dot(wall.tangent) - states[i].wavevector.dot(wall.tangent)), 1e-9);
    EXPECT_LT(std::abs(states[i].wavevector.norm() - c.k(states[i].theta)), 1e-9);
  }
}

TEST(AnisoTrace, TrigonalTriangleIslandChain) {
  const auto c = FermiContour::trigonal(0.2);
  // Triangle orbit: p alternates between two values, so it closes after six
  // reflections. Frozen from the Newton oracle.
  const auto ccw = find_periodic(c, 1.0 / 12.0, 0.73, 6);
  ASSERT_TRUE(ccw.converged);
  EXPECT_NEAR(ccw.s, 1.0 / 12.0, 1e-9);
  EXPECT_NEAR(ccw.p, 0.732755246076, 1e-9);
  EXPECT_LT(std::abs(ccw.trace), 2.0);  // elliptic: an island, not a saddle

  // Nearby launch stays on three islands in the counterclockwise sector,
  // visited in a fixed cyclic order.
  const auto pts = aniso_trace(kCircle, c, aniso_launch(kCircle, c, kTwoPi * (ccw.s + 0.003), ccw.p), 6000);
  const auto chain = chain_of_three(pts, 0.3, 1.0, ccw.s);
  EXPECT_EQ(chain.points, 3000);
  EXPECT_TRUE(chain.cyclic);
  EXPECT_LT(chain.max_spread, 0.03);
  EXPECT_GT(chain.max_spread, 0.0);
  for (int k = 0; k < 3; ++k) {
    double d = chain.centers[k] - (ccw.s + k / 3.0);
    d -= std::round(d);
    EXPECT_LT(std::abs(d), 0.01);
  }
}

TEST(AnisoTrace, TrigonalChainsShiftBetweenSenses) {
  const auto c = FermiContour::trigonal(0.2);
  const auto ccw = find_periodic(c, 1.0 / 12.0, 0.73, 6);
  const auto cw = find_periodic(c, 0.25, -0.73, 6);
  ASSERT_TRUE(ccw.converged && cw.converged);
  EXPECT_NEAR(cw.p, -ccw.p, 1e-9);
  // Island positions modulo the chain period of 1/3.
  double shift = std::fmod(cw.s - ccw.s + 1.0, 1.0 / 3.0);
  EXPECT_NEAR(shift, 1.0 / 6.0, 1e-9);
  // The isotropic circle has no preferred position: a triangle of either sense
  // closes from any starting point.
  const auto iso = FermiContour::circular();
  const auto [f, g] = return_map(iso, 0.2, 0.5, 3);
  EXPECT_LT(std::hypot(f, g), 1e-9);
}

TEST(AnisoTrace, TrigonalEnvelopeDependsOnPosition) {
  const auto c = FermiContour::trigonal(0.2);
  std::vector<double> top(24, 0.0);
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> us(0.0, 1.0);
  std::uniform_real_distribution<double> up(-0.95, 0.95);
  for (int l = 0; l < 200; ++l) {
    AnisoRayState st;
    try {
      st = aniso_launch(kCircle, c, kTwoPi * us(gen), up(gen));
    } catch (const DomainError&) {
      continue;
    }
    for (const auto& q : aniso_trace_recorded(kCircle, c, st, 300).points) {
      auto& t = top[std::min(23, static_cast<int>(q.s_norm * 24))];
      t = std::max(t, std::abs(q.p));
    }
  }
  const double hi = *std::max_element(top.begin(), top.end());
  const double lo = *std::min_element(top.begin(), top.end());
  EXPECT_GT((hi - lo) / hi, 0.01);
  EXPECT_LE(hi, 1.0);
}

TEST(AnisoTrace, InvertedContourUnionRestoresUpDownSymmetry) {
  const auto c = FermiContour::trigonal(0.2);
  const auto a = psos_histogram(c, 1, 400, 500);
  const auto b = psos_histogram(c.inverted(), 101, 400, 500);
  std::vector<double> u(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) u[i] = a[i] + b[i];
  EXPECT_GT(up_down_asymmetry(a), 0.1);
  EXPECT_LT(up_down_asymmetry(u), 0.05);
}

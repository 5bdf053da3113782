#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "phasespace/husimi.hpp"

using namespace phasespace;

namespace {

BoundaryWaveData plane_wave(int q, std::size_t N, double k, double n) {
  BoundaryWaveData d;
  d.k = k;
  d.n = n;
  d.psi.resize(N);
  d.dpsi.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double S = d.arc_length(i);
    d.psi[i] = std::polar(1.0, q * S);
    d.dpsi[i] = std::polar(0.5, q * S + 0.3);
  }
  return d;
}

BoundaryWaveData wg_mode(int m, std::size_t N = 512) {
  const auto r = find_disk_resonance(m, 3.3, Polarization::TM, 1);
  return disk_boundary_wave(r, std::max(N, disk_minimum_samples(r)));
}

BoundaryWaveData standing_wave(int m) {
  auto d = wg_mode(m);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double phi = d.arc_length(i);
    const cplx back = std::polar(1.0, -2.0 * m * phi);
    d.psi[i] += d.psi[i] * back;
    d.dpsi[i] += d.dpsi[i] * back;
  }
  return d;
}

double coefficient_of_variation(const std::vector<double>& v) {
  double s1 = 0.0;
  double s2 = 0.0;
  for (double x : v) {
    s1 += x;
    s2 += x * x;
  }
  const double mean = s1 / v.size();
  return std::sqrt(std::max(0.0, s2 / v.size() - mean * mean)) / mean;
}

HusimiGridSpec small_grid() {
  HusimiGridSpec g;
  g.s_bins = 64;
  g.p_bins = 128;
  g.threads = 2;
  return g;
}

}  // namespace

TEST(CoherentState, Periodic) {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  const CoherentStateSpec spec{0.8, kTwoPi, 7.3, 1.1};
  for (int i = 0; i < 100; ++i) {
    const double S = u(gen);
    EXPECT_LT(std::abs(coherent_state(spec, S + kTwoPi) - coherent_state(spec, S)), 1e-12);
  }
  // Wide state: many images contribute.
  const CoherentStateSpec wide{9.0, kTwoPi, 2.0, 0.0};
  EXPECT_LT(std::abs(coherent_state(wide, 0.4 + kTwoPi) - coherent_state(wide, 0.4)), 1e-12);
}

TEST(CoherentState, CenteredMaximum) {
  const CoherentStateSpec spec{0.3, kTwoPi, 0.0, 2.0};
  const double peak = std::abs(coherent_state(spec, 2.0));
  for (int i = 1; i < 200; ++i) EXPECT_LT(std::abs(coherent_state(spec, 2.0 + kTwoPi * i / 200.0)), peak);
}

TEST(CoherentState, DiscreteNormConverges) {
  const CoherentStateSpec spec{0.25, kTwoPi, 11.0, 0.7};
  const auto norm = [&](int N) {
    double s = 0.0;
    for (int i = 0; i < N; ++i) s += std::norm(coherent_state(spec, kTwoPi * i / N));
    return s * kTwoPi / N;
  };
  const double a = norm(256);
  const double b = norm(512);
  EXPECT_LT(std::abs(a - b) / b, 1e-8);
  EXPECT_NEAR(b, 1.0, 1e-8);
  EXPECT_THROW(coherent_state({0.0, kTwoPi, 0.0, 0.0}, 0.0), DomainError);
}

TEST(HusimiH, ZeroData) {
  auto d = plane_wave(3, 256, 4.0, 1.5);
  std::fill(d.psi.begin(), d.psi.end(), cplx{});
  std::fill(d.dpsi.begin(), d.dpsi.end(), cplx{});
  EXPECT_EQ(husimi_h(d, 1.0, 3.0, 0.3), cplx{});
  EXPECT_EQ(husimi_hprime(d, 1.0, 3.0, 0.3), cplx{});
}

TEST(HusimiH, PlaneWaveGaussianOverlap) {
  const int q = 9;
  const double sigma = 0.4;
  const auto d = plane_wave(q, 512, 8.0, 1.5);
  for (double s : {0.0, 1.3, 5.9}) {
    for (double k : {5.0, 8.0, 9.0, 10.5, 13.0}) {
      const cplx expect = std::pow(sigma * kPi, -0.25) * std::sqrt(kTwoPi * sigma) *
                          std::exp(-0.5 * sigma * (q - k) * (q - k)) * std::polar(1.0, q * s);
      EXPECT_LT(std::abs(husimi_h(d, s, k, sigma) - expect), 1e-12);
      EXPECT_LT(std::abs(husimi_hprime(d, s, k, sigma) - std::polar(0.5, 0.3) * expect), 1e-12);
    }
  }
  double best = 0.0;
  double arg = 0.0;
  for (int i = 0; i <= 400; ++i) {
    const double k = 4.0 + 10.0 * i / 400.0;
    const double v = std::abs(husimi_h(d, 2.0, k, sigma));
    if (v > best) {
      best = v;
      arg = k;
    }
  }
  EXPECT_NEAR(arg, q, 1e-12);
}

TEST(HusimiH, Linear) {
  const auto a = wg_mode(12);
  auto b = plane_wave(4, a.size(), a.k.real(), a.n);
  b.perimeter = a.perimeter;
  auto c = a;
  const cplx x(0.3, -1.2);
  const cplx y(-2.0, 0.7);
  for (std::size_t i = 0; i < a.size(); ++i) {
    c.psi[i] = x * a.psi[i] + y * b.psi[i];
    c.dpsi[i] = x * a.dpsi[i] + y * b.dpsi[i];
  }
  for (double s : {0.2, 3.0}) {
    for (double k : {2.0, 9.0}) {
      EXPECT_LT(std::abs(husimi_h(c, s, k, 0.3) - (x * husimi_h(a, s, k, 0.3) + y * husimi_h(b, s, k, 0.3))), 1e-12);
      EXPECT_LT(std::abs(husimi_hprime(c, s, k, 0.3) - (x * husimi_hprime(a, s, k, 0.3) + y * husimi_hprime(b, s, k, 0.3))),
                1e-12 * std::max(1.0, std::abs(husimi_hprime(a, s, k, 0.3))));
    }
  }
}

TEST(HusimiH, RejectsUndersampledData) {
  auto d = plane_wave(2, 32, 10.0, 1.5);
  EXPECT_THROW(husimi_h(d, 0.0, 1.0, 0.3), SamplingError);
  EXPECT_THROW(husimi_hprime(d, 0.0, 1.0, 0.3), SamplingError);
  EXPECT_THROW(husimi_four(d, small_grid(), HusimiSide::Inside), SamplingError);
}

TEST(HusimiFour, PeakLawAndUniformity) {
  for (int m : {20, 30, 40}) {
    const auto d = wg_mode(m);
    const auto pair = husimi_four(d, small_grid(), HusimiSide::Inside);
    const auto diag = husimi_diagnostics(pair);
    const double expect = m / (d.n * d.k.real());
    const double cell = 2.0 / pair.incident.p_bins;
    const double coherent = 1.0 / (std::sqrt(2.0 * pair.incident.sigma) * d.n * d.k.real());
    EXPECT_LT(std::abs(diag.incident.peak_sin_chi - expect), cell + diag.incident.sin_chi_width) << "m=" << m;
    EXPECT_NEAR(diag.incident.sin_chi_width, coherent, 0.1 * coherent);
    std::vector<double> row;
    for (int i = 0; i < pair.incident.s_bins; ++i) row.push_back(pair.incident.at(i, diag.incident.peak_j));
    EXPECT_LT(coefficient_of_variation(row), 0.05);
    EXPECT_GT(diag.incident.chirality, 1e6);
  }
}

TEST(HusimiFour, Positivity) {
  const auto d = standing_wave(15);
  for (auto side : {HusimiSide::Inside, HusimiSide::Outside}) {
    const auto pair = husimi_four(d, small_grid(), side);
    for (const auto* g : {&pair.incident, &pair.emergent})
      for (int i = 0; i < g->s_bins; ++i)
        for (int j = 0; j < g->p_bins; ++j) {
          if (g->masked(i, j)) {
            EXPECT_TRUE(side == HusimiSide::Outside);
            EXPECT_GE(std::abs(g->sin_chi_out(j)), 1.0);
          } else {
            EXPECT_GE(g->at(i, j), 0.0);
          }
        }
  }
}

TEST(HusimiFour, OutsideSheetMasksEvanescentCells) {
  const auto d = wg_mode(10);
  const auto pair = husimi_four(d, small_grid(), HusimiSide::Outside);
  EXPECT_EQ(pair.incident.sheet, HusimiSheet::IncidentOutside);
  EXPECT_EQ(pair.emergent.sheet, HusimiSheet::EmergentOutside);
  int masked = 0;
  for (int j = 0; j < pair.incident.p_bins; ++j) {
    EXPECT_EQ(pair.incident.masked(0, j), std::abs(3.3 * pair.incident.sin_chi(j)) >= 1.0);
    masked += pair.incident.masked(0, j);
  }
  EXPECT_GT(masked, 0);
  EXPECT_EQ(pair.incident.at(0, 0), kMaskedValue);
}

TEST(HusimiFour, StandingWaveSymmetric) {
  const auto pair = husimi_four(standing_wave(20), small_grid(), HusimiSide::Inside);
  const auto diag = husimi_diagnostics(pair);
  EXPECT_NEAR(diag.incident.chirality, 1.0, 0.01);
  EXPECT_NEAR(diag.emergent.chirality, 1.0, 0.01);
  // Mirror peaks: the momentum marginal is symmetric.
  const auto& g = pair.incident;
  double top = 0.0;
  for (int i = 0; i < g.s_bins; ++i)
    for (int j = 0; j < g.p_bins; ++j) top = std::max(top, g.at(i, j));
  top *= g.s_bins;
  for (int j = 0; j < g.p_bins / 2; ++j) {
    double up = 0.0;
    double down = 0.0;
    for (int i = 0; i < g.s_bins; ++i) {
      up += g.at(i, g.p_bins - 1 - j);
      down += g.at(i, j);
    }
    EXPECT_NEAR(up, down, 1e-9 * top);
  }
}

TEST(HusimiFour, GlobalPhaseInvariance) {
  const auto d = wg_mode(20);
  const auto base = husimi_four(d, small_grid(), HusimiSide::Inside);
  // Quarter turns are exact in floating point.
  for (cplx phase : {cplx(0.0, 1.0), cplx(-1.0, 0.0), cplx(0.0, -1.0)}) {
    auto e = d;
    for (std::size_t i = 0; i < d.size(); ++i) {
      e.psi[i] *= phase;
      e.dpsi[i] *= phase;
    }
    const auto rot = husimi_four(e, small_grid(), HusimiSide::Inside);
    EXPECT_EQ(rot.incident.values, base.incident.values);
    EXPECT_EQ(rot.emergent.values, base.emergent.values);
  }
  auto e = d;
  const cplx phase = std::polar(1.0, 0.731);
  for (std::size_t i = 0; i < d.size(); ++i) {
    e.psi[i] *= phase;
    e.dpsi[i] *= phase;
  }
  const auto rot = husimi_four(e, small_grid(), HusimiSide::Inside);
  const double top = *std::max_element(base.incident.values.begin(), base.incident.values.end());
  for (std::size_t i = 0; i < rot.incident.values.size(); ++i)
    EXPECT_NEAR(rot.incident.values[i], base.incident.values[i], 1e-12 * top);
}

TEST(HusimiFour, LinearPhaseShiftsMomentum) {
  const auto d = wg_mode(20);
  const auto spec = small_grid();
  const auto base = husimi_diagnostics(husimi_four(d, spec, HusimiSide::Inside));
  for (int q : {-6, -3, 4}) {
    const auto shifted = husimi_diagnostics(husimi_four(with_linear_phase(d, q), spec, HusimiSide::Inside));
    const double expect = q / (d.n * d.k.real());
    EXPECT_LE(std::abs(shifted.incident.peak_sin_chi - base.incident.peak_sin_chi - expect), 2.0 / spec.p_bins) << "q=" << q;
  }
}

TEST(HusimiFour, MomentumWidthApproachesCoherentFloor) {
  // Single-m modes carry no momentum spread of their own; the fitted width
  // is the coherent-state width, up to the angular weight F.
  double prev_excess = 1e9;
  for (int m : {15, 30, 60}) {
    const auto d = wg_mode(m, 1024);
    HusimiGridSpec spec = small_grid();
    spec.p_bins = 512;
    const auto pair = husimi_four(d, spec, HusimiSide::Inside);
    const auto diag = husimi_diagnostics(pair);
    const double coherent = 1.0 / (std::sqrt(2.0 * pair.incident.sigma) * d.n * d.k.real());
    const double excess = std::abs(diag.incident.sin_chi_width / coherent - 1.0);
    EXPECT_GE(diag.incident.sin_chi_width, 0.9 * coherent);
    EXPECT_LT(excess, 0.1);
    EXPECT_LT(excess, prev_excess + 0.01);
    prev_excess = excess;
  }
}

TEST(HusimiFour, LocalizedPacketRespectsUncertaintyFloor) {
  // Gaussian boundary packet with momentum q: the Husimi peak widths in
  // (s, k_par) satisfy ds dk >= 1, the value for a packet matched to the
  // coherent state.
  const double k = 30.0;
  const double n = 1.5;
  const std::size_t N = 1024;
  for (double tau : {0.05, 0.16, 0.6}) {
    BoundaryWaveData d;
    d.k = k;
    d.n = n;
    d.psi.resize(N);
    d.dpsi.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
      double x = d.arc_length(i) - kPi;
      d.psi[i] = std::exp(-x * x / (2.0 * tau)) * std::polar(1.0, 20.0 * x);
      d.dpsi[i] = cplx(0.0, 1.0) * n * k * 0.75 * d.psi[i];
    }
    HusimiGridSpec spec;
    spec.s_bins = 256;
    spec.p_bins = 256;
    spec.sigma = 0.16;
    const auto diag = husimi_diagnostics(husimi_four(d, spec, HusimiSide::Inside));
    const double ds = diag.incident.s_width * d.perimeter;
    const double dk = diag.incident.sin_chi_width * n * k;
    EXPECT_GE(ds * dk, 0.9) << "tau=" << tau;
    if (tau == 0.16) EXPECT_NEAR(ds * dk, 1.0, 0.1);
  }
}

TEST(HusimiDiagnostics, NoiseIsAchiral) {
  // Each sheet mass sums about n k R0 independent momentum components, so a
  // single draw fluctuates by roughly 1/sqrt(n k R0); average over draws.
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int draws = 8;
  double incident = 0.0;
  double emergent = 0.0;
  for (int r = 0; r < draws; ++r) {
    BoundaryWaveData d;
    d.k = 60.0;
    d.n = 1.5;
    d.psi.resize(1024);
    d.dpsi.resize(1024);
    for (std::size_t i = 0; i < d.size(); ++i) {
      d.psi[i] = {u(gen), u(gen)};
      d.dpsi[i] = cplx{u(gen), u(gen)} * 60.0;
    }
    const auto diag = husimi_diagnostics(husimi_four(d, small_grid(), HusimiSide::Inside));
    incident += std::log(diag.incident.chirality) / draws;
    emergent += std::log(diag.emergent.chirality) / draws;
  }
  EXPECT_LT(std::abs(incident), 0.1);
  EXPECT_LT(std::abs(emergent), 0.1);
}

TEST(HusimiDiagnostics, EmptyGridThrows) {
  auto d = plane_wave(3, 256, 4.0, 1.5);
  std::fill(d.psi.begin(), d.psi.end(), cplx{});
  std::fill(d.dpsi.begin(), d.dpsi.end(), cplx{});
  EXPECT_THROW(husimi_diagnostics(husimi_four(d, small_grid(), HusimiSide::Inside)), EmptyDiagnosticsError);
}

TEST(HusimiFour, DefaultSigmaAndThreads) {
  const auto d = wg_mode(20);
  EXPECT_NEAR(default_sigma(d), std::sqrt(2.0 / (d.n * d.k.real())), 1e-15);
  auto spec = small_grid();
  spec.threads = 1;
  const auto a = husimi_four(d, spec, HusimiSide::Inside);
  spec.threads = 4;
  const auto b = husimi_four(d, spec, HusimiSide::Inside);
  EXPECT_EQ(a.incident.values, b.incident.values);
}

// Resonances of the homogeneous dielectric disk (radius R0, index n, vacuum
// outside). Inside J_m(n k r), outside H^(1)_m(k r). TM: psi and psi' are
// continuous; TE: psi continuous and psi'/n^2 continuous.
#pragma once

#include <cmath>
#include <complex>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "phasespace/bessel.hpp"
#include "phasespace/core.hpp"
#include "phasespace/fresnel.hpp"

namespace phasespace {

struct ComplexResonance {
  int m = 0;
  cplx kR0;
  double n = 1.0;
  Polarization pol = Polarization::TM;
  int radial_order = 0;
  double residual = 0.0;
  int iterations = 0;
};

inline constexpr int kSecantMaxIterations = 100;
inline constexpr double kSecantTolerance = 1e-12;

/// Matching condition in log-derivative form; zero at a resonance.
template <class Cyl = bessel::RecurrenceCylinder>
cplx disk_matching(int m, double n, Polarization pol, cplx x) {
  const auto in = Cyl::j(std::abs(m), n * x);
  const cplx lout = bessel::hankel1_log_derivative<Cyl>(std::abs(m), x);
  const cplx lin = in.deriv / in.value;
  return pol == Polarization::TM ? n * lin - lout : lin / n - lout;
}

namespace detail {

inline double real_jprime(int m, double x) {
  if (m == 0) return -std::cyl_bessel_j(1.0, x);
  return 0.5 * (std::cyl_bessel_j(m - 1.0, x) - std::cyl_bessel_j(m + 1.0, x));
}

inline double real_yprime(int m, double x) {
  if (m == 0) return -std::cyl_neumann(1.0, x);
  return 0.5 * (std::cyl_neumann(m - 1.0, x) - std::cyl_neumann(m + 1.0, x));
}

/// Pole-free real-axis surrogate of the matching condition used for seeding.
inline double seed_function(int m, double n, Polarization pol, double x) {
  const double j = std::cyl_bessel_j(static_cast<double>(m), n * x);
  const double jp = real_jprime(m, n * x);
  const double y = std::cyl_neumann(static_cast<double>(m), x);
  const double jo = std::cyl_bessel_j(static_cast<double>(m), x);
  const double rel = (jo * real_jprime(m, x) + y * real_yprime(m, x)) / (jo * jo + y * y);
  return pol == Polarization::TM ? n * jp - j * rel : jp / n - j * rel;
}

}  // namespace detail

/// Radial order = number of interior nodes of J_m(n Re(k) r), r < R0, plus one.
inline int count_radial_order(int m, double n, double re_kR0) {
  const int am = std::abs(m);
  const double top = n * re_kR0;
  int zeros = 0;
  const double h = 0.02;
  double prev = std::cyl_bessel_j(static_cast<double>(am), h);
  for (double x = 2 * h; x < top; x += h) {
    const double v = std::cyl_bessel_j(static_cast<double>(am), std::min(x, top));
    if ((v < 0) != (prev < 0) && prev != 0.0) ++zeros;
    prev = v;
  }
  return zeros + 1;
}

/// Secant iteration from k_guess.
inline ComplexResonance disk_resonance(int m, double n, Polarization pol, cplx k_guess) {
  if (!(n > 1.0)) throw DomainError("disk resonances need n > 1");
  if (k_guess.imag() > 0.0) throw DomainError("initial guess must lie in the physical sheet (Im k <= 0)");
  if (!(k_guess.real() > 0.0)) throw DomainError("initial guess must have Re k > 0");

  // Secant on f * J_m(n k), which has no poles at the interior Bessel zeros.
  const cplx scale = 1.0 / std::abs(bessel::bessel_j(std::abs(m), n * k_guess).value);
  const auto g = [&](cplx x) { return disk_matching(m, n, pol, x) * bessel::bessel_j(std::abs(m), n * x).value * scale; };
  std::vector<cplx> iterates;
  cplx x0 = k_guess;
  cplx x1 = k_guess * (1.0 + 1e-7) - cplx(0.0, 1e-7);
  cplx f0 = g(x0);
  cplx f1 = g(x1);
  iterates.push_back(x0);
  iterates.push_back(x1);
  int it = 0;
  bool converged = false;
  for (; it < kSecantMaxIterations; ++it) {
    const cplx df = f1 - f0;
    if (df == cplx{}) {
      converged = std::abs(f1) < 1e-10;
      break;
    }
    cplx x2 = x1 - f1 * (x1 - x0) / df;
    if (!std::isfinite(x2.real()) || !std::isfinite(x2.imag()) || x2.real() <= 0.0) break;
    iterates.push_back(x2);
    x0 = x1;
    f0 = f1;
    x1 = x2;
    f1 = g(x1);
    if (std::abs(x1 - x0) < kSecantTolerance) {
      converged = true;
      break;
    }
  }
  const auto trace = [&] {
    std::ostringstream os;
    os.precision(17);
    for (const auto& z : iterates) os << ' ' << z.real() << (z.imag() < 0 ? "" : "+") << z.imag() << 'i';
    return os.str();
  };
  if (!converged) throw ConvergenceError("disk resonance secant did not converge; iterates:" + trace());

  // Newton polish with a fixed-step derivative resolves Im k far below the
  // secant tolerance for very high Q.
  f1 = disk_matching(m, n, pol, x1);
  const double h = 1e-6;
  for (int polish = 0; polish < 8; ++polish) {
    const cplx slope = (disk_matching(m, n, pol, x1 + h) - disk_matching(m, n, pol, x1 - h)) / (2.0 * h);
    const cplx step = f1 / slope;
    const cplx x2 = x1 - step;
    const cplx f2 = disk_matching(m, n, pol, x2);
    if (!(std::abs(f2) <= std::abs(f1) || std::abs(step.imag()) > 1e-3 * std::abs(x1.imag()))) break;
    iterates.push_back(x2);
    x1 = x2;
    f1 = f2;
    if (std::abs(step.imag()) <= 1e-6 * std::abs(x1.imag()) && std::abs(step.real()) < 1e-15 * x1.real()) break;
  }
  if (x1.imag() > 0.0) throw ConvergenceError("disk resonance landed in the unphysical sheet (Im k > 0); iterates:" + trace());

  ComplexResonance r;
  r.m = m;
  r.kR0 = x1;
  r.n = n;
  r.pol = pol;
  r.residual = std::abs(f1);
  r.iterations = it + 1;
  r.radial_order = count_radial_order(m, n, x1.real());
  return r;
}

/// Real-axis seed for the resonance of the given radial order.
inline double disk_resonance_seed(int m, double n, Polarization pol, int radial_order) {
  if (radial_order < 1) throw DomainError("radial order must be >= 1");
  const int am = std::abs(m);
  const double h = 0.004;
  double x = std::max(0.05, 0.5 * am / n);
  double prev = detail::seed_function(am, n, pol, x);
  int found = 0;
  const double xmax = (am + 4.0 * radial_order + 20.0) / (n - 1.0) + 50.0;
  for (; x < xmax; x += h) {
    const double v = detail::seed_function(am, n, pol, x + h);
    if ((v < 0) != (prev < 0)) {
      if (++found == radial_order) return x + h * prev / (prev - v);
    }
    prev = v;
  }
  throw ConvergenceError("no seed found for the requested radial order");
}

/// Resonance with angular momentum m and radial order q, seeded by a scan.
inline ComplexResonance find_disk_resonance(int m, double n, Polarization pol, int radial_order) {
  const double seed = disk_resonance_seed(m, n, pol, radial_order);
  // Ray-picture decay rate, ln R = 4 n Im(kR0) cos chi, as the imaginary seed.
  double im0 = 0.0;
  const double s = std::abs(m) / (n * seed);
  if (s < 1.0 / n) {
    const double R = std::max(1e-6, fresnel_reflectance(n, std::asin(s), pol));
    im0 = std::log(R) / (4.0 * n * std::sqrt(1.0 - s * s));
  }
  // Leaky modes can sit far from the real-axis seed; retry deeper in the
  // lower half plane and keep the first root of the requested order.
  std::ostringstream failures;
  for (const double im : {im0, -0.1, -0.3, -0.6, -1.0}) {
    for (const double dre : {0.0, 0.3, 0.6, -0.3}) {
      if (seed + dre <= 0.0) continue;
      try {
        auto r = disk_resonance(m, n, pol, cplx(seed + dre, std::min(im, 0.0)));
        if (r.radial_order == radial_order) return r;
        failures << "\n  start (" << seed + dre << ", " << im << ") converged to order " << r.radial_order;
      } catch (const ConvergenceError&) {
        failures << "\n  start (" << seed + dre << ", " << im << ") did not converge";
      }
    }
  }
  throw ConvergenceError("no resonance of radial order " + std::to_string(radial_order) + " found:" + failures.str());
}

/// Q = -Re(kR0) / (2 Im(kR0)).
inline double q_factor(cplx kR0) {
  if (!(kR0.imag() < 0.0)) throw DomainError("Q factor requires Im(kR0) < 0");
  return -kR0.real() / (2.0 * kR0.imag());
}

/// sin chi = |m| / (n Re kR0).
inline double resonance_sin_chi(const ComplexResonance& r) { return std::abs(r.m) / (r.n * r.kR0.real()); }

/// Reflectance deduced from the decay rate: exp(4 n Im(kR0) cos chi).
inline double generalized_fresnel(const ComplexResonance& r) {
  const double s = resonance_sin_chi(r);
  if (s > 1.0) throw DomainError("angular momentum exceeds n Re(kR0): no real angle of incidence");
  if (!(r.kR0.imag() <= 0.0)) throw DomainError("resonance must have Im(kR0) <= 0");
  return std::exp(4.0 * r.n * r.kR0.imag() * std::sqrt(1.0 - s * s));
}

/// Boundary samples of psi and its outward normal derivative.
struct BoundaryWaveData {
  std::vector<cplx> psi;
  std::vector<cplx> dpsi;
  cplx k;
  double n = 1.0;
  double perimeter = kTwoPi;
  Polarization pol = Polarization::TM;

  std::size_t size() const { return psi.size(); }
  double spacing() const { return perimeter / static_cast<double>(psi.size()); }
  double arc_length(std::size_t i) const { return spacing() * static_cast<double>(i); }
  /// Nyquist margin: N >= 8 n |Re k| R_eff with R_eff = perimeter / 2 pi.
  std::size_t minimum_samples() const {
    return static_cast<std::size_t>(std::ceil(8.0 * n * std::abs(k.real()) * perimeter / kTwoPi));
  }
  void validate() const {
    if (psi.size() != dpsi.size()) throw DomainError("psi and dpsi sample counts differ");
    if (psi.empty()) throw SamplingError("boundary wave data is empty");
    if (!(perimeter > 0.0)) throw DomainError("perimeter must be positive");
    if (psi.size() < minimum_samples())
      throw SamplingError("boundary data undersampled: " + std::to_string(psi.size()) + " < " +
                          std::to_string(minimum_samples()));
  }
};

inline std::size_t disk_minimum_samples(const ComplexResonance& r) {
  return static_cast<std::size_t>(std::ceil(8.0 * r.n * std::abs(r.kR0.real())));
}

/// Interior field on the rim, normalized to max |psi| = 1.
inline BoundaryWaveData disk_boundary_wave(const ComplexResonance& r, std::size_t N, double R0 = 1.0) {
  if (N < disk_minimum_samples(r))
    throw SamplingError("need at least " + std::to_string(disk_minimum_samples(r)) + " boundary samples");
  const auto jv = bessel::bessel_j(r.m, r.n * r.kR0);
  const cplx scale = 1.0 / std::abs(jv.value);
  BoundaryWaveData d;
  d.k = r.kR0 / R0;
  d.n = r.n;
  d.perimeter = kTwoPi * R0;
  d.pol = r.pol;
  d.psi.resize(N);
  d.dpsi.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double phi = kTwoPi * static_cast<double>(i) / static_cast<double>(N);
    const cplx e = std::polar(1.0, static_cast<double>(r.m) * phi);
    d.psi[i] = scale * jv.value * e;
    d.dpsi[i] = scale * (r.n * d.k) * jv.deriv * e;
  }
  return d;
}

}  // namespace phasespace

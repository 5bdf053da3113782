// Second, independent route to the cylinder functions: direct quadrature of
// Bessel's and Schlafli's integrals. Slow but free of recurrences; used to
// cross-check the recurrence implementation and resonance residuals.
//
//   J_m(z) = 1/(2 pi) int_0^{2 pi} exp(i (z sin t - m t)) dt
//   Y_m(z) = 1/pi int_0^pi sin(z sin t - m t) dt
//            - 1/pi int_0^inf (e^{m t} + (-1)^m e^{-m t}) e^{-z sinh t} dt,  Re z > 0
#pragma once

#include <cmath>
#include <complex>
#include <cstdlib>

#include "phasespace/bessel.hpp"
#include "phasespace/geometry.hpp"

namespace phasespace::bessel {

namespace quad {

template <class F>
cplx composite_gauss(F&& f, double a, double b, int panels) {
  cplx sum{};
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    const double half = 0.5 * h;
    const double mid = lo + half;
    for (std::size_t i = 0; i < phasespace::detail::kGaussNodes.size(); ++i)
      sum += phasespace::detail::kGaussWeights[i] * f(mid + half * phasespace::detail::kGaussNodes[i]);
  }
  return sum * (0.5 * h);
}

}  // namespace quad

inline cplx bessel_j_quadrature(int m, cplx z) {
  const int am = std::abs(m);
  const int N = 2 * (am + static_cast<int>(2.0 * std::abs(z)) + 100);
  cplx sum{};
  for (int i = 0; i < N; ++i) {
    const double t = kTwoPi * i / N;
    sum += std::exp(cplx(0, 1) * (z * std::sin(t) - static_cast<double>(am) * t));
  }
  cplx v = sum / static_cast<double>(N);
  if (m < 0 && (am % 2)) v = -v;
  return v;
}

inline cplx bessel_y_quadrature(int m, cplx z) {
  if (!(z.real() > 0.0)) throw DomainError("Schlafli integral requires Re z > 0");
  const int am = std::abs(m);
  const double md = static_cast<double>(am);
  const int panels = 64 + 4 * (am + static_cast<int>(std::abs(z)));
  const cplx oscill = quad::composite_gauss([&](double t) { return std::sin(z * std::sin(t) - md * t); }, 0.0, kPi, panels);

  // Peak of the real exponent m t - Re(z) sinh t fixes the scale and the cutoff.
  const double x = z.real();
  const double tpk = md > x ? std::acosh(md / x) : 0.0;
  const double epk = md * tpk - x * std::sinh(tpk);
  double tmax = tpk + 0.5;
  while (md * tmax - x * std::sinh(tmax) > epk - 50.0) tmax += 0.25;
  const double sign = (am % 2) ? -1.0 : 1.0;
  const cplx tail = quad::composite_gauss(
      [&](double t) {
        const cplx e = -z * std::sinh(t);
        return std::exp(md * t - epk + e) + sign * std::exp(-md * t - epk + e);
      },
      0.0, tmax, 800);
  cplx v = oscill / kPi - tail * std::exp(epk) / kPi;
  if (m < 0 && (am % 2)) v = -v;
  return v;
}

/// Quadrature-based provider mirroring RecurrenceCylinder.
struct QuadratureCylinder {
  static ValueDeriv j(int m, cplx z) {
    const cplx jm = bessel_j_quadrature(m, z);
    const cplx d = m == 0 ? -bessel_j_quadrature(1, z) : 0.5 * (bessel_j_quadrature(m - 1, z) - bessel_j_quadrature(m + 1, z));
    return {jm, d};
  }
  static ValueDeriv h1(int m, cplx z) {
    const auto h = [&](int k) { return bessel_j_quadrature(k, z) + cplx(0, 1) * bessel_y_quadrature(k, z); };
    const cplx hm = h(m);
    const cplx d = m == 0 ? -h(1) : 0.5 * (h(m - 1) - h(m + 1));
    return {hm, d};
  }
  static ValueDeriv y(int m, cplx z) {
    const cplx ym = bessel_y_quadrature(m, z);
    const cplx d = m == 0 ? -bessel_y_quadrature(1, z) : 0.5 * (bessel_y_quadrature(m - 1, z) - bessel_y_quadrature(m + 1, z));
    return {ym, d};
  }
};

}  // namespace phasespace::bessel

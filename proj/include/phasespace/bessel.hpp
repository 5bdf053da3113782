// Integer-order cylinder functions J_m, Y_m, H_m^(1) of complex argument
// (Re z > 0). J by Miller's backward recurrence normalized with
// J_0 + 2 sum J_2k = 1; Y_0, Y_1 from the Neumann series over the same J's;
// higher Y by forward recurrence.
#pragma once

#include <cmath>
#include <complex>
#include <cstdlib>
#include <vector>

#include "phasespace/core.hpp"

namespace phasespace::bessel {

using cplx = std::complex<double>;

inline constexpr double kEulerGamma = 0.57721566490153286061;

/// Value and first derivative of one cylinder function.
struct ValueDeriv {
  cplx value;
  cplx deriv;
};

/// J_0 .. J_nmax at z.
inline std::vector<cplx> bessel_j_sequence(int nmax, cplx z) {
  if (nmax < 0) throw DomainError("bessel order must be non-negative");
  std::vector<cplx> out(static_cast<std::size_t>(nmax) + 1, cplx{});
  const double az = std::abs(z);
  if (az == 0.0) {
    out[0] = 1.0;
    return out;
  }
  const double top = std::max(static_cast<double>(nmax), az);
  int start = static_cast<int>(top + 60.0 + 12.0 * std::cbrt(top));
  if (start % 2) ++start;

  std::vector<cplx> f(static_cast<std::size_t>(start) + 2, cplx{});
  f[static_cast<std::size_t>(start) + 1] = 0.0;
  f[static_cast<std::size_t>(start)] = 1e-280;
  const cplx two_over_z = 2.0 / z;
  for (int k = start; k >= 1; --k) {
    f[static_cast<std::size_t>(k) - 1] = two_over_z * static_cast<double>(k) * f[k] - f[static_cast<std::size_t>(k) + 1];
    if (std::abs(f[static_cast<std::size_t>(k) - 1]) > 1e250) {
      for (int j = k - 1; j <= start + 1; ++j) f[static_cast<std::size_t>(j)] *= 1e-250;
    }
  }
  cplx norm = f[0];
  for (int k = 2; k <= start; k += 2) norm += 2.0 * f[static_cast<std::size_t>(k)];
  for (int k = 0; k <= nmax; ++k) out[static_cast<std::size_t>(k)] = f[static_cast<std::size_t>(k)] / norm;
  return out;
}

/// J and Y sequences 0..nmax, sharing one Miller pass.
struct JYSequence {
  std::vector<cplx> J;
  std::vector<cplx> Y;
};

inline JYSequence bessel_jy_sequence(int nmax, cplx z) {
  if (!(z.real() > 0.0)) throw DomainError("cylinder functions require Re z > 0");
  const double az = std::abs(z);
  // Enough even orders for the Neumann series to converge.
  const int neumann_top = static_cast<int>(az + 60.0 + 12.0 * std::cbrt(az)) + 2;
  const int jmax = std::max(nmax, neumann_top);
  auto J = bessel_j_sequence(jmax + 1, z);

  const cplx lg = std::log(z / 2.0) + kEulerGamma;
  cplx sum0{};
  cplx sum1{};
  for (int k = 1; 2 * k + 1 <= jmax + 1; ++k) {
    const double sgn = (k % 2) ? -1.0 : 1.0;
    sum0 += sgn * J[static_cast<std::size_t>(2 * k)] / static_cast<double>(k);
    sum1 += sgn * (J[static_cast<std::size_t>(2 * k - 1)] - J[static_cast<std::size_t>(2 * k + 1)]) / static_cast<double>(k);
  }
  const double two_pi = 2.0 / kPi;
  JYSequence seq;
  seq.Y.resize(static_cast<std::size_t>(nmax) + 1);
  seq.Y[0] = two_pi * lg * J[0] - 2.0 * two_pi * sum0;
  if (nmax >= 1) seq.Y[1] = -two_pi * J[0] / z + two_pi * lg * J[1] + two_pi * sum1;
  for (int k = 1; k < nmax; ++k)
    seq.Y[static_cast<std::size_t>(k) + 1] = (2.0 * k / z) * seq.Y[static_cast<std::size_t>(k)] - seq.Y[static_cast<std::size_t>(k) - 1];
  J.resize(static_cast<std::size_t>(nmax) + 1);
  seq.J = std::move(J);
  return seq;
}

/// J_m(z) and J_m'(z) for any integer m.
inline ValueDeriv bessel_j(int m, cplx z) {
  const int am = std::abs(m);
  const auto J = bessel_j_sequence(am + 1, z);
  ValueDeriv v;
  v.value = J[static_cast<std::size_t>(am)];
  v.deriv = am == 0 ? -J[1] : 0.5 * (J[static_cast<std::size_t>(am) - 1] - J[static_cast<std::size_t>(am) + 1]);
  if (m < 0 && (am % 2)) {
    v.value = -v.value;
    v.deriv = -v.deriv;
  }
  return v;
}

/// Y_m(z) and Y_m'(z).
inline ValueDeriv bessel_y(int m, cplx z) {
  const int am = std::abs(m);
  const auto seq = bessel_jy_sequence(am + 1, z);
  ValueDeriv v;
  v.value = seq.Y[static_cast<std::size_t>(am)];
  v.deriv = am == 0 ? -seq.Y[1] : 0.5 * (seq.Y[static_cast<std::size_t>(am) - 1] - seq.Y[static_cast<std::size_t>(am) + 1]);
  if (m < 0 && (am % 2)) {
    v.value = -v.value;
    v.deriv = -v.deriv;
  }
  return v;
}

/// Outgoing Hankel function H_m^(1) = J_m + i Y_m and its derivative.
inline ValueDeriv hankel1(int m, cplx z) {
  const int am = std::abs(m);
  const auto seq = bessel_jy_sequence(am + 1, z);
  const auto h = [&](int k) { return seq.J[static_cast<std::size_t>(k)] + cplx(0, 1) * seq.Y[static_cast<std::size_t>(k)]; };
  ValueDeriv v;
  v.value = h(am);
  v.deriv = am == 0 ? -h(1) : 0.5 * (h(am - 1) - h(am + 1));
  if (m < 0 && (am % 2)) {
    v.value = -v.value;
    v.deriv = -v.deriv;
  }
  return v;
}

/// Recurrence-based implementation as a provider object.
struct RecurrenceCylinder {
  static ValueDeriv j(int m, cplx z) { return bessel_j(m, z); }
  static ValueDeriv h1(int m, cplx z) { return hankel1(m, z); }
  static ValueDeriv y(int m, cplx z) { return bessel_y(m, z); }
};

/// H'/H of the outgoing Hankel function. Where |Y| dominates, the form
/// Y'/Y - 2 / (pi z H Y) keeps the tiny imaginary part of near-real
/// arguments at full relative precision.
template <class Cyl>
cplx hankel1_log_derivative(int m, cplx z) {
  const auto j = Cyl::j(m, z);
  const auto y = Cyl::y(m, z);
  const cplx h = j.value + cplx(0, 1) * y.value;
  if (std::abs(y.value) > std::abs(j.value)) return y.deriv / y.value - 2.0 / (kPi * z * h * y.value);
  return (j.deriv + cplx(0, 1) * y.deriv) / h;
}

}  // namespace phasespace::bessel

// Planar-interface Fresnel amplitudes for light leaving a dense medium of
// index n into vacuum. The angle of incidence chi is measured inside.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>

#include "phasespace/core.hpp"

namespace phasespace {

using cplx = std::complex<double>;

/// cos of the transmitted angle; purely imaginary (positive) beyond the
/// critical angle, which selects the decaying evanescent wave.
inline cplx transmitted_cos(double n, double sin_chi) {
  const double arg = 1.0 - n * n * sin_chi * sin_chi;
  if (arg >= 0.0) return {std::sqrt(arg), 0.0};
  return {0.0, std::sqrt(-arg)};
}

/// Complex amplitude reflection coefficient r(sin chi).
inline cplx fresnel_amplitude(double n, double sin_chi, Polarization pol) {
  const double ci = std::sqrt(std::max(0.0, 1.0 - sin_chi * sin_chi));
  const cplx ct = transmitted_cos(n, sin_chi);
  if (pol == Polarization::TM) return (n * ci - ct) / (n * ci + ct);
  return (ci - n * ct) / (ci + n * ct);
}

/// d r / d(sin chi), used for the stationary-phase beam shift.
inline cplx fresnel_amplitude_derivative(double n, double sin_chi, Polarization pol) {
  const double ci = std::sqrt(std::max(0.0, 1.0 - sin_chi * sin_chi));
  const cplx ct = transmitted_cos(n, sin_chi);
  const double dci = -sin_chi / ci;
  const cplx dct = -n * n * sin_chi / ct;
  if (pol == Polarization::TM) {
    const cplx num = n * ci - ct;
    const cplx den = n * ci + ct;
    return ((n * dci - dct) * den - num * (n * dci + dct)) / (den * den);
  }
  const cplx num = ci - n * ct;
  const cplx den = ci + n * ct;
  return ((dci - n * dct) * den - num * (dci + n * dct)) / (den * den);
}

/// Amplitude transmission coefficient (field ratio at the interface).
inline cplx fresnel_transmission_amplitude(double n, double sin_chi, Polarization pol) {
  const double ci = std::sqrt(std::max(0.0, 1.0 - sin_chi * sin_chi));
  const cplx ct = transmitted_cos(n, sin_chi);
  if (pol == Polarization::TM) return 2.0 * n * ci / (n * ci + ct);
  return 2.0 * n * ci / (ci + n * ct);
}

/// Intensity reflectance R in [0, 1]; exactly 1 at and beyond the critical
/// angle.
inline double fresnel_reflectance(double n, double chi, Polarization pol) {
  if (!(chi >= 0.0 && chi < kPi / 2)) throw DomainError("angle of incidence must lie in [0, pi/2)");
  if (!(n >= 1.0)) throw DomainError("refractive index must be >= 1");
  const double s = std::sin(chi);
  if (n * s >= 1.0) return 1.0;
  return std::min(1.0, std::norm(fresnel_amplitude(n, s, pol)));
}

/// Energy-flux transmittance computed from the transmission amplitude. Zero
/// beyond the critical angle.
inline double fresnel_transmittance(double n, double chi, Polarization pol) {
  const double s = std::sin(chi);
  if (n * s >= 1.0) return 0.0;
  const double ci = std::cos(chi);
  const double ct = std::sqrt(1.0 - n * n * s * s);
  return ct / (n * ci) * std::norm(fresnel_transmission_amplitude(n, s, pol));
}

/// sin of the critical angle.
inline double critical_sin(double n) {
  if (!(n >= 1.0)) throw DomainError("refractive index must be >= 1");
  return 1.0 / n;
}

/// Internal Brewster angle, tan chi_B = 1 / n. Only TE reflectance vanishes
/// there.
inline double brewster_angle(double n) { return std::atan(1.0 / n); }

}  // namespace phasespace

// Gaussian beam reflected at a planar interface, dense side index n. The
// beam is decomposed into plane waves with transverse wavenumber
// q = k sin(chi - chi0) and amplitude exp(-q^2 w^2 / 4); each component is
// multiplied by the Fresnel amplitude r(sin chi).
//
//   z_GH      centroid of |E_r|^2 along the interface, from Parseval in
//             k_par = k sin chi: -int |G|^2 Im(conj r dr/dk_par) / int |G|^2 |r|^2
//   delta_chi <chi> under |A r|^2 dq, minus chi0
#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "phasespace/core.hpp"
#include "phasespace/fresnel.hpp"
#include "phasespace/geometry.hpp"
#include "phasespace/parallel.hpp"

namespace phasespace {

inline constexpr int kBeamGridPoints = 1 << 14;
inline constexpr double kBeamSpectrumCut = 6.0;
inline constexpr double kTruncationWarning = 0.01;

struct BeamSpec {
  double chi0 = 0.0;
  double waist = 1.0;
  double k = 1.0;
  double n = 1.5;
  Polarization pol = Polarization::TM;

  double wavelength() const { return kTwoPi / k; }
  double critical_angle() const { return std::asin(critical_sin(n)); }

  void validate() const {
    if (!(k > 0.0) || !std::isfinite(k)) throw DomainError("beam wavenumber must be positive");
    if (!(n > 1.0)) throw DomainError("beam index ratio must exceed 1");
    if (!(waist * k >= 2.0)) throw DomainError("beam waist must satisfy waist * k >= 2");
    if (!(chi0 > 0.0 && chi0 < kPi / 2)) throw DomainError("beam angle of incidence must lie in (0, pi/2)");
  }
};

struct ReflectionShifts {
  double z_gh = 0.0;
  double z_gh_over_lambda = 0.0;
  double delta_chi = 0.0;
  double incident_energy = 0.0;
  double reflected_energy = 0.0;
  double transmitted_energy = 0.0;
  double truncated_fraction = 0.0;
  std::optional<std::string> warning;

  /// |R + T - I| / I; meaningful below and beyond the critical angle alike.
  double energy_defect() const {
    return std::abs(reflected_energy + transmitted_energy - incident_energy) / incident_energy;
  }
};

namespace detail {

struct BeamSums {
  double incident = 0.0;
  double reflected = 0.0;
  double transmitted = 0.0;
  double chi_reflected = 0.0;
  double z_num = 0.0;
  double z_den = 0.0;
};

template <class F>
void composite_gauss_real(F&& f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double half = 0.5 * h;
    const double mid = a + p * h + half;
    for (std::size_t i = 0; i < kGaussNodes.size(); ++i) f(mid + half * kGaussNodes[i], kGaussWeights[i] * half);
  }
}

}  // namespace detail

/// Analytic energy of the untruncated spectrum, int exp(-q^2 w^2 / 2) dq.
inline double beam_spectrum_energy(double waist) { return std::sqrt(kTwoPi) / waist; }

inline ReflectionShifts beam_reflection_shifts(const BeamSpec& spec, int points = kBeamGridPoints) {
  spec.validate();
  if (points < 64) throw DomainError("beam angular grid needs at least 64 points");
  const double k = spec.k;
  const double w = spec.waist;
  const double qmax = std::min(kBeamSpectrumCut / w, k);
  double lo = spec.chi0 - std::asin(qmax / k);
  double hi = spec.chi0 + std::asin(qmax / k);
  lo = std::max(lo, 0.0);
  hi = std::min(hi, kPi / 2);

  detail::BeamSums s;
  auto add = [&](double chi, double weight) {
    const double q = k * std::sin(chi - spec.chi0);
    const double dq_dchi = k * std::cos(chi - spec.chi0);
    const double a2 = std::exp(-0.5 * q * q * w * w);
    const double sn = std::sin(chi);
    const double cs = std::cos(chi);
    const cplx r = fresnel_amplitude(spec.n, sn, spec.pol);
    const double r2 = std::norm(r);
    // Spectral energy in the q measure.
    const double e = a2 * dq_dchi * weight;
    s.incident += e;
    s.reflected += e * r2;
    s.transmitted += e * fresnel_transmittance(spec.n, chi, spec.pol);
    s.chi_reflected += e * r2 * chi;
    // Parseval in k_par: |G|^2 dk_par with G = A dq/dk_par.
    const double dq_du = dq_dchi / (k * cs);
    const double g = a2 * dq_du * dq_du * k * cs * weight;
    const cplx dr = fresnel_amplitude_derivative(spec.n, sn, spec.pol) / k;
    s.z_num += g * std::imag(std::conj(r) * dr);
    s.z_den += g * r2;
  };

  // chi = chi_c -+ t^2 removes the square-root edge of r at the critical angle.
  const double chic = spec.critical_angle();
  const int panels_total = std::max(2, points / static_cast<int>(detail::kGaussNodes.size()));
  if (chic > lo && chic < hi) {
    const double tl = std::sqrt(chic - lo);
    const double th = std::sqrt(hi - chic);
    const int pl = std::max(1, static_cast<int>(std::lround(panels_total * tl / (tl + th))));
    const int ph = std::max(1, panels_total - pl);
    detail::composite_gauss_real([&](double t, double wt) { add(chic - t * t, 2.0 * t * wt); }, 0.0, tl, pl);
    detail::composite_gauss_real([&](double t, double wt) { add(chic + t * t, 2.0 * t * wt); }, 0.0, th, ph);
  } else {
    detail::composite_gauss_real(add, lo, hi, panels_total);
  }

  ReflectionShifts out;
  out.incident_energy = s.incident;
  out.reflected_energy = s.reflected;
  out.transmitted_energy = s.transmitted;
  out.z_gh = -s.z_num / s.z_den;
  out.z_gh_over_lambda = out.z_gh / spec.wavelength();
  out.delta_chi = s.chi_reflected / s.reflected - spec.chi0;
  out.truncated_fraction = std::max(0.0, 1.0 - s.incident / beam_spectrum_energy(w));
  if (out.truncated_fraction > kTruncationWarning)
    out.warning = "angular spectrum truncated by the (0, pi/2) window: " +
                  std::to_string(100.0 * out.truncated_fraction) + "% of beam energy lost";
  if (!std::isfinite(out.z_gh) || !std::isfinite(out.delta_chi)) throw ConvergenceError("beam shift integrals are not finite");
  return out;
}

/// Stationary-phase estimate -dPhi/dk_par at chi0, Phi = arg r.
inline double stationary_phase_shift(const BeamSpec& spec) {
  const double sn = std::sin(spec.chi0);
  const cplx r = fresnel_amplitude(spec.n, sn, spec.pol);
  const cplx dr = fresnel_amplitude_derivative(spec.n, sn, spec.pol) / spec.k;
  return -std::imag(std::conj(r) * dr) / std::norm(r);
}

struct ShiftScanRow {
  double chi0 = 0.0;
  ReflectionShifts shifts;
};

/// count equally spaced chi0 values in [chi_lo, chi_hi].
inline std::vector<ShiftScanRow> shift_scan(BeamSpec base, double chi_lo, double chi_hi, int count,
                                            unsigned threads = default_threads(), int points = kBeamGridPoints) {
  if (!(chi_lo > 0.0 && chi_hi < kPi / 2 && chi_lo <= chi_hi)) throw DomainError("scan range must lie within (0, pi/2)");
  if (count < 1) throw DomainError("scan needs at least one angle");
  std::vector<ShiftScanRow> rows(static_cast<std::size_t>(count));
  parallel_for(rows.size(), threads, [&](std::size_t i) {
    BeamSpec s = base;
    s.chi0 = count == 1 ? chi_lo : chi_lo + (chi_hi - chi_lo) * static_cast<double>(i) / (count - 1);
    rows[i] = {s.chi0, beam_reflection_shifts(s, points)};
  });
  return rows;
}

}  // namespace phasespace

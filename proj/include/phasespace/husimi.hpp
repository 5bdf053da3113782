// Boundary Husimi functions of open cavities: periodic coherent states on the
// boundary, the overlaps h and h' of psi and its normal derivative, and the
// four incident/emergent, inside/outside sheets.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phasespace/core.hpp"
#include "phasespace/disk.hpp"
#include "phasespace/parallel.hpp"

namespace phasespace {

using cplx = std::complex<double>;

class EmptyDiagnosticsError : public Error {
 public:
  using Error::Error;
};

inline constexpr double kImageTail = 1e-14;
/// Sentinel for cells without a real angle of incidence.
inline constexpr double kMaskedValue = -1.0;

/// Half-width beyond which the Gaussian factor drops below kImageTail.
inline double coherent_halfwidth(double sigma) { return std::sqrt(-2.0 * sigma * std::log(kImageTail)); }

struct CoherentStateSpec {
  double sigma = 0.0;       ///< variance parameter, length^2
  double perimeter = kTwoPi;
  double k_parallel = 0.0;
  double s_center = 0.0;

  void validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("coherent state needs sigma > 0");
    if (!(perimeter > 0.0)) throw DomainError("coherent state needs a positive perimeter");
  }
};

/// xi(S) = (sigma pi)^(-1/4) sum_l exp(-(x + l s0)^2 / (2 sigma) - i k_par (x + l s0)), x = S - s.
inline cplx coherent_state(const CoherentStateSpec& spec, double S) {
  spec.validate();
  const double s0 = spec.perimeter;
  double x = std::fmod(S - spec.s_center, s0);
  if (x < -0.5 * s0) x += s0;
  if (x >= 0.5 * s0) x -= s0;
  const long L = static_cast<long>(std::ceil(coherent_halfwidth(spec.sigma) / s0)) + 1;
  cplx sum{};
  for (long l = -L; l <= L; ++l) {
    const double y = x + static_cast<double>(l) * s0;
    sum += std::exp(-y * y / (2.0 * spec.sigma)) * std::polar(1.0, -spec.k_parallel * y);
  }
  return std::pow(spec.sigma * kPi, -0.25) * sum;
}

/// sigma = R^2 sqrt(2 / (n k R)) with R = s0 / 2 pi.
inline double default_sigma(double perimeter, double n, double k) {
  const double R = perimeter / kTwoPi;
  return R * R * std::sqrt(2.0 / (n * std::abs(k) * R));
}

inline double default_sigma(const BoundaryWaveData& d) { return default_sigma(d.perimeter, d.n, d.k.real()); }

namespace detail {

/// Gaussian-weighted samples f_j g_j on the contiguous index window around s.
/// Indices run past the ends of the period so images appear as extra terms.
struct Window {
  long j0 = 0;
  double x0 = 0.0;
  double dx = 0.0;
  std::vector<cplx> a;
};

inline Window make_window(const std::vector<cplx>& f, double spacing, double s, double sigma, cplx scale = 1.0) {
  const long N = static_cast<long>(f.size());
  const double W = coherent_halfwidth(sigma);
  Window w;
  w.j0 = static_cast<long>(std::ceil((s - W) / spacing));
  const long j1 = static_cast<long>(std::floor((s + W) / spacing));
  w.dx = spacing;
  w.x0 = static_cast<double>(w.j0) * spacing - s;
  const double norm = std::pow(sigma * kPi, -0.25) * spacing;
  w.a.reserve(static_cast<std::size_t>(std::max(0L, j1 - w.j0 + 1)));
  for (long j = w.j0; j <= j1; ++j) {
    const double x = static_cast<double>(j) * spacing - s;
    const long idx = ((j % N) + N) % N;
    w.a.push_back(f[static_cast<std::size_t>(idx)] * scale * (norm * std::exp(-x * x / (2.0 * sigma))));
  }
  return w;
}

/// Trapezoid sum of a_j exp(-i k x_j), phases by recurrence, resynchronized
/// every 64 steps.
inline cplx window_overlap(const Window& w, double k_par) {
  const cplx step = std::polar(1.0, -k_par * w.dx);
  cplx sum{};
  cplx ph;
  for (std::size_t j = 0; j < w.a.size(); ++j) {
    if (j % 64 == 0) ph = std::polar(1.0, -k_par * (w.x0 + static_cast<double>(j) * w.dx));
    sum += w.a[j] * ph;
    ph *= step;
  }
  return sum;
}

}  // namespace detail

/// h(s, k_par) = closed-boundary integral of psi(S) xi(S; s, k_par).
inline cplx husimi_h(const BoundaryWaveData& d, double s, double k_par, double sigma) {
  d.validate();
  CoherentStateSpec{sigma, d.perimeter, k_par, s}.validate();
  return detail::window_overlap(detail::make_window(d.psi, d.spacing(), s, sigma), k_par);
}

/// Same as husimi_h with psi' in place of psi.
inline cplx husimi_hprime(const BoundaryWaveData& d, double s, double k_par, double sigma) {
  d.validate();
  CoherentStateSpec{sigma, d.perimeter, k_par, s}.validate();
  return detail::window_overlap(detail::make_window(d.dpsi, d.spacing(), s, sigma), k_par);
}

enum class HusimiSide { Inside, Outside };

enum class HusimiSheet { IncidentInside, EmergentInside, IncidentOutside, EmergentOutside };

inline std::string_view to_string(HusimiSheet s) {
  switch (s) {
    case HusimiSheet::IncidentInside: return "incident-inside";
    case HusimiSheet::EmergentInside: return "emergent-inside";
    case HusimiSheet::IncidentOutside: return "incident-outside";
    case HusimiSheet::EmergentOutside: return "emergent-outside";
  }
  return "unknown";
}

inline std::string_view to_string(HusimiSide s) { return s == HusimiSide::Inside ? "inside" : "outside"; }

struct HusimiGridSpec {
  int s_bins = 256;
  int p_bins = 256;
  std::optional<double> sigma;
  unsigned threads = 1;

  void validate() const {
    if (s_bins < 2 || p_bins < 2) throw DomainError("Husimi grid needs at least 2 x 2 cells");
    if (sigma && !(*sigma > 0.0)) throw DomainError("Husimi sigma must be positive");
  }
};

/// Cell (i, j) sits at s_norm = i / s_bins and at the cell-centered inside
/// angle sin chi = -1 + (j + 1/2) 2 / p_bins. Outside sheets use the same axis
/// with sin chi_out = n sin chi; cells with |sin chi_out| >= 1 hold kMaskedValue.
struct HusimiGrid {
  HusimiSheet sheet = HusimiSheet::IncidentInside;
  int s_bins = 0;
  int p_bins = 0;
  double k = 0.0;
  double n = 1.0;
  double sigma = 0.0;
  double perimeter = kTwoPi;
  std::vector<double> values;

  [[nodiscard]] double s_norm(int i) const { return static_cast<double>(i) / s_bins; }
  [[nodiscard]] double sin_chi(int j) const { return -1.0 + (j + 0.5) * 2.0 / p_bins; }
  [[nodiscard]] double sin_chi_out(int j) const { return n * sin_chi(j); }
  [[nodiscard]] double at(int i, int j) const { return values[static_cast<std::size_t>(i) * p_bins + j]; }
  [[nodiscard]] bool masked(int i, int j) const { return at(i, j) == kMaskedValue; }
  [[nodiscard]] bool outside() const {
    return sheet == HusimiSheet::IncidentOutside || sheet == HusimiSheet::EmergentOutside;
  }
};

struct HusimiPair {
  HusimiGrid incident;
  HusimiGrid emergent;
};

/// H = k / 2pi |-F h +(-) i / (k F) h'|^2 with F = sqrt(n_j cos chi_j),
/// + for incident and - for emergent. k is the real part of the vacuum wavenumber.
inline HusimiPair husimi_four(const BoundaryWaveData& d, const HusimiGridSpec& spec, HusimiSide side) {
  d.validate();
  spec.validate();
  const double k = std::abs(d.k.real());
  if (!(k > 0.0)) throw DomainError("Husimi transform needs Re k != 0");
  const double sigma = spec.sigma.value_or(default_sigma(d));
  const bool out = side == HusimiSide::Outside;
  // Outside normal derivative: continuous for TM, psi'/n^2 continuous for TE.
  const cplx dscale = out && d.pol == Polarization::TE ? 1.0 / (d.n * d.n) : 1.0;

  HusimiPair pair;
  for (auto* g : {&pair.incident, &pair.emergent}) {
    g->s_bins = spec.s_bins;
    g->p_bins = spec.p_bins;
    g->k = k;
    g->n = d.n;
    g->sigma = sigma;
    g->perimeter = d.perimeter;
    g->values.assign(static_cast<std::size_t>(spec.s_bins) * spec.p_bins, kMaskedValue);
  }
  pair.incident.sheet = out ? HusimiSheet::IncidentOutside : HusimiSheet::IncidentInside;
  pair.emergent.sheet = out ? HusimiSheet::EmergentOutside : HusimiSheet::EmergentInside;

  const double pref = k / kTwoPi;
  parallel_for(static_cast<std::size_t>(spec.s_bins), std::max(1u, spec.threads), [&](std::size_t i) {
    const double s = d.perimeter * static_cast<double>(i) / spec.s_bins;
    const auto wpsi = detail::make_window(d.psi, d.spacing(), s, sigma);
    const auto wdpsi = detail::make_window(d.dpsi, d.spacing(), s, sigma, dscale);
    for (int j = 0; j < spec.p_bins; ++j) {
      const double sin_in = pair.incident.sin_chi(j);
      const double sin_j = out ? d.n * sin_in : sin_in;
      const double n_j = out ? 1.0 : d.n;
      if (std::abs(sin_j) >= 1.0) continue;
      const double F = std::sqrt(n_j * std::sqrt(1.0 - sin_j * sin_j));
      const double k_par = d.n * k * sin_in;
      const cplx h = detail::window_overlap(wpsi, k_par);
      const cplx hp = detail::window_overlap(wdpsi, k_par);
      const cplx a = -F * h;
      const cplx b = cplx(0.0, 1.0) / (k * F) * hp;
      const std::size_t idx = i * static_cast<std::size_t>(spec.p_bins) + static_cast<std::size_t>(j);
      pair.incident.values[idx] = pref * std::norm(a + b);
      pair.emergent.values[idx] = pref * std::norm(a - b);
    }
  });
  return pair;
}

struct SheetSummary {
  double upper_mass = 0.0;  ///< sin chi > 0
  double lower_mass = 0.0;  ///< sin chi < 0
  double chirality = 0.0;   ///< upper / lower
  int peak_i = 0;
  int peak_j = 0;
  double peak_s_norm = 0.0;
  double peak_sin_chi = 0.0;
  double peak_value = 0.0;
  /// rms widths of the marginals around the peak (s_norm circular, sin chi
  /// within the peak lobe)
  double s_width = 0.0;
  double sin_chi_width = 0.0;
};

struct HusimiDiagnostics {
  SheetSummary incident;
  SheetSummary emergent;
};

inline SheetSummary summarize_sheet(const HusimiGrid& g) {
  SheetSummary r;
  double total = 0.0;
  std::vector<double> ms(static_cast<std::size_t>(g.s_bins), 0.0);
  std::vector<double> mp(static_cast<std::size_t>(g.p_bins), 0.0);
  for (int i = 0; i < g.s_bins; ++i) {
    for (int j = 0; j < g.p_bins; ++j) {
      if (g.masked(i, j)) continue;
      const double v = g.at(i, j);
      total += v;
      ms[i] += v;
      mp[j] += v;
      (g.sin_chi(j) > 0.0 ? r.upper_mass : r.lower_mass) += v;
      if (v > r.peak_value) {
        r.peak_value = v;
        r.peak_i = i;
        r.peak_j = j;
      }
    }
  }
  if (!(total > 0.0)) throw EmptyDiagnosticsError("Husimi sheet " + std::string(to_string(g.sheet)) + " has no weight");
  const double cell = (1.0 / g.s_bins) * (2.0 / g.p_bins);
  r.upper_mass *= cell;
  r.lower_mass *= cell;
  r.chirality = r.lower_mass > 0.0 ? r.upper_mass / r.lower_mass : std::numeric_limits<double>::infinity();
  r.peak_s_norm = g.s_norm(r.peak_i);
  r.peak_sin_chi = g.sin_chi(r.peak_j);

  // Momentum lobe: walk down from the peak until the marginal stops falling.
  int lo = r.peak_j;
  int hi = r.peak_j;
  while (lo > 0 && mp[lo - 1] < mp[lo] && mp[lo - 1] > 1e-3 * mp[r.peak_j]) --lo;
  while (hi + 1 < g.p_bins && mp[hi + 1] < mp[hi] && mp[hi + 1] > 1e-3 * mp[r.peak_j]) ++hi;
  double w = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;
  for (int j = lo; j <= hi; ++j) {
    w += mp[j];
    m1 += mp[j] * g.sin_chi(j);
    m2 += mp[j] * g.sin_chi(j) * g.sin_chi(j);
  }
  r.sin_chi_width = std::sqrt(std::max(0.0, m2 / w - (m1 / w) * (m1 / w)));

  double ws = 0.0;
  double s2 = 0.0;
  for (int i = 0; i < g.s_bins; ++i) {
    double ds = g.s_norm(i) - r.peak_s_norm;
    ds -= std::round(ds);
    ws += ms[i];
    s2 += ms[i] * ds * ds;
  }
  r.s_width = std::sqrt(s2 / ws);
  return r;
}

inline HusimiDiagnostics husimi_diagnostics(const HusimiPair& p) {
  return {summarize_sheet(p.incident), summarize_sheet(p.emergent)};
}

/// Multiplies psi and psi' by exp(i q S).
inline BoundaryWaveData with_linear_phase(const BoundaryWaveData& d, double q) {
  BoundaryWaveData out = d;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const cplx e = std::polar(1.0, q * d.arc_length(i));
    out.psi[i] *= e;
    out.dpsi[i] *= e;
  }
  return out;
}

}  // namespace phasespace

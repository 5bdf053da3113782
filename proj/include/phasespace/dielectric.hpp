// Ray dynamics in open dielectric cavities: Fresnel-weighted bounces,
// refractive escape, the steady probability distribution on the surface of
// section and the far-field emission pattern.
//
// Escape is modelled by deterministic intensity splitting: at every
// reflection the ray keeps intensity * R and emits intensity * (1 - R).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "phasespace/billiard.hpp"
#include "phasespace/fresnel.hpp"
#include "phasespace/parallel.hpp"
#include "phasespace/random.hpp"

namespace phasespace {

struct OpticalMedium {
  double n = 3.3;
  Polarization pol = Polarization::TE;

  OpticalMedium() = default;
  OpticalMedium(double index, Polarization p) : n(index), pol(p) {
    if (!(n >= 1.0) || !std::isfinite(n)) throw DomainError("refractive index must be >= 1");
  }
  [[nodiscard]] double critical_sin() const { return 1.0 / n; }
  [[nodiscard]] double reflectance(double sin_chi) const {
    const double s = std::min(1.0, std::abs(sin_chi));
    if (n * s >= 1.0) return 1.0;
    return std::min(1.0, std::norm(fresnel_amplitude(n, s, pol)));
  }
};

/// Direction angle in [0, 2pi) of the ray refracted out of the cavity at a
/// boundary point. sin_chi carries the circulation sign.
inline double refract_to_farfield(const BoundaryPoint& bp, double sin_chi, double n) {
  const double s_out = n * sin_chi;
  if (std::abs(s_out) >= 1.0) throw DomainError("total internal reflection: no refracted ray");
  const double c_out = std::sqrt(1.0 - s_out * s_out);
  const Vec2 d = bp.tangent * s_out + bp.normal * c_out;
  return wrap_angle(d.angle());
}

/// One trajectory with Fresnel weights; point i carries the intensity that
/// arrives at reflection i.
inline std::vector<PsosPoint> trace_weighted(const BoundaryShape& shape, const OpticalMedium& medium,
                                             const RayState& initial, long n_bounces) {
  if (n_bounces < 1) throw DomainError("trace needs at least one bounce");
  std::vector<PsosPoint> out;
  out.reserve(static_cast<std::size_t>(n_bounces));
  RayState st = initial;
  double intensity = 1.0;
  for (long i = 1; i <= n_bounces; ++i) {
    st = bounce(shape, st, nullptr, i);
    out.push_back(to_psos(shape, st, intensity));
    intensity *= medium.reflectance(st.sin_chi());
  }
  return out;
}

/// Launch measure: s uniform on the boundary, |sin chi| uniform in
/// [p_min, p_max], random sign.
struct LaunchBand {
  double p_min = 0.0;
  double p_max = 1.0;
};

/// Default launch band: just above the critical line.
inline LaunchBand confined_band(const OpticalMedium& m) { return {std::min(0.999, m.critical_sin() + 0.05), 0.999}; }

struct OpenRunConfig {
  OpticalMedium medium;
  long ensemble = 10000;
  long transient = 20;
  long record = 50;
  std::uint64_t seed = 1;
  LaunchBand band{-1.0, -1.0};  ///< negative: confined_band(medium)
  int s_bins = 100;
  int p_bins = 100;
  int theta_bins = 72;
  int batches = 20;
  unsigned threads = 1;
};

/// Flat row-major (s, p) histogram on [0,1) x [-1,1].
struct PsosHistogram {
  int s_bins = 0;
  int p_bins = 0;
  std::vector<double> mass;

  PsosHistogram() = default;
  PsosHistogram(int ns, int np) : s_bins(ns), p_bins(np), mass(static_cast<std::size_t>(ns) * np, 0.0) {}

  [[nodiscard]] double& at(int i, int j) { return mass[static_cast<std::size_t>(i) * p_bins + j]; }
  [[nodiscard]] double at(int i, int j) const { return mass[static_cast<std::size_t>(i) * p_bins + j]; }
  [[nodiscard]] double total() const { return std::accumulate(mass.begin(), mass.end(), 0.0); }
  [[nodiscard]] double p_center(int j) const { return -1.0 + (j + 0.5) * 2.0 / p_bins; }
  [[nodiscard]] double s_center(int i) const { return (i + 0.5) / s_bins; }

  void deposit(double s_norm, double p, double w) {
    const int i = std::clamp(static_cast<int>(s_norm * s_bins), 0, s_bins - 1);
    const int j = std::clamp(static_cast<int>((p + 1.0) * 0.5 * p_bins), 0, p_bins - 1);
    at(i, j) += w;
  }
  void add(const PsosHistogram& o) {
    for (std::size_t k = 0; k < mass.size(); ++k) mass[k] += o.mass[k];
  }
  void normalize() {
    const double t = total();
    if (t > 0.0)
      for (auto& v : mass) v /= t;
  }
};

struct FarFieldHistogram {
  std::vector<double> intensity;

  [[nodiscard]] int bins() const { return static_cast<int>(intensity.size()); }
  [[nodiscard]] double total() const { return std::accumulate(intensity.begin(), intensity.end(), 0.0); }
  [[nodiscard]] double theta_center(int j) const { return (j + 0.5) * kTwoPi / bins(); }
  void deposit(double theta, double w) {
    const int j = std::clamp(static_cast<int>(theta / kTwoPi * bins()), 0, bins() - 1);
    intensity[static_cast<std::size_t>(j)] += w;
  }
};

/// Number of bins in a 90 degree window.
inline int quarter_window(int bins) { return std::max(1, static_cast<int>(std::lround(bins / 4.0))); }

/// Share of emitted intensity in the 90 degree window starting at bin `start`.
inline double window_fraction(const FarFieldHistogram& ff, int start) {
  const int nb = ff.bins();
  const double tot = ff.total();
  if (nb == 0 || !(tot > 0.0)) return 0.0;
  double sum = 0.0;
  for (int k = 0; k < quarter_window(nb); ++k) sum += ff.intensity[static_cast<std::size_t>((start + k) % nb)];
  return sum / tot;
}

/// First bin of the brightest 90 degree window.
inline int best_window(const FarFieldHistogram& ff) {
  int best = 0;
  double best_val = -1.0;
  for (int start = 0; start < ff.bins(); ++start) {
    const double v = window_fraction(ff, start);
    if (v > best_val) {
      best_val = v;
      best = start;
    }
  }
  return best;
}

/// Share of emitted intensity in the best 90 degree window.
inline double directionality(const FarFieldHistogram& ff) { return window_fraction(ff, best_window(ff)); }

struct IntensityAudit {
  double launched = 0.0;
  double emitted = 0.0;  ///< transient and recorded emission together
  double surviving = 0.0;
  long terminated = 0;  ///< rays stopped by grazing incidence

  [[nodiscard]] double relative_error() const {
    return launched > 0.0 ? std::abs(launched - emitted - surviving) / launched : 0.0;
  }
};

struct OpenRunResult {
  PsosHistogram steady;  ///< normalized to unit mass
  FarFieldHistogram farfield;
  double U = 0.0;
  double U_sigma = 0.0;  ///< batch standard error of the intensity fraction in the selected window
  double U_spread = 0.0;  ///< batch standard error of the max-window statistic itself
  int window_start = 0;
  std::vector<double> farfield_sigma;  ///< per-bin standard error of the normalized pattern
  IntensityAudit audit;
  double intensity_at_record = 0.0;
};

namespace detail {

struct OpenPartial {
  PsosHistogram steady;
  FarFieldHistogram farfield;
  IntensityAudit audit;
  double intensity_at_record = 0.0;
  std::vector<FarFieldHistogram> batches;
};

inline OpenPartial run_open_chunk(const BoundaryShape& shape, const OpenRunConfig& cfg, LaunchBand band,
                                  std::size_t begin, std::size_t end) {
  OpenPartial part;
  part.steady = PsosHistogram(cfg.s_bins, cfg.p_bins);
  part.farfield.intensity.assign(static_cast<std::size_t>(cfg.theta_bins), 0.0);
  const OpticalMedium& med = cfg.medium;
  const double L = shape.perimeter();
  for (std::size_t t = begin; t < end; ++t) {
    CounterStream rng(cfg.seed, t);
    const double s0 = rng.uniform() * L;
    const double pa = rng.uniform(band.p_min, band.p_max);
    const double p0 = rng.uniform() < 0.5 ? -pa : pa;
    RayState st = launch_birkhoff(shape, s0, p0);
    double intensity = 1.0;
    part.audit.launched += 1.0;
    const long total = cfg.transient + cfg.record;
    for (long i = 1; i <= total; ++i) {
      if (i == cfg.transient + 1) part.intensity_at_record += intensity;
      try {
        st = bounce(shape, st, nullptr, i);
      } catch (const GrazingError&) {
        ++part.audit.terminated;
        break;
      }
      const double p = st.sin_chi();
      const bool recording = i > cfg.transient;
      if (recording) part.steady.deposit(to_psos(shape, st).s_norm, p, intensity);
      const double R = med.reflectance(p);
      if (R < 1.0) {
        const double out = intensity * (1.0 - R);
        part.audit.emitted += out;
        if (recording) part.farfield.deposit(refract_to_farfield(st.point, p, med.n), out);
      }
      intensity *= R;
    }
    part.audit.surviving += intensity;
  }
  return part;
}

}  // namespace detail

/// Full open-cavity ensemble run; steady_distribution and farfield_emission
/// are views on its result.
inline OpenRunResult run_open_ensemble(const BoundaryShape& shape, const OpenRunConfig& cfg) {
  if (cfg.ensemble < 1) throw DomainError("ensemble must be positive");
  if (cfg.transient < 0 || cfg.record < 1) throw DomainError("transient must be >= 0 and record >= 1");
  if (cfg.s_bins < 1 || cfg.p_bins < 1 || cfg.theta_bins < 4) throw DomainError("histogram bin counts too small");
  LaunchBand band = cfg.band;
  if (band.p_min < 0.0) band = confined_band(cfg.medium);
  if (!(band.p_min >= 0.0 && band.p_max <= 1.0 && band.p_min <= band.p_max)) throw DomainError("invalid launch band");

  const auto n = static_cast<std::size_t>(cfg.ensemble);
  const auto n_batches = static_cast<std::size_t>(std::max(1, std::min<int>(cfg.batches, static_cast<int>(cfg.ensemble))));
  const std::size_t chunk = (n + n_batches - 1) / n_batches;

  detail::OpenPartial init;
  init.steady = PsosHistogram(cfg.s_bins, cfg.p_bins);
  init.farfield.intensity.assign(static_cast<std::size_t>(cfg.theta_bins), 0.0);

  auto merged = chunked_reduce(
      n, chunk, cfg.threads, init,
      [&](std::size_t b, std::size_t e) { return detail::run_open_chunk(shape, cfg, band, b, e); },
      [](detail::OpenPartial& acc, const detail::OpenPartial& p) {
        acc.steady.add(p.steady);
        for (std::size_t k = 0; k < acc.farfield.intensity.size(); ++k) acc.farfield.intensity[k] += p.farfield.intensity[k];
        acc.audit.launched += p.audit.launched;
        acc.audit.emitted += p.audit.emitted;
        acc.audit.surviving += p.audit.surviving;
        acc.audit.terminated += p.audit.terminated;
        acc.intensity_at_record += p.intensity_at_record;
        acc.batches.push_back(p.farfield);
      });

  if (!(merged.intensity_at_record > 1e-12)) {
    throw EmptyDistributionError("all ray intensity decayed below 1e-12 before recording (launched " +
                                 std::to_string(merged.audit.launched) + ", emitted " +
                                 std::to_string(merged.audit.emitted) + ")");
  }

  OpenRunResult res;
  res.steady = std::move(merged.steady);
  res.steady.normalize();
  res.farfield = std::move(merged.farfield);
  res.audit = merged.audit;
  res.intensity_at_record = merged.intensity_at_record;
  res.window_start = best_window(res.farfield);
  res.U = window_fraction(res.farfield, res.window_start);

  const std::size_t B = merged.batches.size();
  res.farfield_sigma.assign(res.farfield.intensity.size(), 0.0);
  if (B > 1) {
    std::vector<double> us;
    std::vector<double> fixed;
    std::vector<std::vector<double>> norm_bins;
    for (const auto& b : merged.batches) {
      const double tot = b.total();
      if (!(tot > 0.0)) continue;
      us.push_back(directionality(b));
      fixed.push_back(window_fraction(b, res.window_start));
      std::vector<double> nb(b.intensity.size());
      for (std::size_t k = 0; k < nb.size(); ++k) nb[k] = b.intensity[k] / tot;
      norm_bins.push_back(std::move(nb));
    }
    const auto m = static_cast<double>(us.size());
    if (us.size() > 1) {
      const auto std_error = [m](const std::vector<double>& v) {
        const double mu = std::accumulate(v.begin(), v.end(), 0.0) / m;
        double var = 0.0;
        for (double u : v) var += (u - mu) * (u - mu);
        return std::sqrt(var / (m - 1.0) / m);
      };
      res.U_sigma = std_error(fixed);
      res.U_spread = std_error(us);
      for (std::size_t k = 0; k < res.farfield_sigma.size(); ++k) {
        double mk = 0.0;
        for (const auto& nb : norm_bins) mk += nb[k];
        mk /= m;
        double vk = 0.0;
        for (const auto& nb : norm_bins) vk += (nb[k] - mk) * (nb[k] - mk);
        res.farfield_sigma[k] = std::sqrt(vk / (m - 1.0) / m);
      }
    }
  }
  return res;
}

inline PsosHistogram steady_distribution(const BoundaryShape& shape, const OpenRunConfig& cfg) {
  if (cfg.ensemble < 1000) throw DomainError("steady distribution needs an ensemble of at least 1000 rays");
  if (cfg.transient < 10) throw DomainError("steady distribution needs a transient of at least 10 bounces");
  return run_open_ensemble(shape, cfg).steady;
}

struct FarFieldResult {
  FarFieldHistogram histogram;
  double U = 0.0;
  double U_sigma = 0.0;
  IntensityAudit audit;
};

inline FarFieldResult farfield_emission(const BoundaryShape& shape, const OpenRunConfig& cfg) {
  if (cfg.ensemble < 1000) throw DomainError("far-field emission needs an ensemble of at least 1000 rays");
  if (cfg.transient < 10) throw DomainError("far-field emission needs a transient of at least 10 bounces");
  auto r = run_open_ensemble(shape, cfg);
  return {std::move(r.farfield), r.U, r.U_sigma, r.audit};
}

/// Mass fraction of the leaky band |p| < 1/n held by its top `fraction` of
/// cells; near `fraction` for a flat distribution, near 1 for filaments.
inline double leaky_concentration(const PsosHistogram& h, double n, double fraction = 0.1) {
  std::vector<double> cells;
  for (int i = 0; i < h.s_bins; ++i)
    for (int j = 0; j < h.p_bins; ++j)
      if (std::abs(h.p_center(j)) < 1.0 / n) cells.push_back(h.at(i, j));
  const double tot = std::accumulate(cells.begin(), cells.end(), 0.0);
  if (cells.empty() || !(tot > 0.0)) return 0.0;
  std::sort(cells.begin(), cells.end(), std::greater<>());
  const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(cells.size()))));
  return std::accumulate(cells.begin(), cells.begin() + static_cast<long>(k), 0.0) / tot;
}

/// Leaky-band part of the histogram, renormalized to unit mass.
inline std::vector<double> leaky_region(const PsosHistogram& h, double n) {
  std::vector<double> out;
  for (int i = 0; i < h.s_bins; ++i)
    for (int j = 0; j < h.p_bins; ++j)
      if (std::abs(h.p_center(j)) < 1.0 / n) out.push_back(h.at(i, j));
  const double tot = std::accumulate(out.begin(), out.end(), 0.0);
  if (tot > 0.0)
    for (auto& v : out) v /= tot;
  return out;
}

/// Total-variation distance between two equally shaped distributions.
inline double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < std::min(a.size(), b.size()); ++k) d += std::abs(a[k] - b[k]);
  return 0.5 * d;
}

/// Marginal over p for each s bin.
inline std::vector<double> s_marginal(const PsosHistogram& h) {
  std::vector<double> out(static_cast<std::size_t>(h.s_bins), 0.0);
  for (int i = 0; i < h.s_bins; ++i)
    for (int j = 0; j < h.p_bins; ++j) out[static_cast<std::size_t>(i)] += h.at(i, j);
  return out;
}

inline double coefficient_of_variation(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const double mu = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mu) * (x - mu);
  return mu != 0.0 ? std::sqrt(var / static_cast<double>(v.size())) / std::abs(mu) : 0.0;
}

}  // namespace phasespace

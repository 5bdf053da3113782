// Subcommand runner. run() computes every output in memory; the caller
// commits them. Outputs depend only on the config (including the seed), never
// on thread count, paths or timing.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "phasespace/anisotropic.hpp"
#include "phasespace/beam.hpp"
#include "phasespace/billiard.hpp"
#include "phasespace/config.hpp"
#include "phasespace/dielectric.hpp"
#include "phasespace/disk.hpp"
#include "phasespace/husimi.hpp"
#include "phasespace/io.hpp"
#include "phasespace/parallel.hpp"

#ifndef PHASESPACE_VERSION
#define PHASESPACE_VERSION "unknown"
#endif

namespace phasespace {

struct RunContext {
  unsigned threads = 0;  ///< 0: hardware concurrency
  std::filesystem::path input_dir;  ///< base for relative input paths

  [[nodiscard]] unsigned worker_count() const { return threads == 0 ? default_threads() : threads; }
};

struct RunOutput {
  std::vector<Artifact> files;  ///< summary.json last
  Json summary;
};

namespace detail {

struct TrajectoryRecord {
  std::vector<PsosPoint> points;
  long failed_at = 0;  ///< 0: completed
  std::string failure;
};

inline Json failures_json(const std::vector<TrajectoryRecord>& recs) {
  Json out = Json::array();
  for (std::size_t t = 0; t < recs.size(); ++t)
    if (recs[t].failed_at > 0)
      out.push_back({{"traj_id", t}, {"bounce", recs[t].failed_at}, {"reason", recs[t].failure}});
  return out;
}

inline Artifact psos_csv(const std::string& schema, const Json& meta, const std::vector<TrajectoryRecord>& recs) {
  CsvWriter w(schema, meta, {"traj_id", "bounce", "s_norm", "p", "weight"});
  for (std::size_t t = 0; t < recs.size(); ++t)
    for (std::size_t b = 0; b < recs[t].points.size(); ++b) {
      const auto& pt = recs[t].points[b];
      w.row(t, b + 1, pt.s_norm, pt.p, pt.weight);
    }
  return {"psos.csv", w.str()};
}

inline Json shape_meta(const RunConfig& c) {
  Json h = Json::array();
  for (const auto& x : c.shape.harmonics) h.push_back(Json::array({x.m, x.eps}));
  return {{"R0", c.shape.R0}, {"harmonics", h}};
}

inline void run_psos(const RunConfig& c, const RunContext& ctx, RunOutput& out) {
  const auto shape = c.shape.build();
  const auto launches = c.launches.resolve();
  std::vector<TrajectoryRecord> recs(launches.size());
  parallel_for(launches.size(), ctx.worker_count(), [&](std::size_t t) {
    auto& r = recs[t];
    r.points.reserve(static_cast<std::size_t>(c.n_bounces));
    RayState st = launch_birkhoff(shape, launches[t][0] * shape.perimeter(), launches[t][1]);
    for (long i = 1; i <= c.n_bounces; ++i) {
      try {
        st = bounce(shape, st, nullptr, i);
      } catch (const GrazingError& e) {
        r.failed_at = i;
        r.failure = e.what();
        return;
      }
      r.points.push_back(to_psos(shape, st));
    }
  });
  Json meta = {{"shape", shape_meta(c)}, {"p", "sin_chi"}};
  out.files.push_back(psos_csv("phasespace.psos", meta, recs));
  out.summary["results"] = {{"trajectories", recs.size()}, {"terminated", failures_json(recs)}};
}

inline void run_psos_aniso(const RunConfig& c, const RunContext& ctx, RunOutput& out) {
  const auto shape = c.shape.build();
  const auto contour = c.contour.build();
  const auto launches = c.launches.resolve();
  std::vector<TrajectoryRecord> recs(launches.size());
  parallel_for(launches.size(), ctx.worker_count(), [&](std::size_t t) {
    auto& r = recs[t];
    AnisoRayState st;
    try {
      st = aniso_launch(shape, contour, shape.arc_length_inverse(launches[t][0] * shape.perimeter()), launches[t][1]);
    } catch (const DomainError& e) {
      r.failed_at = 1;
      r.failure = std::string("launch: ") + e.what();
      return;
    }
    auto res = aniso_trace_recorded(shape, contour, st, c.n_bounces);
    r.points = std::move(res.points);
    if (res.failed_at) {
      r.failed_at = *res.failed_at;
      r.failure = res.failure;
    }
  });
  Json h = Json::array();
  for (const auto& x : c.contour.harmonics) h.push_back(Json::array({x.m, x.beta, x.delta}));
  Json meta = {{"shape", shape_meta(c)},
               {"contour", {{"k0", c.contour.k0}, {"harmonics", h}, {"k_max", contour.k_max()}}},
               {"p", "k_par/k_max"}};
  out.files.push_back(psos_csv("phasespace.psos", meta, recs));
  out.summary["results"] = {
      {"trajectories", recs.size()}, {"k_max", contour.k_max()}, {"terminated", failures_json(recs)}};
}

inline void run_open(const RunConfig& c, const RunContext& ctx, RunOutput& out) {
  const auto shape = c.shape.build();
  const auto cfg = c.open_run(ctx.worker_count());
  const auto r = run_open_ensemble(shape, cfg);
  const auto band = cfg.band.p_min < 0.0 ? confined_band(cfg.medium) : cfg.band;
  Json meta = {{"shape", shape_meta(c)},
               {"n", c.medium.n},
               {"pol", std::string(to_string(c.medium.pol))},
               {"seed", c.seed}};
  if (c.subcommand == Subcommand::Steady) {
    CsvWriter w("phasespace.steady", meta, {"s_bin", "p_bin", "mass", "s_norm", "p"});
    for (int i = 0; i < r.steady.s_bins; ++i)
      for (int j = 0; j < r.steady.p_bins; ++j) w.row(i, j, r.steady.at(i, j), r.steady.s_center(i), r.steady.p_center(j));
    out.files.push_back({"steady.csv", w.str()});
  } else {
    CsvWriter w("phasespace.farfield", meta, {"theta_bin", "intensity", "theta", "sigma"});
    const double tot = r.farfield.total();
    for (int j = 0; j < r.farfield.bins(); ++j)
      w.row(j, tot > 0.0 ? r.farfield.intensity[static_cast<std::size_t>(j)] / tot : 0.0, r.farfield.theta_center(j),
            r.farfield_sigma.empty() ? 0.0 : r.farfield_sigma[static_cast<std::size_t>(j)]);
    out.files.push_back({"farfield.csv", w.str()});
  }
  out.summary["results"] = {
      {"U", r.U},
      {"U_sigma", r.U_sigma},
      {"window_start_deg", r.farfield.bins() > 0 ? 360.0 * r.window_start / r.farfield.bins() : 0.0},
      {"leaky_concentration", leaky_concentration(r.steady, c.medium.n)},
      {"launch_band", Json::array({band.p_min, band.p_max})}};
  out.summary["audits"] = {{"intensity_launched", r.audit.launched},
                           {"intensity_emitted", r.audit.emitted},
                           {"intensity_surviving", r.audit.surviving},
                           {"relative_error", r.audit.relative_error()},
                           {"terminated_rays", r.audit.terminated}};
}

inline void run_disk_modes(const RunConfig& c, const RunContext& ctx, RunOutput& out) {
  const auto& d = c.disk;
  const int count = d.m_max - d.m_min + 1;
  struct Slot {
    std::optional<ComplexResonance> res;
    std::string error;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(count));
  parallel_for(slots.size(), ctx.worker_count(), [&](std::size_t i) {
    try {
      slots[i].res = find_disk_resonance(d.m_min + static_cast<int>(i), d.n, d.pol, d.radial_order);
    } catch (const ConvergenceError& e) {
      slots[i].error = e.what();
    }
  });
  Json list = Json::array();
  Json failures = Json::array();
  double worst = 0.0;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const int m = d.m_min + static_cast<int>(i);
    if (!slots[i].res) {
      failures.push_back({{"m", m}, {"reason", slots[i].error}});
      continue;
    }
    const auto& r = *slots[i].res;
    worst = std::max(worst, r.residual);
    list.push_back({{"m", r.m},
                    {"radial_order", r.radial_order},
                    {"re_kR0", r.kR0.real()},
                    {"im_kR0", r.kR0.imag()},
                    {"Q", q_factor(r.kR0)},
                    {"sin_chi", resonance_sin_chi(r)},
                    {"R_generalized", generalized_fresnel(r)},
                    {"residual", r.residual}});
  }
  if (list.empty()) throw ConvergenceError("no disk resonance converged in the requested range");
  Json doc = {{"schema", "phasespace.disk_modes"},
              {"version", kOutputSchemaVersion},
              {"n", d.n},
              {"pol", std::string(to_string(d.pol))},
              {"resonances", list},
              {"failures", failures}};
  out.files.push_back({"disk_modes.json", doc.dump(2) + "\n"});
  Json dumps = Json::array();
  for (int m : d.dump_m) {
    const auto& slot = slots[static_cast<std::size_t>(m - d.m_min)];
    if (!slot.res) throw ConvergenceError("cannot dump m = " + std::to_string(m) + ": " + slot.error);
    const std::size_t minimum = disk_minimum_samples(*slot.res);
    const std::size_t N = d.samples == 0 ? std::max<std::size_t>(512, minimum) : static_cast<std::size_t>(d.samples);
    if (N < minimum)
      throw SamplingError("disk.samples = " + std::to_string(N) + " is below the minimum " + std::to_string(minimum) +
                          " for m = " + std::to_string(m));
    const std::string name = "wave_m" + std::to_string(m) + "_q" + std::to_string(d.radial_order) + ".csv";
    out.files.push_back({name, boundary_wave_csv(disk_boundary_wave(*slot.res, N))});
    dumps.push_back(name);
  }
  out.summary["results"] = {
      {"resonances", list.size()}, {"failures", failures.size()}, {"max_residual", worst}, {"wave_files", dumps}};
}

inline Json sheet_json(const SheetSummary& s) {
  return {{"upper_mass", s.upper_mass},       {"lower_mass", s.lower_mass},       {"chirality", s.chirality},
          {"peak_s_norm", s.peak_s_norm},     {"peak_sin_chi", s.peak_sin_chi},   {"peak_value", s.peak_value},
          {"s_width", s.s_width},             {"sin_chi_width", s.sin_chi_width}};
}

inline Artifact husimi_csv(const HusimiGrid& g) {
  Json meta = {{"sheet", std::string(to_string(g.sheet))}, {"k", g.k},         {"n", g.n},
               {"sigma", g.sigma},                         {"perimeter", g.perimeter}, {"masked_value", kMaskedValue}};
  const bool out_sheet = g.outside();
  std::vector<std::string> cols = {"s_bin", "p_bin", "s_norm", "sin_chi", "value"};
  if (out_sheet) cols.push_back("sin_chi_out");
  CsvWriter w("phasespace.husimi", meta, cols);
  for (int i = 0; i < g.s_bins; ++i)
    for (int j = 0; j < g.p_bins; ++j) {
      if (out_sheet)
        w.row(i, j, g.s_norm(i), g.sin_chi(j), g.at(i, j), g.sin_chi_out(j));
      else
        w.row(i, j, g.s_norm(i), g.sin_chi(j), g.at(i, j));
    }
  return {"husimi_" + std::string(to_string(g.sheet)) + ".csv", w.str()};
}

inline void run_husimi(const RunConfig& c, const RunContext& ctx, RunOutput& out) {
  std::filesystem::path in = c.husimi.input;
  if (in.is_relative()) in = ctx.input_dir / in;
  const auto data = read_boundary_wave(in);
  HusimiGridSpec spec;
  spec.s_bins = c.husimi.s_bins;
  spec.p_bins = c.husimi.p_bins;
  spec.sigma = c.husimi.sigma;
  spec.threads = ctx.worker_count();
  std::vector<HusimiSide> sides;
  if (c.husimi.side != "outside") sides.push_back(HusimiSide::Inside);
  if (c.husimi.side != "inside") sides.push_back(HusimiSide::Outside);
  Json diag = {{"schema", "phasespace.husimi_diagnostics"}, {"version", kOutputSchemaVersion}};
  Json sheets = Json::object();
  for (auto side : sides) {
    const auto pair = husimi_four(data, spec, side);
    const auto dg = husimi_diagnostics(pair);
    out.files.push_back(husimi_csv(pair.incident));
    out.files.push_back(husimi_csv(pair.emergent));
    sheets[std::string(to_string(pair.incident.sheet))] = sheet_json(dg.incident);
    sheets[std::string(to_string(pair.emergent.sheet))] = sheet_json(dg.emergent);
    diag["sigma"] = pair.incident.sigma;
  }
  diag["k"] = data.k.real();
  diag["n"] = data.n;
  diag["sheets"] = sheets;
  out.files.push_back({"husimi_diagnostics.json", diag.dump(2) + "\n"});
  out.summary["results"] = {{"samples", data.size()}, {"sigma", diag["sigma"]}, {"sheets", sheets}};
}

inline void run_beam(const RunConfig& c, const RunContext& ctx, RunOutput& out) {
  const auto& b = c.beam;
  BeamSpec spec;
  spec.k = kTwoPi;
  spec.waist = b.waist_lambda;
  spec.n = b.n;
  spec.pol = b.pol;
  const double base = b.relative_to_critical ? b.critical_angle() : 0.0;
  std::vector<ShiftScanRow> rows;
  if (b.chi0) {
    spec.chi0 = base + *b.chi0;
    rows.push_back({spec.chi0, beam_reflection_shifts(spec, b.points)});
  } else {
    rows = shift_scan(spec, base + b.scan.from, base + b.scan.to, b.scan.count, ctx.worker_count(), b.points);
  }
  Json meta = {{"n", b.n}, {"pol", std::string(to_string(b.pol))}, {"waist_lambda", b.waist_lambda},
               {"critical_angle", b.critical_angle()}};
  CsvWriter w("phasespace.beam_shifts", meta,
              {"chi0", "zGH_over_lambda", "delta_chi", "energy_defect", "truncated_fraction"});
  double worst = 0.0;
  Json warnings = Json::array();
  std::size_t iz = 0;
  std::size_t id = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& s = rows[i].shifts;
    w.row(rows[i].chi0, s.z_gh_over_lambda, s.delta_chi, s.energy_defect(), s.truncated_fraction);
    worst = std::max(worst, s.energy_defect());
    if (s.warning) warnings.push_back({{"chi0", rows[i].chi0}, {"warning", *s.warning}});
    if (s.z_gh > rows[iz].shifts.z_gh) iz = i;
    if (s.delta_chi > rows[id].shifts.delta_chi) id = i;
  }
  out.files.push_back({"beam_shifts.csv", w.str()});
  out.summary["results"] = {{"critical_angle", b.critical_angle()},
                            {"zGH_peak_chi0", rows[iz].chi0},
                            {"zGH_peak_over_lambda", rows[iz].shifts.z_gh_over_lambda},
                            {"delta_chi_peak_chi0", rows[id].chi0},
                            {"delta_chi_peak", rows[id].shifts.delta_chi},
                            {"warnings", warnings}};
  out.summary["audits"] = {{"max_energy_defect", worst}};
}

inline void run_lyapunov(const RunConfig& c, const RunContext& ctx, RunOutput& out) {
  const auto shape = c.shape.build();
  const auto launches = c.launches.resolve();
  std::vector<LyapunovResult> res(launches.size());
  parallel_for(launches.size(), ctx.worker_count(), [&](std::size_t t) {
    res[t] = lyapunov(shape, launch_birkhoff(shape, launches[t][0] * shape.perimeter(), launches[t][1]), c.n_bounces,
                      c.lyapunov.delta0);
  });
  CsvWriter w("phasespace.lyapunov", {{"shape", shape_meta(c)}, {"n_bounces", c.n_bounces}},
              {"traj_id", "s_norm", "p", "exponent", "mean_free_path", "bounces_used", "skipped", "quality_warning"});
  double sum = 0.0;
  double sum2 = 0.0;
  for (std::size_t t = 0; t < res.size(); ++t) {
    w.row(t, launches[t][0], launches[t][1], res[t].exponent, res[t].mean_free_path, res[t].bounces_used,
          res[t].skipped, res[t].quality_warning ? 1 : 0);
    sum += res[t].exponent;
    sum2 += res[t].exponent * res[t].exponent;
  }
  const double N = static_cast<double>(res.size());
  const double mean = sum / N;
  const double var = N > 1 ? std::max(0.0, (sum2 - N * mean * mean) / (N - 1)) : 0.0;
  out.files.push_back({"lyapunov.csv", w.str()});
  out.summary["results"] = {
      {"trajectories", res.size()}, {"mean_exponent", mean}, {"standard_error", std::sqrt(var / N)}};
}

}  // namespace detail

inline RunOutput run(const RunConfig& c, const RunContext& ctx = {}) {
  RunOutput out;
  out.summary["schema"] = "phasespace.summary";
  out.summary["version"] = kOutputSchemaVersion;
  out.summary["phasespace_version"] = PHASESPACE_VERSION;
  out.summary["json_library"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH);
  out.summary["subcommand"] = std::string(to_string(c.subcommand));
  out.summary["seed"] = c.seed;
  out.summary["config"] = to_json(c);
  switch (c.subcommand) {
    case Subcommand::Psos: detail::run_psos(c, ctx, out); break;
    case Subcommand::PsosAniso: detail::run_psos_aniso(c, ctx, out); break;
    case Subcommand::Steady:
    case Subcommand::Farfield: detail::run_open(c, ctx, out); break;
    case Subcommand::DiskModes: detail::run_disk_modes(c, ctx, out); break;
    case Subcommand::Husimi: detail::run_husimi(c, ctx, out); break;
    case Subcommand::BeamShifts: detail::run_beam(c, ctx, out); break;
    case Subcommand::Lyapunov: detail::run_lyapunov(c, ctx, out); break;
  }
  Json names = Json::array();
  for (const auto& f : out.files) names.push_back(f.name);
  names.push_back("summary.json");
  out.summary["outputs"] = names;
  out.files.push_back({"summary.json", out.summary.dump(2) + "\n"});
  return out;
}

}  // namespace phasespace

// Run configuration: JSON text in, validated record out. Every key is checked
// against the sections its subcommand uses; errors carry the key path.
#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "phasespace/anisotropic.hpp"
#include "phasespace/beam.hpp"
#include "phasespace/core.hpp"
#include "phasespace/dielectric.hpp"
#include "phasespace/geometry.hpp"

namespace phasespace {

using Json = nlohmann::ordered_json;

inline constexpr int kConfigSchemaVersion = 1;

class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& what)
      : Error((path.empty() ? std::string("<root>") : path) + ": " + what), path_(std::move(path)) {}
  [[nodiscard]] const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class Subcommand { Psos, PsosAniso, Steady, Farfield, DiskModes, Husimi, BeamShifts, Lyapunov };

inline constexpr std::array<Subcommand, 8> kSubcommands = {Subcommand::Psos,      Subcommand::PsosAniso,
                                                           Subcommand::Steady,    Subcommand::Farfield,
                                                           Subcommand::DiskModes, Subcommand::Husimi,
                                                           Subcommand::BeamShifts, Subcommand::Lyapunov};

inline std::string_view to_string(Subcommand s) {
  switch (s) {
    case Subcommand::Psos: return "psos";
    case Subcommand::PsosAniso: return "psos-aniso";
    case Subcommand::Steady: return "steady";
    case Subcommand::Farfield: return "farfield";
    case Subcommand::DiskModes: return "disk-modes";
    case Subcommand::Husimi: return "husimi";
    case Subcommand::BeamShifts: return "beam-shifts";
    case Subcommand::Lyapunov: return "lyapunov";
  }
  return "?";
}

inline std::optional<Subcommand> parse_subcommand(std::string_view s) {
  for (auto c : kSubcommands)
    if (to_string(c) == s) return c;
  return std::nullopt;
}

struct ShapeConfig {
  double R0 = 1.0;
  std::vector<Harmonic> harmonics;
  bool operator==(const ShapeConfig&) const = default;
  [[nodiscard]] BoundaryShape build() const { return BoundaryShape(R0, harmonics); }
};

struct MediumConfig {
  double n = 3.3;
  Polarization pol = Polarization::TE;
  bool operator==(const MediumConfig&) const = default;
};

/// Launch points in Birkhoff coordinates (s_norm, p). An explicit point list
/// wins over the grid.
struct LaunchConfig {
  int s_count = 8;
  int p_count = 8;
  double p_min = -0.9;
  double p_max = 0.9;
  std::vector<std::array<double, 2>> points;
  bool operator==(const LaunchConfig&) const = default;

  [[nodiscard]] std::vector<std::array<double, 2>> resolve() const {
    if (!points.empty()) return points;
    std::vector<std::array<double, 2>> out;
    out.reserve(static_cast<std::size_t>(s_count) * p_count);
    for (int i = 0; i < s_count; ++i)
      for (int j = 0; j < p_count; ++j)
        out.push_back({static_cast<double>(i) / s_count, p_min + (j + 0.5) * (p_max - p_min) / p_count});
    return out;
  }
};

struct ContourConfig {
  double k0 = 1.0;
  std::vector<ContourHarmonic> harmonics;
  bool operator==(const ContourConfig& o) const {
    if (k0 != o.k0 || harmonics.size() != o.harmonics.size()) return false;
    for (std::size_t i = 0; i < harmonics.size(); ++i)
      if (harmonics[i].m != o.harmonics[i].m || harmonics[i].beta != o.harmonics[i].beta ||
          harmonics[i].delta != o.harmonics[i].delta)
        return false;
    return true;
  }
  [[nodiscard]] FermiContour build() const { return FermiContour(k0, harmonics); }
};

struct OpenConfig {
  long ensemble = 10000;
  long transient = 20;
  long record = 50;
  std::optional<std::array<double, 2>> band;
  int s_bins = 100;
  int p_bins = 100;
  int theta_bins = 72;
  int batches = 20;
  bool operator==(const OpenConfig&) const = default;
};

struct DiskConfig {
  int m_min = 10;
  int m_max = 30;
  double n = 3.3;
  Polarization pol = Polarization::TM;
  int radial_order = 1;
  std::vector<int> dump_m;
  int samples = 0;  ///< 0: automatic
  bool operator==(const DiskConfig&) const = default;
};

struct HusimiConfig {
  std::string input;
  int s_bins = 256;
  int p_bins = 256;
  std::optional<double> sigma;
  std::string side = "both";
  bool operator==(const HusimiConfig&) const = default;
};

struct BeamScan {
  double from = -0.3;
  double to = 0.3;
  int count = 121;
  bool operator==(const BeamScan&) const = default;
};

struct BeamConfig {
  double n = 1.54;
  Polarization pol = Polarization::TM;
  double waist_lambda = 5.0;
  std::optional<double> chi0;
  BeamScan scan;
  bool relative_to_critical = true;
  int points = kBeamGridPoints;
  bool operator==(const BeamConfig&) const = default;

  [[nodiscard]] double critical_angle() const { return std::asin(1.0 / n); }
};

struct LyapunovConfig {
  std::optional<double> delta0;
  bool operator==(const LyapunovConfig&) const = default;
};

struct RunConfig {
  Subcommand subcommand = Subcommand::Psos;
  std::uint64_t seed = 1;
  long n_bounces = 1000;
  ShapeConfig shape;
  MediumConfig medium;
  LaunchConfig launches;
  ContourConfig contour;
  OpenConfig open;
  DiskConfig disk;
  HusimiConfig husimi;
  BeamConfig beam;
  LyapunovConfig lyapunov;
  bool operator==(const RunConfig&) const = default;

  [[nodiscard]] OpenRunConfig open_run(unsigned threads) const {
    OpenRunConfig c;
    c.medium = OpticalMedium(medium.n, medium.pol);
    c.ensemble = open.ensemble;
    c.transient = open.transient;
    c.record = open.record;
    c.seed = seed;
    if (open.band) c.band = {(*open.band)[0], (*open.band)[1]};
    c.s_bins = open.s_bins;
    c.p_bins = open.p_bins;
    c.theta_bins = open.theta_bins;
    c.batches = open.batches;
    c.threads = threads;
    return c;
  }
};

/// Top-level sections each subcommand reads.
inline std::vector<std::string_view> config_sections(Subcommand s) {
  switch (s) {
    case Subcommand::Psos: return {"shape", "launches", "n_bounces"};
    case Subcommand::PsosAniso: return {"shape", "launches", "n_bounces", "contour"};
    case Subcommand::Steady:
    case Subcommand::Farfield: return {"shape", "medium", "open"};
    case Subcommand::DiskModes: return {"disk"};
    case Subcommand::Husimi: return {"husimi"};
    case Subcommand::BeamShifts: return {"beam"};
    case Subcommand::Lyapunov: return {"shape", "launches", "n_bounces", "lyapunov"};
  }
  return {};
}

namespace detail {

class ConfigNode {
 public:
  ConfigNode(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  void allow(std::initializer_list<std::string_view> keys) const {
    for (const auto& [k, v] : j_.items()) {
      bool ok = false;
      for (auto a : keys) ok = ok || a == k;
      if (!ok) throw ConfigError(join(k), "unknown key");
    }
  }

  [[nodiscard]] bool has(std::string_view key) const { return j_.contains(std::string(key)); }
  [[nodiscard]] const Json& raw(std::string_view key) const { return j_.at(std::string(key)); }
  [[nodiscard]] std::string join(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }
  [[nodiscard]] ConfigNode child(std::string_view key) const { return ConfigNode(raw(key), join(key)); }

  [[nodiscard]] double number(std::string_view key, double fallback) const {
    if (!has(key)) return fallback;
    return as_number(raw(key), join(key));
  }
  [[nodiscard]] long integer(std::string_view key, long fallback) const {
    if (!has(key)) return fallback;
    return as_integer(raw(key), join(key));
  }
  [[nodiscard]] bool boolean(std::string_view key, bool fallback) const {
    if (!has(key)) return fallback;
    if (!raw(key).is_boolean()) throw ConfigError(join(key), "expected true or false");
    return raw(key).get<bool>();
  }
  [[nodiscard]] std::string text(std::string_view key, std::string fallback) const {
    if (!has(key)) return fallback;
    if (!raw(key).is_string()) throw ConfigError(join(key), "expected a string");
    return raw(key).get<std::string>();
  }
  [[nodiscard]] Polarization polarization(std::string_view key, Polarization fallback) const {
    if (!has(key)) return fallback;
    try {
      return parse_polarization(text(key, ""));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(join(key), e.what());
    }
  }

  static double as_number(const Json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(path, "expected a finite number");
    return x;
  }
  static long as_integer(const Json& v, const std::string& path) {
    if (v.is_number_integer()) return v.get<long>();
    if (v.is_number_float()) {
      const double x = v.get<double>();
      if (std::isfinite(x) && x == std::floor(x) && std::abs(x) < 9e15) return static_cast<long>(x);
    }
    throw ConfigError(path, "expected an integer");
  }
  static const Json& array(const Json& v, const std::string& path, std::size_t min_size = 0) {
    if (!v.is_array()) throw ConfigError(path, "expected an array");
    if (v.size() < min_size) throw ConfigError(path, "expected at least " + std::to_string(min_size) + " entries");
    return v;
  }
  static std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

 private:
  const Json& j_;
  std::string path_;
};

inline void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw ConfigError(path, what);
}

inline std::vector<Harmonic> preset_harmonics(const std::string& name, double eps, const std::string& path) {
  if (name == "circle") return {};
  if (name == "quadrupole") return {{2, eps}};
  if (name == "onigiri") return {{3, eps}};
  if (name == "limacon") return {{1, eps}};
  throw ConfigError(path, "unknown preset '" + name + "' (expected circle, quadrupole, onigiri or limacon)");
}

inline ShapeConfig parse_shape(const ConfigNode& node) {
  node.allow({"R0", "preset", "eps", "harmonics"});
  ShapeConfig s;
  s.R0 = node.number("R0", 1.0);
  require(s.R0 > 0.0, node.join("R0"), "R0 must be positive");
  if (node.has("preset")) {
    if (node.has("harmonics")) throw ConfigError(node.join("preset"), "give either preset or harmonics, not both");
    const auto name = node.text("preset", "");
    if (name != "circle" && !node.has("eps")) throw ConfigError(node.join("eps"), "preset '" + name + "' needs eps");
    s.harmonics = preset_harmonics(name, node.number("eps", 0.0), node.join("preset"));
  } else if (node.has("eps")) {
    throw ConfigError(node.join("eps"), "eps is only used with a preset");
  }
  if (node.has("harmonics")) {
    const auto path = node.join("harmonics");
    const auto& arr = ConfigNode::array(node.raw("harmonics"), path);
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto p = ConfigNode::index(path, i);
      const auto& h = ConfigNode::array(arr[i], p, 2);
      require(h.size() == 2, p, "expected [m, eps]");
      s.harmonics.push_back({static_cast<int>(ConfigNode::as_integer(h[0], p + "[0]")), ConfigNode::as_number(h[1], p + "[1]")});
    }
  }
  const auto hpath = node.join("harmonics");
  for (std::size_t i = 0; i < s.harmonics.size(); ++i) {
    const auto p = ConfigNode::index(hpath, i);
    require(s.harmonics[i].m >= 1, p, "harmonic order must be >= 1");
    require(std::abs(s.harmonics[i].eps) < 1.0, p, "shape invalid: |eps| >= 1 makes r(phi) <= 0");
  }
  try {
    (void)s.build();
  } catch (const DomainError& e) {
    throw ConfigError(hpath, std::string("shape invalid: ") + e.what());
  }
  return s;
}

inline MediumConfig parse_medium(const ConfigNode& node) {
  node.allow({"n", "pol"});
  MediumConfig m;
  m.n = node.number("n", m.n);
  require(m.n >= 1.0, node.join("n"), "refractive index must be >= 1");
  m.pol = node.polarization("pol", m.pol);
  return m;
}

inline LaunchConfig parse_launches(const ConfigNode& node) {
  node.allow({"grid", "points"});
  LaunchConfig l;
  if (node.has("grid") && node.has("points")) throw ConfigError(node.join("points"), "give either grid or points");
  if (node.has("grid")) {
    const auto g = node.child("grid");
    g.allow({"s_count", "p_count", "p_min", "p_max"});
    l.s_count = static_cast<int>(g.integer("s_count", l.s_count));
    l.p_count = static_cast<int>(g.integer("p_count", l.p_count));
    l.p_min = g.number("p_min", l.p_min);
    l.p_max = g.number("p_max", l.p_max);
    require(l.s_count >= 1, g.join("s_count"), "must be >= 1");
    require(l.p_count >= 1, g.join("p_count"), "must be >= 1");
    require(l.p_min > -1.0 && l.p_min <= l.p_max && l.p_max < 1.0, g.join("p_max"), "need -1 < p_min <= p_max < 1");
  }
  if (node.has("points")) {
    const auto path = node.join("points");
    const auto& arr = ConfigNode::array(node.raw("points"), path, 1);
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto p = ConfigNode::index(path, i);
      const auto& pt = ConfigNode::array(arr[i], p, 2);
      require(pt.size() == 2, p, "expected [s_norm, p]");
      const double s = ConfigNode::as_number(pt[0], p + "[0]");
      const double q = ConfigNode::as_number(pt[1], p + "[1]");
      require(s >= 0.0 && s < 1.0, p + "[0]", "s_norm must lie in [0, 1)");
      require(q > -1.0 && q < 1.0, p + "[1]", "p must lie in (-1, 1)");
      l.points.push_back({s, q});
    }
  }
  return l;
}

inline ContourConfig parse_contour(const ConfigNode& node) {
  node.allow({"k0", "harmonics"});
  ContourConfig c;
  c.k0 = node.number("k0", c.k0);
  require(c.k0 > 0.0, node.join("k0"), "k0 must be positive");
  const auto path = node.join("harmonics");
  if (node.has("harmonics")) {
    const auto& arr = ConfigNode::array(node.raw("harmonics"), path);
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto p = ConfigNode::index(path, i);
      const auto& h = ConfigNode::array(arr[i], p, 3);
      require(h.size() == 3, p, "expected [m, beta, delta]");
      ContourHarmonic ch{static_cast<int>(ConfigNode::as_integer(h[0], p + "[0]")), ConfigNode::as_number(h[1], p + "[1]"),
                         ConfigNode::as_number(h[2], p + "[2]")};
      require(ch.m >= 1, p, "harmonic order must be >= 1");
      c.harmonics.push_back(ch);
    }
  }
  try {
    (void)c.build();
  } catch (const DomainError& e) {
    throw ConfigError(path, std::string("contour invalid: ") + e.what());
  }
  return c;
}

inline OpenConfig parse_open(const ConfigNode& node) {
  node.allow({"ensemble", "transient", "record", "band", "s_bins", "p_bins", "theta_bins", "batches"});
  OpenConfig o;
  o.ensemble = node.integer("ensemble", o.ensemble);
  o.transient = node.integer("transient", o.transient);
  o.record = node.integer("record", o.record);
  o.s_bins = static_cast<int>(node.integer("s_bins", o.s_bins));
  o.p_bins = static_cast<int>(node.integer("p_bins", o.p_bins));
  o.theta_bins = static_cast<int>(node.integer("theta_bins", o.theta_bins));
  o.batches = static_cast<int>(node.integer("batches", o.batches));
  require(o.ensemble >= 1000, node.join("ensemble"), "needs at least 1000 rays");
  require(o.transient >= 10, node.join("transient"), "needs at least 10 bounces");
  require(o.record >= 1, node.join("record"), "must be >= 1");
  require(o.s_bins >= 2, node.join("s_bins"), "must be >= 2");
  require(o.p_bins >= 2, node.join("p_bins"), "must be >= 2");
  require(o.theta_bins >= 4, node.join("theta_bins"), "must be >= 4");
  require(o.batches >= 2 && o.batches <= o.ensemble, node.join("batches"), "must lie in [2, ensemble]");
  if (node.has("band")) {
    const auto path = node.join("band");
    const auto& b = ConfigNode::array(node.raw("band"), path, 2);
    require(b.size() == 2, path, "expected [p_min, p_max]");
    const double lo = ConfigNode::as_number(b[0], path + "[0]");
    const double hi = ConfigNode::as_number(b[1], path + "[1]");
    require(lo >= 0.0 && lo < hi && hi < 1.0, path, "need 0 <= p_min < p_max < 1");
    o.band = std::array<double, 2>{lo, hi};
  }
  return o;
}

inline DiskConfig parse_disk(const ConfigNode& node) {
  node.allow({"m_min", "m_max", "n", "pol", "radial_order", "dump_m", "samples"});
  DiskConfig d;
  d.m_min = static_cast<int>(node.integer("m_min", d.m_min));
  d.m_max = static_cast<int>(node.integer("m_max", d.m_max));
  d.n = node.number("n", d.n);
  d.pol = node.polarization("pol", d.pol);
  d.radial_order = static_cast<int>(node.integer("radial_order", d.radial_order));
  d.samples = static_cast<int>(node.integer("samples", d.samples));
  require(d.m_min >= 0 && d.m_min <= d.m_max, node.join("m_max"), "need 0 <= m_min <= m_max");
  require(d.m_max - d.m_min < 1000, node.join("m_max"), "at most 1000 angular orders per run");
  require(d.n > 1.0, node.join("n"), "refractive index must exceed 1");
  require(d.radial_order >= 1, node.join("radial_order"), "must be >= 1");
  require(d.samples >= 0, node.join("samples"), "must be >= 0");
  if (node.has("dump_m")) {
    const auto path = node.join("dump_m");
    const auto& arr = ConfigNode::array(node.raw("dump_m"), path);
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto p = ConfigNode::index(path, i);
      const int m = static_cast<int>(ConfigNode::as_integer(arr[i], p));
      require(m >= d.m_min && m <= d.m_max, p, "must lie within [m_min, m_max]");
      d.dump_m.push_back(m);
    }
  }
  return d;
}

inline HusimiConfig parse_husimi(const ConfigNode& node) {
  node.allow({"input", "s_bins", "p_bins", "sigma", "side"});
  HusimiConfig h;
  h.input = node.text("input", "");
  require(!h.input.empty(), node.join("input"), "a BoundaryWaveData file is required");
  h.s_bins = static_cast<int>(node.integer("s_bins", h.s_bins));
  h.p_bins = static_cast<int>(node.integer("p_bins", h.p_bins));
  require(h.s_bins >= 2, node.join("s_bins"), "must be >= 2");
  require(h.p_bins >= 2, node.join("p_bins"), "must be >= 2");
  if (node.has("sigma")) {
    h.sigma = node.number("sigma", 0.0);
    require(*h.sigma > 0.0, node.join("sigma"), "must be positive");
  }
  h.side = node.text("side", h.side);
  require(h.side == "inside" || h.side == "outside" || h.side == "both", node.join("side"),
          "expected inside, outside or both");
  return h;
}

inline BeamConfig parse_beam(const ConfigNode& node) {
  node.allow({"n", "pol", "waist_lambda", "chi0", "scan", "relative_to_critical", "points"});
  BeamConfig b;
  b.n = node.number("n", b.n);
  b.pol = node.polarization("pol", b.pol);
  b.waist_lambda = node.number("waist_lambda", b.waist_lambda);
  b.relative_to_critical = node.boolean("relative_to_critical", b.relative_to_critical);
  b.points = static_cast<int>(node.integer("points", b.points));
  require(b.n > 1.0, node.join("n"), "index ratio must exceed 1");
  require(b.waist_lambda * kTwoPi >= 2.0, node.join("waist_lambda"), "waist must satisfy waist * k >= 2");
  require(b.points >= 64, node.join("points"), "must be >= 64");
  if (node.has("chi0")) {
    if (node.has("scan")) throw ConfigError(node.join("chi0"), "give either chi0 or scan");
    b.chi0 = node.number("chi0", 0.0);
  }
  if (node.has("scan")) {
    const auto s = node.child("scan");
    s.allow({"from", "to", "count"});
    b.scan.from = s.number("from", b.scan.from);
    b.scan.to = s.number("to", b.scan.to);
    b.scan.count = static_cast<int>(s.integer("count", b.scan.count));
    require(b.scan.count >= 1, s.join("count"), "must be >= 1");
    require(b.scan.from <= b.scan.to, s.join("to"), "need from <= to");
  }
  const double base = b.relative_to_critical ? b.critical_angle() : 0.0;
  const auto inside = [](double x) { return x > 0.0 && x < kPi / 2; };
  if (b.chi0) {
    require(inside(base + *b.chi0), node.join("chi0"), "angle of incidence must lie in (0, pi/2)");
  } else {
    require(inside(base + b.scan.from) && inside(base + b.scan.to), node.join("scan"),
            "scan range must lie within (0, pi/2)");
  }
  return b;
}

}  // namespace detail

/// Parses config text for a subcommand. The subcommand comes from the text's
/// "subcommand" key, from `cli`, or both (they must agree).
inline RunConfig parse_config(std::string_view text, std::optional<Subcommand> cli = std::nullopt) {
  Json j;
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    j = Json::object();
  } else {
    try {
      j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("", std::string("malformed JSON: ") + e.what());
    }
  }
  const detail::ConfigNode root(j, "");
  RunConfig c;
  std::optional<Subcommand> sub = cli;
  if (root.has("subcommand")) {
    const auto name = root.text("subcommand", "");
    const auto parsed = parse_subcommand(name);
    if (!parsed) throw ConfigError("subcommand", "unknown subcommand '" + name + "'");
    if (cli && *cli != *parsed)
      throw ConfigError("subcommand", "config is for '" + name + "' but '" + std::string(to_string(*cli)) + "' was requested");
    sub = parsed;
  }
  if (!sub) throw ConfigError("subcommand", "no subcommand given");
  c.subcommand = *sub;

  const auto sections = config_sections(c.subcommand);
  for (const auto& [k, v] : j.items()) {
    if (k == "subcommand" || k == "seed" || k == "schema_version") continue;
    bool ok = false;
    for (auto s : sections) ok = ok || s == k;
    if (!ok) throw ConfigError(k, "unknown key for subcommand '" + std::string(to_string(c.subcommand)) + "'");
  }
  if (root.has("schema_version"))
    detail::require(root.integer("schema_version", 0) == kConfigSchemaVersion, "schema_version",
                    "unsupported schema version");
  if (root.has("seed")) {
    const auto& s = root.raw("seed");
    if (!s.is_number_unsigned()) throw ConfigError("seed", "expected a non-negative integer");
    c.seed = s.get<std::uint64_t>();
  }
  c.n_bounces = root.integer("n_bounces", c.n_bounces);
  detail::require(c.n_bounces >= 1, "n_bounces", "must be >= 1");
  static const Json kEmpty = Json::object();
  const auto sect = [&](std::string_view key) {
    return root.has(key) ? root.child(key) : detail::ConfigNode(kEmpty, std::string(key));
  };
  c.shape = detail::parse_shape(sect("shape"));
  c.medium = detail::parse_medium(sect("medium"));
  c.launches = detail::parse_launches(sect("launches"));
  c.contour = detail::parse_contour(sect("contour"));
  c.open = detail::parse_open(sect("open"));
  c.disk = detail::parse_disk(sect("disk"));
  if (c.subcommand == Subcommand::Husimi) c.husimi = detail::parse_husimi(sect("husimi"));
  c.beam = detail::parse_beam(sect("beam"));
  {
    const auto l = sect("lyapunov");
    l.allow({"delta0"});
    if (l.has("delta0")) {
      c.lyapunov.delta0 = l.number("delta0", 0.0);
      detail::require(*c.lyapunov.delta0 > 0.0 && *c.lyapunov.delta0 < 1e-3 * c.shape.R0, l.join("delta0"),
                      "delta0 must lie in (0, 1e-3 R0)");
    }
  }
  return c;
}

/// Resolved config with every default filled in, restricted to the sections
/// the subcommand reads. parse_config(to_json(c).dump()) == c.
inline Json to_json(const RunConfig& c) {
  Json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["subcommand"] = std::string(to_string(c.subcommand));
  j["seed"] = c.seed;
  for (auto s : config_sections(c.subcommand)) {
    if (s == "n_bounces") {
      j["n_bounces"] = c.n_bounces;
    } else if (s == "shape") {
      Json h = Json::array();
      for (const auto& x : c.shape.harmonics) h.push_back(Json::array({x.m, x.eps}));
      j["shape"] = {{"R0", c.shape.R0}, {"harmonics", h}};
    } else if (s == "medium") {
      j["medium"] = {{"n", c.medium.n}, {"pol", std::string(to_string(c.medium.pol))}};
    } else if (s == "launches") {
      if (!c.launches.points.empty()) {
        Json p = Json::array();
        for (const auto& x : c.launches.points) p.push_back(Json::array({x[0], x[1]}));
        j["launches"] = {{"points", p}};
      } else {
        j["launches"] = {{"grid",
                          {{"s_count", c.launches.s_count},
                           {"p_count", c.launches.p_count},
                           {"p_min", c.launches.p_min},
                           {"p_max", c.launches.p_max}}}};
      }
    } else if (s == "contour") {
      Json h = Json::array();
      for (const auto& x : c.contour.harmonics) h.push_back(Json::array({x.m, x.beta, x.delta}));
      j["contour"] = {{"k0", c.contour.k0}, {"harmonics", h}};
    } else if (s == "open") {
      Json o = {{"ensemble", c.open.ensemble}, {"transient", c.open.transient}, {"record", c.open.record}};
      if (c.open.band) o["band"] = Json::array({(*c.open.band)[0], (*c.open.band)[1]});
      o["s_bins"] = c.open.s_bins;
      o["p_bins"] = c.open.p_bins;
      o["theta_bins"] = c.open.theta_bins;
      o["batches"] = c.open.batches;
      j["open"] = o;
    } else if (s == "disk") {
      j["disk"] = {{"m_min", c.disk.m_min},
                   {"m_max", c.disk.m_max},
                   {"n", c.disk.n},
                   {"pol", std::string(to_string(c.disk.pol))},
                   {"radial_order", c.disk.radial_order},
                   {"dump_m", c.disk.dump_m},
                   {"samples", c.disk.samples}};
    } else if (s == "husimi") {
      Json h = {{"input", c.husimi.input}, {"s_bins", c.husimi.s_bins}, {"p_bins", c.husimi.p_bins}};
      if (c.husimi.sigma) h["sigma"] = *c.husimi.sigma;
      h["side"] = c.husimi.side;
      j["husimi"] = h;
    } else if (s == "beam") {
      Json b = {{"n", c.beam.n},
                {"pol", std::string(to_string(c.beam.pol))},
                {"waist_lambda", c.beam.waist_lambda},
                {"relative_to_critical", c.beam.relative_to_critical},
                {"points", c.beam.points}};
      if (c.beam.chi0)
        b["chi0"] = *c.beam.chi0;
      else
        b["scan"] = {{"from", c.beam.scan.from}, {"to", c.beam.scan.to}, {"count", c.beam.scan.count}};
      j["beam"] = b;
    } else if (s == "lyapunov") {
      Json l = Json::object();
      if (c.lyapunov.delta0) l["delta0"] = *c.lyapunov.delta0;
      j["lyapunov"] = l;
    }
  }
  return j;
}

}  // namespace phasespace

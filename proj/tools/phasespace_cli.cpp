#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "phasespace/run.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct BeamFlags {
  std::optional<double> n;
  std::optional<std::string> pol;
  std::optional<double> waist;
  std::optional<double> chi0;
  std::vector<double> range;
  bool absolute = false;
};

void apply_beam_flags(phasespace::RunConfig& cfg, const BeamFlags& f) {
  using phasespace::ConfigError;
  auto& b = cfg.beam;
  bool changed = false;
  if (f.n) b.n = *f.n, changed = true;
  if (f.pol) {
    try {
      b.pol = phasespace::parse_polarization(*f.pol);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("--pol", e.what());
    }
  }
  if (f.waist) b.waist_lambda = *f.waist, changed = true;
  if (f.absolute) b.relative_to_critical = false, changed = true;
  if (f.chi0) b.chi0 = *f.chi0, changed = true;
  if (!f.range.empty()) {
    if (f.range.size() != 3) throw ConfigError("--range", "expected FROM TO COUNT");
    if (f.chi0) throw ConfigError("--range", "give either --chi0 or --range");
    b.chi0.reset();
    b.scan = {f.range[0], f.range[1], static_cast<int>(f.range[2])};
    changed = true;
  }
  // Revalidate through the parser so flag values obey the config rules.
  if (changed || f.pol) cfg = phasespace::parse_config(phasespace::to_json(cfg).dump(), cfg.subcommand);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ray and wave phase-space simulator for optical microcavities"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", PHASESPACE_VERSION);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  unsigned threads = 0;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--seed", seed, "master seed (overrides the config)");
  app.add_option("--out-dir", out_dir, "directory for output files")->capture_default_str();
  app.add_option("--threads", threads, "worker threads, 0 for all cores")->capture_default_str();

  BeamFlags beam;
  std::vector<std::pair<phasespace::Subcommand, CLI::App*>> subs;
  for (auto s : phasespace::kSubcommands) {
    std::string help;
    switch (s) {
      case phasespace::Subcommand::Psos: help = "closed-billiard surface of section"; break;
      case phasespace::Subcommand::PsosAniso: help = "surface of section with an anisotropic Fermi contour"; break;
      case phasespace::Subcommand::Steady: help = "steady phase-space distribution of an open cavity"; break;
      case phasespace::Subcommand::Farfield: help = "far-field emission pattern of an open cavity"; break;
      case phasespace::Subcommand::DiskModes: help = "complex resonances of the dielectric disk"; break;
      case phasespace::Subcommand::Husimi: help = "boundary Husimi functions of a wave on the boundary"; break;
      case phasespace::Subcommand::BeamShifts: help = "Goos-Hanchen and Fresnel-filtering shifts of a Gaussian beam"; break;
      case phasespace::Subcommand::Lyapunov: help = "Lyapunov exponents of the bounce map"; break;
    }
    auto* sub = app.add_subcommand(std::string(phasespace::to_string(s)), help);
    if (s == phasespace::Subcommand::BeamShifts) {
      sub->add_option("--n", beam.n, "index ratio dense/rare");
      sub->add_option("--pol", beam.pol, "polarization, TE or TM");
      sub->add_option("--waist", beam.waist, "beam waist in wavelengths");
      sub->add_option("--chi0", beam.chi0, "single angle of incidence (radians)");
      sub->add_option("--range", beam.range, "scan FROM TO COUNT (radians)")->expected(3);
      sub->add_flag("--absolute", beam.absolute, "angles are absolute instead of offsets from the critical angle");
    }
    subs.emplace_back(s, sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  phasespace::Subcommand which = phasespace::Subcommand::Psos;
  for (const auto& [s, sub] : subs)
    if (sub->parsed()) which = s;

  const auto t0 = std::chrono::steady_clock::now();
  phasespace::RunConfig cfg;
  phasespace::RunContext ctx;
  ctx.threads = threads;
  try {
    std::string text;
    if (!config_path.empty()) {
      text = phasespace::read_text_file(config_path);
      ctx.input_dir = std::filesystem::path(config_path).parent_path();
    }
    cfg = phasespace::parse_config(text, which);
    if (seed) cfg.seed = *seed;
    if (which == phasespace::Subcommand::BeamShifts) apply_beam_flags(cfg, beam);
  } catch (const phasespace::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const phasespace::IoError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    const auto out = phasespace::run(cfg, ctx);
    phasespace::commit_artifacts(out_dir, out.files);
    for (const auto& f : out.files) std::cout << (std::filesystem::path(out_dir) / f.name).string() << '\n';
  } catch (const phasespace::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const phasespace::InputFormatError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const phasespace::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const phasespace::Error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::fprintf(stderr, "%s finished in %.3f s\n", std::string(phasespace::to_string(which)).c_str(), wall);
  return kExitOk;
}

// Output serialization. CSV files open with a "# {json}" metadata line that
// names the schema and version, then a column header. Numbers use %.17g so
// every double round-trips. Outputs are staged in memory and committed to
// disk through temporary files and renames.
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "phasespace/core.hpp"
#include "phasespace/disk.hpp"

namespace phasespace {

inline constexpr int kOutputSchemaVersion = 1;

/// File system failure; the message names the path.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; the message names the path and line.
class InputFormatError : public Error {
 public:
  using Error::Error;
};

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(std::string_view schema, nlohmann::ordered_json meta, std::vector<std::string> columns)
      : columns_(columns.size()) {
    nlohmann::ordered_json head;
    head["schema"] = std::string(schema);
    head["version"] = kOutputSchemaVersion;
    for (auto& [k, v] : meta.items()) head[k] = v;
    out_ << "# " << head.dump() << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << '\n';
  }

  template <class... T>
  void row(const T&... values) {
    static_assert(sizeof...(T) > 0);
    if (sizeof...(T) != columns_) throw DomainError("CSV row width does not match the header");
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(values), first = false), ...);
    out_ << '\n';
  }

  [[nodiscard]] std::string str() const { return out_.str(); }

 private:
  static std::string cell(double x) { return format_double(x); }
  static std::string cell(float x) { return format_double(x); }
  template <class I>
    requires std::is_integral_v<I>
  static std::string cell(I x) {
    return std::to_string(x);
  }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }

  std::size_t columns_;
  std::ostringstream out_;
};

/// One staged output file: name relative to the output directory.
struct Artifact {
  std::string name;
  std::string content;
};

/// Writes every artifact as <dir>/<name>. Each file goes to a temporary
/// sibling first; on any failure the temporaries and already-renamed files of
/// this commit are removed.
inline void commit_artifacts(const std::filesystem::path& dir, const std::vector<Artifact>& files) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir.string() + ": cannot create output directory: " + ec.message());
  std::vector<fs::path> temps;
  std::vector<fs::path> done;
  const auto cleanup = [&] {
    std::error_code ignore;
    for (const auto& p : temps) fs::remove(p, ignore);
    for (const auto& p : done) fs::remove(p, ignore);
  };
  for (const auto& a : files) {
    const fs::path target = dir / a.name;
    const fs::path tmp = dir / ("." + a.name + ".tmp");
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) {
      cleanup();
      throw IoError(tmp.string() + ": cannot open for writing");
    }
    temps.push_back(tmp);
    f.write(a.content.data(), static_cast<std::streamsize>(a.content.size()));
    f.close();
    if (!f) {
      cleanup();
      throw IoError(tmp.string() + ": write failed");
    }
  }
  for (std::size_t i = 0; i < files.size(); ++i) {
    const fs::path target = dir / files[i].name;
    fs::rename(temps[i], target, ec);
    if (ec) {
      cleanup();
      throw IoError(target.string() + ": cannot move output into place: " + ec.message());
    }
    done.push_back(target);
  }
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError(path.string() + ": cannot open for reading");
  std::ostringstream ss;
  ss << f.rdbuf();
  if (f.bad()) throw IoError(path.string() + ": read failed");
  return ss.str();
}

inline constexpr std::string_view kBoundaryWaveSchema = "phasespace.boundary_wave";

inline std::string boundary_wave_csv(const BoundaryWaveData& d) {
  nlohmann::ordered_json meta;
  meta["k_re"] = d.k.real();
  meta["k_im"] = d.k.imag();
  meta["n"] = d.n;
  meta["perimeter"] = d.perimeter;
  meta["pol"] = std::string(to_string(d.pol));
  meta["samples"] = d.size();
  CsvWriter w(kBoundaryWaveSchema, meta, {"s", "Re_psi", "Im_psi", "Re_dpsi", "Im_dpsi"});
  for (std::size_t i = 0; i < d.size(); ++i)
    w.row(d.arc_length(i), d.psi[i].real(), d.psi[i].imag(), d.dpsi[i].real(), d.dpsi[i].imag());
  return w.str();
}

/// Parses the format written by boundary_wave_csv. `origin` names the source
/// in error messages.
inline BoundaryWaveData parse_boundary_wave(std::string_view text, const std::string& origin = "<input>") {
  std::istringstream in{std::string(text)};
  std::string line;
  long lineno = 0;
  const auto fail = [&](const std::string& what) {
    return InputFormatError(origin + ":" + std::to_string(lineno) + ": " + what);
  };
  if (!std::getline(in, line)) throw InputFormatError(origin + ": empty file");
  ++lineno;
  if (line.rfind("# ", 0) != 0) throw fail("expected a '# {json}' metadata line");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(line.substr(2));
  } catch (const nlohmann::json::parse_error& e) {
    throw fail(std::string("malformed metadata: ") + e.what());
  }
  BoundaryWaveData d;
  try {
    if (meta.at("schema").get<std::string>() != kBoundaryWaveSchema) throw fail("not a boundary wave file");
    if (meta.at("version").get<int>() != kOutputSchemaVersion) throw fail("unsupported schema version");
    d.k = {meta.at("k_re").get<double>(), meta.value("k_im", 0.0)};
    d.n = meta.at("n").get<double>();
    d.perimeter = meta.at("perimeter").get<double>();
    d.pol = parse_polarization(meta.value("pol", std::string("TM")));
  } catch (const nlohmann::json::exception& e) {
    throw fail(std::string("metadata: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw fail(e.what());
  }
  if (!std::getline(in, line)) throw fail("missing column header");
  ++lineno;
  if (line != "s,Re_psi,Im_psi,Re_dpsi,Im_dpsi") throw fail("unexpected column header '" + line + "'");
  std::vector<double> s;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    double v[5];
    std::size_t pos = 0;
    for (int c = 0; c < 5; ++c) {
      const std::size_t end = line.find(',', pos);
      if ((end == std::string::npos) != (c == 4)) throw fail("expected 5 columns");
      const std::string field = line.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
      char* stop = nullptr;
      v[c] = std::strtod(field.c_str(), &stop);
      if (field.empty() || *stop != '\0' || !std::isfinite(v[c])) throw fail("bad number '" + field + "'");
      pos = end + 1;
    }
    s.push_back(v[0]);
    d.psi.emplace_back(v[1], v[2]);
    d.dpsi.emplace_back(v[3], v[4]);
  }
  if (d.psi.empty()) throw InputFormatError(origin + ": no samples");
  const double h = d.perimeter / static_cast<double>(d.psi.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    if (std::abs(s[i] - h * static_cast<double>(i)) > 1e-9 * d.perimeter)
      throw InputFormatError(origin + ": samples must be equally spaced from s = 0 over the perimeter (row " +
                             std::to_string(i) + ")");
  return d;
}

inline BoundaryWaveData read_boundary_wave(const std::filesystem::path& path) {
  return parse_boundary_wave(read_text_file(path), path.string());
}

}  // namespace phasespace

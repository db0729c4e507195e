#pragma once

// CSV/JSON output: 17 significant digits, LF line endings, atomic
// temp-then-rename writes.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tdres/core.hpp"
#include "tdres/errors.hpp"
#include "tdres/stokes.hpp"

namespace tdres::io {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Writes `content` to `path` through a sibling temporary file and a rename.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f << content;
    f.flush();
    if (!f) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(const std::vector<double>& values) {
    if (values.size() != header_.size()) throw std::logic_error("csv row width does not match header");
    rows_.push_back(values);
  }
  void add_row(std::initializer_list<double> values) { add_row(std::vector<double>(values)); }

  std::size_t size() const { return rows_.size(); }

  std::string str() const {
    std::string out;
    for (std::size_t i = 0; i < header_.size(); ++i) out += (i ? "," : "") + header_[i];
    out += '\n';
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) out += ',';
        out += format_double(r[i]);
      }
      out += '\n';
    }
    return out;
  }

  void write(const std::filesystem::path& path) const { write_atomic(path, str()); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<double>> rows_;
};

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_atomic(path, j.dump(2) + "\n");
}

/// tau,re0,im0,re1,im1,Pg,Pe with populations in the given frame at every sample.
template <class FrameAt>
CsvTable trajectory_table(const Trajectory& tr, FrameAt&& frame_at) {
  CsvTable t({"tau", "re0", "im0", "re1", "im1", "Pg", "Pe"});
  for (const auto& s : tr) {
    const EigenFrame f = frame_at(s.tau);
    const auto& a = s.amplitudes;
    t.add_row({s.tau, a[0].real(), a[0].imag(), a[1].real(), a[1].imag(), std::norm(inner(f.ground, a)),
               std::norm(inner(f.excited, a))});
  }
  return t;
}

inline CsvTable polyline_table(const StokesLine& line) {
  CsvTable t({"re", "im"});
  for (const cplx& p : line.points) t.add_row({p.real(), p.imag()});
  return t;
}

inline nlohmann::json complex_json(cplx z) { return nlohmann::json::array({z.real(), z.imag()}); }

inline nlohmann::json geometry_json(const StokesGeometry& g) {
  nlohmann::json tps = nlohmann::json::array();
  for (const auto& tp : g.turning_points)
    tps.push_back({{"location", complex_json(tp.location)},
                   {"index", tp.index},
                   {"half_plane", tp.half_plane == HalfPlane::upper ? "upper" : "lower"}});
  nlohmann::json xs = nlohmann::json::array();
  for (std::size_t i = 0; i < g.crossings.size(); ++i)
    xs.push_back({{"tau_r", g.crossings[i]}, {"k", g.indices[i]}, {"action", g.actions[i]}});
  return {{"turning_points", tps}, {"crossings", g.crossings}, {"actions", g.actions}, {"crossing_detail", xs},
          {"window", {g.tau0, g.tauf}}};
}

}  // namespace tdres::io

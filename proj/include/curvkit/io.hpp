#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "curvkit/field.hpp"
#include "curvkit/forms.hpp"

namespace curvkit {

/// Field container formats.
///
/// Binary (.ckf): little-endian, exact roundtrip.
///   "CKFIELD1" | u32 p | u32 q
///   p x (i64 lo, i64 hi)                 domain extents
///   q x (f64 lo, f64 hi, f64 spacing)    domain ranges
///   u32 rows | u32 cols
///   p x (i64 lo, i64 hi)                 region, lattice coordinates
///   q x (i64 lo, i64 hi)                 region, sample indices
///   u64 count | count x (f64 re, f64 im) samples in region iteration order
///
/// CSV: a "#"-header carrying the same metadata, then one row per sample
/// point (coordinates followed by interleaved re/im per matrix entry).
/// CSV roundtrips through 17 significant digits.

namespace detail_io {

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw ConfigError("field file is truncated");
  return v;
}

inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail_io

inline void write_field_binary(const Field& field, const std::string& path) {
  Field f = field.sampled();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  os.write("CKFIELD1", 8);
  const Domain& dom = f.domain();
  detail_io::put<std::uint32_t>(os, static_cast<std::uint32_t>(dom.p()));
  detail_io::put<std::uint32_t>(os, static_cast<std::uint32_t>(dom.q()));
  for (int mu = 0; mu < dom.p(); ++mu) {
    detail_io::put<std::int64_t>(os, dom.extent(mu).lo);
    detail_io::put<std::int64_t>(os, dom.extent(mu).hi);
  }
  for (int i = 0; i < dom.q(); ++i) {
    detail_io::put<double>(os, dom.range(i).lo);
    detail_io::put<double>(os, dom.range(i).hi);
    detail_io::put<double>(os, dom.range(i).spacing);
  }
  detail_io::put<std::uint32_t>(os, static_cast<std::uint32_t>(f.rows()));
  detail_io::put<std::uint32_t>(os, static_cast<std::uint32_t>(f.cols()));
  const Region& reg = f.region();
  for (const auto& r : reg.lat) {
    detail_io::put<std::int64_t>(os, r.lo);
    detail_io::put<std::int64_t>(os, r.hi);
  }
  for (const auto& r : reg.cont) {
    detail_io::put<std::int64_t>(os, r.lo);
    detail_io::put<std::int64_t>(os, r.hi);
  }
  const auto& samples = f.grid_samples();
  detail_io::put<std::uint64_t>(os, samples.size());
  for (const Complex& z : samples) {
    detail_io::put<double>(os, z.real());
    detail_io::put<double>(os, z.imag());
  }
  if (!os) throw ConfigError("write failed for " + path);
}

inline Field read_field_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, "CKFIELD1", 8) != 0)
    throw ConfigError(path + " is not a curvkit field file");
  const auto p = detail_io::get<std::uint32_t>(is);
  const auto q = detail_io::get<std::uint32_t>(is);
  if (p > 8 || q > 8) throw ConfigError("implausible direction counts in " + path);
  std::vector<LatticeExtent> lat;
  for (std::uint32_t mu = 0; mu < p; ++mu) {
    const auto lo = detail_io::get<std::int64_t>(is);
    const auto hi = detail_io::get<std::int64_t>(is);
    lat.push_back({static_cast<long>(lo), static_cast<long>(hi)});
  }
  std::vector<ContinuousRange> cont;
  for (std::uint32_t i = 0; i < q; ++i) {
    const double lo = detail_io::get<double>(is);
    const double hi = detail_io::get<double>(is);
    const double sp = detail_io::get<double>(is);
    cont.push_back({lo, hi, sp});
  }
  Domain dom = make_domain(lat, cont);
  const auto rows = detail_io::get<std::uint32_t>(is);
  const auto cols = detail_io::get<std::uint32_t>(is);
  if (rows < 1 || cols < 1 || rows > 64 || cols > 64)
    throw ConfigError("implausible field shape in " + path);
  Region reg;
  for (std::uint32_t mu = 0; mu < p; ++mu) {
    const auto lo = detail_io::get<std::int64_t>(is);
    const auto hi = detail_io::get<std::int64_t>(is);
    reg.lat.push_back({static_cast<long>(lo), static_cast<long>(hi)});
  }
  for (std::uint32_t i = 0; i < q; ++i) {
    const auto lo = detail_io::get<std::int64_t>(is);
    const auto hi = detail_io::get<std::int64_t>(is);
    reg.cont.push_back({static_cast<long>(lo), static_cast<long>(hi)});
  }
  const auto count = detail_io::get<std::uint64_t>(is);
  const std::uint64_t expect =
      static_cast<std::uint64_t>(reg.points()) * rows * cols;
  if (count != expect)
    throw ConfigError("sample count in " + path + " does not match region size");
  std::vector<Complex> samples;
  samples.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    const double re = detail_io::get<double>(is);
    const double im = detail_io::get<double>(is);
    samples.emplace_back(re, im);
  }
  return Field::grid(dom, static_cast<int>(rows), static_cast<int>(cols), reg,
                     std::move(samples));
}

inline void write_field_csv(const Field& field, const std::string& path) {
  Field f = field.sampled();
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  const Domain& dom = f.domain();
  const Region& reg = f.region();
  os << "# curvkit field v1\n";
  os << "# p=" << dom.p() << " q=" << dom.q() << " rows=" << f.rows()
     << " cols=" << f.cols() << "\n";
  for (int mu = 0; mu < dom.p(); ++mu)
    os << "# lattice " << mu << ": extent " << dom.extent(mu).lo << " "
       << dom.extent(mu).hi << " region " << reg.lat[static_cast<size_t>(mu)].lo << " "
       << reg.lat[static_cast<size_t>(mu)].hi << "\n";
  for (int i = 0; i < dom.q(); ++i)
    os << "# continuous " << i << ": range " << detail_io::fmt_double(dom.range(i).lo)
       << " " << detail_io::fmt_double(dom.range(i).hi) << " spacing "
       << detail_io::fmt_double(dom.range(i).spacing) << " region "
       << reg.cont[static_cast<size_t>(i)].lo << " " << reg.cont[static_cast<size_t>(i)].hi
       << "\n";
  for (int mu = 0; mu < dom.p(); ++mu) os << "n" << mu << ",";
  for (int i = 0; i < dom.q(); ++i) os << "x" << i << ",";
  bool first = true;
  for (int r = 0; r < f.rows(); ++r)
    for (int c = 0; c < f.cols(); ++c) {
      if (!first) os << ",";
      first = false;
      os << "re_" << r << "_" << c << ",im_" << r << "_" << c;
    }
  os << "\n";
  for (RegionIter it(reg); !it.done(); it.next()) {
    for (long nv : it.lat()) os << nv << ",";
    for (size_t i = 0; i < it.cont().size(); ++i)
      os << detail_io::fmt_double(dom.sample_x(static_cast<int>(i), it.cont()[i])) << ",";
    const CMatrix v = f.at(it.lat(), it.cont());
    bool inner_first = true;
    for (int r = 0; r < f.rows(); ++r)
      for (int c = 0; c < f.cols(); ++c) {
        if (!inner_first) os << ",";
        inner_first = false;
        os << detail_io::fmt_double(v(r, c).real()) << ","
           << detail_io::fmt_double(v(r, c).imag());
      }
    os << "\n";
  }
  if (!os) throw ConfigError("write failed for " + path);
}

inline Field read_field_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path);
  std::string line;
  if (!std::getline(is, line) || line != "# curvkit field v1")
    throw ConfigError(path + " is not a curvkit field csv");
  int p = -1, q = -1, rows = -1, cols = -1;
  if (!std::getline(is, line) ||
      std::sscanf(line.c_str(), "# p=%d q=%d rows=%d cols=%d", &p, &q, &rows, &cols) != 4)
    throw ConfigError("bad csv shape header in " + path);
  if (p < 0 || q < 0 || rows < 1 || cols < 1) throw ConfigError("bad csv header values");
  std::vector<LatticeExtent> lat;
  Region reg;
  for (int mu = 0; mu < p; ++mu) {
    long elo, ehi, rlo, rhi;
    int idx;
    if (!std::getline(is, line) ||
        std::sscanf(line.c_str(), "# lattice %d: extent %ld %ld region %ld %ld", &idx,
                    &elo, &ehi, &rlo, &rhi) != 5)
      throw ConfigError("bad csv lattice header in " + path);
    lat.push_back({elo, ehi});
    reg.lat.push_back({rlo, rhi});
  }
  std::vector<ContinuousRange> cont;
  for (int i = 0; i < q; ++i) {
    double lo, hi, sp;
    long rlo, rhi;
    int idx;
    if (!std::getline(is, line) ||
        std::sscanf(line.c_str(), "# continuous %d: range %lf %lf spacing %lf region %ld %ld",
                    &idx, &lo, &hi, &sp, &rlo, &rhi) != 6)
      throw ConfigError("bad csv continuous header in " + path);
    cont.push_back({lo, hi, sp});
    reg.cont.push_back({rlo, rhi});
  }
  if (!std::getline(is, line)) throw ConfigError("csv missing column header");
  Domain dom = make_domain(lat, cont);
  const long blk = static_cast<long>(rows) * cols;
  std::vector<Complex> samples;
  samples.reserve(static_cast<size_t>(reg.points() * blk));
  const int skip = p + q;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    for (int k = 0; k < skip; ++k)
      if (!std::getline(ss, cell, ',')) throw ConfigError("short csv row in " + path);
    for (long e = 0; e < blk; ++e) {
      if (!std::getline(ss, cell, ',')) throw ConfigError("short csv row in " + path);
      const double re = std::strtod(cell.c_str(), nullptr);
      if (!std::getline(ss, cell, ',')) throw ConfigError("short csv row in " + path);
      const double im = std::strtod(cell.c_str(), nullptr);
      samples.emplace_back(re, im);
    }
  }
  return Field::grid(dom, rows, cols, reg, std::move(samples));
}

/// Form container: a directory holding manifest.json plus one binary field
/// per term.
inline void write_form(const Form& form, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create " + dir);
  nlohmann::ordered_json manifest;
  manifest["format"] = "curvkit-form";
  manifest["version"] = 1;
  manifest["degree"] = form.degree();
  manifest["rows"] = form.rows();
  manifest["cols"] = form.cols();
  const Domain& dom = form.domain();
  nlohmann::ordered_json jdom;
  jdom["p"] = dom.p();
  jdom["q"] = dom.q();
  jdom["lattice"] = nlohmann::ordered_json::array();
  for (int mu = 0; mu < dom.p(); ++mu)
    jdom["lattice"].push_back({dom.extent(mu).lo, dom.extent(mu).hi});
  jdom["continuous"] = nlohmann::ordered_json::array();
  for (int i = 0; i < dom.q(); ++i)
    jdom["continuous"].push_back({dom.range(i).lo, dom.range(i).hi, dom.range(i).spacing});
  manifest["domain"] = jdom;
  manifest["terms"] = nlohmann::ordered_json::array();
  int idx = 0;
  for (const auto& [w, f] : form.terms()) {
    char name[32];
    std::snprintf(name, sizeof(name), "term_%03d.ckf", idx++);
    nlohmann::ordered_json jt;
    jt["dn"] = w.dn;
    jt["dx"] = w.dx;
    jt["file"] = name;
    manifest["terms"].push_back(jt);
    write_field_binary(f, (fs::path(dir) / name).string());
  }
  std::ofstream os(fs::path(dir) / "manifest.json");
  if (!os) throw ConfigError("cannot write manifest in " + dir);
  os << manifest.dump(2) << "\n";
}

inline Form read_form(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream is(fs::path(dir) / "manifest.json");
  if (!is) throw ConfigError("cannot open " + dir + "/manifest.json");
  nlohmann::json manifest;
  try {
    is >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("bad form manifest: " + std::string(e.what()));
  }
  if (manifest.value("format", "") != "curvkit-form")
    throw ConfigError(dir + " is not a curvkit form directory");
  const int degree = manifest.at("degree").get<int>();
  const int rows = manifest.at("rows").get<int>();
  const int cols = manifest.at("cols").get<int>();
  Domain dom;
  bool have_dom = false;
  std::vector<std::pair<BasisWedge, Field>> loaded;
  for (const auto& jt : manifest.at("terms")) {
    BasisWedge w;
    w.dn = jt.at("dn").get<std::vector<int>>();
    w.dx = jt.at("dx").get<std::vector<int>>();
    Field f = read_field_binary((fs::path(dir) / jt.at("file").get<std::string>()).string());
    if (!have_dom) {
      dom = f.domain();
      have_dom = true;
    }
    loaded.emplace_back(w, f);
  }
  if (!have_dom) {
    // empty form: reconstruct the domain from the manifest
    std::vector<LatticeExtent> lat;
    for (const auto& e : manifest.at("domain").at("lattice"))
      lat.push_back({e.at(0).get<long>(), e.at(1).get<long>()});
    std::vector<ContinuousRange> cont;
    for (const auto& e : manifest.at("domain").at("continuous"))
      cont.push_back({e.at(0).get<double>(), e.at(1).get<double>(), e.at(2).get<double>()});
    dom = make_domain(lat, cont);
  }
  Form form(dom, degree, rows, cols);
  for (auto& [w, f] : loaded) form.add_term(w, f);
  return form;
}

}  // namespace curvkit

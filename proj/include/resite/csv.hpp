#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "resite/error.hpp"
#include "resite/hydro.hpp"
#include "resite/power_curve.hpp"
#include "resite/site_catalog.hpp"
#include "resite/time_series.hpp"

// Plain comma-separated files without quoting. Lines starting with '#' carry
// "key=value" metadata and are otherwise ignored.
//
// Schemas (version 1):
//   time series   header: one id per column; rows: one period each
//                 metadata: resolution_hours (default 1), start
//   catalog       id,lon,lat,partition,legacy_MW,potential_MW
//   power curve   speed,power     metadata: cut_in, rated, cut_out (optional)
//   hydro params  country,flood_threshold,flow_multiplier,head_m,ror_capacity_MW,
//                 sto_capacity_MW,sto_energy_MWh,yearly_energy_MWh,phs_power_MW,
//                 phs_energy_MWh,phs_duration_h     (empty field = not given)
//   runoff grid   cell,country,area_km2,series
//                 series: time-series file, relative to the grid file; the column
//                 named after the cell is used, or the only column

namespace resite {

inline constexpr const char* kSchemaVersion = "1";

namespace csv {

inline std::string format(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, const std::string& where) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw InvalidInput("cannot parse number '" + std::string(s) + "' " + where);
  return v;
}

inline std::optional<double> parse_optional(std::string_view s, const std::string& where) {
  while (!s.empty() && (s.front() == ' ' || s.back() == ' ' || s.back() == '\r')) {
    if (s.front() == ' ') s.remove_prefix(1);
    else s.remove_suffix(1);
  }
  if (s.empty()) return std::nullopt;
  return parse_double(s, where);
}

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  for (auto& f : out) {
    while (!f.empty() && f.front() == ' ') f.erase(f.begin());
    while (!f.empty() && f.back() == ' ') f.pop_back();
  }
  return out;
}

struct Table {
  std::map<std::string, std::string> meta;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
  std::string path;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw InvalidInput("'" + path + "' has no column '" + name + "'");
  }
  std::string where(std::size_t row) const {
    return "at " + path + ":" + std::to_string(line_numbers[row]);
  }
};

inline Table read(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "'");
  Table t;
  t.path = path.string();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      while (!body.empty() && body.front() == ' ') body.erase(body.begin());
      const auto eq = body.find('=');
      if (eq != std::string::npos) t.meta[body.substr(0, eq)] = body.substr(eq + 1);
      continue;
    }
    auto fields = split(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size())
      throw InvalidInput("'" + t.path + "' line " + std::to_string(lineno) + " has " +
                         std::to_string(fields.size()) + " fields, expected " +
                         std::to_string(t.header.size()));
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(lineno);
  }
  if (t.header.empty()) throw InvalidInput("'" + t.path + "' has no header");
  return t;
}

// Writes metadata lines, the header and rows. Output is byte-stable for equal input.
class Writer {
 public:
  void meta(const std::string& key, const std::string& value) {
    out_ << "# " << key << "=" << value << "\n";
  }
  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) out_ << (i ? "," : "") << fields[i];
    out_ << "\n";
  }
  std::string str() const { return out_.str(); }
  void save(const std::filesystem::path& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write '" + path.string() + "'");
    f << out_.str();
    if (!f) throw IoError("failed writing '" + path.string() + "'");
  }

 private:
  std::ostringstream out_;
};

}  // namespace csv

// Named columns of equal length sharing a resolution.
struct SeriesTable {
  std::vector<std::string> ids;
  std::vector<TimeSeries> series;

  const TimeSeries& get(const std::string& id) const {
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (ids[i] == id) return series[i];
    throw InvalidInput("no series named '" + id + "'");
  }
  bool has(const std::string& id) const {
    for (const auto& s : ids)
      if (s == id) return true;
    return false;
  }
};

inline SeriesTable read_series(const std::filesystem::path& path) {
  const auto t = csv::read(path);
  double res = 1.0;
  if (auto it = t.meta.find("resolution_hours"); it != t.meta.end())
    res = csv::parse_double(it->second, "in metadata of " + t.path);
  std::string start;
  if (auto it = t.meta.find("start"); it != t.meta.end()) start = it->second;
  if (t.rows.empty()) throw InvalidInput("'" + t.path + "' has no data rows");
  SeriesTable out;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    std::vector<double> v;
    v.reserve(t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r)
      v.push_back(csv::parse_double(t.rows[r][c], t.where(r)));
    out.ids.push_back(t.header[c]);
    out.series.emplace_back(std::move(v), res, start);
  }
  return out;
}

inline void write_series(const std::filesystem::path& path, const SeriesTable& table,
                         const std::map<std::string, std::string>& extra_meta = {}) {
  if (table.ids.empty()) throw InvalidInput("no series to write");
  csv::Writer w;
  w.meta("schema", std::string("timeseries/") + kSchemaVersion);
  for (const auto& [k, v] : extra_meta) w.meta(k, v);
  w.meta("resolution_hours", csv::format(table.series.front().resolution_hours()));
  if (!table.series.front().start_label().empty())
    w.meta("start", table.series.front().start_label());
  w.row(table.ids);
  const std::size_t T = table.series.front().size();
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<std::string> f;
    for (const auto& s : table.series) f.push_back(csv::format(s[t]));
    w.row(f);
  }
  w.save(path);
}

struct CatalogRow {
  std::string id;
  double lon = 0.0;
  double lat = 0.0;
  std::string partition;
  double legacy_mw = 0.0;
  double potential_mw = 0.0;
};

inline std::vector<CatalogRow> read_catalog_rows(const std::filesystem::path& path) {
  const auto t = csv::read(path);
  const auto ci = t.column("id"), clon = t.column("lon"), clat = t.column("lat"),
             cp = t.column("partition"), cl = t.column("legacy_MW"),
             cpot = t.column("potential_MW");
  std::vector<CatalogRow> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& f = t.rows[r];
    out.push_back({f[ci], csv::parse_double(f[clon], t.where(r)),
                   csv::parse_double(f[clat], t.where(r)), f[cp],
                   csv::parse_double(f[cl], t.where(r)), csv::parse_double(f[cpot], t.where(r))});
  }
  if (out.empty()) throw InvalidInput("catalog '" + t.path + "' is empty");
  return out;
}

inline void write_catalog_rows(const std::filesystem::path& path,
                               const std::vector<CatalogRow>& rows,
                               const std::map<std::string, std::string>& extra_meta = {}) {
  csv::Writer w;
  w.meta("schema", std::string("catalog/") + kSchemaVersion);
  for (const auto& [k, v] : extra_meta) w.meta(k, v);
  w.row({"id", "lon", "lat", "partition", "legacy_MW", "potential_MW"});
  for (const auto& r : rows)
    w.row({r.id, csv::format(r.lon), csv::format(r.lat), r.partition, csv::format(r.legacy_mw),
           csv::format(r.potential_mw)});
  w.save(path);
}

// Joins catalog rows with capacity-factor columns named by site id.
inline SiteCatalog make_catalog(const std::vector<CatalogRow>& rows, const SeriesTable& cf,
                                double legacy_threshold_mw = kDefaultLegacyThresholdMw) {
  std::vector<Site> sites;
  for (const auto& r : rows)
    sites.push_back({r.id, r.lon, r.lat, r.partition, r.legacy_mw, r.potential_mw, cf.get(r.id),
                     false});
  return SiteCatalog(std::move(sites), legacy_threshold_mw);
}

inline PowerCurve read_power_curve(const std::filesystem::path& path) {
  const auto t = csv::read(path);
  const auto cs = t.column("speed"), cp = t.column("power");
  std::vector<CurvePoint> pts;
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    pts.push_back({csv::parse_double(t.rows[r][cs], t.where(r)),
                   csv::parse_double(t.rows[r][cp], t.where(r))});
  auto m = [&](const char* k) -> std::optional<double> {
    auto it = t.meta.find(k);
    if (it == t.meta.end()) return std::nullopt;
    return csv::parse_double(it->second, "in metadata of " + t.path);
  };
  const auto ci = m("cut_in"), rated = m("rated"), co = m("cut_out");
  if (ci && rated && co) return PowerCurve(std::move(pts), *ci, *rated, *co);
  return PowerCurve::from_points(std::move(pts));
}

inline void write_power_curve(const std::filesystem::path& path, const PowerCurve& c) {
  csv::Writer w;
  w.meta("schema", std::string("powercurve/") + kSchemaVersion);
  w.meta("cut_in", csv::format(c.cut_in()));
  w.meta("rated", csv::format(c.rated_speed()));
  w.meta("cut_out", csv::format(c.cut_out()));
  w.row({"speed", "power"});
  for (const auto& p : c.points()) w.row({csv::format(p.speed), csv::format(p.power)});
  w.save(path);
}

struct HydroRecord {
  HydroCountryParams params;
  std::optional<double> phs_power_mw;
  std::optional<double> phs_energy_mwh;
  std::optional<double> phs_duration_h;
};

inline std::vector<HydroRecord> read_hydro_params(const std::filesystem::path& path) {
  const auto t = csv::read(path);
  auto col = [&](const char* n) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < t.header.size(); ++i)
      if (t.header[i] == n) return i;
    return std::nullopt;
  };
  const auto cc = t.column("country");
  std::vector<HydroRecord> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& f = t.rows[r];
    auto get = [&](const char* n) -> std::optional<double> {
      auto c = col(n);
      if (!c) return std::nullopt;
      return csv::parse_optional(f[*c], t.where(r));
    };
    HydroRecord h;
    h.params.country = f[cc];
    h.params.flood_threshold =
        get("flood_threshold").value_or(default_flood_threshold(h.params.country));
    h.params.flow_multiplier = get("flow_multiplier");
    h.params.head_m = get("head_m").value_or(1.0);
    h.params.ror_capacity_mw = get("ror_capacity_MW").value_or(0.0);
    h.params.sto_capacity_mw = get("sto_capacity_MW").value_or(0.0);
    h.params.sto_energy_mwh = get("sto_energy_MWh").value_or(0.0);
    h.params.yearly_energy_mwh = get("yearly_energy_MWh").value_or(0.0);
    h.phs_power_mw = get("phs_power_MW");
    h.phs_energy_mwh = get("phs_energy_MWh");
    h.phs_duration_h = get("phs_duration_h");
    out.push_back(std::move(h));
  }
  return out;
}

inline RunoffGrid read_runoff_grid(const std::filesystem::path& path) {
  const auto t = csv::read(path);
  const auto cc = t.column("cell"), cn = t.column("country"), ca = t.column("area_km2"),
             cs = t.column("series");
  std::map<std::string, SeriesTable> cache;
  std::vector<RunoffCell> cells;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& f = t.rows[r];
    const auto series_path = (path.parent_path() / f[cs]).lexically_normal().string();
    auto it = cache.find(series_path);
    if (it == cache.end()) it = cache.emplace(series_path, read_series(series_path)).first;
    const SeriesTable& st = it->second;
    const TimeSeries* s = nullptr;
    if (st.has(f[cc])) s = &st.get(f[cc]);
    else if (st.ids.size() == 1) s = &st.series.front();
    else throw InvalidInput("series file for cell '" + f[cc] + "' has no matching column");
    cells.push_back({f[cc], f[cn], csv::parse_double(f[ca], t.where(r)), *s});
  }
  return RunoffGrid(std::move(cells));
}

}  // namespace resite

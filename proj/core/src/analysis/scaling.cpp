#include "scalemap/analysis/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>

#include "scalemap/error.hpp"

namespace scalemap::analysis {

StageSelector parse_stage(std::string_view text) {
  if (text == "create") return StageSelector::Create;
  if (text == "map") return StageSelector::Map;
  if (text == "reduce") return StageSelector::Reduce;
  if (text == "total") return StageSelector::Total;
  fail(ErrorCode::ConfigError, "unknown stage '" + std::string(text) + "'");
}

UnitsAxis parse_units(std::string_view text) {
  if (text == "nodes") return UnitsAxis::Nodes;
  if (text == "cores") return UnitsAxis::Cores;
  fail(ErrorCode::ConfigError, "unknown units '" + std::string(text) + "'");
}

std::string_view to_string(StageSelector stage) noexcept {
  switch (stage) {
    case StageSelector::Create: return "create";
    case StageSelector::Map: return "map";
    case StageSelector::Reduce: return "reduce";
    case StageSelector::Total: return "total";
  }
  return "total";
}

double speedup(double t_base, double t_n) {
  if (!(t_base > 0.0) || !(t_n > 0.0))
    fail(ErrorCode::NonPositiveTime, "times must be > 0 (got " + std::to_string(t_base) + ", " +
                                         std::to_string(t_n) + ")");
  return t_base / t_n;
}

double strong_efficiency(double speedup, double resource_factor) {
  if (!(resource_factor > 0.0))
    fail(ErrorCode::NonPositiveFactor, "resource factor must be > 0");
  return speedup / resource_factor;
}

double weak_efficiency(double t_base, double t_n) { return speedup(t_base, t_n); }

double stage_time(const bench::RunRecord& r, StageSelector stage) {
  switch (stage) {
    case StageSelector::Create: return r.timings.create_s;
    case StageSelector::Map: return r.timings.map_s;
    case StageSelector::Reduce: return r.timings.reduce_s;
    case StageSelector::Total: return r.timings.total_s;
  }
  return r.timings.total_s;
}

std::uint64_t units_of(const bench::RunRecord& r, UnitsAxis axis) {
  return axis == UnitsAxis::Nodes ? r.params.nodes : r.params.nodes * r.params.cores;
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

}  // namespace

ScalingSeries build_series(std::span<const bench::RunRecord> records, Scaling mode,
                           StageSelector stage, UnitsAxis axis,
                           std::optional<std::uint64_t> base_units) {
  if (records.empty()) fail(ErrorCode::ConfigError, "no run records");
  if (mode == Scaling::None) fail(ErrorCode::ConfigError, "series needs strong or weak mode");

  std::map<std::uint64_t, std::vector<double>> groups;
  for (const auto& r : records) {
    if (r.scaling != Scaling::None && r.scaling != mode)
      fail(ErrorCode::MixedModes, "record scaling '" + std::string(bench::to_string(r.scaling)) +
                                      "' does not match requested '" +
                                      std::string(bench::to_string(mode)) + "'");
    groups[units_of(r, axis)].push_back(stage_time(r, stage));
  }

  ScalingSeries series;
  series.mode = mode;
  series.stage = stage;
  series.axis = axis;
  series.base_units = base_units.value_or(groups.begin()->first);
  const auto base_it = groups.find(series.base_units);
  if (base_it == groups.end())
    fail(ErrorCode::MissingBasePoint, "no records at base units " + std::to_string(series.base_units));
  const double t_base = median(base_it->second);

  for (const auto& [units, times] : groups) {
    SeriesPoint pt;
    pt.units = units;
    pt.median_time_s = median(times);
    pt.speedup = speedup(t_base, pt.median_time_s);
    const double factor = static_cast<double>(units) / static_cast<double>(series.base_units);
    if (mode == Scaling::Strong) {
      pt.efficiency = strong_efficiency(pt.speedup, factor);
      pt.ideal_time_s = t_base * static_cast<double>(series.base_units) / static_cast<double>(units);
    } else {
      pt.efficiency = weak_efficiency(t_base, pt.median_time_s);
      pt.ideal_time_s = t_base;
    }
    series.points.push_back(pt);
  }
  return series;
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

constexpr std::string_view kHeader = "units,median_time_s,speedup,efficiency,ideal_time_s";
constexpr std::string_view kLogColumns = ",log2_units,log2_median_time_s,log2_ideal_time_s";

}  // namespace

std::string emit_plot_data(const ScalingSeries& series, PlotScale scale) {
  std::string out(kHeader);
  if (scale == PlotScale::Log) out += kLogColumns;
  out += '\n';
  for (const auto& p : series.points) {
    out += std::to_string(p.units) + ',' + fmt17(p.median_time_s) + ',' + fmt17(p.speedup) + ',' +
           fmt17(p.efficiency) + ',' + fmt17(p.ideal_time_s);
    if (scale == PlotScale::Log) {
      out += ',' + fmt17(std::log2(static_cast<double>(p.units))) + ',' +
             fmt17(std::log2(p.median_time_s)) + ',' + fmt17(std::log2(p.ideal_time_s));
    }
    out += '\n';
  }
  return out;
}

std::vector<SeriesPoint> parse_plot_data(std::string_view csv) {
  std::istringstream in{std::string(csv)};
  std::string line;
  if (!std::getline(in, line) || line.rfind(kHeader, 0) != 0)
    fail(ErrorCode::ConfigError, "plot data header missing");
  std::vector<SeriesPoint> points;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream row(line);
    for (std::string cell; std::getline(row, cell, ',');) cells.push_back(cell);
    if (cells.size() < 5) fail(ErrorCode::ConfigError, "short plot data row: " + line);
    auto num = [&](std::size_t i) {
      char* end = nullptr;
      const double v = std::strtod(cells[i].c_str(), &end);
      if (end == cells[i].c_str() || *end != '\0')
        fail(ErrorCode::ConfigError, "bad number '" + cells[i] + "'");
      return v;
    };
    SeriesPoint p;
    p.units = std::stoull(cells[0]);
    p.median_time_s = num(1);
    p.speedup = num(2);
    p.efficiency = num(3);
    p.ideal_time_s = num(4);
    points.push_back(p);
  }
  return points;
}

}  // namespace scalemap::analysis

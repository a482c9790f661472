#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scalemap/bench/record.hpp"

namespace scalemap::analysis {

using bench::Scaling;

enum class StageSelector { Create, Map, Reduce, Total };
enum class UnitsAxis { Nodes, Cores };
enum class PlotScale { Linear, Log };

StageSelector parse_stage(std::string_view text);
UnitsAxis parse_units(std::string_view text);
std::string_view to_string(StageSelector stage) noexcept;

// t_base / t_n. Throws Error(NonPositiveTime) unless both are > 0.
double speedup(double t_base, double t_n);
// speedup / resource_factor. Throws Error(NonPositiveFactor) unless factor > 0.
double strong_efficiency(double speedup, double resource_factor);
// t_base / t_n; 1.0 is perfectly flat.
double weak_efficiency(double t_base, double t_n);

struct SeriesPoint {
  std::uint64_t units = 0;
  double median_time_s = 0.0;
  double speedup = 0.0;
  double efficiency = 0.0;
  double ideal_time_s = 0.0;

  friend bool operator==(const SeriesPoint&, const SeriesPoint&) = default;
};

struct ScalingSeries {
  Scaling mode = Scaling::Strong;
  StageSelector stage = StageSelector::Total;
  UnitsAxis axis = UnitsAxis::Cores;
  std::uint64_t base_units = 0;
  std::vector<SeriesPoint> points;  // ascending units; points[0] is the base
};

double stage_time(const bench::RunRecord& record, StageSelector stage);
std::uint64_t units_of(const bench::RunRecord& record, UnitsAxis axis);

// Groups records by units (nodes, or nodes * cores), takes the median over
// repetitions and derives speedup, efficiency and the ideal curve against the
// smallest configuration (or `base_units` when given). Independent of record
// order. Throws Error(MixedModes) when records disagree with `mode` or with
// each other, Error(MissingBasePoint) when `base_units` has no records.
ScalingSeries build_series(std::span<const bench::RunRecord> records, Scaling mode,
                           StageSelector stage, UnitsAxis axis,
                           std::optional<std::uint64_t> base_units = std::nullopt);

// Header plus one row per point, 17 significant digits.
// Columns: units,median_time_s,speedup,efficiency,ideal_time_s
// Log scale appends log2_units,log2_median_time_s,log2_ideal_time_s.
std::string emit_plot_data(const ScalingSeries& series, PlotScale scale = PlotScale::Linear);

// Reads back the points of emit_plot_data output (either scale).
std::vector<SeriesPoint> parse_plot_data(std::string_view csv);

}  // namespace scalemap::analysis

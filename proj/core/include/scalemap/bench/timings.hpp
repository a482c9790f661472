#pragma once

#include "scalemap/engine/context.hpp"

namespace scalemap::bench {

// Stage wall times in seconds from a monotonic clock. Stages are timed
// disjointly, so total_s >= create_s + map_s + reduce_s up to timer granularity.
struct StageTimings {
  double create_s = 0.0;
  double map_s = 0.0;
  double reduce_s = 0.0;
  double total_s = 0.0;
  engine::MaterializationReport create;
  engine::MaterializationReport map;
};

}  // namespace scalemap::bench

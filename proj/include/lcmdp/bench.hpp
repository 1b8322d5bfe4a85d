#pragma once

#include <vector>

#include "lcmdp/gridworld.hpp"
#include "lcmdp/prune.hpp"
#include "lcmdp/synth.hpp"

namespace lcmdp {

// One sweep row: the same synthesis problem solved without pruning (NP) and
// with pruning (WP), comparing occupation-variable counts and LP solve time.
struct BenchRow {
  int scale = 0;  // grid side length
  int vars_np = 0;
  int vars_wp = 0;
  double time_np = 0.0;  // LP solve wall time, seconds
  double time_wp = 0.0;
  double obj_np = 0.0;
  double obj_wp = 0.0;
  LpStatus status_np = LpStatus::Infeasible;
  LpStatus status_wp = LpStatus::Infeasible;
};

struct BenchInputs {
  grid::ElevationMap elev;
  grid::GridConfig cfg;  // mask included; start/goal refer to the base grid
  spec_lang::Dfa dfa;    // compiled under the wanted semantics
  double p_l = 0.0;
  std::vector<double> bounds;
  PruneMode wp_mode = PruneMode::ReachOnly;
  bool scale_bounds = true;  // rescale length-type bounds with the grid size
};

// Nearest-neighbor resampling of terrain, mask, start and goal onto a
// side x side grid.
grid::ElevationMap resample_elevation(const grid::ElevationMap& elev, int width, int height);
std::vector<int> resample_mask(const std::vector<int>& mask, int src_w, int src_h, int width,
                               int height);
grid::GridConfig resample_config(const grid::GridConfig& cfg, int src_w, int src_h, int width,
                                 int height);

std::vector<BenchRow> run_bench(const BenchInputs& inputs, const std::vector<int>& scales);

// Fixed-width text table shaped like the four-column pruning comparison.
std::string bench_table(const std::vector<BenchRow>& rows);
nlohmann::json bench_to_json(const std::vector<BenchRow>& rows);

}  // namespace lcmdp

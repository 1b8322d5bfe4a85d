#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lcmdp/model.hpp"
#include "lcmdp/spec_lang.hpp"

namespace lcmdp::grid {

struct GridError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ElevationMap {
  int width = 0;
  int height = 0;
  std::vector<double> h;  // row-major

  double at(int r, int c) const {
    return h[static_cast<std::size_t>(r) * static_cast<std::size_t>(width) +
             static_cast<std::size_t>(c)];
  }
};

struct RiskMap {
  int width = 0;
  int height = 0;
  std::vector<double> risk;  // in [0, 1]

  double at(int r, int c) const {
    return risk[static_cast<std::size_t>(r) * static_cast<std::size_t>(width) +
                static_cast<std::size_t>(c)];
  }
};

// The four region labels; every cell carries exactly one.
inline const std::vector<std::string> kGridAp = {"A", "B", "C", "D"};

struct GridConfig {
  int start_r = 0;
  int start_c = 0;
  std::vector<std::pair<int, int>> goal_cells;
  std::vector<int> mask;  // row-major region index 0..3 per cell
  double kappa = 2.0;     // slope coefficient
  double p_min = 0.55;    // success-probability floor
  double lambda_risk = 4.0;
  spec_lang::Semantics semantics = spec_lang::Semantics::Exact;
};

// CSV of numbers, or PGM in P2/P5 form with maxval <= 65535; grey values are
// used directly as heights.
ElevationMap load_elevation(const std::filesystem::path& path);

// Region mask from CSV/PGM of label indices 0..3.
std::vector<int> load_mask(const std::filesystem::path& path, int width, int height);

// GridConfig without the mask, from JSON:
//   {"start":[r,c], "goal":[[r,c],...], "kappa":2.0, "p_min":0.55,
//    "lambda_risk":4.0, "semantics":"exact"}
GridConfig load_grid_config(const std::filesystem::path& path);

// risk(cell) = min(1, g/g95) where g is the largest absolute height step to a
// 4-neighbor and g95 the 95th percentile of g over the map.
RiskMap derive_risk(const ElevationMap& elev);

// The experiment model: four moves per non-goal cell (moves off the grid are
// disabled), success probability clamp(1 - kappa*|dh|/h_range, p_min, 1), and
// on failure the next cell is uniform over the valid 4-neighborhood. C_0 is
// the scaled failure probability, C_1 counts path length.
Lcmdp build_grid_lcmdp(const ElevationMap& elev, const RiskMap& risk, const GridConfig& cfg);

inline StateId cell_state(int r, int c, int width) { return r * width + c; }

// PPM (P6) render: risk colormap background, region tints, trajectory cells
// marked black. `scale` is pixels per cell.
void render(const std::filesystem::path& path, const RiskMap& risk,
            const std::vector<int>& mask, const std::vector<StateId>& trajectory_cells,
            int scale = 1);

}  // namespace lcmdp::grid

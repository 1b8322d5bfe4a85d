#include "lcmdp/bench.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "lcmdp/util.hpp"

namespace lcmdp {

using nlohmann::json;

grid::ElevationMap resample_elevation(const grid::ElevationMap& elev, int width, int height) {
  grid::ElevationMap out;
  out.width = width;
  out.height = height;
  out.h.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) {
      int sr = std::min(elev.height - 1, r * elev.height / height);
      int sc = std::min(elev.width - 1, c * elev.width / width);
      out.h[static_cast<std::size_t>(r) * static_cast<std::size_t>(width) +
            static_cast<std::size_t>(c)] = elev.at(sr, sc);
    }
  return out;
}

std::vector<int> resample_mask(const std::vector<int>& mask, int src_w, int src_h, int width,
                               int height) {
  std::vector<int> out(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) {
      int sr = std::min(src_h - 1, r * src_h / height);
      int sc = std::min(src_w - 1, c * src_w / width);
      out[static_cast<std::size_t>(r) * static_cast<std::size_t>(width) +
          static_cast<std::size_t>(c)] =
          mask[static_cast<std::size_t>(sr) * static_cast<std::size_t>(src_w) +
               static_cast<std::size_t>(sc)];
    }
  return out;
}

grid::GridConfig resample_config(const grid::GridConfig& cfg, int src_w, int src_h, int width,
                                 int height) {
  grid::GridConfig out = cfg;
  out.mask = resample_mask(cfg.mask, src_w, src_h, width, height);
  auto map_cell = [&](int r, int c) {
    return std::pair<int, int>{std::min(height - 1, r * height / src_h),
                               std::min(width - 1, c * width / src_w)};
  };
  std::tie(out.start_r, out.start_c) = map_cell(cfg.start_r, cfg.start_c);
  std::set<std::pair<int, int>> goals;
  for (auto [r, c] : cfg.goal_cells) goals.insert(map_cell(r, c));
  goals.erase({out.start_r, out.start_c});
  out.goal_cells.assign(goals.begin(), goals.end());
  if (out.goal_cells.empty())
    throw grid::GridError(strf("goal region vanished when resampling to %dx%d", width, height));
  return out;
}

std::vector<BenchRow> run_bench(const BenchInputs& inputs, const std::vector<int>& scales) {
  std::vector<BenchRow> rows;
  const int src_w = inputs.elev.width;
  const int src_h = inputs.elev.height;
  const double src_manhattan = [&] {
    int best = INT_MAX;
    for (auto [r, c] : inputs.cfg.goal_cells)
      best = std::min(best,
                      std::abs(r - inputs.cfg.start_r) + std::abs(c - inputs.cfg.start_c));
    return static_cast<double>(best);
  }();

  for (int side : scales) {
    grid::ElevationMap elev = resample_elevation(inputs.elev, side, side);
    grid::GridConfig cfg = resample_config(inputs.cfg, src_w, src_h, side, side);
    grid::RiskMap risk = grid::derive_risk(elev);
    Lcmdp model = grid::build_grid_lcmdp(elev, risk, cfg);

    std::vector<double> bounds = inputs.bounds;
    if (inputs.scale_bounds && src_manhattan > 0.0) {
      int manhattan = INT_MAX;
      for (auto [r, c] : cfg.goal_cells)
        manhattan = std::min(manhattan,
                             std::abs(r - cfg.start_r) + std::abs(c - cfg.start_c));
      double factor = static_cast<double>(manhattan) / src_manhattan;
      for (double& b : bounds) b *= factor;
    }

    ProductLcmdp product = build_product(model, inputs.dfa, /*restrict_reachable=*/false);

    BenchRow row;
    row.scale = side;
    {
      SynthesisProblem prob{&product, inputs.p_l, bounds};
      SynthesisResult res = synthesize(prob);
      row.vars_np = res.report.lp_vars;
      row.time_np = res.report.solve_seconds;
      row.obj_np = res.report.objective;
      row.status_np = res.report.status;
    }
    {
      auto [pruned, report] = prune(product, inputs.wp_mode);
      SynthesisProblem prob{&pruned, inputs.p_l, bounds};
      SynthesisResult res = synthesize(prob);
      row.vars_wp = res.report.lp_vars;
      row.time_wp = res.report.solve_seconds;
      row.obj_wp = res.report.objective;
      row.status_wp = res.report.status;
    }
    rows.push_back(row);
  }
  return rows;
}

std::string bench_table(const std::vector<BenchRow>& rows) {
  std::string out = "scale | #Var NP | #Var WP | Time (s) NP | Time (s) WP | obj NP | obj WP\n";
  out += "------+---------+---------+-------------+-------------+--------+-------\n";
  for (const auto& r : rows)
    out += strf("%5d | %7d | %7d | %11.2f | %11.2f | %6.4g | %6.4g\n", r.scale, r.vars_np,
                r.vars_wp, r.time_np, r.time_wp, r.obj_np, r.obj_wp);
  return out;
}

json bench_to_json(const std::vector<BenchRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows)
    arr.push_back({{"scale", r.scale},
                   {"vars_np", r.vars_np},
                   {"vars_wp", r.vars_wp},
                   {"time_np", r.time_np},
                   {"time_wp", r.time_wp},
                   {"obj_np", r.obj_np},
                   {"obj_wp", r.obj_wp},
                   {"status_np", lp_status_name(r.status_np)},
                   {"status_wp", lp_status_name(r.status_wp)}});
  return json{{"rows", std::move(arr)}};
}

}  // namespace lcmdp

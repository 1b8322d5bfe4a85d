#include "lcmdp/gridworld.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <sstream>

#include "lcmdp/util.hpp"

namespace lcmdp::grid {

using nlohmann::json;

namespace {

struct RawGrid {
  int width = 0;
  int height = 0;
  std::vector<double> values;
};

RawGrid parse_csv(const std::string& text, const std::string& origin) {
  RawGrid g;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    std::vector<double> row;
    std::string cell;
    std::istringstream cells(line);
    while (std::getline(cells, cell, ',')) {
      try {
        std::size_t used = 0;
        double v = std::stod(cell, &used);
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used])))
          ++used;
        if (used != cell.size()) throw std::invalid_argument(cell);
        row.push_back(v);
      } catch (const std::exception&) {
        throw GridError(strf("%s:%d: '%s' is not a number", origin.c_str(), line_no,
                             cell.c_str()));
      }
    }
    if (g.width == 0) g.width = static_cast<int>(row.size());
    if (static_cast<int>(row.size()) != g.width)
      throw GridError(strf("%s:%d: row has %zu cells, expected %d", origin.c_str(), line_no,
                           row.size(), g.width));
    g.values.insert(g.values.end(), row.begin(), row.end());
    ++g.height;
  }
  if (g.width < 1 || g.height < 1) throw GridError(origin + ": empty grid");
  return g;
}

RawGrid parse_pgm(const std::string& text, const std::string& origin) {
  // Header tokens (magic, width, height, maxval) with '#' comments, then
  // ASCII samples for P2 or binary samples for P5.
  std::size_t at = 0;
  auto next_token = [&]() -> std::string {
    for (;;) {
      while (at < text.size() && std::isspace(static_cast<unsigned char>(text[at]))) ++at;
      if (at < text.size() && text[at] == '#') {
        while (at < text.size() && text[at] != '\n') ++at;
        continue;
      }
      break;
    }
    std::size_t start = at;
    while (at < text.size() && !std::isspace(static_cast<unsigned char>(text[at]))) ++at;
    if (start == at) throw GridError(origin + ": truncated PGM header");
    return text.substr(start, at - start);
  };

  std::string magic = next_token();
  bool ascii = magic == "P2";
  if (!ascii && magic != "P5") throw GridError(origin + ": not a P2/P5 PGM file");
  RawGrid g;
  long maxval = 0;
  try {
    g.width = std::stoi(next_token());
    g.height = std::stoi(next_token());
    maxval = std::stol(next_token());
  } catch (const std::exception&) {
    throw GridError(origin + ": malformed PGM header");
  }
  if (g.width < 1 || g.height < 1) throw GridError(origin + ": empty grid");
  if (maxval < 1 || maxval > 65535)
    throw GridError(strf("%s: PGM maxval %ld out of range", origin.c_str(), maxval));

  const std::size_t count =
      static_cast<std::size_t>(g.width) * static_cast<std::size_t>(g.height);
  g.values.reserve(count);
  if (ascii) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        g.values.push_back(std::stod(next_token()));
      } catch (const std::exception&) {
        throw GridError(origin + ": malformed PGM sample");
      }
    }
  } else {
    ++at;  // single whitespace after maxval
    const int bytes = maxval > 255 ? 2 : 1;
    if (text.size() - at < count * static_cast<std::size_t>(bytes))
      throw GridError(origin + ": truncated PGM payload");
    for (std::size_t i = 0; i < count; ++i) {
      unsigned v = static_cast<unsigned char>(text[at + i * static_cast<std::size_t>(bytes)]);
      if (bytes == 2)
        v = (v << 8) |
            static_cast<unsigned char>(text[at + i * 2 + 1]);  // big-endian per spec
      g.values.push_back(static_cast<double>(v));
    }
  }
  return g;
}

RawGrid load_grid_file(const std::filesystem::path& path) {
  std::string text = read_file(path);
  if (text.size() >= 2 && text[0] == 'P' && (text[1] == '2' || text[1] == '5'))
    return parse_pgm(text, path.string());
  return parse_csv(text, path.string());
}

}  // namespace

ElevationMap load_elevation(const std::filesystem::path& path) {
  RawGrid g = load_grid_file(path);
  if (g.width < 2 || g.height < 2)
    throw GridError(strf("%s: map must be at least 2x2, got %dx%d", path.string().c_str(),
                         g.width, g.height));
  return {g.width, g.height, std::move(g.values)};
}

std::vector<int> load_mask(const std::filesystem::path& path, int width, int height) {
  RawGrid g = load_grid_file(path);
  if (g.width != width || g.height != height)
    throw GridError(strf("%s: mask is %dx%d but the terrain is %dx%d", path.string().c_str(),
                         g.width, g.height, width, height));
  std::vector<int> mask;
  mask.reserve(g.values.size());
  for (double v : g.values) {
    int label = static_cast<int>(std::lround(v));
    if (label < 0 || label > 3 || std::abs(v - label) > 1e-9)
      throw GridError(strf("%s: mask value %g is not a region index 0..3",
                           path.string().c_str(), v));
    mask.push_back(label);
  }
  return mask;
}

GridConfig load_grid_config(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw GridError(strf("%s: %s", path.string().c_str(), e.what()));
  }
  GridConfig cfg;
  try {
    cfg.start_r = j.at("start").at(0).get<int>();
    cfg.start_c = j.at("start").at(1).get<int>();
    for (const auto& cell : j.at("goal"))
      cfg.goal_cells.push_back({cell.at(0).get<int>(), cell.at(1).get<int>()});
    cfg.kappa = j.value("kappa", cfg.kappa);
    cfg.p_min = j.value("p_min", cfg.p_min);
    cfg.lambda_risk = j.value("lambda_risk", cfg.lambda_risk);
    std::string sem = j.value("semantics", std::string("exact"));
    if (sem == "exact") cfg.semantics = spec_lang::Semantics::Exact;
    else if (sem == "prefix") cfg.semantics = spec_lang::Semantics::Prefix;
    else throw GridError(strf("unknown semantics '%s'", sem.c_str()));
  } catch (const json::exception& e) {
    throw GridError(strf("%s: %s", path.string().c_str(), e.what()));
  }
  return cfg;
}

RiskMap derive_risk(const ElevationMap& elev) {
  const int w = elev.width;
  const int hgt = elev.height;
  std::vector<double> g(static_cast<std::size_t>(w) * static_cast<std::size_t>(hgt), 0.0);
  for (int r = 0; r < hgt; ++r)
    for (int c = 0; c < w; ++c) {
      double here = elev.at(r, c);
      double worst = 0.0;
      if (r > 0) worst = std::max(worst, std::abs(elev.at(r - 1, c) - here));
      if (r + 1 < hgt) worst = std::max(worst, std::abs(elev.at(r + 1, c) - here));
      if (c > 0) worst = std::max(worst, std::abs(elev.at(r, c - 1) - here));
      if (c + 1 < w) worst = std::max(worst, std::abs(elev.at(r, c + 1) - here));
      g[static_cast<std::size_t>(r) * static_cast<std::size_t>(w) +
        static_cast<std::size_t>(c)] = worst;
    }

  std::vector<double> sorted = g;
  std::sort(sorted.begin(), sorted.end());
  // Nearest-rank 95th percentile.
  std::size_t rank = static_cast<std::size_t>(
      std::ceil(0.95 * static_cast<double>(sorted.size())));
  double g95 = sorted[std::min(rank == 0 ? 0 : rank - 1, sorted.size() - 1)];

  RiskMap risk{w, hgt, std::move(g)};
  if (g95 <= 0.0) {
    std::fill(risk.risk.begin(), risk.risk.end(), 0.0);
  } else {
    for (double& v : risk.risk) v = std::min(1.0, v / g95);
  }
  return risk;
}

Lcmdp build_grid_lcmdp(const ElevationMap& elev, const RiskMap& risk, const GridConfig& cfg) {
  const int w = elev.width;
  const int hgt = elev.height;
  if (risk.width != w || risk.height != hgt)
    throw GridError("risk map dimensions do not match the terrain");
  if (static_cast<int>(cfg.mask.size()) != w * hgt)
    throw GridError(strf("mask has %zu cells but the terrain is %dx%d", cfg.mask.size(), w,
                         hgt));
  for (int v : cfg.mask)
    if (v < 0 || v > 3) throw GridError(strf("mask value %d is not a region index 0..3", v));

  auto in_bounds = [&](int r, int c) { return r >= 0 && r < hgt && c >= 0 && c < w; };
  if (!in_bounds(cfg.start_r, cfg.start_c))
    throw GridError(strf("start (%d,%d) is out of bounds", cfg.start_r, cfg.start_c));
  if (cfg.goal_cells.empty()) throw GridError("goal region is empty");

  std::vector<char> goal(static_cast<std::size_t>(w) * static_cast<std::size_t>(hgt), 0);
  for (auto [r, c] : cfg.goal_cells) {
    if (!in_bounds(r, c)) throw GridError(strf("goal cell (%d,%d) is out of bounds", r, c));
    goal[static_cast<std::size_t>(cell_state(r, c, w))] = 1;
  }
  if (goal[static_cast<std::size_t>(cell_state(cfg.start_r, cfg.start_c, w))])
    throw GridError("start lies inside the goal region");

  double h_min = *std::min_element(elev.h.begin(), elev.h.end());
  double h_max = *std::max_element(elev.h.begin(), elev.h.end());
  double h_range = h_max - h_min;

  Lcmdp m;
  m.ap = kGridAp;
  m.n_costs = 2;
  const int n = w * hgt;
  m.labels.resize(static_cast<std::size_t>(n));
  m.absorbing.assign(static_cast<std::size_t>(n), 0);
  m.beta.assign(static_cast<std::size_t>(n), 0.0);
  m.choices.resize(static_cast<std::size_t>(n));
  m.beta[static_cast<std::size_t>(cell_state(cfg.start_r, cfg.start_c, w))] = 1.0;

  // up, down, left, right
  constexpr int dr[4] = {-1, 1, 0, 0};
  constexpr int dc[4] = {0, 0, -1, 1};

  for (int r = 0; r < hgt; ++r)
    for (int c = 0; c < w; ++c) {
      StateId s = cell_state(r, c, w);
      m.labels[static_cast<std::size_t>(s)] =
          1u << cfg.mask[static_cast<std::size_t>(s)];
      if (goal[static_cast<std::size_t>(s)]) {
        m.absorbing[static_cast<std::size_t>(s)] = 1;
        ActionChoice stay;
        stay.action = 0;
        stay.rows = {{s, 1.0}};
        stay.cost = {0.0, 0.0};
        m.choices[static_cast<std::size_t>(s)].push_back(std::move(stay));
        continue;
      }
      std::vector<StateId> neighbors;
      for (int a = 0; a < 4; ++a)
        if (in_bounds(r + dr[a], c + dc[a]))
          neighbors.push_back(cell_state(r + dr[a], c + dc[a], w));
      for (int a = 0; a < 4; ++a) {
        int nr = r + dr[a];
        int nc = c + dc[a];
        if (!in_bounds(nr, nc)) continue;  // moves off the grid are disabled
        StateId dest = cell_state(nr, nc, w);
        double dh = std::abs(elev.at(nr, nc) - elev.at(r, c));
        double p_succ =
            h_range > 0.0
                ? std::clamp(1.0 - cfg.kappa * dh / h_range, cfg.p_min, 1.0)
                : 1.0;
        ActionChoice ch;
        ch.action = a;
        double share = (1.0 - p_succ) / static_cast<double>(neighbors.size());
        for (StateId nb : neighbors) {
          double prob = share + (nb == dest ? p_succ : 0.0);
          if (prob > 0.0) ch.rows.push_back({nb, prob});
        }
        ch.cost = {cfg.lambda_risk * (1.0 - p_succ), 1.0};
        m.choices[static_cast<std::size_t>(s)].push_back(std::move(ch));
      }
    }
  return m;
}

void render(const std::filesystem::path& path, const RiskMap& risk,
            const std::vector<int>& mask, const std::vector<StateId>& trajectory_cells,
            int scale) {
  const int w = risk.width;
  const int hgt = risk.height;
  if (static_cast<int>(mask.size()) != w * hgt)
    throw GridError("mask dimensions do not match the risk map");
  if (scale < 1) throw GridError("render scale must be at least 1");

  // Cold-to-warm colormap for risk, with channels kept off pure black so
  // trajectory marks stay countable.
  auto colormap = [](double v) {
    v = std::clamp(v, 0.0, 1.0);
    int r, g, b;
    if (v < 0.5) {  // blue -> yellow
      double t = v * 2.0;
      r = static_cast<int>(40 + t * 205);
      g = static_cast<int>(60 + t * 175);
      b = static_cast<int>(220 - t * 180);
    } else {  // yellow -> red
      double t = (v - 0.5) * 2.0;
      r = 245;
      g = static_cast<int>(235 - t * 195);
      b = 40;
    }
    return std::array<int, 3>{std::max(r, 10), std::max(g, 10), std::max(b, 10)};
  };
  static const int tint[4][3] = {
      {0, 255, 255},   // A
      {255, 0, 255},   // B
      {255, 255, 0},   // C
      {0, 255, 0},     // D
  };

  std::vector<char> marked(static_cast<std::size_t>(w) * static_cast<std::size_t>(hgt), 0);
  for (StateId s : trajectory_cells) {
    if (s < 0 || s >= w * hgt)
      throw GridError(strf("trajectory cell %d is outside the grid", s));
    marked[static_cast<std::size_t>(s)] = 1;
  }

  std::string out = strf("P6\n%d %d\n255\n", w * scale, hgt * scale);
  out.reserve(out.size() +
              static_cast<std::size_t>(w) * static_cast<std::size_t>(hgt) *
                  static_cast<std::size_t>(scale) * static_cast<std::size_t>(scale) * 3);
  for (int pr = 0; pr < hgt * scale; ++pr) {
    int r = pr / scale;
    for (int pc = 0; pc < w * scale; ++pc) {
      int c = pc / scale;
      std::size_t idx = static_cast<std::size_t>(r) * static_cast<std::size_t>(w) +
                        static_cast<std::size_t>(c);
      int rgb[3];
      if (marked[idx]) {
        rgb[0] = rgb[1] = rgb[2] = 0;
      } else {
        auto base = colormap(risk.risk[idx]);
        const int* t = tint[mask[idx]];
        for (int i = 0; i < 3; ++i)
          rgb[i] = std::clamp((base[static_cast<std::size_t>(i)] * 4 + t[i]) / 5, 1, 255);
      }
      for (int i = 0; i < 3; ++i) out.push_back(static_cast<char>(rgb[i]));
    }
  }
  write_file(path, out);
}

}  // namespace lcmdp::grid

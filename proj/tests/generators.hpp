#pragma once

// Deterministic instance generators shared by the unit tests and the
// acceptance suite.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "lcmdp/gridworld.hpp"
#include "lcmdp/model.hpp"
#include "lcmdp/product.hpp"
#include "lcmdp/sim.hpp"
#include "lcmdp/spec_lang.hpp"

namespace testgen {

using lcmdp::ActionChoice;
using lcmdp::Lcmdp;
using lcmdp::ProductLcmdp;
using lcmdp::StateId;
using lcmdp::Xoshiro256pp;

inline int rand_int(Xoshiro256pp& rng, int lo, int hi) {  // inclusive bounds
  return lo + static_cast<int>(rng.next() % static_cast<std::uint64_t>(hi - lo + 1));
}

inline double rand_unit(Xoshiro256pp& rng) { return rng.next_unit(); }

// Absorbing, sink-free LCMDP: the last `n_goal` states absorb, every earlier
// state's first action moves strictly forward with positive probability, so
// every policy is absorbing.
inline Lcmdp random_absorbing_lcmdp(std::uint64_t seed, int n_states, int n_ap, int max_actions,
                                    int n_costs, int n_goal = 1) {
  Xoshiro256pp rng = Xoshiro256pp::substream(seed, 0xabcdULL);
  Lcmdp m;
  for (int p = 0; p < n_ap; ++p) m.ap.push_back(std::string(1, static_cast<char>('a' + p)));
  m.n_costs = n_costs;
  m.labels.resize(static_cast<std::size_t>(n_states));
  m.absorbing.assign(static_cast<std::size_t>(n_states), 0);
  m.beta.assign(static_cast<std::size_t>(n_states), 0.0);
  m.choices.resize(static_cast<std::size_t>(n_states));
  m.beta[0] = 1.0;

  const int first_goal = n_states - n_goal;
  for (int s = 0; s < n_states; ++s) {
    m.labels[static_cast<std::size_t>(s)] =
        static_cast<std::uint32_t>(rng.next() & ((1u << n_ap) - 1u));
    if (s >= first_goal) {
      m.absorbing[static_cast<std::size_t>(s)] = 1;
      ActionChoice stay;
      stay.action = 0;
      stay.rows = {{s, 1.0}};
      stay.cost.assign(static_cast<std::size_t>(n_costs), 0.0);
      m.choices[static_cast<std::size_t>(s)].push_back(std::move(stay));
      continue;
    }
    int n_act = rand_int(rng, 1, max_actions);
    for (int a = 0; a < n_act; ++a) {
      ActionChoice ch;
      ch.action = a;
      // Pick 1..3 successors; action 0 always includes a strictly later state.
      std::vector<StateId> succ;
      if (a == 0) succ.push_back(rand_int(rng, s + 1, n_states - 1));
      int extra = rand_int(rng, a == 0 ? 0 : 1, 2);
      for (int e = 0; e < extra; ++e) succ.push_back(rand_int(rng, 0, n_states - 1));
      std::sort(succ.begin(), succ.end());
      succ.erase(std::unique(succ.begin(), succ.end()), succ.end());
      std::vector<double> w;
      double total = 0.0;
      for (std::size_t i = 0; i < succ.size(); ++i) {
        w.push_back(0.05 + rand_unit(rng));
        total += w.back();
      }
      double acc = 0.0;
      for (std::size_t i = 0; i + 1 < succ.size(); ++i) {
        double p = w[i] / total;
        ch.rows.push_back({succ[i], p});
        acc += p;
      }
      ch.rows.push_back({succ.back(), 1.0 - acc});  // rows sum to 1 exactly
      for (int i = 0; i < n_costs; ++i) ch.cost.push_back(rand_unit(rng) * 3.0);
      m.choices[static_cast<std::size_t>(s)].push_back(std::move(ch));
    }
  }
  return m;
}

inline lcmdp::spec_lang::Dfa random_dfa(std::uint64_t seed, int n_ap, int n_states) {
  Xoshiro256pp rng = Xoshiro256pp::substream(seed, 0xd1aULL);
  lcmdp::spec_lang::Dfa dfa;
  for (int p = 0; p < n_ap; ++p) dfa.ap.push_back(std::string(1, static_cast<char>('a' + p)));
  dfa.initial = 0;
  dfa.accepting.assign(static_cast<std::size_t>(n_states), 0);
  for (int q = 0; q < n_states; ++q) {
    dfa.accepting[static_cast<std::size_t>(q)] = rand_int(rng, 0, 3) == 0 ? 1 : 0;
    std::vector<int> row;
    for (int l = 0; l < (1 << n_ap); ++l) row.push_back(rand_int(rng, 0, n_states - 1));
    dfa.delta.push_back(std::move(row));
  }
  // At least one accepting state keeps satisfaction problems non-degenerate.
  if (std::count(dfa.accepting.begin(), dfa.accepting.end(), 1) == 0)
    dfa.accepting[static_cast<std::size_t>(n_states - 1)] = 1;
  return dfa;
}

// Smooth deterministic terrain with a few ridges; gradients stay moderate so
// the grid models remain mostly benign with occasional risky steps.
inline lcmdp::grid::ElevationMap synthetic_terrain(int width, int height,
                                                   double amplitude = 40.0) {
  lcmdp::grid::ElevationMap elev;
  elev.width = width;
  elev.height = height;
  elev.h.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) {
      double x = static_cast<double>(c) / static_cast<double>(width - 1);
      double y = static_cast<double>(r) / static_cast<double>(height - 1);
      double v = amplitude * std::sin(2.3 * M_PI * x) * std::cos(1.7 * M_PI * y) +
                 0.6 * amplitude * std::sin(3.1 * M_PI * (x + y)) +
                 0.3 * amplitude * std::cos(5.0 * M_PI * (x - 0.5) * (y - 0.5));
      elev.h[static_cast<std::size_t>(r) * static_cast<std::size_t>(width) +
             static_cast<std::size_t>(c)] = v;
    }
  return elev;
}

// Region quadrants in the style of the experiment: B | A on top, D | C on the
// bottom, goal tucked in the bottom-left D corner, start in the top-right A.
inline std::vector<int> quadrant_mask(int width, int height) {
  std::vector<int> mask(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) {
      bool top = r < height / 2;
      bool left = c < width / 2;
      int label = top ? (left ? 1 : 0) : (left ? 3 : 2);  // B A / D C
      mask[static_cast<std::size_t>(r) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(c)] = label;
    }
  return mask;
}

inline lcmdp::grid::GridConfig paper_style_config(int width, int height) {
  lcmdp::grid::GridConfig cfg;
  cfg.start_r = 0;
  cfg.start_c = width - 1;
  cfg.goal_cells = {{height - 1, 0}, {height - 1, 1}, {height - 2, 0}, {height - 2, 1}};
  cfg.mask = quadrant_mask(width, height);
  cfg.kappa = 2.0;
  cfg.p_min = 0.55;
  cfg.lambda_risk = 4.0;
  cfg.semantics = lcmdp::spec_lang::Semantics::Exact;
  return cfg;
}

inline int manhattan_to_goal(const lcmdp::grid::GridConfig& cfg) {
  int best = 1 << 30;
  for (auto [r, c] : cfg.goal_cells)
    best = std::min(best, std::abs(r - cfg.start_r) + std::abs(c - cfg.start_c));
  return best;
}

// The two-action benchmark: from the start, "risky" reaches the satisfying
// goal with probability 1/2 at cost 1 (otherwise a non-satisfying goal),
// while "safe" reaches it surely at cost 3.
inline ProductLcmdp risky_safe_product() {
  ProductLcmdp p;
  Lcmdp& m = p.mdp;
  m.ap = {"d"};
  m.n_costs = 1;
  m.labels = {0, 1, 0};
  m.absorbing = {0, 1, 1};
  m.beta = {1.0, 0.0, 0.0};
  m.choices.resize(3);
  ActionChoice risky;
  risky.action = 0;
  risky.rows = {{1, 0.5}, {2, 0.5}};
  risky.cost = {1.0};
  ActionChoice safe;
  safe.action = 1;
  safe.rows = {{1, 1.0}};
  safe.cost = {3.0};
  m.choices[0] = {risky, safe};
  for (StateId s = 1; s <= 2; ++s) {
    ActionChoice stay;
    stay.action = 0;
    stay.rows = {{s, 1.0}};
    stay.cost = {0.0};
    m.choices[static_cast<std::size_t>(s)].push_back(std::move(stay));
  }
  m.accepting = {1};
  p.n_dfa = 2;
  p.provenance = {{0, 0}, {1, 1}, {2, 0}};
  p.goal = {0, 1, 1};
  return p;
}

}  // namespace testgen

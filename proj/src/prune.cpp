#include "lcmdp/prune.hpp"

#include <map>
#include <queue>

#include "lcmdp/util.hpp"

namespace lcmdp {

using nlohmann::json;

namespace {

struct Graph {
  std::vector<std::vector<StateId>> fwd;  // deduplicated positive-probability edges
  std::vector<std::vector<StateId>> bwd;
};

Graph explicit_graph(const ProductLcmdp& p) {
  const int n = p.num_states();
  Graph g;
  g.fwd.resize(static_cast<std::size_t>(n));
  g.bwd.resize(static_cast<std::size_t>(n));
  for (StateId x = 0; x < n; ++x) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    for (const auto& ch : p.mdp.choices[static_cast<std::size_t>(x)])
      for (const auto& e : ch.rows)
        if (e.prob > 0.0 && !seen[static_cast<std::size_t>(e.next)]) {
          seen[static_cast<std::size_t>(e.next)] = 1;
          g.fwd[static_cast<std::size_t>(x)].push_back(e.next);
          g.bwd[static_cast<std::size_t>(e.next)].push_back(x);
        }
  }
  return g;
}

// BFS over the subgraph induced by `alive`.
std::vector<char> reach(const std::vector<std::vector<StateId>>& edges,
                        const std::vector<StateId>& roots, const std::vector<char>& alive) {
  std::vector<char> seen(edges.size(), 0);
  std::queue<StateId> open;
  for (StateId r : roots)
    if (alive[static_cast<std::size_t>(r)] && !seen[static_cast<std::size_t>(r)]) {
      seen[static_cast<std::size_t>(r)] = 1;
      open.push(r);
    }
  while (!open.empty()) {
    StateId x = open.front();
    open.pop();
    for (StateId y : edges[static_cast<std::size_t>(x)])
      if (alive[static_cast<std::size_t>(y)] && !seen[static_cast<std::size_t>(y)]) {
        seen[static_cast<std::size_t>(y)] = 1;
        open.push(y);
      }
  }
  return seen;
}

}  // namespace

std::pair<ProductLcmdp, PruneReport> prune(const ProductLcmdp& p, PruneMode mode) {
  const int n = p.num_states();
  const Graph g = explicit_graph(p);

  std::vector<StateId> init_roots, goal_roots, accepting_roots;
  for (StateId x = 0; x < n; ++x)
    if (p.mdp.beta[static_cast<std::size_t>(x)] > 0.0) init_roots.push_back(x);
  for (StateId x = 0; x < n; ++x)
    if (p.is_goal(x)) goal_roots.push_back(x);
  accepting_roots = p.mdp.accepting;

  auto exempt = [&](StateId x) {
    return p.mdp.beta[static_cast<std::size_t>(x)] > 0.0 ||
           (p.mdp.sink && *p.mdp.sink == x);
  };

  PruneReport report;
  report.mode = mode;

  std::vector<char> alive(static_cast<std::size_t>(n), 1);
  std::vector<char> removal_cause(static_cast<std::size_t>(n), 0);  // 1/2/3
  for (;;) {
    ++report.sweeps;
    std::vector<char> fwd1 = reach(g.fwd, init_roots, alive);
    std::vector<char> bwd2 = reach(g.bwd, goal_roots, alive);
    std::vector<char> c3;
    if (mode == PruneMode::Full) {
      std::vector<char> to_acc = reach(g.bwd, accepting_roots, alive);
      std::vector<char> from_acc = reach(g.fwd, accepting_roots, alive);
      c3.resize(static_cast<std::size_t>(n));
      for (int x = 0; x < n; ++x)
        c3[static_cast<std::size_t>(x)] =
            to_acc[static_cast<std::size_t>(x)] | from_acc[static_cast<std::size_t>(x)];
    }

    bool changed = false;
    for (StateId x = 0; x < n; ++x) {
      if (!alive[static_cast<std::size_t>(x)]) continue;
      char cause = 0;
      if (!fwd1[static_cast<std::size_t>(x)]) cause = 1;
      if (!exempt(x)) {
        if (!cause && !bwd2[static_cast<std::size_t>(x)]) cause = 2;
        if (!cause && mode == PruneMode::Full && !c3[static_cast<std::size_t>(x)]) cause = 3;
      }
      if (cause) {
        alive[static_cast<std::size_t>(x)] = 0;
        removal_cause[static_cast<std::size_t>(x)] = cause;
        changed = true;
      }
    }
    if (!changed) break;
  }

  bool any_goal = false;
  for (StateId x : goal_roots) any_goal |= alive[static_cast<std::size_t>(x)] != 0;
  if (!any_goal)
    throw InfeasibleStructureError(
        strf("infeasible structure: no goal state survives pruning (mode=%s); the "
             "specification cannot be satisfied from the initial distribution",
             prune_mode_name(mode)));

  for (StateId x = 0; x < n; ++x) {
    if (alive[static_cast<std::size_t>(x)]) {
      ++report.kept_states;
      continue;
    }
    ++report.removed_states;
    switch (removal_cause[static_cast<std::size_t>(x)]) {
      case 1: ++report.removed_unreachable; break;
      case 2: ++report.removed_no_goal_path; break;
      default: ++report.removed_accepting_cut; break;
    }
    for (const auto& ch : p.mdp.choices[static_cast<std::size_t>(x)])
      report.removed_transitions += static_cast<long>(ch.rows.size());
  }

  // Do we need a sink to absorb redirected probability mass?
  bool need_sink = false;
  for (StateId x = 0; x < n && !need_sink; ++x) {
    if (!alive[static_cast<std::size_t>(x)]) continue;
    for (const auto& ch : p.mdp.choices[static_cast<std::size_t>(x)])
      for (const auto& e : ch.rows)
        if (!alive[static_cast<std::size_t>(e.next)]) {
          need_sink = true;
          break;
        }
  }

  std::vector<StateId> new_id(static_cast<std::size_t>(n), -1);
  ProductLcmdp out;
  out.n_dfa = p.n_dfa;
  out.mdp.ap = p.mdp.ap;
  out.mdp.n_costs = p.mdp.n_costs;
  for (StateId x = 0; x < n; ++x)
    if (alive[static_cast<std::size_t>(x)]) {
      new_id[static_cast<std::size_t>(x)] = static_cast<StateId>(out.provenance.size());
      out.provenance.push_back(p.provenance[static_cast<std::size_t>(x)]);
    }

  std::optional<StateId> sink_id;
  if (p.mdp.sink && alive[static_cast<std::size_t>(*p.mdp.sink)])
    sink_id = new_id[static_cast<std::size_t>(*p.mdp.sink)];
  if (!sink_id && need_sink) {
    sink_id = static_cast<StateId>(out.provenance.size());
    out.provenance.push_back({-1, -1});
  }

  const int n_out = static_cast<int>(out.provenance.size());
  out.mdp.labels.assign(static_cast<std::size_t>(n_out), 0);
  out.mdp.absorbing.assign(static_cast<std::size_t>(n_out), 0);
  out.mdp.beta.assign(static_cast<std::size_t>(n_out), 0.0);
  out.mdp.choices.resize(static_cast<std::size_t>(n_out));
  out.goal.assign(static_cast<std::size_t>(n_out), 0);
  out.mdp.sink = sink_id;

  for (StateId x = 0; x < n; ++x) {
    StateId y = new_id[static_cast<std::size_t>(x)];
    if (y < 0) continue;
    out.mdp.labels[static_cast<std::size_t>(y)] = p.mdp.labels[static_cast<std::size_t>(x)];
    out.mdp.absorbing[static_cast<std::size_t>(y)] =
        p.mdp.absorbing[static_cast<std::size_t>(x)];
    out.mdp.beta[static_cast<std::size_t>(y)] = p.mdp.beta[static_cast<std::size_t>(x)];
    out.goal[static_cast<std::size_t>(y)] = p.goal[static_cast<std::size_t>(x)];
    for (const auto& ch : p.mdp.choices[static_cast<std::size_t>(x)]) {
      ActionChoice nc;
      nc.action = ch.action;
      nc.cost = ch.cost;
      std::map<StateId, double> mass;
      for (const auto& e : ch.rows) {
        if (alive[static_cast<std::size_t>(e.next)]) {
          mass[new_id[static_cast<std::size_t>(e.next)]] += e.prob;
        } else {
          mass[*sink_id] += e.prob;
          ++report.redirected_transitions;
        }
      }
      nc.rows.reserve(mass.size());
      for (const auto& [next, prob] : mass) nc.rows.push_back({next, prob});
      out.mdp.choices[static_cast<std::size_t>(y)].push_back(std::move(nc));
    }
  }
  for (StateId x : p.mdp.accepting)
    if (new_id[static_cast<std::size_t>(x)] >= 0)
      out.mdp.accepting.push_back(new_id[static_cast<std::size_t>(x)]);

  if (sink_id && out.mdp.choices[static_cast<std::size_t>(*sink_id)].empty()) {
    // Freshly created sink: zero-cost absorbing self-loop, no labels.
    out.mdp.absorbing[static_cast<std::size_t>(*sink_id)] = 1;
    ActionChoice stay;
    stay.action = 0;
    stay.rows = {{*sink_id, 1.0}};
    stay.cost.assign(static_cast<std::size_t>(out.mdp.n_costs), 0.0);
    out.mdp.choices[static_cast<std::size_t>(*sink_id)].push_back(std::move(stay));
  }

  return {std::move(out), report};
}

const char* prune_mode_name(PruneMode mode) {
  return mode == PruneMode::ReachOnly ? "reach-only" : "full";
}

std::string PruneReport::table() const {
  std::string out;
  out += strf("prune mode            %s\n", prune_mode_name(mode));
  out += strf("kept states           %d\n", kept_states);
  out += strf("removed states        %d\n", removed_states);
  out += strf("  unreachable         %d\n", removed_unreachable);
  out += strf("  no path to goal     %d\n", removed_no_goal_path);
  out += strf("  accepting cut       %d\n", removed_accepting_cut);
  out += strf("removed transitions   %ld\n", removed_transitions);
  out += strf("redirected to sink    %ld\n", redirected_transitions);
  out += strf("sweeps                %d\n", sweeps);
  return out;
}

json PruneReport::to_json() const {
  return json{{"mode", prune_mode_name(mode)},
              {"kept_states", kept_states},
              {"removed_states", removed_states},
              {"removed_transitions", removed_transitions},
              {"redirected_transitions", redirected_transitions},
              {"removed_by_condition",
               {{"unreachable", removed_unreachable},
                {"no_goal_path", removed_no_goal_path},
                {"accepting_cut", removed_accepting_cut}}},
              {"sweeps", sweeps}};
}

}  // namespace lcmdp

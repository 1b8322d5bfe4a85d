#include "lcmdp/product.hpp"

#include <algorithm>
#include <map>
#include <queue>

#include "lcmdp/util.hpp"

namespace lcmdp {

using nlohmann::json;

std::vector<StateId> ProductLcmdp::satisfying_goal_states() const {
  std::vector<char> acc(static_cast<std::size_t>(num_states()), 0);
  for (StateId x : mdp.accepting) acc[static_cast<std::size_t>(x)] = 1;
  std::vector<StateId> out;
  for (StateId x = 0; x < num_states(); ++x)
    if (is_goal(x) && acc[static_cast<std::size_t>(x)]) out.push_back(x);
  return out;
}

namespace {

// Collapses duplicate successors and keeps rows sorted by target id.
std::vector<TransitionEntry> normalize_row(std::map<StateId, double>& mass) {
  std::vector<TransitionEntry> row;
  row.reserve(mass.size());
  for (const auto& [next, prob] : mass) row.push_back({next, prob});
  return row;
}

}  // namespace

ProductLcmdp build_product(const Lcmdp& model, const spec_lang::Dfa& dfa,
                           bool restrict_reachable) {
  if (model.ap != dfa.ap)
    throw ProductError("model and DFA disagree on the atomic propositions");
  const int n_l = model.num_states();
  const int n_d = dfa.num_states();

  ProductLcmdp p;
  p.n_dfa = n_d;
  p.mdp.ap = model.ap;
  p.mdp.n_costs = model.n_costs;

  auto label_of = [&](StateId s) {
    return static_cast<spec_lang::Letter>(model.labels[static_cast<std::size_t>(s)]);
  };
  auto is_base_goal = [&](StateId s) {
    return model.is_absorbing(s) && !(model.sink && *model.sink == s);
  };

  // Assign product ids. Dense layout is s-major so that x = s * n_d + q.
  std::vector<StateId> index(static_cast<std::size_t>(n_l) * static_cast<std::size_t>(n_d), -1);
  auto slot = [&](StateId s, int q) -> StateId& {
    return index[static_cast<std::size_t>(s) * static_cast<std::size_t>(n_d) +
                 static_cast<std::size_t>(q)];
  };

  if (!restrict_reachable) {
    for (StateId s = 0; s < n_l; ++s)
      for (int q = 0; q < n_d; ++q) {
        slot(s, q) = static_cast<StateId>(p.provenance.size());
        p.provenance.push_back({s, q});
      }
  } else {
    std::queue<StateId> open;
    auto discover = [&](StateId s, int q) {
      StateId& id = slot(s, q);
      if (id < 0) {
        id = static_cast<StateId>(p.provenance.size());
        p.provenance.push_back({s, q});
        open.push(id);
      }
      return id;
    };
    for (StateId s = 0; s < n_l; ++s)
      if (model.beta[static_cast<std::size_t>(s)] > 0.0)
        discover(s, dfa.step(dfa.initial, label_of(s)));
    while (!open.empty()) {
      StateId x = open.front();
      open.pop();
      auto [s, q] = p.provenance[static_cast<std::size_t>(x)];
      if (model.is_absorbing(s)) continue;  // freezes; self-loop only
      for (const auto& ch : model.choices[static_cast<std::size_t>(s)])
        for (const auto& e : ch.rows)
          if (e.prob > 0.0) discover(e.next, dfa.step(q, label_of(e.next)));
    }
  }

  const int n_x = static_cast<int>(p.provenance.size());
  p.mdp.labels.resize(static_cast<std::size_t>(n_x));
  p.mdp.absorbing.resize(static_cast<std::size_t>(n_x));
  p.mdp.beta.assign(static_cast<std::size_t>(n_x), 0.0);
  p.mdp.choices.resize(static_cast<std::size_t>(n_x));
  p.goal.assign(static_cast<std::size_t>(n_x), 0);

  for (StateId s = 0; s < n_l; ++s)
    if (model.beta[static_cast<std::size_t>(s)] > 0.0) {
      StateId x = slot(s, dfa.step(dfa.initial, label_of(s)));
      p.mdp.beta[static_cast<std::size_t>(x)] += model.beta[static_cast<std::size_t>(s)];
    }

  for (StateId x = 0; x < n_x; ++x) {
    auto [s, q] = p.provenance[static_cast<std::size_t>(x)];
    p.mdp.labels[static_cast<std::size_t>(x)] = model.labels[static_cast<std::size_t>(s)];
    p.mdp.absorbing[static_cast<std::size_t>(x)] = model.absorbing[static_cast<std::size_t>(s)];
    p.goal[static_cast<std::size_t>(x)] = is_base_goal(s) ? 1 : 0;
    // F' is derived from the automaton alone; the base model's accepting set
    // plays no role once a specification is in play.
    if (dfa.is_accepting(q)) p.mdp.accepting.push_back(x);

    auto& out = p.mdp.choices[static_cast<std::size_t>(x)];
    if (model.is_absorbing(s)) {
      const auto& base = model.choices[static_cast<std::size_t>(s)][0];
      ActionChoice ch;
      ch.action = base.action;
      ch.rows = {{x, 1.0}};
      ch.cost.assign(static_cast<std::size_t>(model.n_costs), 0.0);
      out.push_back(std::move(ch));
      continue;
    }
    for (const auto& base : model.choices[static_cast<std::size_t>(s)]) {
      ActionChoice ch;
      ch.action = base.action;
      ch.cost = base.cost;
      std::map<StateId, double> mass;
      for (const auto& e : base.rows) {
        int q2 = dfa.step(q, label_of(e.next));
        StateId y = slot(e.next, q2);
        if (y < 0) continue;  // unreachable under restriction and prob 0
        mass[y] += e.prob;
      }
      ch.rows = normalize_row(mass);
      out.push_back(std::move(ch));
    }
  }
  return p;
}

json product_to_json(const ProductLcmdp& p) {
  json j = to_json(p.mdp);
  json pairs = json::array();
  for (const auto& [s, q] : p.provenance) pairs.push_back({s, q});
  std::vector<StateId> goal_ids;
  for (StateId x = 0; x < p.num_states(); ++x)
    if (p.is_goal(x)) goal_ids.push_back(x);
  j["provenance"] = {{"pairs", std::move(pairs)}, {"goal", goal_ids}, {"n_dfa", p.n_dfa}};
  return j;
}

ProductLcmdp product_from_json(const json& j) {
  ProductLcmdp p;
  p.mdp = model_from_json(j);
  try {
    const json& prov = j.at("provenance");
    for (const auto& pair : prov.at("pairs"))
      p.provenance.push_back({pair.at(0).get<StateId>(), pair.at(1).get<int>()});
    p.n_dfa = prov.at("n_dfa").get<int>();
    p.goal.assign(static_cast<std::size_t>(p.num_states()), 0);
    for (StateId x : prov.at("goal").get<std::vector<StateId>>()) {
      if (x < 0 || x >= p.num_states())
        throw ProductError(strf("provenance goal state %d is out of range", x));
      p.goal[static_cast<std::size_t>(x)] = 1;
    }
  } catch (const json::exception& e) {
    throw ProductError(strf("product file malformed: %s", e.what()));
  }
  if (p.provenance.size() != static_cast<std::size_t>(p.num_states()))
    throw ProductError("provenance does not cover every product state");
  return p;
}

void save_product(const ProductLcmdp& p, const std::filesystem::path& path) {
  write_file(path, product_to_json(p).dump(2) + "\n");
}

ProductLcmdp load_product(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ProductError(strf("%s: %s", path.string().c_str(), e.what()));
  }
  return product_from_json(j);
}

}  // namespace lcmdp

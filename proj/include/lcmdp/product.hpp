#pragma once

#include <utility>
#include <vector>

#include "lcmdp/model.hpp"
#include "lcmdp/spec_lang.hpp"

namespace lcmdp {

// Synchronous product of an LCMDP with a specification DFA. Product states
// are pairs (s, q); the DFA consumes L(s') on every entry into s', including
// the initial state. States whose first component is absorbing in the base
// model freeze the automaton component, so the q of a goal state records the
// automaton's verdict at absorption time.
struct ProductLcmdp {
  Lcmdp mdp;
  int n_dfa = 0;
  // x -> (s, q); a sink added later by pruning carries {-1, -1}.
  std::vector<std::pair<StateId, int>> provenance;
  std::vector<char> goal;  // flag per state: s absorbing in the base, s != base sink

  int num_states() const { return mdp.num_states(); }
  bool is_goal(StateId x) const { return goal[static_cast<std::size_t>(x)] != 0; }
  // Goal states whose automaton component is accepting: absorption there is
  // exactly "the specification was satisfied".
  std::vector<StateId> satisfying_goal_states() const;
};

struct ProductError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// restrict_reachable off emits all n_l * n_d pairs; on keeps only the states
// forward-reachable from the initial distribution.
ProductLcmdp build_product(const Lcmdp& model, const spec_lang::Dfa& dfa,
                           bool restrict_reachable = false);

nlohmann::json product_to_json(const ProductLcmdp& p);
ProductLcmdp product_from_json(const nlohmann::json& j);
void save_product(const ProductLcmdp& p, const std::filesystem::path& path);
ProductLcmdp load_product(const std::filesystem::path& path);

}  // namespace lcmdp

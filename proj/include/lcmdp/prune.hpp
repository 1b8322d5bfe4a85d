#pragma once

#include <string>
#include <utility>

#include "lcmdp/product.hpp"

namespace lcmdp {

enum class PruneMode { ReachOnly, Full };

struct PruneReport {
  PruneMode mode = PruneMode::ReachOnly;
  int kept_states = 0;
  int removed_states = 0;
  long removed_transitions = 0;     // entries dropped with their source state
  long redirected_transitions = 0;  // entries rerouted into the sink
  int removed_unreachable = 0;      // failed: reached from an initial state
  int removed_no_goal_path = 0;     // failed: reaches the goal set
  int removed_accepting_cut = 0;    // failed: connected to an accepting state
  int sweeps = 0;                   // refinement rounds until the kept set stabilized

  std::string table() const;
  nlohmann::json to_json() const;
};

// Raised when no goal state survives pruning: the specification cannot be
// satisfied (nor the goal reached) from the initial distribution.
struct InfeasibleStructureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Keeps a state only if it can lie on a useful trajectory: reachable from the
// initial distribution, able to reach the goal set and, in Full mode, also
// connected to the accepting set (can reach it or be reached from it). The
// conditions are re-evaluated on the surviving subgraph until they stabilize,
// which makes the operation idempotent. Transitions into removed states are
// redirected to the sink, which is created on demand; states carrying initial
// mass and the sink itself are never deleted, so probability is conserved and
// the result always validates.
std::pair<ProductLcmdp, PruneReport> prune(const ProductLcmdp& p, PruneMode mode);

const char* prune_mode_name(PruneMode mode);

}  // namespace lcmdp

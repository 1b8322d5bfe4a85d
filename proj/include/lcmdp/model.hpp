#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace lcmdp {

using StateId = int;
using ActionId = int;

// Label sets are bitmasks over the atomic-proposition index set, so the
// proposition count is capped at one machine word's worth of bits.
inline constexpr int kMaxAp = 16;

struct TransitionEntry {
  StateId next = 0;
  double prob = 0.0;
  friend bool operator==(const TransitionEntry&, const TransitionEntry&) = default;
};

// One enabled action at a state: its sparse successor row plus the value of
// every cost function for the (state, action) pair.
struct ActionChoice {
  ActionId action = 0;
  std::vector<TransitionEntry> rows;
  std::vector<double> cost;  // cost[i] = C_i(s, action)
  friend bool operator==(const ActionChoice&, const ActionChoice&) = default;
};

// Labeled constrained MDP over states 0..n-1 with n_costs cost functions
// C_0..C_{n_costs-1}. C_0 is the optimization objective; the rest are the
// bounded auxiliary costs. Absorbing states carry exactly one zero-cost
// action that self-loops with probability 1, which keeps occupation
// measures finite on the transient part.
struct Lcmdp {
  std::vector<std::string> ap;
  int n_costs = 1;
  std::vector<std::uint32_t> labels;   // per state, bitmask over ap
  std::vector<char> absorbing;         // per state flag
  std::vector<double> beta;            // initial distribution
  std::vector<std::vector<ActionChoice>> choices;  // enabled actions per state
  std::vector<StateId> accepting;
  std::optional<StateId> sink;

  int num_states() const { return static_cast<int>(choices.size()); }
  bool is_absorbing(StateId s) const { return absorbing[static_cast<std::size_t>(s)] != 0; }
  friend bool operator==(const Lcmdp&, const Lcmdp&) = default;
};

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Returns every invariant violation with its state/action location; an empty
// list means the model is well-formed. Violations are data, not failures.
std::vector<std::string> validate(const Lcmdp& m);

// S minus the absorbing set and the sink.
std::vector<StateId> transient_states(const Lcmdp& m);

nlohmann::json to_json(const Lcmdp& m);
Lcmdp model_from_json(const nlohmann::json& j);

// Round trip is the identity on all fields; probabilities are bit-exact.
void save(const Lcmdp& m, const std::filesystem::path& path);
Lcmdp load_model(const std::filesystem::path& path);

}  // namespace lcmdp

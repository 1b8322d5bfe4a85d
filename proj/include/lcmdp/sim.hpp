#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "lcmdp/product.hpp"
#include "lcmdp/synth.hpp"

namespace lcmdp {

// Portable PRNG for trajectory sampling: xoshiro256++ seeded through
// SplitMix64. Trajectory i always draws from the substream derived from
// (seed, i), so serial and parallel runs agree bit for bit.
struct SplitMix64 {
  std::uint64_t state;
  explicit SplitMix64(std::uint64_t s) : state(s) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
};

struct Xoshiro256pp {
  std::uint64_t s[4];

  static Xoshiro256pp substream(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 mix(seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1)));
    Xoshiro256pp r;
    for (auto& w : r.s) w = mix.next();
    return r;
  }

  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t next() {
    std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
    std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
  }

  // Uniform double in [0, 1) with 53 significant bits.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

enum class TerminalKind { Goal, Sink, Truncated };

struct Trajectory {
  std::vector<StateId> states;   // product states, absorption entry included
  std::vector<ActionId> actions;
  std::vector<double> total_cost;  // accumulated per cost function
  std::vector<spec_lang::Letter> word;
  bool satisfied = false;
  TerminalKind kind = TerminalKind::Truncated;
};

struct SimStats {
  long n = 0;
  long completed = 0;
  long truncated = 0;
  std::vector<double> cost_mean;    // over completed trajectories
  std::vector<double> cost_stddev;  // sample stddev over completed trajectories
  long satisfied = 0;
  double satisfaction_rate = 0.0;   // satisfied / completed
  long goal_reached = 0;
  double goal_rate = 0.0;

  nlohmann::json to_json() const;
};

struct SimOptions {
  std::uint64_t seed = 0;
  long n = 1000;
  long step_cap = 0;  // 0 picks 100 x (number of transient states)
  spec_lang::Semantics semantics = spec_lang::Semantics::Exact;
  std::ostream* csv = nullptr;            // per-trajectory dump, when set
  std::vector<Trajectory>* keep = nullptr;  // stores the first keep_count runs
  int keep_count = 0;
};

// Deterministic given (policy, product, seed, n). Trajectories that hit the
// step cap are reported separately and never folded into the averages or the
// satisfaction count.
SimStats sample(const Policy& policy, const ProductLcmdp& prod, const SimOptions& opts);

// Exact: the automaton state after the full word is accepting. Prefix: some
// prefix of the word lands in an accepting state.
bool check_satisfaction(const std::vector<spec_lang::Letter>& word, const spec_lang::Dfa& dfa,
                        spec_lang::Semantics semantics);

}  // namespace lcmdp

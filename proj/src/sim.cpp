#include "lcmdp/sim.hpp"

#include <cmath>

#include "lcmdp/util.hpp"

namespace lcmdp {

using nlohmann::json;

namespace {

// Kahan-compensated accumulator; aggregation stays order-independent in the
// sense that the compensation keeps the error independent of magnitude drift.
struct Kahan {
  double sum = 0.0;
  double carry = 0.0;
  void add(double v) {
    double y = v - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

int pick(const std::vector<double>& weights, double u) {
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(weights.size()) - 1;
}

}  // namespace

SimStats sample(const Policy& policy, const ProductLcmdp& prod, const SimOptions& opts) {
  const Lcmdp& m = prod.mdp;
  const int n_states = m.num_states();
  const int n_costs = m.n_costs;

  std::vector<char> accepting(static_cast<std::size_t>(n_states), 0);
  for (StateId x : m.accepting) accepting[static_cast<std::size_t>(x)] = 1;

  long step_cap = opts.step_cap;
  if (step_cap <= 0) {
    long transient = 0;
    for (StateId x = 0; x < n_states; ++x)
      if (!m.is_absorbing(x)) ++transient;
    step_cap = 100 * std::max(transient, 1L);
  }

  std::vector<StateId> beta_states;
  std::vector<double> beta_mass;
  for (StateId x = 0; x < n_states; ++x)
    if (m.beta[static_cast<std::size_t>(x)] > 0.0) {
      beta_states.push_back(x);
      beta_mass.push_back(m.beta[static_cast<std::size_t>(x)]);
    }

  SimStats stats;
  stats.n = opts.n;
  std::vector<Kahan> sums(static_cast<std::size_t>(n_costs));
  std::vector<Kahan> sq_sums(static_cast<std::size_t>(n_costs));

  if (opts.csv) {
    *opts.csv << "trajectory,length";
    for (int i = 0; i < n_costs; ++i) *opts.csv << ",cost_" << i;
    *opts.csv << ",satisfied,terminal\n";
  }

  std::vector<double> cost(static_cast<std::size_t>(n_costs));
  for (long traj = 0; traj < opts.n; ++traj) {
    Xoshiro256pp rng =
        Xoshiro256pp::substream(opts.seed, static_cast<std::uint64_t>(traj));

    Trajectory t;
    const bool keep_this = opts.keep && traj < opts.keep_count;
    std::fill(cost.begin(), cost.end(), 0.0);

    StateId x = beta_states[static_cast<std::size_t>(pick(beta_mass, rng.next_unit()))];
    bool ever_accepting = accepting[static_cast<std::size_t>(x)] != 0;
    if (keep_this) {
      t.states.push_back(x);
      t.word.push_back(m.labels[static_cast<std::size_t>(x)]);
    }

    long steps = 0;
    while (!m.is_absorbing(x)) {
      if (steps >= step_cap) break;
      const auto& dist = policy.dist[static_cast<std::size_t>(x)];
      int k = pick(dist, rng.next_unit());
      const auto& ch = m.choices[static_cast<std::size_t>(x)][static_cast<std::size_t>(k)];
      for (int i = 0; i < n_costs; ++i)
        cost[static_cast<std::size_t>(i)] += ch.cost[static_cast<std::size_t>(i)];

      double u = rng.next_unit();
      double acc = 0.0;
      StateId next = ch.rows.back().next;
      for (const auto& e : ch.rows) {
        acc += e.prob;
        if (u < acc) {
          next = e.next;
          break;
        }
      }
      x = next;
      ever_accepting |= accepting[static_cast<std::size_t>(x)] != 0;
      if (keep_this) {
        t.states.push_back(x);
        t.actions.push_back(ch.action);
        t.word.push_back(m.labels[static_cast<std::size_t>(x)]);
      }
      ++steps;
    }

    TerminalKind kind;
    bool satisfied = false;
    if (!m.is_absorbing(x)) {
      kind = TerminalKind::Truncated;
      ++stats.truncated;
    } else {
      kind = prod.is_goal(x) ? TerminalKind::Goal : TerminalKind::Sink;
      satisfied = opts.semantics == spec_lang::Semantics::Exact
                      ? accepting[static_cast<std::size_t>(x)] != 0
                      : ever_accepting;
      ++stats.completed;
      if (satisfied) ++stats.satisfied;
      if (kind == TerminalKind::Goal) ++stats.goal_reached;
      for (int i = 0; i < n_costs; ++i) {
        sums[static_cast<std::size_t>(i)].add(cost[static_cast<std::size_t>(i)]);
        sq_sums[static_cast<std::size_t>(i)].add(cost[static_cast<std::size_t>(i)] *
                                                 cost[static_cast<std::size_t>(i)]);
      }
    }

    if (keep_this) {
      t.total_cost = cost;
      t.satisfied = satisfied;
      t.kind = kind;
      opts.keep->push_back(std::move(t));
    }
    if (opts.csv) {
      *opts.csv << traj << ',' << steps;
      for (int i = 0; i < n_costs; ++i)
        *opts.csv << ',' << strf("%.17g", cost[static_cast<std::size_t>(i)]);
      *opts.csv << ',' << (satisfied ? 1 : 0) << ','
                << (kind == TerminalKind::Goal     ? "goal"
                    : kind == TerminalKind::Sink   ? "sink"
                                                   : "truncated")
                << '\n';
    }
  }

  stats.cost_mean.assign(static_cast<std::size_t>(n_costs), 0.0);
  stats.cost_stddev.assign(static_cast<std::size_t>(n_costs), 0.0);
  if (stats.completed > 0) {
    const double nc = static_cast<double>(stats.completed);
    for (int i = 0; i < n_costs; ++i) {
      double mean = sums[static_cast<std::size_t>(i)].sum / nc;
      stats.cost_mean[static_cast<std::size_t>(i)] = mean;
      if (stats.completed > 1) {
        double var =
            (sq_sums[static_cast<std::size_t>(i)].sum - nc * mean * mean) / (nc - 1.0);
        stats.cost_stddev[static_cast<std::size_t>(i)] = std::sqrt(std::max(var, 0.0));
      }
    }
    stats.satisfaction_rate = static_cast<double>(stats.satisfied) / nc;
    stats.goal_rate = static_cast<double>(stats.goal_reached) / nc;
  }
  return stats;
}

bool check_satisfaction(const std::vector<spec_lang::Letter>& word, const spec_lang::Dfa& dfa,
                        spec_lang::Semantics semantics) {
  int q = dfa.initial;
  if (semantics == spec_lang::Semantics::Prefix && dfa.is_accepting(q)) return true;
  for (spec_lang::Letter l : word) {
    q = dfa.step(q, l);
    if (semantics == spec_lang::Semantics::Prefix && dfa.is_accepting(q)) return true;
  }
  return dfa.is_accepting(q);
}

json SimStats::to_json() const {
  return json{{"n", n},
              {"completed", completed},
              {"truncated", truncated},
              {"cost_mean", cost_mean},
              {"cost_stddev", cost_stddev},
              {"satisfied", satisfied},
              {"satisfaction_rate", satisfaction_rate},
              {"goal_reached", goal_reached},
              {"goal_rate", goal_rate}};
}

}  // namespace lcmdp

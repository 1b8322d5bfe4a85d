#pragma once

#include <utility>
#include <vector>

#include "lcmdp/lpcore.hpp"
#include "lcmdp/product.hpp"

namespace lcmdp {

struct SynthesisProblem {
  const ProductLcmdp* prod = nullptr;  // typically pruned
  double p_l = 0.0;                    // required satisfaction probability
  std::vector<double> bounds;          // B_1..B_n for the auxiliary costs
};

// Maps occupation-measure variables rho(x, a) to LP columns and back. Only
// transient states carry variables.
struct VarIndex {
  std::vector<std::pair<StateId, int>> vars;  // column -> (state, choice index)
  std::vector<std::vector<int>> var_of;       // [state][choice] -> column, empty if absorbing

  int num_vars() const { return static_cast<int>(vars.size()); }
};

// Randomized stationary policy over the product: one distribution over the
// enabled choices of every transient state. Absorbing states are implicit.
struct Policy {
  std::vector<std::vector<double>> dist;  // [state][choice index]
};

struct SynthesisReport {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;            // expected C_0 under the optimal measure
  std::vector<double> aux_costs;     // expected C_1..C_n
  double satisfaction = 0.0;         // modeled probability of satisfying the spec
  int lp_vars = 0;
  int lp_constraints = 0;
  long iterations = 0;
  double solve_seconds = 0.0;

  nlohmann::json to_json() const;
};

struct SynthesisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Occupation-measure LP:
//   minimize   sum c_0(x,a) rho(x,a)
//   flow       for every transient x:
//                sum_a rho(x,a) - sum_{x',a'} P(x|x',a') rho(x',a') = beta(x)
//   costs      sum c_i(x,a) rho(x,a) <= B_i            (i = 1..n)
//   spec       sum rho(x,a) P(goal-and-accepting | x,a) >= P_l
// The spec row counts inflow into goal states whose automaton component is
// accepting; with prefix semantics the automaton was made accepting-absorbing
// beforehand, so this single encoding serves both readings.
std::pair<LinearProgram, VarIndex> build_lp(const SynthesisProblem& prob);

Policy extract_policy(const Eigen::VectorXd& rho, const VarIndex& index,
                      const ProductLcmdp& prod);

// Exact evaluation of a policy by solving the absorbing-chain linear systems:
// expected total cost per cost function and the absorption probability into
// satisfying goal states.
struct ExactEvaluation {
  std::vector<double> costs;  // expected C_0..C_n
  double satisfaction = 0.0;
  double goal_probability = 0.0;
};
ExactEvaluation evaluate_exact(const Policy& policy, const ProductLcmdp& prod);

// Full step 3: build, solve, extract, summarize. Throws SynthesisError only
// for structural problems; LP infeasibility comes back in the report status.
struct SynthesisResult {
  SynthesisReport report;
  Policy policy;          // meaningful only when report.status == Optimal
  Eigen::VectorXd rho;
  VarIndex index;
};
SynthesisResult synthesize(const SynthesisProblem& prob, double lp_tol = 1e-9);

nlohmann::json policy_to_json(const Policy& policy, const ProductLcmdp& prod);
Policy policy_from_json(const nlohmann::json& j, const ProductLcmdp& prod);

}  // namespace lcmdp

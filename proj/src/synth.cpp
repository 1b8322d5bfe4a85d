#include "lcmdp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "lcmdp/util.hpp"

namespace lcmdp {

using nlohmann::json;

std::pair<LinearProgram, VarIndex> build_lp(const SynthesisProblem& prob) {
  const ProductLcmdp& p = *prob.prod;
  const Lcmdp& m = p.mdp;
  const int n_states = m.num_states();
  const int n_aux = m.n_costs - 1;
  if (static_cast<int>(prob.bounds.size()) != n_aux)
    throw SynthesisError(strf("expected %d cost bounds, got %zu", n_aux, prob.bounds.size()));
  if (prob.p_l < 0.0 || prob.p_l > 1.0)
    throw SynthesisError(strf("P_l=%g is not a probability", prob.p_l));

  VarIndex index;
  index.var_of.resize(static_cast<std::size_t>(n_states));
  std::vector<StateId> transient;
  std::vector<int> flow_row(static_cast<std::size_t>(n_states), -1);
  for (StateId x = 0; x < n_states; ++x) {
    if (m.is_absorbing(x)) continue;
    flow_row[static_cast<std::size_t>(x)] = static_cast<int>(transient.size());
    transient.push_back(x);
    auto& cols = index.var_of[static_cast<std::size_t>(x)];
    for (std::size_t k = 0; k < m.choices[static_cast<std::size_t>(x)].size(); ++k) {
      cols.push_back(index.num_vars());
      index.vars.push_back({x, static_cast<int>(k)});
    }
  }
  if (transient.empty()) throw SynthesisError("product has no transient states");

  std::vector<char> satisfying(static_cast<std::size_t>(n_states), 0);
  for (StateId x : p.satisfying_goal_states()) satisfying[static_cast<std::size_t>(x)] = 1;
  if (prob.p_l > 0.0 && p.satisfying_goal_states().empty())
    throw SynthesisError(
        "structurally infeasible: no goal state carries an accepting automaton "
        "component, yet P_l > 0");

  const int n_vars = index.num_vars();
  const int n_flow = static_cast<int>(transient.size());
  const bool with_spec_row = prob.p_l > 0.0;
  // Infinite bounds contribute no row; a P_l of zero likewise drops the
  // satisfaction row, leaving the classic min-cost absorption LP.
  std::vector<int> bound_row(static_cast<std::size_t>(n_aux), -1);
  int n_ineq = 0;
  for (int i = 0; i < n_aux; ++i)
    if (std::isfinite(prob.bounds[static_cast<std::size_t>(i)]))
      bound_row[static_cast<std::size_t>(i)] = n_ineq++;
  const int spec_row = with_spec_row ? n_ineq++ : -1;

  LinearProgram lp;
  lp.c = Eigen::VectorXd::Zero(n_vars);
  lp.A = Eigen::MatrixXd::Zero(n_flow, n_vars);
  lp.b = Eigen::VectorXd::Zero(n_flow);
  lp.G = Eigen::MatrixXd::Zero(n_ineq, n_vars);
  lp.h = Eigen::VectorXd::Zero(n_ineq);
  lp.var_names.reserve(static_cast<std::size_t>(n_vars));

  for (int v = 0; v < n_vars; ++v) {
    auto [x, k] = index.vars[static_cast<std::size_t>(v)];
    const auto& ch = m.choices[static_cast<std::size_t>(x)][static_cast<std::size_t>(k)];
    auto [s, q] = p.provenance[static_cast<std::size_t>(x)];
    lp.var_names.push_back(strf("rho(s%d,q%d,a%d)", s, q, ch.action));

    lp.c(v) = ch.cost[0];
    lp.A(flow_row[static_cast<std::size_t>(x)], v) += 1.0;  // outflow
    double sat_mass = 0.0;
    for (const auto& e : ch.rows) {
      int row = flow_row[static_cast<std::size_t>(e.next)];
      if (row >= 0) lp.A(row, v) -= e.prob;  // inflow into a transient state
      if (satisfying[static_cast<std::size_t>(e.next)]) sat_mass += e.prob;
    }
    for (int i = 0; i < n_aux; ++i)
      if (bound_row[static_cast<std::size_t>(i)] >= 0)
        lp.G(bound_row[static_cast<std::size_t>(i)], v) =
            ch.cost[static_cast<std::size_t>(i) + 1];
    if (with_spec_row) lp.G(spec_row, v) = -sat_mass;  // >= P_l, negated
  }
  for (int r = 0; r < n_flow; ++r)
    lp.b(r) = m.beta[static_cast<std::size_t>(transient[static_cast<std::size_t>(r)])];
  for (int i = 0; i < n_aux; ++i)
    if (bound_row[static_cast<std::size_t>(i)] >= 0)
      lp.h(bound_row[static_cast<std::size_t>(i)]) = prob.bounds[static_cast<std::size_t>(i)];
  if (with_spec_row) lp.h(spec_row) = -prob.p_l;

  return {std::move(lp), std::move(index)};
}

Policy extract_policy(const Eigen::VectorXd& rho, const VarIndex& index,
                      const ProductLcmdp& prod) {
  const Lcmdp& m = prod.mdp;
  Policy policy;
  policy.dist.resize(static_cast<std::size_t>(m.num_states()));
  for (StateId x = 0; x < m.num_states(); ++x) {
    const auto& cols = index.var_of[static_cast<std::size_t>(x)];
    if (cols.empty()) continue;  // absorbing
    auto& d = policy.dist[static_cast<std::size_t>(x)];
    d.resize(cols.size());
    double total = 0.0;
    for (std::size_t k = 0; k < cols.size(); ++k) {
      d[k] = std::max(rho(cols[k]), 0.0);
      total += d[k];
    }
    if (total > 1e-12) {
      for (double& v : d) v /= total;
    } else {
      // No occupation: the state is off-path, any choice is cost-irrelevant.
      std::fill(d.begin(), d.end(), 1.0 / static_cast<double>(d.size()));
    }
  }
  return policy;
}

ExactEvaluation evaluate_exact(const Policy& policy, const ProductLcmdp& prod) {
  const Lcmdp& m = prod.mdp;
  const int n = m.num_states();

  for (StateId x = 0; x < n; ++x)
    if (!m.is_absorbing(x)) {
      const auto& d = policy.dist[static_cast<std::size_t>(x)];
      if (d.size() != m.choices[static_cast<std::size_t>(x)].size())
        throw SynthesisError(strf("policy does not cover transient state %d", x));
    }

  std::vector<char> satisfying(static_cast<std::size_t>(n), 0);
  for (StateId x : prod.satisfying_goal_states()) satisfying[static_cast<std::size_t>(x)] = 1;

  // Transient states reachable from the initial distribution under the
  // policy-positive dynamics.
  std::vector<int> row_of(static_cast<std::size_t>(n), -1);
  std::vector<StateId> order;
  std::queue<StateId> open;
  auto discover = [&](StateId x) {
    if (m.is_absorbing(x) || row_of[static_cast<std::size_t>(x)] >= 0) return;
    row_of[static_cast<std::size_t>(x)] = static_cast<int>(order.size());
    order.push_back(x);
    open.push(x);
  };
  for (StateId x = 0; x < n; ++x)
    if (m.beta[static_cast<std::size_t>(x)] > 0.0) discover(x);
  while (!open.empty()) {
    StateId x = open.front();
    open.pop();
    const auto& d = policy.dist[static_cast<std::size_t>(x)];
    for (std::size_t k = 0; k < d.size(); ++k) {
      if (d[k] <= 0.0) continue;
      for (const auto& e : m.choices[static_cast<std::size_t>(x)][k].rows)
        if (e.prob > 0.0) discover(e.next);
    }
  }

  const int t = static_cast<int>(order.size());
  if (t == 0) {
    // Initial mass sits entirely on absorbing states; the model forbids that,
    // but handle it as the degenerate zero-cost case.
    ExactEvaluation ev;
    ev.costs.assign(static_cast<std::size_t>(m.n_costs), 0.0);
    return ev;
  }

  // Every reachable transient state must reach absorption, or the induced
  // chain is not absorbing and expected totals diverge.
  {
    std::vector<std::vector<StateId>> bwd(static_cast<std::size_t>(t));
    std::vector<char> can_absorb(static_cast<std::size_t>(t), 0);
    std::queue<StateId> frontier;
    for (int r = 0; r < t; ++r) {
      StateId x = order[static_cast<std::size_t>(r)];
      const auto& d = policy.dist[static_cast<std::size_t>(x)];
      for (std::size_t k = 0; k < d.size(); ++k) {
        if (d[k] <= 0.0) continue;
        for (const auto& e : m.choices[static_cast<std::size_t>(x)][k].rows) {
          if (e.prob <= 0.0) continue;
          if (m.is_absorbing(e.next)) {
            if (!can_absorb[static_cast<std::size_t>(r)]) {
              can_absorb[static_cast<std::size_t>(r)] = 1;
              frontier.push(r);
            }
          } else {
            bwd[static_cast<std::size_t>(row_of[static_cast<std::size_t>(e.next)])].push_back(
                static_cast<StateId>(r));
          }
        }
      }
    }
    while (!frontier.empty()) {
      StateId r = frontier.front();
      frontier.pop();
      for (StateId pr : bwd[static_cast<std::size_t>(r)])
        if (!can_absorb[static_cast<std::size_t>(pr)]) {
          can_absorb[static_cast<std::size_t>(pr)] = 1;
          frontier.push(pr);
        }
    }
    for (int r = 0; r < t; ++r)
      if (!can_absorb[static_cast<std::size_t>(r)]) {
        StateId x = order[static_cast<std::size_t>(r)];
        auto [s, q] = prod.provenance[static_cast<std::size_t>(x)];
        throw SynthesisError(
            strf("induced chain is not absorbing from state %d (s=%d,q=%d)", x, s, q));
      }
  }

  // Solve (I - Q) g_i = r_i for each cost and (I - Q) h = w for the
  // satisfaction probability; one LU factorization serves all of them.
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(t, t);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(t, m.n_costs + 2);
  const int sat_col = m.n_costs;
  const int goal_col = m.n_costs + 1;
  for (int r = 0; r < t; ++r) {
    StateId x = order[static_cast<std::size_t>(r)];
    const auto& d = policy.dist[static_cast<std::size_t>(x)];
    for (std::size_t k = 0; k < d.size(); ++k) {
      if (d[k] == 0.0) continue;
      const auto& ch = m.choices[static_cast<std::size_t>(x)][k];
      for (int i = 0; i < m.n_costs; ++i)
        rhs(r, i) += d[k] * ch.cost[static_cast<std::size_t>(i)];
      for (const auto& e : ch.rows) {
        if (e.prob <= 0.0) continue;
        if (m.is_absorbing(e.next)) {
          if (satisfying[static_cast<std::size_t>(e.next)]) rhs(r, sat_col) += d[k] * e.prob;
          if (prod.is_goal(e.next)) rhs(r, goal_col) += d[k] * e.prob;
        } else {
          M(r, row_of[static_cast<std::size_t>(e.next)]) -= d[k] * e.prob;
        }
      }
    }
  }

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  Eigen::MatrixXd values = lu.solve(rhs);

  ExactEvaluation ev;
  ev.costs.assign(static_cast<std::size_t>(m.n_costs), 0.0);
  for (int r = 0; r < t; ++r) {
    double w = m.beta[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])];
    if (w == 0.0) continue;
    for (int i = 0; i < m.n_costs; ++i) ev.costs[static_cast<std::size_t>(i)] += w * values(r, i);
    ev.satisfaction += w * values(r, sat_col);
    ev.goal_probability += w * values(r, goal_col);
  }
  ev.satisfaction = std::clamp(ev.satisfaction, 0.0, 1.0);
  ev.goal_probability = std::clamp(ev.goal_probability, 0.0, 1.0);
  return ev;
}

SynthesisResult synthesize(const SynthesisProblem& prob, double lp_tol) {
  auto [lp, index] = build_lp(prob);
  LpSolution sol = solve(lp, lp_tol);

  SynthesisResult res;
  res.index = std::move(index);
  res.report.status = sol.status;
  res.report.lp_vars = lp.num_vars();
  res.report.lp_constraints = lp.num_eq() + lp.num_ineq();
  res.report.iterations = sol.iterations;
  res.report.solve_seconds = sol.solve_seconds;
  if (sol.status != LpStatus::Optimal) return res;

  res.rho = sol.x;
  res.report.objective = sol.objective;
  const Lcmdp& m = prob.prod->mdp;
  const int n_aux = m.n_costs - 1;
  res.report.aux_costs.assign(static_cast<std::size_t>(n_aux), 0.0);
  double sat = 0.0;
  std::vector<char> satisfying(static_cast<std::size_t>(m.num_states()), 0);
  for (StateId x : prob.prod->satisfying_goal_states())
    satisfying[static_cast<std::size_t>(x)] = 1;
  for (int v = 0; v < res.index.num_vars(); ++v) {
    auto [x, k] = res.index.vars[static_cast<std::size_t>(v)];
    const auto& ch = m.choices[static_cast<std::size_t>(x)][static_cast<std::size_t>(k)];
    for (int i = 0; i < n_aux; ++i)
      res.report.aux_costs[static_cast<std::size_t>(i)] +=
          sol.x(v) * ch.cost[static_cast<std::size_t>(i) + 1];
    for (const auto& e : ch.rows)
      if (satisfying[static_cast<std::size_t>(e.next)]) sat += sol.x(v) * e.prob;
  }
  res.report.satisfaction = std::clamp(sat, 0.0, 1.0);
  res.policy = extract_policy(sol.x, res.index, *prob.prod);
  return res;
}

json SynthesisReport::to_json() const {
  return json{{"status", lp_status_name(status)},
              {"objective", objective},
              {"aux_costs", aux_costs},
              {"satisfaction", satisfaction},
              {"lp_vars", lp_vars},
              {"lp_constraints", lp_constraints},
              {"iterations", iterations},
              {"solve_seconds", solve_seconds}};
}

json policy_to_json(const Policy& policy, const ProductLcmdp& prod) {
  json states = json::array();
  for (StateId x = 0; x < prod.num_states(); ++x) {
    const auto& d = policy.dist[static_cast<std::size_t>(x)];
    if (d.empty()) continue;
    auto [s, q] = prod.provenance[static_cast<std::size_t>(x)];
    json dist = json::object();
    for (std::size_t k = 0; k < d.size(); ++k) {
      ActionId a = prod.mdp.choices[static_cast<std::size_t>(x)][k].action;
      dist[std::to_string(a)] = d[k];
    }
    states.push_back(
        {{"id", x}, {"mdp_state", s}, {"dfa_state", q}, {"dist", std::move(dist)}});
  }
  return json{{"states", std::move(states)}};
}

Policy policy_from_json(const json& j, const ProductLcmdp& prod) {
  Policy policy;
  policy.dist.resize(static_cast<std::size_t>(prod.num_states()));
  try {
    for (const auto& st : j.at("states")) {
      StateId x = st.at("id").get<StateId>();
      if (x < 0 || x >= prod.num_states())
        throw SynthesisError(strf("policy references unknown product state %d", x));
      auto [s, q] = prod.provenance[static_cast<std::size_t>(x)];
      if (st.at("mdp_state").get<StateId>() != s || st.at("dfa_state").get<int>() != q)
        throw SynthesisError(
            strf("policy state %d has provenance (%d,%d) but the product says (%d,%d)", x,
                 st.at("mdp_state").get<StateId>(), st.at("dfa_state").get<int>(), s, q));
      const auto& choices = prod.mdp.choices[static_cast<std::size_t>(x)];
      auto& d = policy.dist[static_cast<std::size_t>(x)];
      d.assign(choices.size(), 0.0);
      for (const auto& [key, val] : st.at("dist").items()) {
        ActionId a = std::stoi(key);
        bool found = false;
        for (std::size_t k = 0; k < choices.size(); ++k)
          if (choices[k].action == a) {
            d[k] = val.get<double>();
            found = true;
            break;
          }
        if (!found)
          throw SynthesisError(strf("policy gives mass to disabled action %d at state %d", a, x));
      }
      double total = 0.0;
      for (double v : d) total += v;
      if (std::abs(total - 1.0) > 1e-9)
        throw SynthesisError(strf("policy distribution at state %d sums to %g", x, total));
    }
  } catch (const json::exception& e) {
    throw SynthesisError(strf("policy file malformed: %s", e.what()));
  }
  for (StateId x = 0; x < prod.num_states(); ++x)
    if (!prod.mdp.is_absorbing(x) && policy.dist[static_cast<std::size_t>(x)].empty())
      throw SynthesisError(strf("policy does not cover transient state %d", x));
  return policy;
}

}  // namespace lcmdp

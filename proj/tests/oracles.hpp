#pragma once

// Independent oracles the tests check the implementation against. Each one
// recomputes its answer from first principles on a different code path than
// the implementation it validates.

#include <map>
#include <optional>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "lcmdp/lpcore.hpp"
#include "lcmdp/spec_lang.hpp"
#include "lcmdp/synth.hpp"

namespace oracles {

using lcmdp::spec_lang::eval_prop;
using lcmdp::spec_lang::Formula;
using lcmdp::spec_lang::FormulaPtr;
using lcmdp::spec_lang::Letter;
using lcmdp::spec_lang::Regex;
using lcmdp::spec_lang::RegexPtr;

// ---------------------------------------------------------------------------
// Recursive regex membership, memoized over (node, start, end). No
// derivatives, no canonical forms.

struct RegexMatcher {
  const std::vector<Letter>& word;
  std::map<std::tuple<const void*, int, int>, bool> memo;

  explicit RegexMatcher(const std::vector<Letter>& w) : word(w) {}

  bool match(const RegexPtr& r, int start, int end) {
    auto key = std::make_tuple(static_cast<const void*>(r.get()), start, end);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    bool out = false;
    switch (r->op) {
      case Regex::Op::Empty: out = false; break;
      case Regex::Op::Epsilon: out = start == end; break;
      case Regex::Op::Guard:
        out = end == start + 1 && eval_prop(r->guard, word[static_cast<std::size_t>(start)]);
        break;
      case Regex::Op::Union:
        for (const auto& k : r->kids)
          if (match(k, start, end)) {
            out = true;
            break;
          }
        break;
      case Regex::Op::Concat: out = match_seq(r, 0, start, end); break;
      case Regex::Op::Star:
        if (start == end) {
          out = true;
        } else {
          for (int mid = start + 1; mid <= end && !out; ++mid)
            out = match(r->kids[0], start, mid) && match(r, mid, end);
        }
        break;
    }
    memo[key] = out;
    return out;
  }

 private:
  std::map<std::tuple<const void*, std::size_t, int, int>, bool> seq_memo;

  bool match_seq(const RegexPtr& concat, std::size_t idx, int start, int end) {
    if (idx == concat->kids.size()) return start == end;
    auto key = std::make_tuple(static_cast<const void*>(concat.get()), idx, start, end);
    if (auto it = seq_memo.find(key); it != seq_memo.end()) return it->second;
    bool out = false;
    for (int mid = start; mid <= end && !out; ++mid)
      out = match(concat->kids[idx], start, mid) && match_seq(concat, idx + 1, mid, end);
    seq_memo[key] = out;
    return out;
  }
};

inline bool regex_matches(const RegexPtr& r, const std::vector<Letter>& word) {
  RegexMatcher m(word);
  return m.match(r, 0, static_cast<int>(word.size()));
}

// ---------------------------------------------------------------------------
// Good-prefix oracle for sc-LTL: fold the residual over the word on raw,
// uncanonicalized nodes with constant folding only, and accept when the
// residual collapses to literal truth. Same semantic rules, different code.

namespace raw {

inline FormulaPtr node(Formula::Op op, int atom, std::vector<FormulaPtr> kids) {
  return std::make_shared<const Formula>(Formula{op, atom, std::move(kids)});
}

inline FormulaPtr raw_true() { return node(Formula::Op::True, -1, {}); }
inline FormulaPtr raw_false() { return node(Formula::Op::False, -1, {}); }

inline FormulaPtr raw_and(FormulaPtr a, FormulaPtr b) {
  if (a->op == Formula::Op::False || b->op == Formula::Op::False) return raw_false();
  if (a->op == Formula::Op::True) return b;
  if (b->op == Formula::Op::True) return a;
  return node(Formula::Op::And, -1, {std::move(a), std::move(b)});
}

inline FormulaPtr raw_or(FormulaPtr a, FormulaPtr b) {
  if (a->op == Formula::Op::True || b->op == Formula::Op::True) return raw_true();
  if (a->op == Formula::Op::False) return b;
  if (b->op == Formula::Op::False) return a;
  return node(Formula::Op::Or, -1, {std::move(a), std::move(b)});
}

inline FormulaPtr fold(Formula::Op op, const std::vector<FormulaPtr>& kids,
                       const std::function<FormulaPtr(const FormulaPtr&)>& f) {
  FormulaPtr acc = f(kids[0]);
  for (std::size_t i = 1; i < kids.size(); ++i)
    acc = op == Formula::Op::And ? raw_and(acc, f(kids[i])) : raw_or(acc, f(kids[i]));
  return acc;
}

inline FormulaPtr deriv(const FormulaPtr& f, Letter letter) {
  switch (f->op) {
    case Formula::Op::True: return raw_true();
    case Formula::Op::False: return raw_false();
    case Formula::Op::Atom: return ((letter >> f->atom) & 1u) ? raw_true() : raw_false();
    case Formula::Op::NegAtom: return ((letter >> f->atom) & 1u) ? raw_false() : raw_true();
    case Formula::Op::And:
    case Formula::Op::Or:
      return fold(f->op, f->kids, [&](const FormulaPtr& k) { return deriv(k, letter); });
    case Formula::Op::Next: return f->kids[0];
    case Formula::Op::Eventually: return raw_or(deriv(f->kids[0], letter), f);
    case Formula::Op::Until:
      return raw_or(deriv(f->kids[1], letter), raw_and(deriv(f->kids[0], letter), f));
  }
  return raw_false();
}

}  // namespace raw

inline bool scltl_good_prefix(const FormulaPtr& f, const std::vector<Letter>& word) {
  FormulaPtr residual = f;
  for (Letter l : word) {
    if (residual->op == Formula::Op::True) return true;
    residual = raw::deriv(residual, l);
  }
  return residual->op == Formula::Op::True;
}

// ---------------------------------------------------------------------------
// Brute-force LP optimum by basic-feasible-solution enumeration on the
// slack-augmented standard form. Returns nullopt when no basis is feasible.

inline std::optional<double> vertex_enum_optimum(const lcmdp::LinearProgram& lp,
                                                 double feas_tol = 1e-9) {
  const int n = lp.num_vars();
  const int me = lp.num_eq();
  const int mi = lp.num_ineq();
  const int m = me + mi;
  const int total = n + mi;
  if (m == 0) return 0.0;  // x = 0 is optimal for c >= 0; tests keep m > 0

  Eigen::MatrixXd M(m, total);
  M.setZero();
  if (me > 0) M.topLeftCorner(me, n) = lp.A;
  if (mi > 0) {
    M.bottomLeftCorner(mi, n) = lp.G;
    M.bottomRightCorner(mi, mi).setIdentity();
  }
  Eigen::VectorXd rhs(m);
  if (me > 0) rhs.head(me) = lp.b;
  if (mi > 0) rhs.tail(mi) = lp.h;

  std::optional<double> best;
  std::vector<int> cols(static_cast<std::size_t>(m));
  // Enumerate all m-subsets of the columns.
  std::vector<int> idx(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (;;) {
    Eigen::MatrixXd B(m, m);
    for (int i = 0; i < m; ++i) B.col(i) = M.col(idx[static_cast<std::size_t>(i)]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
    if (lu.isInvertible()) {
      Eigen::VectorXd xb = lu.solve(rhs);
      if ((xb.array() >= -feas_tol).all()) {
        double obj = 0.0;
        for (int i = 0; i < m; ++i) {
          int j = idx[static_cast<std::size_t>(i)];
          if (j < n) obj += lp.c(j) * xb(i);
        }
        if (!best || obj < *best) best = obj;
      }
    }
    // next combination
    int i = m - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == total - m + i) --i;
    if (i < 0) break;
    ++idx[static_cast<std::size_t>(i)];
    for (int k = i + 1; k < m; ++k)
      idx[static_cast<std::size_t>(k)] = idx[static_cast<std::size_t>(k - 1)] + 1;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Deterministic-policy enumeration for small synthesis problems.

inline std::vector<lcmdp::Policy> enumerate_deterministic_policies(
    const lcmdp::ProductLcmdp& prod) {
  std::vector<lcmdp::StateId> transient;
  for (lcmdp::StateId x = 0; x < prod.num_states(); ++x)
    if (!prod.mdp.is_absorbing(x)) transient.push_back(x);

  std::vector<lcmdp::Policy> out;
  std::vector<std::size_t> choice(transient.size(), 0);
  for (;;) {
    lcmdp::Policy p;
    p.dist.resize(static_cast<std::size_t>(prod.num_states()));
    for (std::size_t i = 0; i < transient.size(); ++i) {
      auto x = static_cast<std::size_t>(transient[i]);
      p.dist[x].assign(prod.mdp.choices[x].size(), 0.0);
      p.dist[x][choice[i]] = 1.0;
    }
    out.push_back(std::move(p));
    std::size_t i = 0;
    for (; i < transient.size(); ++i) {
      auto x = static_cast<std::size_t>(transient[i]);
      if (++choice[i] < prod.mdp.choices[x].size()) break;
      choice[i] = 0;
    }
    if (i == transient.size()) break;
  }
  return out;
}

struct BestDeterministic {
  bool any_feasible = false;
  double objective = 0.0;
  lcmdp::Policy policy;
};

inline BestDeterministic best_deterministic(const lcmdp::ProductLcmdp& prod, double p_l,
                                            const std::vector<double>& bounds,
                                            double tol = 1e-9) {
  BestDeterministic best;
  for (const auto& policy : oracles::enumerate_deterministic_policies(prod)) {
    lcmdp::ExactEvaluation ev = lcmdp::evaluate_exact(policy, prod);
    if (ev.satisfaction < p_l - tol) continue;
    bool ok = true;
    for (std::size_t i = 0; i < bounds.size(); ++i)
      if (ev.costs[i + 1] > bounds[i] + tol) ok = false;
    if (!ok) continue;
    if (!best.any_feasible || ev.costs[0] < best.objective) {
      best.any_feasible = true;
      best.objective = ev.costs[0];
      best.policy = policy;
    }
  }
  return best;
}

}  // namespace oracles

#include "lcmdp/lpcore.hpp"

#include <chrono>
#include <cmath>

#include "lcmdp/util.hpp"

namespace lcmdp {

const char* lp_status_name(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration-limit";
  }
  return "?";
}

std::string LinearProgram::dump() const {
  auto name = [&](int j) {
    return j < static_cast<int>(var_names.size()) ? var_names[static_cast<std::size_t>(j)]
                                                  : strf("x%d", j);
  };
  auto term_row = [&](const Eigen::MatrixXd& m, int r) {
    std::string out;
    for (int j = 0; j < m.cols(); ++j) {
      double v = m(r, j);
      if (v == 0.0) continue;
      out += out.empty() ? (v < 0 ? "-" : "") : (v < 0 ? " - " : " + ");
      double a = std::abs(v);
      if (a != 1.0) out += strf("%g*", a);
      out += name(j);
    }
    return out.empty() ? std::string("0") : out;
  };
  std::string out = "minimize\n  ";
  {
    std::string obj;
    for (int j = 0; j < num_vars(); ++j) {
      double v = c(j);
      if (v == 0.0) continue;
      obj += obj.empty() ? (v < 0 ? "-" : "") : (v < 0 ? " - " : " + ");
      double a = std::abs(v);
      if (a != 1.0) obj += strf("%g*", a);
      obj += name(j);
    }
    out += obj.empty() ? "0" : obj;
  }
  out += "\nsubject to\n";
  for (int r = 0; r < num_eq(); ++r)
    out += strf("  %s = %g\n", term_row(A, r).c_str(), b(r));
  for (int r = 0; r < num_ineq(); ++r)
    out += strf("  %s <= %g\n", term_row(G, r).c_str(), h(r));
  out += strf("  x >= 0  (%d variables)\n", num_vars());
  return out;
}

namespace {

constexpr double kFeasTol = 1e-7;
constexpr int kDegenerateSwitch = 50;

struct Tableau {
  // Rows 0..m-1 are constraints; row m is the phase-1 objective, row m+1 the
  // phase-2 objective. The last column is the right-hand side.
  Eigen::MatrixXd t;
  std::vector<int> basis;
  int m = 0;
  int n_total = 0;  // structural + slack + artificial

  double& rhs(int r) { return t(r, n_total); }

  void pivot(int r, int j) {
    t.row(r) /= t(r, j);
    for (int i = 0; i < t.rows(); ++i) {
      if (i == r) continue;
      double f = t(i, j);
      if (f != 0.0) t.row(i) -= f * t.row(r);
    }
    basis[static_cast<std::size_t>(r)] = j;
  }
};

}  // namespace

LpSolution solve(const LinearProgram& lp, double tol, long max_iter) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = lp.num_vars();
  const int me = lp.num_eq();
  const int mi = lp.num_ineq();
  const int m = me + mi;
  const int n_slack = mi;
  const int n_art = m;
  const int n_total = n + n_slack + n_art;
  if (max_iter < 0) max_iter = 10L * (m + n) + 10000L;

  LpSolution sol;
  auto finish = [&](LpStatus status, long iters) {
    sol.status = status;
    sol.iterations = iters;
    sol.solve_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return sol;
  };

  Tableau tb;
  tb.m = m;
  tb.n_total = n_total;
  tb.t = Eigen::MatrixXd::Zero(m + 2, n_total + 1);
  tb.basis.resize(static_cast<std::size_t>(m));

  for (int r = 0; r < me; ++r) {
    tb.t.block(r, 0, 1, n) = lp.A.row(r);
    tb.rhs(r) = lp.b(r);
  }
  for (int r = 0; r < mi; ++r) {
    tb.t.block(me + r, 0, 1, n) = lp.G.row(r);
    tb.t(me + r, n + r) = 1.0;  // slack
    tb.rhs(me + r) = lp.h(r);
  }
  for (int r = 0; r < m; ++r) {
    if (tb.rhs(r) < 0.0) tb.t.row(r) = -tb.t.row(r);
    tb.t(r, n + n_slack + r) = 1.0;  // artificial
    tb.basis[static_cast<std::size_t>(r)] = n + n_slack + r;
  }

  // Phase-1 objective: minimize the artificial sum. With the artificials
  // basic, its reduced-cost row is -(sum of all constraint rows) outside the
  // artificial block.
  for (int r = 0; r < m; ++r) tb.t.row(m) -= tb.t.row(r);
  tb.t.block(m, n + n_slack, 1, n_art).setZero();
  // Phase-2 objective starts as the raw costs.
  tb.t.block(m + 1, 0, 1, n) = lp.c.transpose();

  long iterations = 0;
  const int art_begin = n + n_slack;

  auto run_phase = [&](int obj_row) -> LpStatus {
    int degenerate_run = 0;
    bool bland = false;
    const int limit = art_begin;  // artificials start basic and never re-enter
    for (;;) {
      if (iterations >= max_iter) return LpStatus::IterationLimit;

      int enter = -1;
      if (bland) {
        for (int j = 0; j < limit; ++j)
          if (tb.t(obj_row, j) < -tol) {
            enter = j;
            break;
          }
      } else {
        double best = -tol;
        for (int j = 0; j < limit; ++j)
          if (tb.t(obj_row, j) < best) {
            best = tb.t(obj_row, j);
            enter = j;
          }
      }
      if (enter < 0) return LpStatus::Optimal;

      int leave = -1;
      double best_ratio = 0.0;
      for (int r = 0; r < m; ++r) {
        double a = tb.t(r, enter);
        if (a <= tol) continue;
        double ratio = tb.rhs(r) / a;
        if (leave < 0 || ratio < best_ratio - 1e-12 ||
            (std::abs(ratio - best_ratio) <= 1e-12 &&
             tb.basis[static_cast<std::size_t>(r)] <
                 tb.basis[static_cast<std::size_t>(leave)])) {
          leave = r;
          best_ratio = ratio;
        }
      }
      if (leave < 0) return LpStatus::Unbounded;

      double before = tb.t(obj_row, n_total);
      tb.pivot(leave, enter);
      ++iterations;
      double after = tb.t(obj_row, n_total);
      if (after > before + tol) {  // objective row stores -objective progress
        degenerate_run = 0;
        bland = false;
      } else if (++degenerate_run >= kDegenerateSwitch) {
        bland = true;
      }
    }
  };

  LpStatus s1 = run_phase(m);
  if (s1 == LpStatus::IterationLimit) return finish(s1, iterations);
  double phase1 = -tb.t(m, n_total);
  if (s1 == LpStatus::Unbounded || phase1 > kFeasTol)
    return finish(LpStatus::Infeasible, iterations);

  // Drive leftover artificials out of the basis where possible; rows that are
  // zero on every real column are redundant and stay put at level zero.
  for (int r = 0; r < m; ++r) {
    if (tb.basis[static_cast<std::size_t>(r)] < art_begin) continue;
    for (int j = 0; j < art_begin; ++j)
      if (std::abs(tb.t(r, j)) > 1e-9) {
        tb.pivot(r, j);
        ++iterations;
        break;
      }
  }

  LpStatus s2 = run_phase(m + 1);
  if (s2 == LpStatus::IterationLimit || s2 == LpStatus::Unbounded)
    return finish(s2, iterations);

  sol.x = Eigen::VectorXd::Zero(n);
  for (int r = 0; r < m; ++r) {
    int j = tb.basis[static_cast<std::size_t>(r)];
    if (j < n) sol.x(j) = tb.rhs(r);
  }
  sol.objective = lp.c.dot(sol.x);
  return finish(LpStatus::Optimal, iterations);
}

}  // namespace lcmdp

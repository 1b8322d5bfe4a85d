#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lcmdp {

// Standard-form linear program:
//   minimize  c'x   subject to  A x = b,  G x <= h,  x >= 0.
struct LinearProgram {
  Eigen::VectorXd c;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::MatrixXd G;
  Eigen::VectorXd h;
  std::vector<std::string> var_names;  // optional, for dumps

  int num_vars() const { return static_cast<int>(c.size()); }
  int num_eq() const { return static_cast<int>(b.size()); }
  int num_ineq() const { return static_cast<int>(h.size()); }

  std::string dump() const;  // human-readable text form
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

const char* lp_status_name(LpStatus s);

struct LpSolution {
  LpStatus status = LpStatus::IterationLimit;
  Eigen::VectorXd x;
  double objective = 0.0;
  long iterations = 0;
  double solve_seconds = 0.0;
};

// Two-phase primal simplex on the dense slack-augmented tableau. Entering
// columns follow Dantzig's rule (ties to the lowest index) and switch to
// Bland's rule after 50 consecutive degenerate pivots, which guarantees
// termination. Deterministic: identical input gives the identical pivot
// sequence.
LpSolution solve(const LinearProgram& lp, double tol = 1e-9, long max_iter = -1);

}  // namespace lcmdp

#pragma once

#include <Eigen/Dense>

namespace atomnet {

// Dense two-phase primal simplex for
//
//   minimize c . x   subject to  A x = b,  x >= 0.
//
// This is the reference solver behind the oracle checks: the method shares
// no code with the splitting solver, so agreement between the two is
// meaningful evidence.  Dantzig pricing with a Bland fallback once cycling
// is suspected; the basis inverse is refreshed from scratch every pivot
// (the oracle instances have at most a few dozen rows, so robustness beats
// speed here).
enum class SimplexStatus { Optimal, Infeasible, Unbounded };

struct SimplexResult {
  SimplexStatus status = SimplexStatus::Optimal;
  Eigen::VectorXd x;
  double objective = 0.0;
};

SimplexResult simplex_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                            const Eigen::VectorXd& c);

}  // namespace atomnet

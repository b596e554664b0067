#include "atomnet/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace atomnet {

namespace {

constexpr double kReducedCostTol = 1e-9;
constexpr double kPivotTol = 1e-11;

struct Tableau {
  Eigen::MatrixXd cols;     // original columns then one artificial per row
  Eigen::VectorXd rhs;      // nonnegative
  std::vector<int> basis;   // column index per row
  int n = 0;                // original column count
  int m = 0;

  Eigen::PartialPivLU<Eigen::MatrixXd> lu;

  void refactor() {
    Eigen::MatrixXd basis_matrix(m, m);
    for (int r = 0; r < m; ++r) basis_matrix.col(r) = cols.col(basis[r]);
    lu.compute(basis_matrix);
  }

  Eigen::VectorXd basic_values() const { return lu.solve(rhs); }
};

// One simplex phase over the given per-column costs.  Columns with
// cost NaN are barred from entering (used to retire artificials).
enum class PhaseOutcome { Optimal, Unbounded, Stalled };

PhaseOutcome run_phase(Tableau& t, const Eigen::VectorXd& cost) {
  const long iteration_cap = 2000 + 200L * (t.n + t.m);
  bool bland = false;
  long since_progress = 0;
  double best_objective = std::numeric_limits<double>::infinity();
  double cost_scale = 1.0;
  for (int j = 0; j < cost.size(); ++j)
    if (!std::isnan(cost[j])) cost_scale = std::max(cost_scale, std::abs(cost[j]));

  for (long iter = 0; iter < iteration_cap; ++iter) {
    t.refactor();
    Eigen::VectorXd xb = t.basic_values();
    Eigen::VectorXd cb(t.m);
    for (int r = 0; r < t.m; ++r) cb[r] = cost[t.basis[r]];
    Eigen::VectorXd y = t.lu.transpose().solve(cb);

    const double objective = cb.dot(xb);
    if (objective < best_objective - 1e-12 * (1.0 + std::abs(best_objective))) {
      best_objective = objective;
      since_progress = 0;
    } else if (++since_progress > 2L * (t.n + t.m)) {
      bland = true;
    }

    std::vector<char> in_basis(static_cast<size_t>(t.cols.cols()), 0);
    for (int r = 0; r < t.m; ++r) in_basis[static_cast<size_t>(t.basis[r])] = 1;

    int enter = -1;
    double most_negative = -kReducedCostTol * cost_scale;
    for (int j = 0; j < t.cols.cols(); ++j) {
      if (in_basis[static_cast<size_t>(j)] || std::isnan(cost[j])) continue;
      const double reduced = cost[j] - y.dot(t.cols.col(j));
      if (reduced < most_negative) {
        enter = j;
        if (bland) break;  // smallest admissible index
        most_negative = reduced;
      }
    }
    if (enter < 0) return PhaseOutcome::Optimal;

    Eigen::VectorXd direction = t.lu.solve(t.cols.col(enter));
    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int r = 0; r < t.m; ++r) {
      if (direction[r] <= kPivotTol) continue;
      const double ratio = std::max(xb[r], 0.0) / direction[r];
      if (ratio < best_ratio - 1e-12 ||
          (ratio < best_ratio + 1e-12 && (leave < 0 || t.basis[r] < t.basis[leave]))) {
        best_ratio = ratio;
        leave = r;
      }
    }
    if (leave < 0) return PhaseOutcome::Unbounded;
    t.basis[leave] = enter;
  }
  return PhaseOutcome::Stalled;
}

}  // namespace

SimplexResult simplex_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                            const Eigen::VectorXd& c) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  SimplexResult result;

  if (m == 0) {
    result.x = Eigen::VectorXd::Zero(n);
    if (n > 0 && c.minCoeff() < -kReducedCostTol) {
      result.status = SimplexStatus::Unbounded;
    } else {
      result.status = SimplexStatus::Optimal;
      result.objective = 0.0;
    }
    return result;
  }

  Tableau t;
  t.n = n;
  t.m = m;
  t.cols.resize(m, n + m);
  t.cols.leftCols(n) = a;
  t.cols.rightCols(m) = Eigen::MatrixXd::Identity(m, m);
  t.rhs = b;
  for (int r = 0; r < m; ++r)
    if (t.rhs[r] < 0) {
      t.rhs[r] = -t.rhs[r];
      t.cols.row(r).leftCols(n) *= -1.0;  // artificial block stays +I
    }
  t.basis.resize(static_cast<size_t>(m));
  for (int r = 0; r < m; ++r) t.basis[static_cast<size_t>(r)] = n + r;

  Eigen::VectorXd phase1_cost = Eigen::VectorXd::Zero(n + m);
  phase1_cost.tail(m).setOnes();
  if (run_phase(t, phase1_cost) == PhaseOutcome::Stalled)
    throw std::runtime_error("simplex stalled in phase one");
  t.refactor();
  Eigen::VectorXd xb = t.basic_values();
  double infeasibility = 0.0;
  for (int r = 0; r < m; ++r)
    if (t.basis[static_cast<size_t>(r)] >= n) infeasibility += std::max(xb[r], 0.0);
  if (infeasibility > 1e-7 * (1.0 + t.rhs.lpNorm<Eigen::Infinity>())) {
    result.status = SimplexStatus::Infeasible;
    result.x = Eigen::VectorXd::Zero(n);
    return result;
  }

  // retire artificials still sitting (at zero) in the basis; rows that
  // cannot be repivoted are redundant and get dropped outright
  std::vector<int> redundant;
  for (int r = 0; r < m; ++r) {
    if (t.basis[static_cast<size_t>(r)] < n) continue;
    std::vector<char> in_basis(static_cast<size_t>(n), 0);
    for (int rr = 0; rr < m; ++rr)
      if (t.basis[static_cast<size_t>(rr)] < n)
        in_basis[static_cast<size_t>(t.basis[static_cast<size_t>(rr)])] = 1;
    bool replaced = false;
    for (int j = 0; j < n && !replaced; ++j) {
      if (in_basis[static_cast<size_t>(j)]) continue;
      Eigen::VectorXd direction = t.lu.solve(t.cols.col(j));
      if (std::abs(direction[r]) > 1e-8) {
        t.basis[static_cast<size_t>(r)] = j;
        t.refactor();
        replaced = true;
      }
    }
    if (!replaced) redundant.push_back(r);
  }
  if (!redundant.empty()) {
    std::vector<char> drop(static_cast<size_t>(m), 0);
    for (int r : redundant) drop[static_cast<size_t>(r)] = 1;
    const int m2 = m - static_cast<int>(redundant.size());
    Eigen::MatrixXd cols2(m2, n + m2);
    Eigen::VectorXd rhs2(m2);
    std::vector<int> basis2;
    int rr = 0;
    for (int r = 0; r < m; ++r) {
      if (drop[static_cast<size_t>(r)]) continue;
      cols2.row(rr).head(n) = t.cols.row(r).head(n);
      rhs2[rr] = t.rhs[r];
      basis2.push_back(t.basis[static_cast<size_t>(r)]);
      ++rr;
    }
    cols2.rightCols(m2) = Eigen::MatrixXd::Identity(m2, m2);
    t.cols = std::move(cols2);
    t.rhs = std::move(rhs2);
    t.basis = std::move(basis2);
    t.m = m2;
    t.refactor();
  }

  Eigen::VectorXd phase2_cost(n + t.m);
  phase2_cost.head(n) = c;
  phase2_cost.tail(t.m).setConstant(std::numeric_limits<double>::quiet_NaN());  // barred
  const PhaseOutcome outcome = run_phase(t, phase2_cost);
  if (outcome == PhaseOutcome::Stalled) throw std::runtime_error("simplex stalled in phase two");
  if (outcome == PhaseOutcome::Unbounded) {
    result.status = SimplexStatus::Unbounded;
    result.x = Eigen::VectorXd::Zero(n);
    return result;
  }

  t.refactor();
  xb = t.basic_values();
  result.x = Eigen::VectorXd::Zero(n);
  for (int r = 0; r < t.m; ++r)
    if (t.basis[static_cast<size_t>(r)] < n)
      result.x[t.basis[static_cast<size_t>(r)]] = std::max(xb[r], 0.0);
  result.objective = c.dot(result.x);
  result.status = SimplexStatus::Optimal;
  return result;
}

}  // namespace atomnet

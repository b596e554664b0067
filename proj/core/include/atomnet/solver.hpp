#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "atomnet/programs.hpp"

namespace atomnet {

// Raised when linear algebra fails in a way that is neither infeasibility
// nor an iteration limit (singular systems, non-finite iterates).
struct SolverNumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverConfig {
  double tol_primal = 1e-8;
  double tol_dual = 1e-8;
  double tol_gap = 1e-8;
  long max_iterations = 200000;
  // Reserved for reproducibility bookkeeping; the method itself draws no
  // random numbers, so runs are bit-identical for equal inputs regardless.
  std::uint64_t seed = 0;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit };

// How an infeasibility verdict was reached: Certified means an explicitly
// verified separating certificate (a Farkas vector checked against the
// program data), Heuristic means sustained residual growth without one.
enum class InfeasibilityKind { None, Certified, Heuristic };

struct PatternBlockValues {
  Eigen::VectorXd w_plus;
  double b_plus = 0.0;
  Eigen::VectorXd w_minus;
  double b_minus = 0.0;
};

struct Residuals {
  double primal = 0.0;  // worst equality violation / cone-row violation
  double dual = 0.0;    // distance of the dual estimate from feasibility
  double gap = 0.0;     // relative primal-dual objective gap
};

struct GroupSolution {
  ProgramKind kind = ProgramKind::WeightsInterp;
  std::vector<PatternBlockValues> blocks;
  double objective = 0.0;  // recomputed from blocks, never from the loop
  SolveStatus status = SolveStatus::IterationLimit;
  InfeasibilityKind infeasibility = InfeasibilityKind::None;
  Residuals residuals;
  long iterations = 0;
  bool polished = false;

  Eigen::VectorXd raw;  // flat variable vector in program layout
};

// Solves the group-norm program by operator splitting over its
// second-order-cone epigraph form (alternating projections onto the cone
// product and the affine constraint set), then polishes by re-solving the
// active-support equality system with a Newton corrector.  Deterministic:
// equal (program, config) inputs give bit-identical results.
GroupSolution solve(const ConicProgram& program, const SolverConfig& config = {});

const char* status_name(SolveStatus status);

struct LpSolution {
  Eigen::VectorXd point;
  double objective = 0.0;
};

// Maximizes c . z subject to A z >= b and ||z||_inf <= box, via the same
// splitting machinery specialized to polyhedra plus an exact vertex
// polish.  Returns nullopt when the polyhedron is empty.
std::optional<LpSolution> lp_feasibility(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                         const Eigen::VectorXd& c, double box,
                                         const SolverConfig& config = {});

// JSON report {status, objective, iterations, residuals{...}, wall_time_ms}.
std::string solver_report_json(const GroupSolution& solution, double wall_time_ms);

}  // namespace atomnet

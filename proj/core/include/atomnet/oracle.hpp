#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "atomnet/dataset.hpp"
#include "atomnet/patterns.hpp"
#include "atomnet/programs.hpp"
#include "atomnet/solver.hpp"

namespace atomnet {

// Reference results computed along a completely different route than the
// splitting solver: a dense dictionary of candidate units is laid out on a
// fixed grid and the best combination is found with the two-phase simplex
// from simplex.hpp.  Nothing here touches pattern enumeration or the conic
// formulation, so a match between the two paths is a genuine cross-check.

struct OracleAtom {
  Eigen::VectorXd w;
  double b = 0.0;
  double coefficient = 0.0;
  bool penalized = true;  // bias-only columns ride along at zero cost
};

struct OracleSolution {
  double objective = 0.0;
  std::vector<OracleAtom> atoms;  // nonzero coefficients only
  long columns = 0;               // dictionary size actually priced
};

// Grid layout per program kind:
//  - WeightsInterp: inner weight w in {+1, -1} (d = 1 only), bias on a
//    uniform grid over [-B, B] with B = 1 + max ||x||_1 and the given step;
//    zero-cost constant columns are added since bias-only units are free.
//  - JointInterp: (w, b) on the unit circle, `circle_points` equispaced
//    angles (d = 1 only); every column costs 1.
//  - MarginClassify: d = 1 uses the WeightsInterp dictionary, d = 2 pairs
//    `circle_points` unit directions with the bias grid; labels multiply
//    the columns and rows demand margin >= 1.
// Coefficients may take either sign; the LP splits them into positive
// parts, so the objective is the exact grid-restricted atomic optimum.
OracleSolution atomic_lp(const DataSet& data, ProgramKind kind, double alpha,
                         double bias_step = 1e-3, int circle_points = 10000);

// Decides z in t * conv(T+ u T-) over the same dictionary: nonnegative
// convex weights on the +-activation columns must sum to at most t while
// reproducing z (free bias columns do not consume budget).  t = 0 asks
// whether z is reachable by free columns alone; z = 0, t = 0 is a member.
bool brute_force_hull_member(const DataSet& data, const Eigen::VectorXd& z, double t,
                             ProgramKind kind, double alpha, double bias_step = 1e-3,
                             int circle_points = 10000);

// One term of the convex decomposition extracted from a block solution:
// coefficient >= 0 and the unit-scale element (an N-vector) it multiplies,
// tagged with the pattern the element's sign cone belongs to.  Minus-block
// elements are already negated, so summing coefficient * element over all
// terms (plus the free bias contributions) reproduces the fitted values.
struct DecompositionTerm {
  double coefficient = 0.0;
  Eigen::VectorXd element;
  int pattern = 0;
  bool plus_block = true;
};

// Structural audit of a block solution against its pattern set: every block
// must sit in its sign cone, the blocks must reproduce the labels (or the
// unit margins), the reported objective must equal the recomputed group
// norms (= the sum of extracted coefficients), and the reconstructed
// network must agree with the block expansion pointwise on the data.
// Violated clauses come back by name with the offending magnitude embedded
// in the message.
struct DecompositionReport {
  bool ok = true;
  std::vector<DecompositionTerm> terms;  // penalized blocks, in pattern order
  double total = 0.0;                    // sum of coefficients
  std::vector<std::string> violations;
};

DecompositionReport check_decomposition(const DataSet& data, const GroupSolution& solution,
                                        const PatternSet& patterns, double alpha,
                                        double tol = 1e-6);

std::string oracle_to_json(const OracleSolution& solution);

}  // namespace atomnet

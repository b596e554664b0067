#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "atomnet/dataset.hpp"
#include "atomnet/patterns.hpp"

namespace atomnet {

// The three finite convex programs share one canonical shape:
//
//   minimize    sum_g || x[group g] ||_2
//   subject to  a_eq * x  = b_eq
//               a_in * x >= b_in
//
// Variables are laid out per pattern as [w+ (d), b+ (1), w- (d), b- (1)],
// pattern blocks in pattern-set order.  Both blocks of a pattern live in
// the same sign cone s (.) (X^T w + b 1) >= 0; the minus block enters the
// fitted function negatively and yields neurons with negative outer
// weight.  Coordinates covered by no group (the biases of the weight-only
// objectives) are unpenalized.
enum class ProgramKind { WeightsInterp, JointInterp, MarginClassify };

struct Group {
  int begin = 0;    // first coordinate of the contiguous index range
  int size = 0;     // d for weight groups, d+1 for joint groups
  int pattern = 0;  // owning pattern index
  bool plus_block = true;
};

struct ConicProgram {
  ProgramKind kind = ProgramKind::WeightsInterp;
  int dim = 0;           // feature dimension d
  int count = 0;         // number of data points N
  int num_patterns = 0;  // |pattern set|
  double alpha = 0.0;
  std::vector<Group> groups;
  Eigen::MatrixXd a_eq;  // equality rows (N for interpolation, 0 for margin)
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd a_in;  // cone rows, then margin rows for MarginClassify
  Eigen::VectorXd b_in;

  int var_count() const { return 2 * (dim + 1) * num_patterns; }
};

// Slope profile of the activation on a sign arrangement: h[i] = 1 where
// signs[i] = +1 and alpha where signs[i] = -1, so that on the cone of s
// the activation is exactly h(s) (.) (X^T w + b 1).
Eigen::VectorXd h_of_s(const Eigen::VectorXi& signs, double alpha);

// Exact interpolation penalizing hidden-layer weights only (per-group
// biases are free).  Equality rows fit the labels; inequality rows pin
// each block to its pattern's cone.
ConicProgram build_weights_interp(const DataSet& data, const PatternSet& patterns, double alpha);

// Same constraints, but the objective groups are the joint (w, b) blocks,
// so bias mass is penalized too.
ConicProgram build_joint_interp(const DataSet& data, const PatternSet& patterns, double alpha);

// Binary classification with unit functional margins: no equality rows;
// the cone rows are joined by N rows requiring y_i * f(x_i) >= 1, with the
// labels folded into the slope coefficients.
ConicProgram build_margin_classify(const DataSet& data, const PatternSet& patterns, double alpha);

const char* program_kind_name(ProgramKind kind);

// Dense JSON dump of the whole program, intended for desk-scale debugging.
std::string program_to_json(const ConicProgram& program);

}  // namespace atomnet

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace atomnet {

// Thrown for malformed inputs: bad CSV, non-finite values, dimension
// mismatches, invalid activation slopes.  The CLI maps it to exit code 2.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A fixed batch of training data.  Feature vectors are stored column-wise:
// features is d x N, column i is the i-th point, labels has length N.
struct DataSet {
  Eigen::MatrixXd features;
  Eigen::VectorXd labels;

  int dim() const { return static_cast<int>(features.rows()); }
  int count() const { return static_cast<int>(features.cols()); }
};

// Validates shapes and finiteness.  d >= 1 and N >= 1 are required; labels
// are arbitrary finite reals (regression targets or +/-1 classes).
DataSet make_dataset(Eigen::MatrixXd features, Eigen::VectorXd labels);

// Reads a CSV file with a header row.  All columns except `label_column`
// are features, kept in file order; the label column may sit anywhere.
// Strict parsing: every field must be a finite decimal number.
DataSet load_dataset(const std::string& path, const std::string& label_column = "y");

// Throws ValidationError unless every label is exactly +1 or -1.
void require_binary_labels(const DataSet& data);

// Piecewise-linear activation with slope 1 on [0, inf) and `alpha` on
// (-inf, 0).  alpha == 1 would make it linear and is rejected by the
// routines that take it as a parameter; alpha == 0 is the common ramp.
inline double leaky_relu(double x, double alpha) { return x >= 0.0 ? x : alpha * x; }

// The activation profile of one hidden unit over the whole batch:
// values[i] = leaky_relu(w . x_i + b, alpha).
struct Activation {
  double alpha = 0.0;
  Eigen::VectorXd values;
};

Activation activation_vector(const DataSet& data, const Eigen::VectorXd& w, double b,
                             double alpha);

// Order-sensitive 64-bit digest of (d, N, features, labels), used to tie
// derived artifacts (pattern sets, networks) back to their data.
std::uint64_t dataset_digest(const DataSet& data);

// Digest rendered as fixed-width hex, the form used in JSON artifacts.
std::string digest_hex(std::uint64_t digest);

}  // namespace atomnet

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "atomnet/dataset.hpp"

namespace atomnet {

// Thrown when an enumeration would exceed the configured candidate budget.
// The CLI maps it to exit code 3.
struct ResourceLimitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One realizable pre-activation sign arrangement over the batch, together
// with a witness affine map.  signs[i] is +1 or -1 and records the sign of
// w . x_i + b, where the convention sign(0) = +1 applies.  The witness
// satisfies ||w||_2 <= 1, signs[i] * (w . x_i + b) >= 0 for every i, and a
// strictly positive total margin; whenever the arrangement is realizable
// with strict inequalities the witness realizes every sign exactly.
struct SignPattern {
  Eigen::VectorXi signs;
  Eigen::VectorXd witness_w;
  double witness_b = 0.0;
};

// All realizable arrangements, canonically ordered: lexicographic on signs
// with +1 before -1, so the all-positive pattern sorts first.  data_hash
// ties the set to the dataset it was enumerated from.
struct PatternSet {
  std::vector<SignPattern> patterns;
  std::uint64_t data_hash = 0;

  int size() const { return static_cast<int>(patterns.size()); }
};

struct PatternOptions {
  // Batches larger than this refuse to enumerate (ResourceLimitError)
  // unless the caller raises the cutoff; the exhaustive strategy tests
  // 2^N candidates, so the guard sits in front of every strategy.
  int enumeration_cutoff = 20;
  // A candidate belongs to the set iff its cone contains a point whose
  // total activation margin exceeds this threshold.
  double feas_margin = 1e-9;
  // Feasibility checks of distinct candidates are independent; more than
  // one worker never changes the resulting set.
  int workers = 1;
};

struct PatternWitness {
  Eigen::VectorXd w;
  double b = 0.0;
};

// Decides whether the closed cone {(w, b) : s_i (w . x_i + b) >= 0 for all i}
// contains a point of strictly positive total margin, maximizing the margin
// with a box-constrained LP.  Returns the (renormalized) maximizer as a
// witness, or nullopt for arrangements realizable only by the zero map.
std::optional<PatternWitness> pattern_feasible(const DataSet& data, const Eigen::VectorXi& signs,
                                               const PatternOptions& options = {});

// Enumerates every realizable arrangement.  For one-dimensional data with
// distinct abscissae the set is exactly the prefix/suffix threshold
// patterns and is built directly; otherwise all 2^N candidates are tested.
PatternSet enumerate_patterns(const DataSet& data, const PatternOptions& options = {});

// Upper bound on the number of realizable arrangements:
// 2 * sum_{i=1..d} C(N, i), saturated at 2^N.  Throws std::overflow_error
// when the value cannot be represented.
std::uint64_t cover_bound(std::uint64_t n_points, std::uint64_t dim);

// JSON document {"count", "bound", "patterns", "witnesses", "data_hash"}.
std::string pattern_set_to_json(const PatternSet& set, std::uint64_t bound);

}  // namespace atomnet

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "atomnet/dataset.hpp"
#include "atomnet/patterns.hpp"

namespace testutil {

inline std::string corpus_path(const std::string& name) {
  return std::string(ATOMNET_CORPUS_DIR) + "/" + name;
}

inline std::string data_path(const std::string& name) {
  return std::string(ATOMNET_DATA_DIR) + "/" + name;
}

inline atomnet::DataSet corpus(const std::string& name) {
  return atomnet::load_dataset(corpus_path(name));
}

// Every CSV in tests/corpus, kept in one place so suites and the acceptance
// harness sweep the same files.
inline const std::vector<std::string>& corpus_names() {
  static const std::vector<std::string> names = {
      "interp_1d.csv", "xor_2d.csv",     "dup_1d.csv",     "single_1d.csv",
      "pair_1d.csv",   "rand_2d_8.csv",  "rand_3d_6.csv",  "collinear_2d.csv",
  };
  return names;
}

// Independent 2^N sweep over all candidate sign vectors, generated in the
// library's canonical order (lexicographic with +1 before -1).  Used to
// validate production enumeration without relying on it.
inline std::vector<Eigen::VectorXi> brute_force_signs(
    const atomnet::DataSet& data, const atomnet::PatternOptions& options = {}) {
  const int n = data.count();
  std::vector<Eigen::VectorXi> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    Eigen::VectorXi s(n);
    for (int i = 0; i < n; ++i)
      s[i] = ((mask >> (n - 1 - i)) & 1u) ? -1 : 1;
    if (atomnet::pattern_feasible(data, s, options)) out.push_back(s);
  }
  return out;
}

inline std::string signs_key(const Eigen::VectorXi& s) {
  std::string key;
  key.reserve(static_cast<std::size_t>(s.size()));
  for (int i = 0; i < s.size(); ++i) key.push_back(s[i] > 0 ? '+' : '-');
  return key;
}

}  // namespace testutil

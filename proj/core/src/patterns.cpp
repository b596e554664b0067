#include "atomnet/patterns.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>
#include <utility>

#include <nlohmann/json.hpp>

#include "atomnet/solver.hpp"

namespace atomnet {

namespace {

void validate_signs(const DataSet& data, const Eigen::VectorXi& signs) {
  if (signs.size() != data.count())
    throw ValidationError("sign arrangement length does not match the dataset");
  for (int i = 0; i < signs.size(); ++i)
    if (signs[i] != 1 && signs[i] != -1)
      throw ValidationError("sign arrangements must consist of +1 and -1 entries");
}

// +1 sorts before -1, entry by entry.
bool pattern_less(const Eigen::VectorXi& a, const Eigen::VectorXi& b) {
  for (int i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return a[i] > b[i];
  return false;
}

PatternWitness normalized(Eigen::VectorXd w, double b) {
  const double scale = std::max(1.0, w.norm());
  return PatternWitness{w / scale, b / scale};
}

// Threshold arrangements of sorted distinct 1-d data, with analytic
// witnesses placed halfway between neighbors.
std::vector<SignPattern> threshold_patterns(const DataSet& data) {
  const int n = data.count();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return data.features(0, i) < data.features(0, j); });

  std::vector<SignPattern> out;
  auto emit = [&](double w, double b, const std::vector<int>& negatives) {
    SignPattern p;
    p.signs = Eigen::VectorXi::Constant(n, 1);
    for (int i : negatives) p.signs[i] = -1;
    PatternWitness wit = normalized(Eigen::VectorXd::Constant(1, w), b);
    p.witness_w = wit.w;
    p.witness_b = wit.b;
    out.push_back(std::move(p));
  };

  const double lo = data.features(0, order.front());
  const double hi = data.features(0, order.back());
  for (int k = 0; k <= n; ++k) {
    // split point: ranks < k fall on the negative side of w = +1
    double threshold;
    if (k == 0)
      threshold = lo - 1.0;
    else if (k == n)
      threshold = hi + 1.0;
    else
      threshold = 0.5 * (data.features(0, order[k - 1]) + data.features(0, order[k]));
    std::vector<int> below(order.begin(), order.begin() + k);
    std::vector<int> above(order.begin() + k, order.end());
    emit(1.0, -threshold, below);   // negative side: x < threshold
    emit(-1.0, threshold, above);   // flipped orientation
  }

  std::sort(out.begin(), out.end(),
            [](const SignPattern& a, const SignPattern& b) { return pattern_less(a.signs, b.signs); });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const SignPattern& a, const SignPattern& b) {
                          return a.signs == b.signs;
                        }),
            out.end());
  return out;
}

Eigen::VectorXi signs_from_mask(std::uint64_t mask, int n) {
  Eigen::VectorXi s(n);
  for (int i = 0; i < n; ++i)
    s[i] = ((mask >> (n - 1 - i)) & 1u) ? -1 : 1;
  return s;
}

}  // namespace

std::optional<PatternWitness> pattern_feasible(const DataSet& data, const Eigen::VectorXi& signs,
                                               const PatternOptions& options) {
  validate_signs(data, signs);
  const int n = data.count();
  const int d = data.dim();

  Eigen::MatrixXd cone(n, d + 1);
  for (int i = 0; i < n; ++i) {
    cone.row(i).head(d) = signs[i] * data.features.col(i).transpose();
    cone(i, d) = signs[i];
  }

  // membership: maximize the total margin over the boxed cone
  const Eigen::VectorXd total = cone.colwise().sum();
  SolverConfig lp_config;
  auto best = lp_feasibility(cone, Eigen::VectorXd::Zero(n), total, 1.0, lp_config);
  if (!best) return std::nullopt;  // cannot happen: 0 is feasible
  if (!(best->objective > options.feas_margin)) return std::nullopt;

  // witness sharpening: push for a uniformly positive per-point margin so
  // strictly realizable arrangements get sign-exact witnesses
  Eigen::MatrixXd cheb(n, d + 2);
  cheb.leftCols(d + 1) = cone;
  cheb.col(d + 1).setConstant(-1.0);
  Eigen::VectorXd obj = Eigen::VectorXd::Zero(d + 2);
  obj[d + 1] = 1.0;
  auto sharp = lp_feasibility(cheb, Eigen::VectorXd::Zero(n), obj, 1.0, lp_config);
  if (sharp && sharp->objective > 1e-7)
    return normalized(sharp->point.head(d), sharp->point[d]);
  return normalized(best->point.head(d), best->point[d]);
}

PatternSet enumerate_patterns(const DataSet& data, const PatternOptions& options) {
  const int n = data.count();
  const int d = data.dim();
  PatternSet set;
  set.data_hash = dataset_digest(data);

  // The candidate-count guard applies before any strategy is picked, so
  // callers get the same refusal behavior no matter what shortcut would
  // have been available; raising the cutoff restores the shortcut.
  if (n > options.enumeration_cutoff)
    throw ResourceLimitError("arrangement enumeration over " + std::to_string(n) +
                             " points is above the configured cutoff of " +
                             std::to_string(options.enumeration_cutoff) +
                             "; raise the cutoff to proceed");

  bool distinct_1d = d == 1;
  if (distinct_1d) {
    std::vector<double> xs(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) xs[static_cast<size_t>(i)] = data.features(0, i);
    std::sort(xs.begin(), xs.end());
    distinct_1d = std::adjacent_find(xs.begin(), xs.end()) == xs.end();
  }
  if (distinct_1d) {
    set.patterns = threshold_patterns(data);
    return set;
  }

  const std::uint64_t candidates = std::uint64_t{1} << n;
  const int workers = std::max(1, std::min(options.workers, 64));

  auto scan = [&](std::uint64_t begin, std::uint64_t end, std::vector<SignPattern>& sink) {
    for (std::uint64_t mask = begin; mask < end; ++mask) {
      Eigen::VectorXi signs = signs_from_mask(mask, n);
      if (auto witness = pattern_feasible(data, signs, options)) {
        SignPattern p;
        p.signs = std::move(signs);
        p.witness_w = witness->w;
        p.witness_b = witness->b;
        sink.push_back(std::move(p));
      }
    }
  };

  if (workers == 1) {
    scan(0, candidates, set.patterns);
  } else {
    std::vector<std::vector<SignPattern>> parts(static_cast<size_t>(workers));
    std::vector<std::thread> threads;
    const std::uint64_t chunk = (candidates + workers - 1) / workers;
    for (int t = 0; t < workers; ++t) {
      const std::uint64_t begin = std::min<std::uint64_t>(candidates, chunk * t);
      const std::uint64_t end = std::min<std::uint64_t>(candidates, begin + chunk);
      threads.emplace_back(scan, begin, end, std::ref(parts[static_cast<size_t>(t)]));
    }
    for (auto& th : threads) th.join();
    for (auto& part : parts)
      for (auto& p : part) set.patterns.push_back(std::move(p));
  }

  std::sort(set.patterns.begin(), set.patterns.end(),
            [](const SignPattern& a, const SignPattern& b) { return pattern_less(a.signs, b.signs); });
  return set;
}

std::uint64_t cover_bound(std::uint64_t n_points, std::uint64_t dim) {
  if (n_points == 0) return 0;
  const unsigned __int128 u64max = std::numeric_limits<std::uint64_t>::max();
  const bool small = n_points <= 63;
  const std::uint64_t pow2 = small ? (std::uint64_t{1} << n_points) : 0;

  unsigned __int128 term = 1;  // C(n, 0)
  unsigned __int128 sum = 0;
  const std::uint64_t top = std::min(n_points, dim);
  for (std::uint64_t i = 1; i <= top; ++i) {
    if (term > u64max * 4) {
      if (small) return pow2;
      throw std::overflow_error("arrangement bound exceeds 64 bits");
    }
    term = term * (n_points - i + 1) / i;
    sum += term;
    if (small && 2 * sum >= pow2) return pow2;
  }
  const unsigned __int128 total = 2 * sum;
  if (small && total >= pow2) return pow2;
  if (total > u64max) throw std::overflow_error("arrangement bound exceeds 64 bits");
  return static_cast<std::uint64_t>(total);
}

std::string pattern_set_to_json(const PatternSet& set, std::uint64_t bound) {
  nlohmann::json j;
  j["count"] = set.size();
  j["bound"] = bound;
  j["data_hash"] = digest_hex(set.data_hash);
  auto& patterns = j["patterns"] = nlohmann::json::array();
  auto& witnesses = j["witnesses"] = nlohmann::json::array();
  for (const SignPattern& p : set.patterns) {
    nlohmann::json signs = nlohmann::json::array();
    for (int i = 0; i < p.signs.size(); ++i) signs.push_back(p.signs[i]);
    patterns.push_back(std::move(signs));
    nlohmann::json flat = nlohmann::json::array();  // [w..., b]
    for (int i = 0; i < p.witness_w.size(); ++i) flat.push_back(p.witness_w[i]);
    flat.push_back(p.witness_b);
    witnesses.push_back(std::move(flat));
  }
  return j.dump(2);
}

}  // namespace atomnet

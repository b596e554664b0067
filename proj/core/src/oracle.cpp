#include "atomnet/oracle.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "atomnet/network.hpp"
#include "atomnet/simplex.hpp"

namespace atomnet {

namespace {

struct Dictionary {
  std::vector<Eigen::VectorXd> w;
  std::vector<double> b;
  std::vector<char> penalized;
  std::vector<double> cost;      // group-norm price of the unnormalized atom
  Eigen::MatrixXd activation;    // N x K
};

double bias_reach(const DataSet& data) {
  double reach = 0.0;
  for (int i = 0; i < data.count(); ++i)
    reach = std::max(reach, data.features.col(i).lpNorm<1>());
  return 1.0 + reach;
}

Dictionary build_dictionary(const DataSet& data, ProgramKind kind, double alpha,
                            double bias_step, int circle_points) {
  if (!(bias_step > 0)) throw ValidationError("oracle bias step must be positive");
  if (circle_points < 4) throw ValidationError("oracle needs at least 4 directions");
  const int d = data.dim();
  Dictionary dict;

  auto push = [&](Eigen::VectorXd w, double b, bool penalized, double cost) {
    dict.w.push_back(std::move(w));
    dict.b.push_back(b);
    dict.penalized.push_back(penalized ? 1 : 0);
    dict.cost.push_back(cost);
  };

  const double reach = bias_reach(data);
  auto push_bias_grid = [&](double w_sign) {
    const Eigen::MatrixXd grid = grid_1d(-reach, reach, bias_step);
    for (long k = 0; k < grid.cols(); ++k)
      push(Eigen::VectorXd::Constant(1, w_sign), grid(0, k), true, 1.0);
  };

  switch (kind) {
    case ProgramKind::WeightsInterp:
      if (d != 1) throw ValidationError("the weight-objective dictionary covers d = 1 only");
      push_bias_grid(1.0);
      push_bias_grid(-1.0);
      push(Eigen::VectorXd::Zero(1), 1.0, false, 0.0);
      push(Eigen::VectorXd::Zero(1), -1.0, false, 0.0);
      break;
    case ProgramKind::JointInterp: {
      if (d != 1) throw ValidationError("the joint-objective dictionary covers d = 1 only");
      for (int k = 0; k < circle_points; ++k) {
        const double theta = 2.0 * std::numbers::pi * k / circle_points;
        push(Eigen::VectorXd::Constant(1, std::cos(theta)), std::sin(theta), true, 1.0);
      }
      break;
    }
    case ProgramKind::MarginClassify: {
      if (d == 1) {
        push_bias_grid(1.0);
        push_bias_grid(-1.0);
      } else if (d == 2) {
        const Eigen::MatrixXd grid = grid_1d(-reach, reach, bias_step);
        for (int k = 0; k < circle_points; ++k) {
          const double theta = 2.0 * std::numbers::pi * k / circle_points;
          Eigen::VectorXd w(2);
          w << std::cos(theta), std::sin(theta);
          for (long g = 0; g < grid.cols(); ++g) push(w, grid(0, g), true, 1.0);
        }
      } else {
        throw ValidationError("the margin dictionary covers d <= 2 only");
      }
      Eigen::VectorXd zero = Eigen::VectorXd::Zero(d);
      push(zero, 1.0, false, 0.0);
      push(zero, -1.0, false, 0.0);
      break;
    }
  }

  const int k = static_cast<int>(dict.w.size());
  dict.activation.resize(data.count(), k);
  for (int j = 0; j < k; ++j)
    dict.activation.col(j) = activation_vector(data, dict.w[j], dict.b[j], alpha).values;
  return dict;
}

}  // namespace

OracleSolution atomic_lp(const DataSet& data, ProgramKind kind, double alpha, double bias_step,
                         int circle_points) {
  const Dictionary dict = build_dictionary(data, kind, alpha, bias_step, circle_points);
  const int n = data.count();
  const int k = static_cast<int>(dict.w.size());
  const bool margin = kind == ProgramKind::MarginClassify;
  if (margin) require_binary_labels(data);

  const int slacks = margin ? n : 0;
  Eigen::MatrixXd a(n, 2 * k + slacks);
  Eigen::VectorXd cost(2 * k + slacks);
  for (int j = 0; j < k; ++j) {
    Eigen::VectorXd column = dict.activation.col(j);
    if (margin) column = column.cwiseProduct(data.labels);
    a.col(j) = column;
    a.col(k + j) = -column;
    cost[j] = dict.cost[j];
    cost[k + j] = dict.cost[j];
  }
  Eigen::VectorXd rhs;
  if (margin) {
    a.rightCols(n) = -Eigen::MatrixXd::Identity(n, n);
    cost.tail(n).setZero();
    rhs = Eigen::VectorXd::Ones(n);
  } else {
    rhs = data.labels;
  }

  const SimplexResult lp = simplex_solve(a, rhs, cost);
  if (lp.status == SimplexStatus::Infeasible)
    throw SolverNumericalError(
        "reference dictionary program came back infeasible; refine the grid "
        "(smaller bias step or more directions)");
  if (lp.status != SimplexStatus::Optimal)
    throw SolverNumericalError("reference dictionary program came back unbounded");

  OracleSolution sol;
  sol.objective = lp.objective;
  sol.columns = 2L * k + slacks;
  for (int j = 0; j < k; ++j) {
    const double coef = lp.x[j] - lp.x[k + j];
    if (std::abs(coef) > 1e-9) {
      OracleAtom atom;
      atom.w = dict.w[j];
      atom.b = dict.b[j];
      atom.coefficient = coef;
      atom.penalized = dict.penalized[j] != 0;
      sol.atoms.push_back(std::move(atom));
    }
  }
  return sol;
}

bool brute_force_hull_member(const DataSet& data, const Eigen::VectorXd& z, double t,
                             ProgramKind kind, double alpha, double bias_step,
                             int circle_points) {
  if (!(t >= 0) || !std::isfinite(t)) throw ValidationError("hull scale t must be nonnegative");
  if (z.size() != data.count())
    throw ValidationError("hull target length does not match the dataset");
  const Dictionary dict = build_dictionary(data, kind, alpha, bias_step, circle_points);
  const int n = data.count();
  const int k = static_cast<int>(dict.w.size());

  std::vector<int> pen, fre;
  for (int j = 0; j < k; ++j) (dict.penalized[j] ? pen : fre).push_back(j);
  const int np = static_cast<int>(pen.size());
  const int nf = static_cast<int>(fre.size());

  // columns: lambda+/- on penalized atoms (each consuming budget), beta+/-
  // on free atoms, one slack turning the budget row into sum <= t
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + 1, 2 * np + 2 * nf + 1);
  for (int idx = 0; idx < np; ++idx) {
    a.col(idx).head(n) = dict.activation.col(pen[idx]);
    a.col(np + idx).head(n) = -dict.activation.col(pen[idx]);
    a(n, idx) = 1.0;
    a(n, np + idx) = 1.0;
  }
  for (int idx = 0; idx < nf; ++idx) {
    a.col(2 * np + idx).head(n) = dict.activation.col(fre[idx]);
    a.col(2 * np + nf + idx).head(n) = -dict.activation.col(fre[idx]);
  }
  a(n, 2 * np + 2 * nf) = 1.0;

  Eigen::VectorXd rhs(n + 1);
  rhs.head(n) = z;
  rhs[n] = t;

  const SimplexResult lp =
      simplex_solve(a, rhs, Eigen::VectorXd::Zero(a.cols()));
  return lp.status == SimplexStatus::Optimal;
}

DecompositionReport check_decomposition(const DataSet& data, const GroupSolution& solution,
                                        const PatternSet& patterns, double alpha, double tol) {
  DecompositionReport report;
  auto fail = [&](const std::string& clause, double magnitude) {
    std::ostringstream msg;
    msg << clause << ": violation " << magnitude;
    report.ok = false;
    report.violations.push_back(msg.str());
  };

  if (static_cast<int>(solution.blocks.size()) != patterns.size()) {
    fail("shape", std::abs(static_cast<double>(solution.blocks.size()) - patterns.size()));
    return report;
  }

  const int n = data.count();
  const bool margin = solution.kind == ProgramKind::MarginClassify;
  const bool joint = solution.kind == ProgramKind::JointInterp;

  Eigen::VectorXd fitted = Eigen::VectorXd::Zero(n);
  double norms = 0.0;
  for (int i = 0; i < patterns.size(); ++i) {
    const Eigen::VectorXi& s = patterns.patterns[i].signs;
    const PatternBlockValues& blk = solution.blocks[static_cast<size_t>(i)];
    Eigen::VectorXd pre_plus = data.features.transpose() * blk.w_plus;
    pre_plus.array() += blk.b_plus;
    Eigen::VectorXd pre_minus = data.features.transpose() * blk.w_minus;
    pre_minus.array() += blk.b_minus;
    double worst_plus = 0.0, worst_minus = 0.0;
    Eigen::VectorXd act_plus(n), act_minus(n);
    for (int j = 0; j < n; ++j) {
      worst_plus = std::min(worst_plus, s[j] * pre_plus[j]);
      worst_minus = std::min(worst_minus, s[j] * pre_minus[j]);
      const double h = s[j] > 0 ? 1.0 : alpha;
      act_plus[j] = h * pre_plus[j];
      act_minus[j] = h * pre_minus[j];
      fitted[j] += act_plus[j] - act_minus[j];
    }
    if (worst_plus < -tol) fail("cone-plus[" + std::to_string(i) + "]", -worst_plus);
    if (worst_minus < -tol) fail("cone-minus[" + std::to_string(i) + "]", -worst_minus);

    // coefficient = the group norm; unit-scale elements carry the rest
    const double lam = joint ? std::sqrt(blk.w_plus.squaredNorm() + blk.b_plus * blk.b_plus)
                             : blk.w_plus.norm();
    const double beta = joint ? std::sqrt(blk.w_minus.squaredNorm() + blk.b_minus * blk.b_minus)
                              : blk.w_minus.norm();
    if (!std::isfinite(lam) || !std::isfinite(beta))
      fail("coefficient[" + std::to_string(i) + "]", std::numeric_limits<double>::quiet_NaN());
    if (lam > 0.0) report.terms.push_back({lam, act_plus / lam, i, true});
    if (beta > 0.0) report.terms.push_back({beta, -act_minus / beta, i, false});
    norms += lam + beta;
  }
  report.total = norms;

  if (margin) {
    for (int j = 0; j < n; ++j)
      if (data.labels[j] * fitted[j] < 1.0 - tol)
        fail("margin[" + std::to_string(j) + "]", 1.0 - data.labels[j] * fitted[j]);
  } else {
    for (int j = 0; j < n; ++j)
      if (std::abs(fitted[j] - data.labels[j]) > tol)
        fail("interpolation[" + std::to_string(j) + "]", std::abs(fitted[j] - data.labels[j]));
  }

  if (std::abs(norms - solution.objective) > tol * (1.0 + std::abs(norms)))
    fail("objective", std::abs(norms - solution.objective));

  const FiniteNetwork net = reconstruct(solution, patterns, alpha);
  const Eigen::VectorXd via_net = predict_many(net, data.features);
  for (int j = 0; j < n; ++j)
    if (std::abs(via_net[j] - fitted[j]) > tol * (1.0 + std::abs(fitted[j])))
      fail("network-match[" + std::to_string(j) + "]", std::abs(via_net[j] - fitted[j]));
  return report;
}

std::string oracle_to_json(const OracleSolution& solution) {
  nlohmann::json j;
  j["objective"] = solution.objective;
  j["columns"] = solution.columns;
  auto& atoms = j["active_atoms"] = nlohmann::json::array();
  for (const OracleAtom& atom : solution.atoms) {
    nlohmann::json w = nlohmann::json::array();
    for (int i = 0; i < atom.w.size(); ++i) w.push_back(atom.w[i]);
    atoms.push_back({{"w", std::move(w)},
                     {"b", atom.b},
                     {"coef", atom.coefficient},
                     {"penalized", atom.penalized}});
  }
  return j.dump(2);
}

}  // namespace atomnet

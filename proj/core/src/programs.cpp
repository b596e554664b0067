#include "atomnet/programs.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace atomnet {

namespace {

void validate_inputs(const DataSet& data, const PatternSet& patterns, double alpha) {
  if (patterns.patterns.empty())
    throw ValidationError("cannot build a program from an empty arrangement set");
  if (std::abs(alpha - 1.0) < 1e-12)
    throw ValidationError("negative slope 1 degenerates the activation to linear");
  if (!std::isfinite(alpha)) throw ValidationError("negative slope must be finite");
  for (const SignPattern& p : patterns.patterns)
    if (p.signs.size() != data.count())
      throw ValidationError("arrangement length does not match the dataset");
  if (patterns.data_hash != 0 && patterns.data_hash != dataset_digest(data))
    throw ValidationError("arrangement set was enumerated from different data");
}

// Core assembly shared by all three kinds; `joint` picks the group shape
// and `margin` swaps the equality rows for unit-margin inequalities.
ConicProgram assemble(const DataSet& data, const PatternSet& patterns, double alpha, bool joint,
                      bool margin, ProgramKind kind) {
  validate_inputs(data, patterns, alpha);
  if (margin) require_binary_labels(data);

  const int n = data.count();
  const int d = data.dim();
  const int np = patterns.size();
  const int block = d + 1;
  const int nv = 2 * block * np;

  ConicProgram p;
  p.kind = kind;
  p.dim = d;
  p.count = n;
  p.num_patterns = np;
  p.alpha = alpha;

  for (int i = 0; i < np; ++i) {
    const int o = i * 2 * block;
    const int gsize = joint ? d + 1 : d;
    p.groups.push_back({o, gsize, i, true});
    p.groups.push_back({o + block, gsize, i, false});
  }

  const int cone_rows = 2 * np * n;
  const int extra = margin ? n : 0;
  p.a_in = Eigen::MatrixXd::Zero(cone_rows + extra, nv);
  p.b_in = Eigen::VectorXd::Zero(cone_rows + extra);

  for (int i = 0; i < np; ++i) {
    const Eigen::VectorXi& s = patterns.patterns[i].signs;
    const int o = i * 2 * block;
    for (int j = 0; j < n; ++j) {
      const int plus_row = (2 * i) * n + j;
      const int minus_row = (2 * i + 1) * n + j;
      p.a_in.block(plus_row, o, 1, d) = s[j] * data.features.col(j).transpose();
      p.a_in(plus_row, o + d) = s[j];
      p.a_in.block(minus_row, o + block, 1, d) = s[j] * data.features.col(j).transpose();
      p.a_in(minus_row, o + block + d) = s[j];
    }
  }

  // fit rows: sum over blocks of h(s) (.) (X^T w + b 1), minus block negated
  auto fill_fit_row = [&](Eigen::MatrixXd& target, int row, int j, double scale) {
    for (int i = 0; i < np; ++i) {
      const double h = patterns.patterns[i].signs[j] > 0 ? 1.0 : alpha;
      const int o = i * 2 * block;
      target.block(row, o, 1, d) = scale * h * data.features.col(j).transpose();
      target(row, o + d) = scale * h;
      target.block(row, o + block, 1, d) = -scale * h * data.features.col(j).transpose();
      target(row, o + block + d) = -scale * h;
    }
  };

  if (margin) {
    for (int j = 0; j < n; ++j) {
      fill_fit_row(p.a_in, cone_rows + j, j, data.labels[j]);
      p.b_in[cone_rows + j] = 1.0;
    }
    p.a_eq.resize(0, nv);
    p.b_eq.resize(0);
  } else {
    p.a_eq = Eigen::MatrixXd::Zero(n, nv);
    p.b_eq = data.labels;
    for (int j = 0; j < n; ++j) fill_fit_row(p.a_eq, j, j, 1.0);
  }
  return p;
}

}  // namespace

Eigen::VectorXd h_of_s(const Eigen::VectorXi& signs, double alpha) {
  Eigen::VectorXd h(signs.size());
  for (int i = 0; i < signs.size(); ++i) h[i] = signs[i] > 0 ? 1.0 : alpha;
  return h;
}

ConicProgram build_weights_interp(const DataSet& data, const PatternSet& patterns, double alpha) {
  return assemble(data, patterns, alpha, false, false, ProgramKind::WeightsInterp);
}

ConicProgram build_joint_interp(const DataSet& data, const PatternSet& patterns, double alpha) {
  return assemble(data, patterns, alpha, true, false, ProgramKind::JointInterp);
}

ConicProgram build_margin_classify(const DataSet& data, const PatternSet& patterns, double alpha) {
  return assemble(data, patterns, alpha, false, true, ProgramKind::MarginClassify);
}

const char* program_kind_name(ProgramKind kind) {
  switch (kind) {
    case ProgramKind::WeightsInterp: return "weights-interp";
    case ProgramKind::JointInterp: return "joint-interp";
    case ProgramKind::MarginClassify: return "margin-classify";
  }
  return "unknown";
}

std::string program_to_json(const ConicProgram& program) {
  nlohmann::json j;
  j["kind"] = program_kind_name(program.kind);
  j["dim"] = program.dim;
  j["count"] = program.count;
  j["num_patterns"] = program.num_patterns;
  j["alpha"] = program.alpha;
  j["variables"] = program.var_count();
  auto& groups = j["groups"] = nlohmann::json::array();
  for (const Group& g : program.groups)
    groups.push_back({{"begin", g.begin},
                      {"size", g.size},
                      {"pattern", g.pattern},
                      {"plus_block", g.plus_block}});
  auto matrix = [](const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < m.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  auto vector = [](const Eigen::VectorXd& v) {
    nlohmann::json out = nlohmann::json::array();
    for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
  };
  j["a_eq"] = matrix(program.a_eq);
  j["b_eq"] = vector(program.b_eq);
  j["a_in"] = matrix(program.a_in);
  j["b_in"] = vector(program.b_in);
  return j.dump(2);
}

}  // namespace atomnet

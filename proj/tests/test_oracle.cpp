#include <doctest.h>

#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "atomnet/dataset.hpp"
#include "atomnet/network.hpp"
#include "atomnet/oracle.hpp"
#include "atomnet/patterns.hpp"
#include "atomnet/programs.hpp"
#include "atomnet/solver.hpp"
#include "helpers.hpp"

using namespace atomnet;

TEST_SUITE("oracle") {

TEST_CASE("the weight-penalty dictionary recovers the frozen optimum") {
  const DataSet data = testutil::corpus("interp_1d.csv");
  const OracleSolution sol = atomic_lp(data, ProgramKind::WeightsInterp, 0.0, 1e-3);
  CHECK(sol.objective == doctest::Approx(30.0).epsilon(1e-7));
  CHECK(sol.columns > 8000);
  REQUIRE(!sol.atoms.empty());
  bool any_penalized = false;
  for (const OracleAtom& atom : sol.atoms) {
    CHECK(atom.coefficient != 0.0);
    if (atom.penalized) any_penalized = true;
  }
  CHECK(any_penalized);
}

TEST_CASE("refining the bias grid never hurts the objective") {
  const DataSet data = testutil::corpus("interp_1d.csv");
  const double coarse = atomic_lp(data, ProgramKind::WeightsInterp, 0.0, 4e-3).objective;
  const double fine = atomic_lp(data, ProgramKind::WeightsInterp, 0.0, 1e-3).objective;
  CHECK(coarse >= fine - 1e-9);
}

TEST_CASE("the joint dictionary dominates the weight-only one") {
  const DataSet data = testutil::corpus("interp_1d.csv");
  const double weights = atomic_lp(data, ProgramKind::WeightsInterp, 0.0, 1e-3).objective;
  const double joint = atomic_lp(data, ProgramKind::JointInterp, 0.0, 1e-3, 2000).objective;
  CHECK(joint >= weights - 1e-9);

  // Independent cross-check of the splitting solver on the joint program.
  const PatternSet set = enumerate_patterns(data);
  const GroupSolution run = solve(build_joint_interp(data, set, 0.0));
  REQUIRE(run.status == SolveStatus::Optimal);
  CHECK(run.objective <= joint + 1e-9);  // the grid restricts the dictionary
  CHECK(std::abs(joint - run.objective) / run.objective <= 3e-2);
}

TEST_CASE("margin oracle, d = 1: a single ramp plus a free constant") {
  const DataSet data = testutil::corpus("pair_1d.csv");  // x=[-1,1], y=[-1,1]
  const OracleSolution sol = atomic_lp(data, ProgramKind::MarginClassify, 0.0, 1e-3);
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-9));

  const PatternSet set = enumerate_patterns(data);
  const GroupSolution run = solve(build_margin_classify(data, set, 0.0));
  REQUIRE(run.status == SolveStatus::Optimal);
  CHECK(run.objective == doctest::Approx(sol.objective).epsilon(1e-6));
}

TEST_CASE("margin oracle, d = 2: the diagonal cross on the centered square") {
  const DataSet data = testutil::corpus("xor_2d.csv");
  const OracleSolution sol =
      atomic_lp(data, ProgramKind::MarginClassify, 0.0, 0.05, 720);
  CHECK(sol.objective == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("dictionary layouts reject unsupported dimensions") {
  const DataSet flat = testutil::corpus("xor_2d.csv");
  CHECK_THROWS_AS(atomic_lp(flat, ProgramKind::WeightsInterp, 0.0), ValidationError);
  CHECK_THROWS_AS(atomic_lp(flat, ProgramKind::JointInterp, 0.0), ValidationError);
  const DataSet cube = testutil::corpus("rand_3d_6.csv");
  CHECK_THROWS_AS(atomic_lp(cube, ProgramKind::MarginClassify, 0.0), ValidationError);

  const DataSet line = testutil::corpus("pair_1d.csv");
  CHECK_THROWS_AS(atomic_lp(line, ProgramKind::WeightsInterp, 0.0, 0.0), ValidationError);
  CHECK_THROWS_AS(atomic_lp(line, ProgramKind::WeightsInterp, 0.0, 1e-3, 3),
                  ValidationError);
}

TEST_CASE("hull membership separates budgets that do and do not cover y") {
  const DataSet data = testutil::corpus("interp_1d.csv");
  const double opt = atomic_lp(data, ProgramKind::WeightsInterp, 0.0, 1e-3).objective;

  CHECK(brute_force_hull_member(data, Eigen::VectorXd::Zero(6), 0.0,
                                ProgramKind::WeightsInterp, 0.0));
  CHECK(brute_force_hull_member(data, data.labels, opt + 1e-3,
                                ProgramKind::WeightsInterp, 0.0));
  CHECK_FALSE(brute_force_hull_member(data, data.labels, 0.5 * opt,
                                      ProgramKind::WeightsInterp, 0.0));
  CHECK_FALSE(brute_force_hull_member(data, data.labels, 0.0,
                                      ProgramKind::WeightsInterp, 0.0));

  CHECK_THROWS_AS(brute_force_hull_member(data, data.labels, -1.0,
                                          ProgramKind::WeightsInterp, 0.0),
                  ValidationError);
  CHECK_THROWS_AS(brute_force_hull_member(data, Eigen::VectorXd::Zero(3), 1.0,
                                          ProgramKind::WeightsInterp, 0.0),
                  ValidationError);
}

TEST_CASE("scaled dictionary atoms stay inside the scaled hull") {
  const DataSet data = testutil::corpus("interp_1d.csv");
  // Draw biases from the same grid the dictionary is built on so the
  // membership query matches a column bit-exactly.
  const Eigen::MatrixXd grid = grid_1d(-2.0, 2.0, 1e-3);
  const long picks[] = {750, 1600, 2000, 2800, 3900};
  const double scales[] = {0.5, 1.7};
  for (long k : picks)
    for (double w : {1.0, -1.0})
      for (double c : scales) {
        const double b = grid(0, k);
        const Eigen::VectorXd atom =
            activation_vector(data, Eigen::VectorXd::Constant(1, w), b, 0.0).values;
        CHECK_MESSAGE(brute_force_hull_member(data, c * atom, c + 1e-9,
                                              ProgramKind::WeightsInterp, 0.0),
                      "w ", w, " b ", b, " c ", c);
      }
}

TEST_CASE("block decompositions audit clean on solved instances") {
  struct Case {
    const char* name;
    ProgramKind kind;
  };
  const Case cases[] = {
      {"interp_1d.csv", ProgramKind::WeightsInterp},
      {"interp_1d.csv", ProgramKind::JointInterp},
      {"pair_1d.csv", ProgramKind::JointInterp},
      {"single_1d.csv", ProgramKind::WeightsInterp},
      {"xor_2d.csv", ProgramKind::MarginClassify},
  };
  for (const Case& item : cases) {
    const DataSet data = testutil::corpus(item.name);
    const PatternSet set = enumerate_patterns(data);
    ConicProgram program;
    switch (item.kind) {
      case ProgramKind::WeightsInterp:
        program = build_weights_interp(data, set, 0.0);
        break;
      case ProgramKind::JointInterp:
        program = build_joint_interp(data, set, 0.0);
        break;
      case ProgramKind::MarginClassify:
        program = build_margin_classify(data, set, 0.0);
        break;
    }
    const GroupSolution sol = solve(program);
    REQUIRE_MESSAGE(sol.status == SolveStatus::Optimal, item.name);

    const DecompositionReport report = check_decomposition(data, sol, set, 0.0);
    CHECK_MESSAGE(report.ok, item.name, ": ",
                  report.violations.empty() ? "" : report.violations.front());
    CHECK(std::abs(report.total - sol.objective) <=
          1e-6 * std::max(1.0, sol.objective));

    for (const DecompositionTerm& term : report.terms) {
      CHECK(term.coefficient >= 0.0);
      REQUIRE(term.pattern >= 0);
      REQUIRE(term.pattern < set.size());
      const Eigen::VectorXi& s = set.patterns[term.pattern].signs;
      for (int i = 0; i < s.size(); ++i) {
        const double side = s[i] * term.element[i];
        if (term.plus_block)
          CHECK(side >= -1e-7);
        else
          CHECK(side <= 1e-7);  // minus-block elements are stored negated
      }
    }
  }
}

TEST_CASE("a diagnostic report names the violated clause") {
  const DataSet data = testutil::corpus("pair_1d.csv");
  const PatternSet set = enumerate_patterns(data);
  const ConicProgram program = build_joint_interp(data, set, 0.0);
  GroupSolution sol = solve(program);
  REQUIRE(sol.status == SolveStatus::Optimal);

  sol.objective += 0.5;  // forge the reported objective
  const DecompositionReport report = check_decomposition(data, sol, set, 0.0);
  CHECK_FALSE(report.ok);
  REQUIRE(!report.violations.empty());
}

TEST_CASE("oracle_to_json lists the active atoms") {
  const DataSet data = testutil::corpus("pair_1d.csv");
  const OracleSolution sol = atomic_lp(data, ProgramKind::MarginClassify, 0.0, 1e-2);
  const nlohmann::json j = nlohmann::json::parse(oracle_to_json(sol));
  CHECK(j.at("objective").is_number());
  CHECK(j.at("columns").get<long>() == sol.columns);
  REQUIRE(j.at("active_atoms").size() == sol.atoms.size());
  for (const auto& atom : j.at("active_atoms")) {
    CHECK(atom.contains("w"));
    CHECK(atom.contains("b"));
    CHECK(atom.contains("coef"));
    CHECK(atom.contains("penalized"));
  }
}

}  // TEST_SUITE

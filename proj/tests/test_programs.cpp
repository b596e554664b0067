#include <doctest.h>

#include <string>

#include <nlohmann/json.hpp>

#include "atomnet/dataset.hpp"
#include "atomnet/patterns.hpp"
#include "atomnet/programs.hpp"
#include "helpers.hpp"

using namespace atomnet;

TEST_SUITE("programs") {

TEST_CASE("variable layout and row counts for the interpolation programs") {
  const DataSet data = testutil::corpus("interp_1d.csv");
  const PatternSet set = enumerate_patterns(data);
  REQUIRE(set.size() == 12);

  const ConicProgram weights = build_weights_interp(data, set, 0.0);
  CHECK(weights.kind == ProgramKind::WeightsInterp);
  CHECK(weights.var_count() == 48);  // 2 * (d + 1) * |J| with d = 1
  CHECK(weights.a_eq.rows() == 6);
  CHECK(weights.a_eq.cols() == 48);
  CHECK((weights.b_eq.array() == data.labels.array()).all());
  CHECK(weights.a_in.rows() == 144);  // two cone blocks per arrangement
  CHECK((weights.b_in.array() == 0.0).all());

  REQUIRE(weights.groups.size() == 24);  // a plus and a minus group per arrangement
  int plus_seen = 0;
  for (const Group& g : weights.groups) {
    CHECK(g.size == 1);  // weight-only groups have d coordinates
    CHECK(g.pattern >= 0);
    CHECK(g.pattern < 12);
    if (g.plus_block) ++plus_seen;
  }
  CHECK(plus_seen == 12);

  const ConicProgram joint = build_joint_interp(data, set, 0.0);
  CHECK(joint.kind == ProgramKind::JointInterp);
  CHECK(joint.var_count() == 48);
  REQUIRE(joint.groups.size() == 24);
  for (const Group& g : joint.groups) CHECK(g.size == 2);  // (w, b) jointly
}

TEST_CASE("the margin program trades equality rows for unit-margin rows") {
  const DataSet data = testutil::corpus("xor_2d.csv");
  const PatternSet set = enumerate_patterns(data);
  REQUIRE(set.size() == 14);

  const ConicProgram margin = build_margin_classify(data, set, 0.0);
  CHECK(margin.kind == ProgramKind::MarginClassify);
  CHECK(margin.a_eq.rows() == 0);
  const long cone_rows = 2L * 14 * 4;
  REQUIRE(margin.a_in.rows() == cone_rows + 4);
  for (long r = 0; r < cone_rows; ++r) CHECK(margin.b_in[r] == 0.0);
  for (long r = cone_rows; r < margin.a_in.rows(); ++r) CHECK(margin.b_in[r] == 1.0);
}

TEST_CASE("h_of_s maps signs to slopes") {
  Eigen::VectorXi s(3);
  s << 1, -1, 1;
  const Eigen::VectorXd h = h_of_s(s, 0.25);
  CHECK(h[0] == doctest::Approx(1.0));
  CHECK(h[1] == doctest::Approx(0.25));
  CHECK(h[2] == doctest::Approx(1.0));
  CHECK((h_of_s(s, 0.0).array() >= 0.0).all());
}

TEST_CASE("builders validate slope, labels, arrangement provenance") {
  const DataSet data = testutil::corpus("interp_1d.csv");
  const PatternSet set = enumerate_patterns(data);

  CHECK_THROWS_AS(build_weights_interp(data, set, 1.0), ValidationError);
  CHECK_THROWS_AS(build_joint_interp(data, set, std::nan("")), ValidationError);

  // Margin demands exact +/-1 labels.
  const DataSet zero = testutil::corpus("single_1d.csv");
  const PatternSet zset = enumerate_patterns(zero);
  CHECK_THROWS_AS(build_margin_classify(zero, zset, 0.0), ValidationError);

  // Arrangements enumerated from different data are refused.
  const DataSet other = testutil::corpus("pair_1d.csv");
  const PatternSet oset = enumerate_patterns(other);
  CHECK_THROWS_AS(build_weights_interp(data, oset, 0.0), ValidationError);

  CHECK_THROWS_AS(build_weights_interp(data, PatternSet{}, 0.0), ValidationError);
}

TEST_CASE("cone rows accept every arrangement's own witness") {
  const DataSet data = testutil::corpus("interp_1d.csv");
  const PatternSet set = enumerate_patterns(data);
  const ConicProgram program = build_weights_interp(data, set, 0.0);
  const int stride = 2 * (program.dim + 1);

  for (int k = 0; k < set.size(); ++k) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(program.var_count());
    // Place the witness into both blocks of arrangement k.
    x[k * stride + 0] = set.patterns[k].witness_w[0];
    x[k * stride + 1] = set.patterns[k].witness_b;
    x[k * stride + 2] = set.patterns[k].witness_w[0];
    x[k * stride + 3] = set.patterns[k].witness_b;
    const Eigen::VectorXd slack = program.a_in * x - program.b_in;
    CHECK(slack.minCoeff() >= -1e-9);
  }
}

TEST_CASE("equality rows reproduce the block expansion of the fit") {
  // One point x = 0.5: plus block (2, 1) contributes h * (0.5*2 + 1) = 2,
  // minus block (1, 0.5) subtracts h * (0.5*1 + 0.5) = 1.
  Eigen::MatrixXd f(1, 1);
  f << 0.5;
  Eigen::VectorXd y(1);
  y << 2.0;
  const DataSet data = make_dataset(f, y);
  const PatternSet set = enumerate_patterns(data);
  REQUIRE(set.size() == 2);

  int plus_idx = -1;
  for (int k = 0; k < set.size(); ++k)
    if (set.patterns[k].signs[0] == 1) plus_idx = k;
  REQUIRE(plus_idx >= 0);

  const ConicProgram program = build_weights_interp(data, set, 0.0);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(program.var_count());
  const int base = plus_idx * 4;
  x[base + 0] = 2.0;   // w+
  x[base + 1] = 1.0;   // b+
  x[base + 2] = 1.0;   // w-
  x[base + 3] = 0.5;   // b-
  const Eigen::VectorXd fit = program.a_eq * x;
  CHECK(fit[0] == doctest::Approx(1.0));  // 2 - 1

  // The same placement satisfies the plus cone (both blocks positive there).
  CHECK((program.a_in * x - program.b_in).minCoeff() >= -1e-12);
}

TEST_CASE("margin rows scale the fit by the labels") {
  const DataSet data = testutil::corpus("pair_1d.csv");  // x=[-1,1], y=[-1,1]
  const PatternSet set = enumerate_patterns(data);
  const ConicProgram program = build_margin_classify(data, set, 0.0);

  // All-plus arrangement: put a unit ramp (w=1, b=1) into its plus block;
  // f(-1) = 0, f(1) = 2, so the margin rows read (-1)*0 = 0 and (+1)*2 = 2.
  int all_plus = -1;
  for (int k = 0; k < set.size(); ++k)
    if ((set.patterns[k].signs.array() == 1).all()) all_plus = k;
  REQUIRE(all_plus >= 0);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(program.var_count());
  x[all_plus * 4 + 0] = 1.0;
  x[all_plus * 4 + 1] = 1.0;
  const long cone_rows = program.a_in.rows() - 2;
  const Eigen::VectorXd vals = program.a_in * x;
  CHECK(vals[cone_rows + 0] == doctest::Approx(0.0));
  CHECK(vals[cone_rows + 1] == doctest::Approx(2.0));
}

TEST_CASE("program_kind_name spells the artifact vocabulary") {
  CHECK(std::string(program_kind_name(ProgramKind::WeightsInterp)) == "weights-interp");
  CHECK(std::string(program_kind_name(ProgramKind::JointInterp)) == "joint-interp");
  CHECK(std::string(program_kind_name(ProgramKind::MarginClassify)) == "margin-classify");
}

TEST_CASE("program_to_json dumps a parseable full description") {
  const DataSet data = testutil::corpus("pair_1d.csv");
  const PatternSet set = enumerate_patterns(data);
  const ConicProgram program = build_joint_interp(data, set, 0.0);
  const nlohmann::json j = nlohmann::json::parse(program_to_json(program));

  CHECK(j.at("kind").get<std::string>() == "joint-interp");
  CHECK(j.at("dim").get<int>() == 1);
  CHECK(j.at("count").get<int>() == 2);
  CHECK(j.at("num_patterns").get<int>() == 4);
  CHECK(j.at("variables").get<int>() == program.var_count());
  CHECK(j.at("groups").size() == program.groups.size());
  CHECK(j.at("a_eq").size() == 2);
  CHECK(j.at("a_in").size() == static_cast<std::size_t>(program.a_in.rows()));
}

}  // TEST_SUITE

#include <doctest.h>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "atomnet/dataset.hpp"
#include "helpers.hpp"

using namespace atomnet;
namespace fs = std::filesystem;

namespace {

std::string write_temp_csv(const std::string& name, const std::string& body) {
  const fs::path path = fs::temp_directory_path() / name;
  std::ofstream out(path);
  out << body;
  out.close();
  return path.string();
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("make_dataset validates shapes and finiteness") {
  Eigen::MatrixXd x(1, 2);
  x << 0.5, -0.5;
  Eigen::VectorXd y(2);
  y << 1.0, -1.0;
  const DataSet ok = make_dataset(x, y);
  CHECK(ok.dim() == 1);
  CHECK(ok.count() == 2);

  Eigen::VectorXd wrong(3);
  wrong << 1, 2, 3;
  CHECK_THROWS_AS(make_dataset(x, wrong), ValidationError);

  Eigen::MatrixXd empty(0, 0);
  CHECK_THROWS_AS(make_dataset(empty, Eigen::VectorXd()), ValidationError);

  Eigen::MatrixXd bad = x;
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(make_dataset(bad, y), ValidationError);

  Eigen::VectorXd bad_y = y;
  bad_y[1] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(make_dataset(x, bad_y), ValidationError);
}

TEST_CASE("load_dataset finds the label column anywhere") {
  const std::string path =
      write_temp_csv("atomnet_ds_mid.csv", "a,y,b\n1,5,2\n3,6,4\n");
  const DataSet data = load_dataset(path);
  REQUIRE(data.dim() == 2);
  REQUIRE(data.count() == 2);
  // Feature columns keep file order: (a, b).
  CHECK(data.features(0, 0) == doctest::Approx(1.0));
  CHECK(data.features(1, 0) == doctest::Approx(2.0));
  CHECK(data.features(0, 1) == doctest::Approx(3.0));
  CHECK(data.features(1, 1) == doctest::Approx(4.0));
  CHECK(data.labels[0] == doctest::Approx(5.0));
  CHECK(data.labels[1] == doctest::Approx(6.0));
}

TEST_CASE("load_dataset accepts a custom label column name") {
  const std::string path =
      write_temp_csv("atomnet_ds_custom.csv", "x1,target\n0.25,7\n");
  const DataSet data = load_dataset(path, "target");
  CHECK(data.labels[0] == doctest::Approx(7.0));
  CHECK(data.features(0, 0) == doctest::Approx(0.25));
}

TEST_CASE("load_dataset rejects malformed input") {
  CHECK_THROWS_AS(load_dataset("/nonexistent/never.csv"), ValidationError);
  CHECK_THROWS_AS(
      load_dataset(write_temp_csv("atomnet_ds_text.csv", "x1,y\nfoo,1\n")),
      ValidationError);
  CHECK_THROWS_AS(
      load_dataset(write_temp_csv("atomnet_ds_nan.csv", "x1,y\nnan,1\n")),
      ValidationError);
  CHECK_THROWS_AS(
      load_dataset(write_temp_csv("atomnet_ds_nolabel.csv", "x1,z\n1,1\n")),
      ValidationError);
  CHECK_THROWS_AS(load_dataset(write_temp_csv("atomnet_ds_empty.csv", "")),
                  ValidationError);
  CHECK_THROWS_AS(
      load_dataset(write_temp_csv("atomnet_ds_ragged.csv", "x1,y\n1,2,3\n")),
      ValidationError);
}

TEST_CASE("corpus files load with the expected shapes") {
  struct Expect {
    const char* name;
    int dim;
    int count;
  };
  const Expect table[] = {
      {"interp_1d.csv", 1, 6}, {"xor_2d.csv", 2, 4},     {"dup_1d.csv", 1, 3},
      {"single_1d.csv", 1, 1}, {"pair_1d.csv", 1, 2},    {"rand_2d_8.csv", 2, 8},
      {"rand_3d_6.csv", 3, 6}, {"collinear_2d.csv", 2, 5},
  };
  for (const Expect& e : table) {
    const DataSet data = testutil::corpus(e.name);
    CHECK_MESSAGE(data.dim() == e.dim, e.name);
    CHECK_MESSAGE(data.count() == e.count, e.name);
    CHECK_MESSAGE(data.count() <= 10, e.name);  // the brute-force sweep relies on this
  }
}

TEST_CASE("leaky_relu pins the activation convention") {
  CHECK(leaky_relu(2.0, 0.0) == doctest::Approx(2.0));
  CHECK(leaky_relu(-2.0, 0.0) == doctest::Approx(0.0));
  CHECK(leaky_relu(-2.0, 0.1) == doctest::Approx(-0.2));
  CHECK(leaky_relu(0.0, 0.7) == doctest::Approx(0.0));
  CHECK(leaky_relu(1.5, 0.3) == doctest::Approx(1.5));
}

TEST_CASE("activation_vector applies the slope profile over the batch") {
  const DataSet data = testutil::corpus("pair_1d.csv");  // x = [-1, 1]
  Eigen::VectorXd w(1);
  w << 1.0;

  const Activation ramp = activation_vector(data, w, 0.0, 0.0);
  CHECK(ramp.values[0] == doctest::Approx(0.0));
  CHECK(ramp.values[1] == doctest::Approx(1.0));
  CHECK(ramp.alpha == doctest::Approx(0.0));

  const Activation leaky = activation_vector(data, w, 0.0, 0.5);
  CHECK(leaky.values[0] == doctest::Approx(-0.5));
  CHECK(leaky.values[1] == doctest::Approx(1.0));

  CHECK_THROWS_AS(activation_vector(data, w, 0.0, 1.0), ValidationError);
  Eigen::VectorXd wide(2);
  wide << 1.0, 1.0;
  CHECK_THROWS_AS(activation_vector(data, wide, 0.0, 0.0), ValidationError);
}

TEST_CASE("dataset digest is deterministic and value-sensitive") {
  const DataSet a = testutil::corpus("interp_1d.csv");
  const DataSet b = testutil::corpus("interp_1d.csv");
  CHECK(dataset_digest(a) == dataset_digest(b));

  DataSet c = a;
  c.labels[2] = -c.labels[2];
  CHECK(dataset_digest(a) != dataset_digest(c));

  const std::string hex = digest_hex(dataset_digest(a));
  CHECK(hex.size() == 16);
  for (char ch : hex) CHECK(std::isxdigit(static_cast<unsigned char>(ch)));
  CHECK(digest_hex(0) == "0000000000000000");
}

TEST_CASE("require_binary_labels accepts only exact +/-1") {
  CHECK_NOTHROW(require_binary_labels(testutil::corpus("xor_2d.csv")));
  CHECK_NOTHROW(require_binary_labels(testutil::corpus("pair_1d.csv")));
  CHECK_THROWS_AS(require_binary_labels(testutil::corpus("single_1d.csv")),
                  ValidationError);  // its label is 0

  Eigen::MatrixXd x(1, 1);
  x << 0.0;
  Eigen::VectorXd y(1);
  y << 0.999;
  CHECK_THROWS_AS(require_binary_labels(make_dataset(x, y)), ValidationError);
}

}  // TEST_SUITE

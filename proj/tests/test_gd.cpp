#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "atomnet/dataset.hpp"
#include "atomnet/gd.hpp"
#include "atomnet/network.hpp"
#include "helpers.hpp"

using namespace atomnet;

namespace {

DataSet grad_check_data(bool binary) {
  Eigen::MatrixXd f(1, 3);
  f << 0.3, -0.7, 1.1;
  Eigen::VectorXd y(3);
  if (binary)
    y << 1.0, -1.0, 1.0;
  else
    y << 0.5, -0.4, 0.8;
  return make_dataset(f, y);
}

// Every trainable parameter of a width-h network, flattened in a fixed
// order so analytic and numeric gradients can be compared entry by entry.
std::vector<double*> parameter_view(FiniteNetwork& net) {
  std::vector<double*> view;
  for (Neuron& u : net.neurons)
    for (int i = 0; i < u.w.size(); ++i) view.push_back(&u.w[i]);
  for (Neuron& u : net.neurons) view.push_back(&u.b);
  for (Neuron& u : net.neurons) view.push_back(&u.v);
  return view;
}

}  // namespace

TEST_SUITE("gd") {

TEST_CASE("loss_value pins the loss conventions") {
  const DataSet data = testutil::corpus("interp_1d.csv");
  const FiniteNetwork empty;
  CHECK(loss_value(empty, data, LossKind::Squared) == doctest::Approx(1.0));
  CHECK(loss_value(empty, data, LossKind::Logistic) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));

  FiniteNetwork ramp;
  Neuron u;
  u.w = Eigen::VectorXd::Ones(1);
  u.b = 0.0;
  u.v = 1.0;
  ramp.neurons.push_back(u);
  Eigen::MatrixXd f(1, 2);
  f << 1.0, -1.0;
  Eigen::VectorXd y(2);
  y << 0.0, 1.0;
  // f = (1, 0): mean squared error ((1-0)^2 + (0-1)^2) / 2 = 1, no 1/2 factor.
  CHECK(loss_value(ramp, make_dataset(f, y), LossKind::Squared) == doctest::Approx(1.0));
}

TEST_CASE("config validation") {
  const DataSet data = testutil::corpus("pair_1d.csv");
  GdConfig cfg;
  cfg.hidden = 0;
  CHECK_THROWS_AS(train_gd(data, cfg), ValidationError);
  cfg = GdConfig{};
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(train_gd(data, cfg), ValidationError);
  cfg = GdConfig{};
  cfg.learning_rate = std::nan("");
  CHECK_THROWS_AS(train_gd(data, cfg), ValidationError);
  cfg = GdConfig{};
  cfg.init_std = -1.0;
  CHECK_THROWS_AS(train_gd(data, cfg), ValidationError);
  cfg = GdConfig{};
  cfg.max_epochs = -1;
  CHECK_THROWS_AS(train_gd(data, cfg), ValidationError);
}

TEST_CASE("training is bit-exact deterministic under a fixed seed") {
  const DataSet data = testutil::corpus("pair_1d.csv");
  GdConfig cfg;
  cfg.hidden = 16;
  cfg.max_epochs = 300;
  cfg.target_loss = 0.0;
  cfg.seed = 11;

  const GdResult a = train_gd(data, cfg);
  const GdResult b = train_gd(data, cfg);
  CHECK(a.final_loss == b.final_loss);
  CHECK(a.epochs == b.epochs);
  REQUIRE(a.network.width() == b.network.width());
  for (int k = 0; k < a.network.width(); ++k) {
    CHECK(a.network.neurons[k].w[0] == b.network.neurons[k].w[0]);
    CHECK(a.network.neurons[k].b == b.network.neurons[k].b);
    CHECK(a.network.neurons[k].v == b.network.neurons[k].v);
  }
  REQUIRE(a.loss_trace.size() == b.loss_trace.size());
  for (std::size_t k = 0; k < a.loss_trace.size(); ++k) {
    CHECK(a.loss_trace[k].first == b.loss_trace[k].first);
    CHECK(a.loss_trace[k].second == b.loss_trace[k].second);
  }

  GdConfig other = cfg;
  other.seed = 12;
  const GdResult c = train_gd(data, other);
  CHECK(c.final_loss != a.final_loss);
}

TEST_CASE("training reaches an attainable target") {
  const DataSet data = testutil::corpus("pair_1d.csv");
  GdConfig cfg;
  cfg.hidden = 32;
  cfg.target_loss = 1e-2;
  cfg.max_epochs = 500000;
  cfg.seed = 3;

  const GdResult r = train_gd(data, cfg);
  CHECK(r.stop == GdStop::TargetReached);
  CHECK(r.final_loss < 1e-2);
  CHECK(r.epochs > 0);
  CHECK(r.network.width() == 32);
  CHECK(r.network.source == "gd");
  REQUIRE(!r.loss_trace.empty());
  CHECK(r.loss_trace.front().first == 0);
  CHECK(r.loss_trace.back().first <= r.epochs);
  CHECK(loss_value(r.network, data, LossKind::Squared) == doctest::Approx(r.final_loss));
}

TEST_CASE("the epoch budget is exact") {
  const DataSet data = testutil::corpus("pair_1d.csv");
  GdConfig cfg;
  cfg.hidden = 8;
  cfg.max_epochs = 5;
  cfg.target_loss = 0.0;
  const GdResult r = train_gd(data, cfg);
  CHECK(r.stop == GdStop::EpochLimit);
  CHECK(r.epochs == 5);

  cfg.max_epochs = 0;
  const GdResult init = train_gd(data, cfg);
  CHECK(init.epochs == 0);
  CHECK(init.network.width() == 8);
}

TEST_CASE("divergence aborts with the offending epoch named") {
  const DataSet data = testutil::corpus("interp_1d.csv");
  GdConfig cfg;
  cfg.hidden = 8;
  cfg.learning_rate = 1e8;
  cfg.max_epochs = 10000;
  CHECK_THROWS_AS(train_gd(data, cfg), SolverNumericalError);
  try {
    train_gd(data, cfg);
  } catch (const SolverNumericalError& e) {
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
  }
}

TEST_CASE("one-step gradients match central finite differences") {
  for (LossKind loss : {LossKind::Squared, LossKind::Logistic}) {
    const DataSet data = grad_check_data(loss == LossKind::Logistic);
    GdConfig cfg;
    cfg.hidden = 3;
    cfg.init_std = 0.5;  // keeps pre-activations away from the hinge
    cfg.seed = 7;
    cfg.loss = loss;
    cfg.target_loss = 0.0;
    cfg.learning_rate = 1.0;  // theta1 = theta0 - g exactly

    cfg.max_epochs = 0;
    FiniteNetwork theta0 = train_gd(data, cfg).network;
    cfg.max_epochs = 1;
    FiniteNetwork theta1 = train_gd(data, cfg).network;

    // Guard: the finite-difference window must not straddle a hinge.
    for (const Neuron& u : theta0.neurons)
      for (int i = 0; i < data.count(); ++i)
        CHECK(std::abs(u.w.dot(data.features.col(i)) + u.b) > 1e-4);

    std::vector<double*> p0 = parameter_view(theta0);
    std::vector<double*> p1 = parameter_view(theta1);
    REQUIRE(p0.size() == p1.size());

    const double h = 1e-6;
    for (std::size_t k = 0; k < p0.size(); ++k) {
      const double analytic = *p0[k] - *p1[k];
      const double saved = *p0[k];
      *p0[k] = saved + h;
      const double up = loss_value(theta0, data, loss);
      *p0[k] = saved - h;
      const double down = loss_value(theta0, data, loss);
      *p0[k] = saved;
      const double numeric = (up - down) / (2.0 * h);
      CHECK_MESSAGE(std::abs(analytic - numeric) <=
                        1e-4 * std::max(std::abs(numeric), 1e-6),
                    "parameter ", k, " loss ", static_cast<int>(loss));
    }
  }
}

}  // TEST_SUITE

#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "atomnet/dataset.hpp"
#include "atomnet/network.hpp"

namespace atomnet {

enum class LossKind { Squared, Logistic };

struct GdConfig {
  int hidden = 1000;
  double learning_rate = 1e-2;
  double init_std = 1e-3;     // Gaussian scale for every parameter group
  double alpha = 0.0;         // negative slope of the activation
  LossKind loss = LossKind::Squared;
  double target_loss = 1e-4;
  long max_epochs = 10'000'000;
  long trace_every = 1000;    // loss trace granularity (epoch 0 always kept)
  std::uint64_t seed = 1;
};

enum class GdStop { TargetReached, EpochLimit };

struct GdResult {
  FiniteNetwork network;
  GdStop stop = GdStop::EpochLimit;
  long epochs = 0;
  double final_loss = 0.0;
  std::vector<std::pair<long, double>> loss_trace;
};

// Mean loss of the network on the data (squared: mean (f - y)^2,
// logistic: mean log(1 + exp(-y f))).
double loss_value(const FiniteNetwork& net, const DataSet& data, LossKind loss);

// Full-batch gradient descent on all parameters of a width-`hidden`
// network.  Initialization draws, in order, all inner weights, then all
// inner biases, then all outer weights from N(0, std^2) via a Box-Muller
// transform over a seeded mt19937_64, which keeps runs bit-reproducible
// across platforms.  The subgradient at a hinge uses slope 1.  Training
// stops once the loss drops below target_loss or the epoch budget runs
// out; a loss above 1e12 aborts with SolverNumericalError naming the epoch.
GdResult train_gd(const DataSet& data, const GdConfig& config);

std::string gd_report_json(const GdResult& result, double wall_time_ms);

}  // namespace atomnet

#include "atomnet/gd.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "atomnet/solver.hpp"

namespace atomnet {

namespace {

// Normal draws via Box-Muller over the raw engine stream; the C++ standard
// pins mt19937_64 output exactly, while std::normal_distribution is free to
// vary between standard libraries, so this keeps runs bit-identical.
class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : engine_(seed) {}

  double operator()(double stddev) {
    const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;          // [0, 1)
    return stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

 private:
  std::mt19937_64 engine_;
};

double stable_log1pexp(double s) {
  if (s > 36.0) return s;
  if (s < -36.0) return std::exp(s);
  return std::log1p(std::exp(s));
}

double stable_sigmoid(double s) {
  if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

}  // namespace

double loss_value(const FiniteNetwork& net, const DataSet& data, LossKind loss) {
  const Eigen::VectorXd f = predict_many(net, data.features);
  const int n = data.count();
  if (loss == LossKind::Squared) return (f - data.labels).squaredNorm() / n;
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += stable_log1pexp(-data.labels[i] * f[i]);
  return total / n;
}

GdResult train_gd(const DataSet& data, const GdConfig& config) {
  if (config.hidden < 1) throw ValidationError("training needs at least one hidden unit");
  if (!(config.learning_rate > 0) || !std::isfinite(config.learning_rate))
    throw ValidationError("learning rate must be positive and finite");
  if (config.max_epochs < 0) throw ValidationError("epoch budget cannot be negative");
  if (!(config.init_std >= 0))
    throw ValidationError("initialization scale cannot be negative");
  if (config.loss == LossKind::Logistic) require_binary_labels(data);

  const int n = data.count();
  const int d = data.dim();
  const int h = config.hidden;
  const double alpha = config.alpha;

  // draw order: inner weights (unit-major), inner biases, outer weights
  Gaussian normal(config.seed);
  Eigen::MatrixXd w(d, h);
  for (int k = 0; k < h; ++k)
    for (int r = 0; r < d; ++r) w(r, k) = normal(config.init_std);
  Eigen::VectorXd b(h);
  for (int k = 0; k < h; ++k) b[k] = normal(config.init_std);
  Eigen::VectorXd v(h);
  for (int k = 0; k < h; ++k) v[k] = normal(config.init_std);

  const Eigen::MatrixXd xt = data.features.transpose();  // N x d

  Eigen::MatrixXd pre(n, h), act(n, h), slope(n, h);
  Eigen::VectorXd f(n), dloss(n);

  auto forward = [&]() {
    pre = xt * w;
    pre.rowwise() += b.transpose();
    act = pre.unaryExpr([&](double t) { return t >= 0.0 ? t : alpha * t; });
    slope = pre.unaryExpr([&](double t) { return t >= 0.0 ? 1.0 : alpha; });
    f = act * v;
  };

  auto loss_of_f = [&]() {
    if (config.loss == LossKind::Squared) return (f - data.labels).squaredNorm() / n;
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += stable_log1pexp(-data.labels[i] * f[i]);
    return total / n;
  };

  auto loss_gradient = [&]() {
    if (config.loss == LossKind::Squared) {
      dloss = 2.0 * (f - data.labels) / n;
      return;
    }
    for (int i = 0; i < n; ++i)
      dloss[i] = -data.labels[i] * stable_sigmoid(-data.labels[i] * f[i]) / n;
  };

  GdResult result;
  forward();
  double loss = loss_of_f();
  result.loss_trace.emplace_back(0, loss);
  if (loss <= config.target_loss) {
    result.stop = GdStop::TargetReached;
    result.epochs = 0;
    result.final_loss = loss;
  } else {
    long epoch = 0;
    while (epoch < config.max_epochs) {
      ++epoch;
      loss_gradient();
      const Eigen::VectorXd grad_v = act.transpose() * dloss;
      const Eigen::MatrixXd grad_pre = (dloss * v.transpose()).cwiseProduct(slope);
      const Eigen::MatrixXd grad_w = data.features * grad_pre;
      const Eigen::VectorXd grad_b = grad_pre.colwise().sum();
      w -= config.learning_rate * grad_w;
      b -= config.learning_rate * grad_b;
      v -= config.learning_rate * grad_v;
      forward();
      loss = loss_of_f();
      if (!std::isfinite(loss) || loss > 1e12) {
        std::ostringstream msg;
        msg << "training diverged at epoch " << epoch << " (loss " << loss << ")";
        throw SolverNumericalError(msg.str());
      }
      const bool reached = loss <= config.target_loss;
      if (epoch % std::max<long>(1, config.trace_every) == 0 || reached ||
          epoch == config.max_epochs)
        result.loss_trace.emplace_back(epoch, loss);
      if (reached) {
        result.stop = GdStop::TargetReached;
        break;
      }
    }
    result.epochs = epoch;
    result.final_loss = loss;
    if (result.stop != GdStop::TargetReached) result.stop = GdStop::EpochLimit;
  }

  result.network.alpha = alpha;
  result.network.source = "gd";
  result.network.data_hash = dataset_digest(data);
  result.network.neurons.reserve(static_cast<size_t>(h));
  for (int k = 0; k < h; ++k) result.network.neurons.push_back({w.col(k), b[k], v[k]});
  return result;
}

std::string gd_report_json(const GdResult& result, double wall_time_ms) {
  nlohmann::json j;
  j["stop"] = result.stop == GdStop::TargetReached ? "target-reached" : "epoch-limit";
  j["epochs"] = result.epochs;
  j["final_loss"] = result.final_loss;
  j["width"] = result.network.width();
  auto& trace = j["loss_trace"] = nlohmann::json::array();
  for (const auto& [epoch, value] : result.loss_trace) trace.push_back({epoch, value});
  j["wall_time_ms"] = wall_time_ms;
  return j.dump(2);
}

}  // namespace atomnet

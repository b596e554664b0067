#include "atomnet/network.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace atomnet {

namespace {

void append_block(FiniteNetwork& net, const Eigen::VectorXd& w, double b, bool plus, bool joint,
                  double prune_tol) {
  const double sign = plus ? 1.0 : -1.0;
  if (joint) {
    const double norm = std::sqrt(w.squaredNorm() + b * b);
    if (norm <= prune_tol) return;
    net.neurons.push_back({w / norm, b / norm, sign * norm});
    return;
  }
  const double wnorm = w.norm();
  if (wnorm > prune_tol) {
    net.neurons.push_back({w / wnorm, b / wnorm, sign * wnorm});
    return;
  }
  if (std::abs(b) > prune_tol)  // constant generator: free under the weight objective
    net.neurons.push_back({Eigen::VectorXd::Zero(w.size()), b, sign});
}

}  // namespace

FiniteNetwork reconstruct(const GroupSolution& solution, const PatternSet& patterns, double alpha,
                          double prune_tol) {
  if (solution.status != SolveStatus::Optimal)
    throw ValidationError("only optimal solutions can be converted into a network");
  if (static_cast<int>(solution.blocks.size()) != patterns.size())
    throw ValidationError("block solution and arrangement set have different sizes");
  FiniteNetwork net;
  net.alpha = alpha;
  net.source = program_kind_name(solution.kind);
  net.data_hash = patterns.data_hash;
  const bool joint = solution.kind == ProgramKind::JointInterp;
  for (const PatternBlockValues& blk : solution.blocks) {
    append_block(net, blk.w_plus, blk.b_plus, true, joint, prune_tol);
    append_block(net, blk.w_minus, blk.b_minus, false, joint, prune_tol);
  }
  return net;
}

double predict(const FiniteNetwork& net, const Eigen::VectorXd& x) {
  double out = 0.0;
  for (const Neuron& u : net.neurons) {
    if (x.size() != u.w.size()) throw ValidationError("input dimension does not match network");
    out += u.v * leaky_relu(u.w.dot(x) + u.b, net.alpha);
  }
  return out;
}

Eigen::VectorXd predict_many(const FiniteNetwork& net, const Eigen::MatrixXd& xs) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(xs.cols());
  for (const Neuron& u : net.neurons) {
    if (xs.rows() != u.w.size()) throw ValidationError("input dimension does not match network");
    Eigen::VectorXd pre = xs.transpose() * u.w;
    pre.array() += u.b;
    out += u.v * pre.unaryExpr([&](double t) { return leaky_relu(t, net.alpha); });
  }
  return out;
}

Eigen::MatrixXd grid_1d(double lo, double hi, double step) {
  if (!(step > 0) || !(hi > lo)) throw ValidationError("grid needs hi > lo and step > 0");
  const long m = std::lround((hi - lo) / step);
  Eigen::MatrixXd grid(1, m + 1);
  for (long k = 0; k <= m; ++k) grid(0, k) = lo + static_cast<double>(k) * step;
  grid(0, m) = hi;
  return grid;
}

Eigen::MatrixXd grid_2d(double lo1, double hi1, double lo2, double hi2, double step) {
  const Eigen::MatrixXd g1 = grid_1d(lo1, hi1, step);
  const Eigen::MatrixXd g2 = grid_1d(lo2, hi2, step);
  Eigen::MatrixXd grid(2, g1.cols() * g2.cols());
  long col = 0;
  for (long j = 0; j < g2.cols(); ++j)
    for (long i = 0; i < g1.cols(); ++i) {
      grid(0, col) = g1(0, i);
      grid(1, col) = g2(0, j);
      ++col;
    }
  return grid;
}

std::string sample_on_grid(const FiniteNetwork& net, const Eigen::VectorXd& lo,
                           const Eigen::VectorXd& hi, double step) {
  const int d = static_cast<int>(lo.size());
  if (hi.size() != d) throw ValidationError("grid bounds disagree on dimension");
  if (d < 1 || d > 2) throw ValidationError("grid sampling supports one or two dimensions");
  for (int i = 0; i < d; ++i)
    if (!(hi[i] > lo[i])) throw ValidationError("grid needs hi > lo componentwise");
  if (net.width() > 0 && net.dim() != d)
    throw ValidationError("grid dimension does not match network input dimension");

  std::ostringstream out;
  out.precision(17);
  if (d == 1) {
    const Eigen::MatrixXd grid = grid_1d(lo[0], hi[0], step);
    const Eigen::VectorXd f =
        net.width() ? predict_many(net, grid) : Eigen::VectorXd::Zero(grid.cols());
    out << "x1,f\n";
    for (long k = 0; k < grid.cols(); ++k) out << grid(0, k) << "," << f[k] << "\n";
    return out.str();
  }
  const Eigen::MatrixXd axis1 = grid_1d(lo[0], hi[0], step);
  const Eigen::MatrixXd axis2 = grid_1d(lo[1], hi[1], step);
  out << "x1,x2,f,sign\n";
  Eigen::VectorXd x(2);
  for (long i = 0; i < axis1.cols(); ++i)
    for (long j = 0; j < axis2.cols(); ++j) {
      x[0] = axis1(0, i);
      x[1] = axis2(0, j);
      const double f = net.width() ? predict(net, x) : 0.0;
      out << x[0] << "," << x[1] << "," << f << "," << (f >= 0.0 ? 1 : -1) << "\n";
    }
  return out.str();
}

double total_variation(const FiniteNetwork& net, double lo, double hi) {
  if (net.dim() > 1) throw ValidationError("derivative variation is defined for 1-d networks");
  double tv = 0.0;
  for (const Neuron& u : net.neurons) {
    const double w = u.w.size() ? u.w[0] : 0.0;
    if (w == 0.0) continue;
    const double hinge = -u.b / w;
    if (hinge > lo && hinge < hi) tv += std::abs(u.v * w) * std::abs(1.0 - net.alpha);
  }
  return tv;
}

double joint_norm(const FiniteNetwork& net) {
  double total = 0.0;
  for (const Neuron& u : net.neurons)
    total += std::abs(u.v) * std::sqrt(u.w.squaredNorm() + u.b * u.b);
  return total;
}

std::string network_to_json(const FiniteNetwork& net) {
  nlohmann::json j;
  j["alpha"] = net.alpha;
  j["source"] = {{"kind", net.source}, {"data_hash", digest_hex(net.data_hash)}};
  auto& neurons = j["neurons"] = nlohmann::json::array();
  for (const Neuron& u : net.neurons) {
    nlohmann::json w = nlohmann::json::array();
    for (int i = 0; i < u.w.size(); ++i) w.push_back(u.w[i]);
    neurons.push_back({{"w", std::move(w)}, {"b", u.b}, {"v", u.v}});
  }
  return j.dump(2);
}

FiniteNetwork network_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("network document does not parse: ") + e.what());
  }
  FiniteNetwork net;
  try {
    net.alpha = j.at("alpha").get<double>();
    if (j.contains("source")) {
      const auto& src = j.at("source");
      net.source = src.value("kind", "unspecified");
      if (src.contains("data_hash"))
        net.data_hash = std::stoull(src.at("data_hash").get<std::string>(), nullptr, 16);
    }
    for (const auto& item : j.at("neurons")) {
      Neuron u;
      const auto& w = item.at("w");
      u.w.resize(static_cast<int>(w.size()));
      for (int i = 0; i < u.w.size(); ++i) u.w[i] = w.at(i).get<double>();
      u.b = item.at("b").get<double>();
      u.v = item.at("v").get<double>();
      net.neurons.push_back(std::move(u));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("network document is malformed: ") + e.what());
  }
  for (const Neuron& u : net.neurons)
    if (u.w.size() != net.neurons[0].w.size())
      throw ValidationError("network units disagree on input dimension");
  return net;
}

void save_network(const FiniteNetwork& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  out << network_to_json(net) << "\n";
  if (!out) throw ValidationError("failed writing " + path);
}

FiniteNetwork load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return network_from_json(buffer.str());
}

}  // namespace atomnet

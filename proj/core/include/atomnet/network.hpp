#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "atomnet/dataset.hpp"
#include "atomnet/patterns.hpp"
#include "atomnet/solver.hpp"

namespace atomnet {

// One hidden unit: x -> v * lrelu(w.x + b).
struct Neuron {
  Eigen::VectorXd w;
  double b = 0.0;
  double v = 0.0;
};

// Finite single-hidden-layer network with shared negative-slope alpha.
struct FiniteNetwork {
  double alpha = 0.0;
  std::vector<Neuron> neurons;
  std::string source = "unspecified";  // provenance tag ("fit", "gd", "manual")
  std::uint64_t data_hash = 0;

  int dim() const { return neurons.empty() ? 0 : static_cast<int>(neurons[0].w.size()); }
  int width() const { return static_cast<int>(neurons.size()); }
};

// Turns a block solution into an explicit network.  Plus blocks become
// neurons with outer weight +||w|| on the normalized direction, minus
// blocks enter with outer weight -||w||; blocks whose inner weight vanishes
// but whose bias survives become constant-generating units (w = 0, the bias
// kept verbatim, outer weight +-1), and blocks below prune_tol are dropped.
// For jointly-grouped solutions the normalization uses ||(w, b)||.
FiniteNetwork reconstruct(const GroupSolution& solution, const PatternSet& patterns,
                          double alpha, double prune_tol = 1e-7);

double predict(const FiniteNetwork& net, const Eigen::VectorXd& x);
Eigen::VectorXd predict_many(const FiniteNetwork& net, const Eigen::MatrixXd& xs /*d x M*/);

// Uniform inclusive grid over a box.  For d = 1 pass lo/hi scalars; the
// d = 2 overload walks rows in x2-major order.  Returns the d x M matrix of
// grid points.
Eigen::MatrixXd grid_1d(double lo, double hi, double step);
Eigen::MatrixXd grid_2d(double lo1, double hi1, double lo2, double hi2, double step);

// CSV table of grid samples: header "x1,f" for 1-d boxes and
// "x1,x2,f,sign" for 2-d boxes (sign uses the sign(0) = +1 convention).
// Rows walk the grid row-major (last coordinate fastest); inputs with more
// than two dimensions are rejected.
std::string sample_on_grid(const FiniteNetwork& net, const Eigen::VectorXd& lo,
                           const Eigen::VectorXd& hi, double step);

// Total variation of the network derivative on an interval, d = 1 only:
// sum over hinge locations inside (lo, hi) of |v| * |w| * |1 - alpha|.
double total_variation(const FiniteNetwork& net, double lo, double hi);

// Sum of ||(w_i, b_i)|| over units, the penalty the joint program minimizes.
double joint_norm(const FiniteNetwork& net);

std::string network_to_json(const FiniteNetwork& net);
FiniteNetwork network_from_json(const std::string& text);
void save_network(const FiniteNetwork& net, const std::string& path);
FiniteNetwork load_network(const std::string& path);

}  // namespace atomnet

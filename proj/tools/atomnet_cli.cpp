// Command-line front end: pattern enumeration, convex fitting, gradient
// descent baselines, grid evaluation, and reference-dictionary solves, all
// writing JSON/CSV artifacts plus a manifest per run.
//
// Exit codes: 0 success, 2 validation failure, 3 resource limit,
// 4 infeasible program, 5 finished without an optimal/target result,
// 1 unexpected error.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "atomnet/dataset.hpp"
#include "atomnet/gd.hpp"
#include "atomnet/network.hpp"
#include "atomnet/oracle.hpp"
#include "atomnet/patterns.hpp"
#include "atomnet/programs.hpp"
#include "atomnet/solver.hpp"

namespace fs = std::filesystem;
using namespace atomnet;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 2;
constexpr int kResource = 3;
constexpr int kInfeasible = 4;
constexpr int kNotOptimal = 5;
constexpr int kUnexpected = 1;

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path.string() + " for writing");
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
  if (!out) throw ValidationError("failed writing " + path.string());
}

// Every run records what produced its artifacts: the resolved flag values
// (hashed), the dataset digest when one was loaded, and the tool version.
void write_manifest(const fs::path& dir, const std::string& command,
                    const std::string& resolved_config, std::uint64_t data_hash,
                    const std::vector<std::string>& outputs) {
  nlohmann::json j;
  j["command"] = command;
  j["version"] = ATOMNET_VERSION;
  j["config_hash"] = digest_hex(fnv1a(resolved_config));
  if (data_hash != 0) j["data_hash"] = digest_hex(data_hash);
  j["outputs"] = outputs;
  write_text(dir / "manifest.json", j.dump(2));
}

ProgramKind parse_kind(const std::string& name) {
  if (name == "weights" || name == "weights-interp") return ProgramKind::WeightsInterp;
  if (name == "joint" || name == "joint-interp") return ProgramKind::JointInterp;
  if (name == "margin" || name == "margin-classify") return ProgramKind::MarginClassify;
  throw ValidationError("unknown formulation '" + name +
                        "' (expected weights, joint, or margin)");
}

ConicProgram build_program(const DataSet& data, const PatternSet& patterns, ProgramKind kind,
                           double alpha) {
  switch (kind) {
    case ProgramKind::WeightsInterp: return build_weights_interp(data, patterns, alpha);
    case ProgramKind::JointInterp: return build_joint_interp(data, patterns, alpha);
    case ProgramKind::MarginClassify: return build_margin_classify(data, patterns, alpha);
  }
  throw ValidationError("unknown formulation");
}

fs::path prepare_out_dir(const std::string& out) {
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create output directory " + dir.string());
  return dir;
}

// Shared by `patterns` and `fit`: --force lifts the enumeration cutoff to
// the largest count the bound arithmetic supports.
PatternOptions pattern_options(bool force, int workers) {
  PatternOptions opt;
  if (force) opt.enumeration_cutoff = 62;
  opt.workers = workers;
  return opt;
}

struct DatasetArgs {
  std::string path;
  std::string label_column = "y";
};

void add_dataset_flags(CLI::App* cmd, DatasetArgs& args) {
  cmd->add_option("--data", args.path, "CSV dataset (features x1..xd, label column)")
      ->required();
  cmd->add_option("--label-column", args.label_column, "name of the label column");
}

// ----------------------------------------------------------------------
// patterns

struct PatternsArgs {
  DatasetArgs data;
  std::string out = ".";
  bool force = false;
  int workers = 1;
};

int run_patterns(const PatternsArgs& args, const std::string& resolved) {
  const DataSet data = load_dataset(args.data.path, args.data.label_column);
  const fs::path dir = prepare_out_dir(args.out);
  const PatternSet set = enumerate_patterns(data, pattern_options(args.force, args.workers));
  const std::uint64_t bound =
      cover_bound(static_cast<std::uint64_t>(data.count()), static_cast<std::uint64_t>(data.dim()));
  write_text(dir / "patterns.json", pattern_set_to_json(set, bound));
  write_manifest(dir, "patterns", resolved, set.data_hash, {"patterns.json"});
  std::cout << "patterns: " << set.patterns.size() << " (bound " << bound << ")\n";
  return kOk;
}

// ----------------------------------------------------------------------
// fit

struct FitArgs {
  DatasetArgs data;
  std::string formulation = "weights";
  double alpha = 0.0;
  double tol = 1e-8;
  std::string out = ".";
  bool force = false;
  int workers = 1;
  long max_iterations = 200000;
};

// Bounding box of the data, padded so the sampled caps show the hinges
// just outside the input range.
void data_box(const DataSet& data, Eigen::VectorXd& lo, Eigen::VectorXd& hi, double& step) {
  const int d = data.dim();
  lo.resize(d);
  hi.resize(d);
  double widest = 0.0;
  for (int i = 0; i < d; ++i) {
    lo[i] = data.features.row(i).minCoeff();
    hi[i] = data.features.row(i).maxCoeff();
    const double pad = std::max(0.2 * (hi[i] - lo[i]), 0.5);
    lo[i] -= pad;
    hi[i] += pad;
    widest = std::max(widest, hi[i] - lo[i]);
  }
  step = widest / (d == 1 ? 400.0 : 200.0);
}

int run_fit(const FitArgs& args, const std::string& resolved) {
  const auto start = std::chrono::steady_clock::now();
  const DataSet data = load_dataset(args.data.path, args.data.label_column);
  const ProgramKind kind = parse_kind(args.formulation);
  const fs::path dir = prepare_out_dir(args.out);

  const PatternSet patterns =
      enumerate_patterns(data, pattern_options(args.force, args.workers));
  const ConicProgram program = build_program(data, patterns, kind, args.alpha);

  SolverConfig config;
  config.tol_primal = config.tol_dual = config.tol_gap = args.tol;
  config.max_iterations = args.max_iterations;
  const GroupSolution solution = solve(program, config);

  std::vector<std::string> outputs = {"solver_report.json"};
  write_text(dir / "solver_report.json", solver_report_json(solution, elapsed_ms(start)));

  if (solution.status == SolveStatus::Optimal) {
    const FiniteNetwork net = reconstruct(solution, patterns, args.alpha);
    write_text(dir / "network.json", network_to_json(net));
    outputs.push_back("network.json");
    if (data.dim() <= 2) {
      Eigen::VectorXd lo, hi;
      double step = 0.0;
      data_box(data, lo, hi, step);
      write_text(dir / "grid.csv", sample_on_grid(net, lo, hi, step));
      outputs.push_back("grid.csv");
    }
  }
  write_manifest(dir, "fit", resolved, patterns.data_hash, outputs);

  std::cout << "fit: status=" << status_name(solution.status)
            << " objective=" << solution.objective << "\n";
  if (solution.status == SolveStatus::Optimal) return kOk;
  if (solution.status == SolveStatus::Infeasible) return kInfeasible;
  return kNotOptimal;
}

// ----------------------------------------------------------------------
// train-gd

struct TrainArgs {
  DatasetArgs data;
  int hidden = 1000;
  double lr = 1e-2;
  double init_std = 1e-3;
  double target_loss = 1e-4;
  long max_epochs = 10'000'000;
  std::string loss = "squared";
  std::uint64_t seed = 1;
  double alpha = 0.0;
  long trace_every = 1000;
  std::string out = ".";
};

int run_train(const TrainArgs& args, const std::string& resolved) {
  const auto start = std::chrono::steady_clock::now();
  const DataSet data = load_dataset(args.data.path, args.data.label_column);
  GdConfig config;
  config.hidden = args.hidden;
  config.learning_rate = args.lr;
  config.init_std = args.init_std;
  config.target_loss = args.target_loss;
  config.max_epochs = args.max_epochs;
  config.seed = args.seed;
  config.alpha = args.alpha;
  config.trace_every = args.trace_every;
  if (args.loss == "squared") {
    config.loss = LossKind::Squared;
  } else if (args.loss == "logistic") {
    config.loss = LossKind::Logistic;
  } else {
    throw ValidationError("unknown loss '" + args.loss + "' (expected squared or logistic)");
  }

  const fs::path dir = prepare_out_dir(args.out);
  const GdResult result = train_gd(data, config);

  write_text(dir / "network.json", network_to_json(result.network));
  std::ostringstream trace;
  trace.precision(17);
  trace << "epoch,loss\n";
  for (const auto& [epoch, loss] : result.loss_trace) trace << epoch << "," << loss << "\n";
  write_text(dir / "loss_trace.csv", trace.str());
  write_text(dir / "gd_report.json", gd_report_json(result, elapsed_ms(start)));
  write_manifest(dir, "train-gd", resolved, dataset_digest(data),
                 {"network.json", "loss_trace.csv", "gd_report.json"});

  std::cout << "train-gd: stop="
            << (result.stop == GdStop::TargetReached ? "target-reached" : "epoch-limit")
            << " epochs=" << result.epochs << " loss=" << result.final_loss << "\n";
  return result.stop == GdStop::TargetReached ? kOk : kNotOptimal;
}

// ----------------------------------------------------------------------
// oracle

struct OracleArgs {
  DatasetArgs data;
  std::string formulation = "weights";
  double alpha = 0.0;
  double bias_step = 1e-3;
  int circle_points = 10000;
  std::string out = ".";
};

int run_oracle(const OracleArgs& args, const std::string& resolved) {
  const DataSet data = load_dataset(args.data.path, args.data.label_column);
  const ProgramKind kind = parse_kind(args.formulation);
  const fs::path dir = prepare_out_dir(args.out);
  const OracleSolution solution =
      atomic_lp(data, kind, args.alpha, args.bias_step, args.circle_points);
  const std::string doc = oracle_to_json(solution);
  write_text(dir / "oracle.json", doc);
  write_manifest(dir, "oracle", resolved, dataset_digest(data), {"oracle.json"});
  std::cout << doc << "\n";
  return kOk;
}

// ----------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string net;
  std::vector<double> lo;
  std::vector<double> hi;
  double step = 0.01;
  std::string out = ".";
};

int run_eval(const EvalArgs& args, const std::string& resolved) {
  const FiniteNetwork net = load_network(args.net);
  if (args.lo.size() != args.hi.size())
    throw ValidationError("--lo and --hi need the same number of components");
  const Eigen::VectorXd lo = Eigen::Map<const Eigen::VectorXd>(
      args.lo.data(), static_cast<Eigen::Index>(args.lo.size()));
  const Eigen::VectorXd hi = Eigen::Map<const Eigen::VectorXd>(
      args.hi.data(), static_cast<Eigen::Index>(args.hi.size()));
  const fs::path dir = prepare_out_dir(args.out);
  write_text(dir / "samples.csv", sample_on_grid(net, lo, hi, args.step));
  write_manifest(dir, "eval", resolved, net.data_hash, {"samples.csv"});
  return kOk;
}

// ----------------------------------------------------------------------
// compare

struct CompareArgs {
  std::string net_a;
  std::string net_b;
  std::vector<double> lo;
  std::vector<double> hi;
  double step = 0.01;
  bool sign_agreement = false;
  std::string out = ".";
};

int run_compare(const CompareArgs& args, const std::string& resolved) {
  const FiniteNetwork a = load_network(args.net_a);
  const FiniteNetwork b = load_network(args.net_b);
  if (args.lo.size() != args.hi.size())
    throw ValidationError("--lo and --hi need the same number of components");
  const int d = static_cast<int>(args.lo.size());
  if (d < 1 || d > 2) throw ValidationError("comparison grids support one or two dimensions");
  if ((a.width() && a.dim() != d) || (b.width() && b.dim() != d))
    throw ValidationError("network input dimension does not match the grid");

  Eigen::MatrixXd grid;
  if (d == 1) {
    grid = grid_1d(args.lo[0], args.hi[0], args.step);
  } else {
    grid = grid_2d(args.lo[0], args.hi[0], args.lo[1], args.hi[1], args.step);
  }
  const Eigen::VectorXd fa =
      a.width() ? predict_many(a, grid) : Eigen::VectorXd::Zero(grid.cols());
  const Eigen::VectorXd fb =
      b.width() ? predict_many(b, grid) : Eigen::VectorXd::Zero(grid.cols());

  nlohmann::json j;
  if (args.sign_agreement) {
    long agree = 0;
    for (long i = 0; i < fa.size(); ++i)
      if ((fa[i] >= 0.0) == (fb[i] >= 0.0)) ++agree;
    j["agreement"] = static_cast<double>(agree) / static_cast<double>(fa.size());
  } else {
    j["linf"] = (fa - fb).cwiseAbs().maxCoeff();
  }

  const fs::path dir = prepare_out_dir(args.out);
  write_text(dir / "compare.json", j.dump(2));
  write_manifest(dir, "compare", resolved, 0, {"compare.json"});
  std::cout << j.dump() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse shallow-network interpolation and classification via "
               "sign-pattern convex programs"};
  app.set_version_flag("--version", ATOMNET_VERSION);
  // flag defaults may come from a config file given before the subcommand;
  // the file groups keys under [subcommand] sections and explicit
  // command-line values always win
  app.set_config("--config", "", "read default flag values from a config file");
  app.require_subcommand(1);

  PatternsArgs pa;
  CLI::App* patterns = app.add_subcommand("patterns", "enumerate realizable sign arrangements");
  add_dataset_flags(patterns, pa.data);
  patterns->add_option("--out", pa.out, "output directory");
  patterns->add_flag("--force", pa.force, "lift the candidate-count guard");
  patterns->add_option("--workers", pa.workers, "feasibility-check threads")
      ->check(CLI::PositiveNumber);

  FitArgs fa;
  CLI::App* fit = app.add_subcommand("fit", "solve a convex formulation and emit the network");
  add_dataset_flags(fit, fa.data);
  fit->add_option("--formulation", fa.formulation, "weights | joint | margin");
  fit->add_option("--alpha", fa.alpha, "negative slope of the activation");
  fit->add_option("--tol", fa.tol, "solver stopping tolerance")->check(CLI::PositiveNumber);
  fit->add_option("--out", fa.out, "output directory");
  fit->add_flag("--force", fa.force, "lift the candidate-count guard");
  fit->add_option("--workers", fa.workers, "feasibility-check threads")
      ->check(CLI::PositiveNumber);
  fit->add_option("--max-iterations", fa.max_iterations, "solver iteration budget")
      ->check(CLI::PositiveNumber);

  TrainArgs ta;
  CLI::App* train = app.add_subcommand("train-gd", "full-batch gradient-descent baseline");
  add_dataset_flags(train, ta.data);
  train->add_option("--hidden", ta.hidden, "hidden width")->check(CLI::PositiveNumber);
  train->add_option("--lr", ta.lr, "learning rate")->check(CLI::PositiveNumber);
  train->add_option("--init-std", ta.init_std, "Gaussian initialization scale");
  train->add_option("--target-loss", ta.target_loss, "stop once loss falls below this");
  train->add_option("--max-epochs", ta.max_epochs, "epoch budget")->check(CLI::PositiveNumber);
  train->add_option("--loss", ta.loss, "squared | logistic");
  train->add_option("--seed", ta.seed, "initialization seed");
  train->add_option("--alpha", ta.alpha, "negative slope of the activation");
  train->add_option("--trace-every", ta.trace_every, "loss-trace granularity")
      ->check(CLI::PositiveNumber);
  train->add_option("--out", ta.out, "output directory");

  OracleArgs oa;
  CLI::App* oracle = app.add_subcommand("oracle", "grid-dictionary reference solve");
  add_dataset_flags(oracle, oa.data);
  oracle->add_option("--formulation", oa.formulation, "weights | joint | margin");
  oracle->add_option("--alpha", oa.alpha, "negative slope of the activation");
  oracle->add_option("--bias-step", oa.bias_step, "bias grid step")->check(CLI::PositiveNumber);
  oracle->add_option("--circle-points", oa.circle_points, "unit-circle direction count")
      ->check(CLI::PositiveNumber);
  oracle->add_option("--out", oa.out, "output directory");

  EvalArgs ea;
  CLI::App* eval = app.add_subcommand("eval", "sample a network on a grid");
  eval->add_option("--net", ea.net, "network JSON file")->required();
  eval->add_option("--lo", ea.lo, "lower grid corner (comma separated)")
      ->required()
      ->delimiter(',');
  eval->add_option("--hi", ea.hi, "upper grid corner (comma separated)")
      ->required()
      ->delimiter(',');
  eval->add_option("--step", ea.step, "grid step")->check(CLI::PositiveNumber);
  eval->add_option("--out", ea.out, "output directory");

  CompareArgs ca;
  CLI::App* compare = app.add_subcommand("compare", "grid distance between two networks");
  compare->add_option("--net-a", ca.net_a, "first network JSON file")->required();
  compare->add_option("--net-b", ca.net_b, "second network JSON file")->required();
  compare->add_option("--lo", ca.lo, "lower grid corner (comma separated)")
      ->required()
      ->delimiter(',');
  compare->add_option("--hi", ca.hi, "upper grid corner (comma separated)")
      ->required()
      ->delimiter(',');
  compare->add_option("--step", ca.step, "grid step")->check(CLI::PositiveNumber);
  compare->add_flag("--sign-agreement", ca.sign_agreement,
                    "report the sign-agreement fraction instead of the sup distance");
  compare->add_option("--out", ca.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidation;
  }

  const std::string resolved = app.config_to_str(true, false);
  try {
    if (patterns->parsed()) return run_patterns(pa, resolved);
    if (fit->parsed()) return run_fit(fa, resolved);
    if (train->parsed()) return run_train(ta, resolved);
    if (oracle->parsed()) return run_oracle(oa, resolved);
    if (eval->parsed()) return run_eval(ea, resolved);
    if (compare->parsed()) return run_compare(ca, resolved);
    std::cerr << "error: no subcommand selected\n";
    return kValidation;
  } catch (const ResourceLimitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kResource;
  } catch (const std::overflow_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kResource;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const SolverNumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNotOptimal;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return kUnexpected;
  }
}

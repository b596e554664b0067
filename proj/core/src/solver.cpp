#include "atomnet/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace atomnet {

namespace {

// ---------------------------------------------------------------------------
// Shared splitting core.
//
// Both entry points reduce to
//
//   minimize    cvec . u
//   subject to  M u = q,   u in K,
//
// where K is a product of frees, half-lines, boxes and second-order cones.
// The iteration alternates a projection onto the affine set (one dense
// factorization of M M^T, reused for every iterate and every step-size
// change) with a projection onto K, plus an over-relaxed dual update.
// Infeasibility is recognized through the dual increments: for an empty
// problem they settle on a separating functional, which we validate
// explicitly against the program data before declaring "certified".  If the
// iterates blow up or stall without producing a validated certificate the
// verdict is only "heuristic".  Growth threshold for that fallback: dual
// magnitude beyond 1e8 times the problem scale with a primal residual stuck
// above 1e-4 of scale.
// ---------------------------------------------------------------------------

struct SocBlock {
  int t_index = 0;
  int z_begin = 0;
  int z_size = 0;
};

struct ConeLayout {
  std::vector<std::pair<int, int>> nonneg;  // contiguous [begin, begin+size)
  std::vector<std::pair<int, int>> box;     // clamped to [-box_bound, box_bound]
  double box_bound = 0.0;
  std::vector<SocBlock> socs;
};

void project_cone(const ConeLayout& k, Eigen::VectorXd& p) {
  for (const auto& [begin, size] : k.nonneg)
    p.segment(begin, size) = p.segment(begin, size).cwiseMax(0.0);
  for (const auto& [begin, size] : k.box)
    p.segment(begin, size) =
        p.segment(begin, size).cwiseMax(-k.box_bound).cwiseMin(k.box_bound);
  for (const SocBlock& soc : k.socs) {
    const double t = p[soc.t_index];
    const double zn = p.segment(soc.z_begin, soc.z_size).norm();
    if (zn <= t) continue;  // inside
    if (zn <= -t) {         // polar: projects to the origin
      p[soc.t_index] = 0.0;
      p.segment(soc.z_begin, soc.z_size).setZero();
      continue;
    }
    const double beta = 0.5 * (t + zn);
    p[soc.t_index] = beta;
    p.segment(soc.z_begin, soc.z_size) *= beta / zn;
  }
}

// Distance-to-dual-cone measure of r = cvec - M^T mu, using the current
// iterate to orient box coordinates (variational-inequality form).
double dual_residual(const ConeLayout& k, const Eigen::VectorXd& r, const Eigen::VectorXd& v,
                     const std::vector<bool>& in_free, double box_edge_tol) {
  double worst = 0.0;
  for (int i = 0; i < r.size(); ++i)
    if (in_free[i]) worst = std::max(worst, std::abs(r[i]));
  for (const auto& [begin, size] : k.nonneg)
    for (int i = begin; i < begin + size; ++i) worst = std::max(worst, -r[i]);
  for (const auto& [begin, size] : k.box)
    for (int i = begin; i < begin + size; ++i) {
      if (v[i] >= k.box_bound - box_edge_tol)
        worst = std::max(worst, -r[i]);
      else if (v[i] <= -k.box_bound + box_edge_tol)
        worst = std::max(worst, r[i]);
      else
        worst = std::max(worst, std::abs(r[i]));
    }
  for (const SocBlock& soc : k.socs)
    worst = std::max(worst, r.segment(soc.z_begin, soc.z_size).norm() - r[soc.t_index]);
  return std::max(worst, 0.0);
}

struct CoreState {
  Eigen::VectorXd u, v, lambda, mu;
  long iterations = 0;
};

struct CoreResult {
  CoreState state;
  bool infeasible = false;
  InfeasibilityKind infeasibility = InfeasibilityKind::None;
  bool hit_iteration_limit = false;
};

class SplittingCore {
 public:
  SplittingCore(Eigen::MatrixXd m, Eigen::VectorXd q, Eigen::VectorXd cvec, ConeLayout cone)
      : m_(std::move(m)), q_(std::move(q)), c_(std::move(cvec)), cone_(std::move(cone)) {
    const int nu = static_cast<int>(m_.cols());
    in_free_.assign(nu, true);
    auto mark = [this](int begin, int size) {
      for (int i = begin; i < begin + size; ++i) in_free_[i] = false;
    };
    for (const auto& [b, s] : cone_.nonneg) mark(b, s);
    for (const auto& [b, s] : cone_.box) mark(b, s);
    for (const SocBlock& soc : cone_.socs) {
      in_free_[soc.t_index] = false;
      mark(soc.z_begin, soc.z_size);
    }
    gram_ = m_ * m_.transpose();
    ldlt_.compute(gram_);
    if (ldlt_.info() != Eigen::Success)
      throw SolverNumericalError("affine projection factorization failed");
    q_scale_ = 1.0 + q_.lpNorm<Eigen::Infinity>();
    c_scale_ = 1.0 + c_.lpNorm<Eigen::Infinity>();
    m_scale_ = 1.0 + m_.cwiseAbs().maxCoeff();
  }

  // Validates a Farkas candidate: M^T nu must lie in the polar of the
  // recession cone of K (zero on frees, nonpositive on half-lines, inside
  // the polar second-order cones) while q . nu outruns the box support.
  bool certificate_holds(const Eigen::VectorXd& nu) const {
    const double norm = nu.lpNorm<Eigen::Infinity>();
    if (!(norm > 0) || !nu.allFinite()) return false;
    const Eigen::VectorXd scaled = nu / norm;
    const Eigen::VectorXd g = m_.transpose() * scaled;
    const double tol = 1e-7 * m_scale_;
    for (int i = 0; i < g.size(); ++i)
      if (in_free_[i] && std::abs(g[i]) > tol) return false;
    for (const auto& [begin, size] : cone_.nonneg)
      for (int i = begin; i < begin + size; ++i)
        if (g[i] > tol) return false;
    for (const SocBlock& soc : cone_.socs)
      if (g.segment(soc.z_begin, soc.z_size).norm() > -g[soc.t_index] + tol) return false;
    double box_support = 0.0;
    for (const auto& [begin, size] : cone_.box)
      box_support += cone_.box_bound * g.segment(begin, size).lpNorm<1>();
    return q_.dot(scaled) - box_support > 1e-7 * q_scale_;
  }

  // One pass of the splitting loop.  `check` is called on every inspection
  // boundary and may stop the loop (converged / polished); it sees the
  // current state and the constraint-space residuals.
  CoreResult run(const SolverConfig& config,
                 const std::function<bool(const CoreState&, double, double)>& check) {
    const int nu = static_cast<int>(m_.cols());
    const double relax = 1.6;
    double rho = 1.0;

    CoreState s;
    s.u = Eigen::VectorXd::Zero(nu);
    s.v = Eigen::VectorXd::Zero(nu);
    s.lambda = Eigen::VectorXd::Zero(nu);
    s.mu = Eigen::VectorXd::Zero(static_cast<int>(m_.rows()));

    CoreResult result;
    Eigen::VectorXd mu_prev = s.mu;
    double stall_reference = std::numeric_limits<double>::infinity();
    long stall_marker = 0;

    const int check_every = 25;
    for (long it = 1; it <= config.max_iterations; ++it) {
      // affine step
      Eigen::VectorXd p = s.v - s.lambda - c_ / rho;
      Eigen::VectorXd xi = ldlt_.solve(m_ * p - q_);
      s.u = p - m_.transpose() * xi;
      s.mu = -rho * xi;
      // cone step with over-relaxation
      Eigen::VectorXd relaxed = relax * s.u + (1.0 - relax) * s.v;
      Eigen::VectorXd v_old = s.v;
      s.v = relaxed + s.lambda;
      project_cone(cone_, s.v);
      s.lambda += relaxed - s.v;
      s.iterations = it;

      if (it % check_every != 0 && it != config.max_iterations) continue;
      if (!s.v.allFinite() || !s.lambda.allFinite())
        throw SolverNumericalError("splitting iterate became non-finite");

      const double r_consensus = (s.u - s.v).lpNorm<Eigen::Infinity>();
      const double r_shift = rho * (s.v - v_old).lpNorm<Eigen::Infinity>();
      if (check(s, r_consensus, r_shift)) return result;

      // infeasibility: dual increments as certificate candidates
      if (it % 100 == 0) {
        Eigen::VectorXd dmu = s.mu - mu_prev;
        mu_prev = s.mu;
        if (certificate_holds(dmu) || certificate_holds(s.mu)) {
          result.infeasible = true;
          result.infeasibility = InfeasibilityKind::Certified;
          result.state = s;
          return result;
        }
        const double pri = (m_ * s.v - q_).lpNorm<Eigen::Infinity>();
        if (pri < stall_reference * 0.5) {
          stall_reference = pri;
          stall_marker = it;
        }
        if (it - stall_marker > 20000 && pri > 1e-4 * q_scale_ &&
            s.lambda.lpNorm<Eigen::Infinity>() > 1e8 * q_scale_) {
          result.infeasible = true;
          result.infeasibility = InfeasibilityKind::Heuristic;
          result.state = s;
          return result;
        }
      }

      // step-size balancing; the affine projection is step-size free, so
      // this costs nothing beyond rescaling the multiplier
      if (it % 100 == 0 && r_shift > 0) {
        const double ratio = r_consensus * rho / (r_shift + 1e-300);
        double next = rho;
        if (ratio > 10.0)
          next = std::min(rho * 2.0, 1e4);
        else if (ratio < 0.1)
          next = std::max(rho * 0.5, 1e-4);
        if (next != rho) {
          s.lambda *= rho / next;
          rho = next;
        }
      }
    }
    result.hit_iteration_limit = true;
    result.state = s;
    return result;
  }

  double q_scale() const { return q_scale_; }
  double c_scale() const { return c_scale_; }
  const Eigen::MatrixXd& constraint_matrix() const { return m_; }
  const Eigen::VectorXd& rhs() const { return q_; }
  const Eigen::VectorXd& cost() const { return c_; }
  const ConeLayout& cone() const { return cone_; }
  const std::vector<bool>& free_mask() const { return in_free_; }

 private:
  Eigen::MatrixXd m_;
  Eigen::VectorXd q_;
  Eigen::VectorXd c_;
  ConeLayout cone_;
  std::vector<bool> in_free_;
  Eigen::MatrixXd gram_;
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
  double q_scale_ = 1.0, c_scale_ = 1.0, m_scale_ = 1.0;
};

// ---------------------------------------------------------------------------
// Group-norm program path
// ---------------------------------------------------------------------------

struct ReducedEqualities {
  Eigen::MatrixXd a;  // independent equality rows
  Eigen::VectorXd b;
  bool inconsistent = false;
};

// Drops linearly dependent equality rows; if the dropped rows contradict
// the kept ones the system is empty and the least-squares residual itself
// is a (validated) Farkas certificate.
ReducedEqualities reduce_equalities(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  ReducedEqualities out;
  if (a.rows() == 0) {
    out.a = a;
    out.b = b;
    return out;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a.transpose());
  const int rank = static_cast<int>(qr.rank());
  if (rank == a.rows()) {
    out.a = a;
    out.b = b;
  } else {
    std::vector<int> keep(qr.colsPermutation().indices().data(),
                          qr.colsPermutation().indices().data() + rank);
    std::sort(keep.begin(), keep.end());
    out.a.resize(rank, a.cols());
    out.b.resize(rank);
    for (int i = 0; i < rank; ++i) {
      out.a.row(i) = a.row(keep[i]);
      out.b[i] = b[keep[i]];
    }
    Eigen::VectorXd x0 = a.completeOrthogonalDecomposition().solve(b);
    const double res = (a * x0 - b).lpNorm<Eigen::Infinity>();
    if (res > 1e-9 * (1.0 + b.lpNorm<Eigen::Infinity>())) out.inconsistent = true;
  }
  return out;
}

double group_objective(const ConicProgram& p, const Eigen::VectorXd& x) {
  double total = 0.0;
  for (const Group& grp : p.groups) total += x.segment(grp.begin, grp.size).norm();
  return total;
}

double equality_violation(const ConicProgram& p, const Eigen::VectorXd& x) {
  if (p.a_eq.rows() == 0) return 0.0;
  return (p.a_eq * x - p.b_eq).lpNorm<Eigen::Infinity>();
}

double inequality_violation(const ConicProgram& p, const Eigen::VectorXd& x) {
  if (p.a_in.rows() == 0) return 0.0;
  return std::max(0.0, (p.b_in - p.a_in * x).maxCoeff());
}

GroupSolution package(const ConicProgram& p, const Eigen::VectorXd& x) {
  GroupSolution sol;
  sol.kind = p.kind;
  sol.raw = x;
  const int d = p.dim;
  sol.blocks.resize(p.num_patterns);
  for (int i = 0; i < p.num_patterns; ++i) {
    const int o = i * 2 * (d + 1);
    sol.blocks[i].w_plus = x.segment(o, d);
    sol.blocks[i].b_plus = x[o + d];
    sol.blocks[i].w_minus = x.segment(o + d + 1, d);
    sol.blocks[i].b_minus = x[o + 2 * d + 1];
  }
  sol.objective = group_objective(p, x);
  return sol;
}

// Newton corrector for the support-restricted problem
//   minimize sum_{g in S} ||x_g||  s.t.  R x = r,
// warm-started at the splitting iterate.  Groups collapsing toward zero
// make the Hessian blow up, so those get dropped and the correction is
// retried; verification against the full program happens in the caller.
struct PolishOutcome {
  bool ok = false;
  Eigen::VectorXd x;
  Eigen::VectorXd multipliers;  // for the rows of R
  double kkt_residual = std::numeric_limits<double>::infinity();
};

PolishOutcome newton_restricted(const ConicProgram& p, const std::vector<int>& coords,
                                const std::vector<Group>& active_groups,
                                const Eigen::MatrixXd& rows, const Eigen::VectorXd& rhs,
                                Eigen::VectorXd x_full) {
  PolishOutcome out;
  const int nr = static_cast<int>(coords.size());
  const int mr = static_cast<int>(rows.rows());
  std::vector<int> where(static_cast<size_t>(p.var_count()), -1);
  for (int i = 0; i < nr; ++i) where[coords[i]] = i;

  Eigen::MatrixXd r_red(mr, nr);
  for (int i = 0; i < nr; ++i) r_red.col(i) = rows.col(coords[i]);
  Eigen::VectorXd z(nr);
  for (int i = 0; i < nr; ++i) z[i] = x_full[coords[i]];

  struct LocalGroup {
    std::vector<int> idx;
  };
  std::vector<LocalGroup> groups;
  for (const Group& grp : active_groups) {
    LocalGroup lg;
    for (int k = 0; k < grp.size; ++k) {
      const int w = where[grp.begin + k];
      if (w < 0) return out;  // support bookkeeping error
      lg.idx.push_back(w);
    }
    groups.push_back(std::move(lg));
  }

  auto gradient = [&](const Eigen::VectorXd& zz, Eigen::VectorXd& grad, bool& degenerate) {
    grad.setZero(nr);
    degenerate = false;
    for (const LocalGroup& lg : groups) {
      double norm2 = 0.0;
      for (int i : lg.idx) norm2 += zz[i] * zz[i];
      const double norm = std::sqrt(norm2);
      if (norm < 1e-11) {
        degenerate = true;
        return;
      }
      for (int i : lg.idx) grad[i] += zz[i] / norm;
    }
  };

  const double rhs_scale = 1.0 + rhs.lpNorm<Eigen::Infinity>();
  Eigen::VectorXd grad(nr);
  bool degenerate = false;
  gradient(z, grad, degenerate);
  if (degenerate) return out;

  // start multipliers from least squares on the stationarity condition
  Eigen::VectorXd nu = Eigen::VectorXd::Zero(mr);
  if (mr > 0) nu = r_red.transpose().completeOrthogonalDecomposition().solve(-grad);

  const int kkt_dim = nr + mr;
  Eigen::VectorXd fval(kkt_dim);
  auto residual = [&](const Eigen::VectorXd& zz, const Eigen::VectorXd& nn,
                      Eigen::VectorXd& f) -> bool {
    Eigen::VectorXd gg(nr);
    bool bad = false;
    gradient(zz, gg, bad);
    if (bad) return false;
    f.head(nr) = gg + r_red.transpose() * nn;
    f.tail(mr) = r_red * zz - rhs;
    return true;
  };
  if (!residual(z, nu, fval)) return out;

  for (int iter = 0; iter < 60; ++iter) {
    const double fnorm = fval.lpNorm<Eigen::Infinity>();
    if (fnorm < 1e-12 * rhs_scale) break;
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(kkt_dim, kkt_dim);
    for (const LocalGroup& lg : groups) {
      const int sz = static_cast<int>(lg.idx.size());
      Eigen::VectorXd zg(sz);
      for (int k = 0; k < sz; ++k) zg[k] = z[lg.idx[k]];
      const double norm = zg.norm();
      if (norm < 1e-11) return out;
      Eigen::MatrixXd block =
          (Eigen::MatrixXd::Identity(sz, sz) - (zg / norm) * (zg / norm).transpose()) / norm;
      for (int a = 0; a < sz; ++a)
        for (int b = 0; b < sz; ++b) kkt(lg.idx[a], lg.idx[b]) += block(a, b);
    }
    for (int i = 0; i < nr; ++i) kkt(i, i) += 1e-11;
    kkt.block(0, nr, nr, mr) = r_red.transpose();
    kkt.block(nr, 0, mr, nr) = r_red;
    for (int i = 0; i < mr; ++i) kkt(nr + i, nr + i) = -1e-11;

    Eigen::VectorXd step = kkt.ldlt().solve(-fval);
    if (!step.allFinite()) return out;

    double scale = 1.0;
    bool advanced = false;
    for (int ls = 0; ls < 30; ++ls) {
      Eigen::VectorXd z_try = z + scale * step.head(nr);
      Eigen::VectorXd nu_try = nu + scale * step.tail(mr);
      Eigen::VectorXd f_try(kkt_dim);
      if (residual(z_try, nu_try, f_try) &&
          f_try.lpNorm<Eigen::Infinity>() < fnorm * (1.0 - 1e-4 * scale)) {
        z = z_try;
        nu = nu_try;
        fval = f_try;
        advanced = true;
        break;
      }
      scale *= 0.5;
    }
    if (!advanced) break;
  }

  out.kkt_residual = fval.lpNorm<Eigen::Infinity>();
  if (out.kkt_residual > 1e-9 * rhs_scale) return out;
  out.x = Eigen::VectorXd::Zero(p.var_count());
  for (int i = 0; i < nr; ++i) out.x[coords[i]] = z[i];
  out.multipliers = nu;
  out.ok = true;
  return out;
}

}  // namespace

GroupSolution solve(const ConicProgram& program, const SolverConfig& config) {
  const int n = program.var_count();
  if (n <= 0 || program.num_patterns <= 0)
    throw ValidationError("cannot solve a program with no pattern blocks");
  const int g = static_cast<int>(program.groups.size());
  const int mi = static_cast<int>(program.a_in.rows());

  ReducedEqualities eq = reduce_equalities(program.a_eq, program.b_eq);
  GroupSolution failed = package(program, Eigen::VectorXd::Zero(n));
  if (eq.inconsistent) {
    failed.status = SolveStatus::Infeasible;
    failed.infeasibility = InfeasibilityKind::Certified;
    failed.residuals.primal = std::max(equality_violation(program, failed.raw),
                                       inequality_violation(program, failed.raw));
    return failed;
  }
  const int me = static_cast<int>(eq.a.rows());
  const int nu = n + g + mi;

  // stack [x | t | s]; equalities then slacked inequalities
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(me + mi, nu);
  Eigen::VectorXd q(me + mi);
  if (me > 0) {
    m.topLeftCorner(me, n) = eq.a;
    q.head(me) = eq.b;
  }
  if (mi > 0) {
    m.bottomLeftCorner(mi, n) = program.a_in;
    m.bottomRightCorner(mi, mi) = -Eigen::MatrixXd::Identity(mi, mi);
    q.tail(mi) = program.b_in;
  }
  Eigen::VectorXd cvec = Eigen::VectorXd::Zero(nu);
  cvec.segment(n, g).setOnes();

  ConeLayout cone;
  if (mi > 0) cone.nonneg.push_back({n + g, mi});
  for (int i = 0; i < g; ++i)
    cone.socs.push_back({n + i, program.groups[i].begin, program.groups[i].size});

  SplittingCore core(std::move(m), std::move(q), std::move(cvec), std::move(cone));

  const double b_scale =
      1.0 + std::max(program.b_eq.size() ? program.b_eq.lpNorm<Eigen::Infinity>() : 0.0,
                     program.b_in.size() ? program.b_in.lpNorm<Eigen::Infinity>() : 0.0);

  // Attempts an exact correction on the current support; returns a solution
  // only when the corrected point verifies against the *full* program.
  auto try_polish = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                        double admm_objective) -> std::optional<GroupSolution> {
    double max_norm = 0.0;
    for (const Group& grp : program.groups)
      max_norm = std::max(max_norm, x.segment(grp.begin, grp.size).norm());
    const double support_tol = std::max(1e-9, 1e-5 * max_norm);

    std::vector<Group> active_groups;
    std::vector<char> coord_used(static_cast<size_t>(n), 0);
    for (const Group& grp : program.groups)
      if (x.segment(grp.begin, grp.size).norm() > support_tol) {
        active_groups.push_back(grp);
        for (int k = 0; k < grp.size; ++k) coord_used[grp.begin + k] = 1;
      }
    std::vector<char> in_any_group(static_cast<size_t>(n), 0);
    for (const Group& grp : program.groups)
      for (int k = 0; k < grp.size; ++k) in_any_group[grp.begin + k] = 1;
    for (int i = 0; i < n; ++i)
      if (!in_any_group[i]) coord_used[i] = 1;  // free biases always kept

    std::vector<int> coords;
    for (int i = 0; i < n; ++i)
      if (coord_used[i]) coords.push_back(i);
    if (coords.empty()) coords.push_back(0);

    // tight inequality rows with visible multipliers become equalities
    Eigen::VectorXd slack = program.a_in.rows() ? (program.a_in * x - program.b_in).eval()
                                                : Eigen::VectorXd();
    const double act_tol = 1e-6 * b_scale;
    double mult_max = 0.0;
    for (int j = 0; j < mi; ++j) mult_max = std::max(mult_max, std::abs(mu[me + j]));
    const double mult_tol = 1e-6 * std::max(1.0, mult_max);

    auto attempt = [&](bool require_multiplier) -> std::optional<GroupSolution> {
      std::vector<int> rows;
      for (int j = 0; j < mi; ++j) {
        const bool tight = slack.size() && slack[j] < act_tol;
        const bool pushed = mu[me + j] > mult_tol;
        if (tight && (pushed || !require_multiplier)) rows.push_back(j);
      }
      Eigen::MatrixXd r(me + static_cast<int>(rows.size()), n);
      Eigen::VectorXd rr(r.rows());
      if (me > 0) {
        r.topRows(me) = eq.a;
        rr.head(me) = eq.b;
      }
      for (size_t k = 0; k < rows.size(); ++k) {
        r.row(me + static_cast<int>(k)) = program.a_in.row(rows[k]);
        rr[me + static_cast<int>(k)] = program.b_in[rows[k]];
      }
      PolishOutcome po = newton_restricted(program, coords, active_groups, r, rr, x);
      if (!po.ok) return std::nullopt;
      const double strict = 1e-9 * b_scale;
      if (equality_violation(program, po.x) > strict) return std::nullopt;
      if (inequality_violation(program, po.x) > strict) return std::nullopt;
      const double obj = group_objective(program, po.x);
      if (obj > admm_objective + 1e-4 * (1.0 + std::abs(admm_objective)))
        return std::nullopt;
      GroupSolution sol = package(program, po.x);
      sol.status = SolveStatus::Optimal;
      sol.polished = true;
      sol.residuals.primal = std::max(equality_violation(program, po.x),
                                      inequality_violation(program, po.x));
      sol.residuals.dual = po.kkt_residual;
      sol.residuals.gap = po.kkt_residual;
      return sol;
    };

    if (auto s = attempt(true)) return s;
    if (auto s = attempt(false)) return s;
    return std::nullopt;
  };

  std::optional<GroupSolution> delivered;
  long iterations_done = 0;
  double best_loose = std::numeric_limits<double>::infinity();
  long last_attempt = std::numeric_limits<long>::min() / 2;

  auto check = [&](const CoreState& s, double r_consensus, double r_shift) -> bool {
    iterations_done = s.iterations;
    const Eigen::VectorXd x = s.v.head(n);
    const double pri =
        std::max(equality_violation(program, x), inequality_violation(program, x));
    Eigen::VectorXd rvec = core.cost() - core.constraint_matrix().transpose() * s.mu;
    const double dua = dual_residual(core.cone(), rvec, s.v, core.free_mask(), 0.0);
    const double pobj = group_objective(program, x);
    const double dobj = core.rhs().dot(s.mu);
    const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));

    const bool loose = pri < 1e-5 * b_scale && r_consensus < 1e-5 * b_scale;
    if (loose && (pri < 0.5 * best_loose || s.iterations - last_attempt >= 1000)) {
      best_loose = std::min(best_loose, pri);
      last_attempt = s.iterations;
      if (auto polished = try_polish(x, s.mu, pobj)) {
        polished->iterations = s.iterations;
        delivered = std::move(polished);
        return true;
      }
    }
    const bool tight = pri <= config.tol_primal * b_scale &&
                       dua <= config.tol_dual * core.c_scale() && gap <= config.tol_gap &&
                       r_shift <= config.tol_dual * core.c_scale();
    if (tight) {
      GroupSolution sol = package(program, x);
      sol.status = SolveStatus::Optimal;
      sol.residuals = {pri, dua, gap};
      sol.iterations = s.iterations;
      delivered = std::move(sol);
      return true;
    }
    return false;
  };

  CoreResult run = core.run(config, check);
  if (delivered) {
    delivered->iterations = iterations_done;
    return *delivered;
  }
  if (run.infeasible) {
    failed.status = SolveStatus::Infeasible;
    failed.infeasibility = run.infeasibility;
    failed.residuals.primal = std::max(equality_violation(program, failed.raw),
                                       inequality_violation(program, failed.raw));
    failed.iterations = run.state.iterations;
    return failed;
  }

  // iteration budget exhausted: one last polish attempt, then report as-is
  const Eigen::VectorXd x = run.state.v.head(n);
  if (auto polished = try_polish(x, run.state.mu, group_objective(program, x))) {
    polished->iterations = run.state.iterations;
    return *polished;
  }
  GroupSolution sol = package(program, x);
  sol.status = SolveStatus::IterationLimit;
  sol.iterations = run.state.iterations;
  sol.residuals.primal =
      std::max(equality_violation(program, x), inequality_violation(program, x));
  Eigen::VectorXd rvec = core.cost() - core.constraint_matrix().transpose() * run.state.mu;
  sol.residuals.dual = dual_residual(core.cone(), rvec, run.state.v, core.free_mask(), 0.0);
  const double dobj = core.rhs().dot(run.state.mu);
  sol.residuals.gap =
      std::abs(sol.objective - dobj) / (1.0 + std::abs(sol.objective) + std::abs(dobj));
  return sol;
}

std::optional<LpSolution> lp_feasibility(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                         const Eigen::VectorXd& c, double box,
                                         const SolverConfig& config) {
  const int nz = static_cast<int>(a.cols());
  const int mr = static_cast<int>(a.rows());
  if (b.size() != mr || c.size() != nz)
    throw ValidationError("lp_feasibility: inconsistent shapes");
  if (!(box > 0) || !std::isfinite(box))
    throw ValidationError("lp_feasibility: box bound must be positive and finite");

  Eigen::MatrixXd m(mr, nz + mr);
  m.leftCols(nz) = a;
  m.rightCols(mr) = -Eigen::MatrixXd::Identity(mr, mr);
  Eigen::VectorXd cvec = Eigen::VectorXd::Zero(nz + mr);
  cvec.head(nz) = -c;  // engine minimizes

  ConeLayout cone;
  cone.box_bound = box;
  cone.box.push_back({0, nz});
  if (mr > 0) cone.nonneg.push_back({nz, mr});

  SplittingCore core(std::move(m), b, std::move(cvec), std::move(cone));
  const double b_scale = core.q_scale();
  const double c_scale = core.c_scale();

  auto feasible_enough = [&](const Eigen::VectorXd& z) {
    if (mr == 0) return true;
    return (a * z - b).minCoeff() > -1e-9 * b_scale;
  };

  // Dual upper bound for the maximization: with eta >= 0,
  //   D(eta) = -b.eta is wrong-signed here; using L = c.z + eta.(Az - b)
  //   gives D(eta) = -eta.b + box * || c + A^T eta ||_1  >=  optimum.
  auto dual_bound = [&](const Eigen::VectorXd& eta) {
    Eigen::VectorXd r = c;
    if (mr > 0) r += a.transpose() * eta;
    return -(mr > 0 ? eta.dot(b) : 0.0) + box * r.lpNorm<1>();
  };

  // Vertex correction: re-solve the tight rows / tight bounds exactly, then
  // certify with multipliers refit on the active rows (the raw iterate dual
  // is only ~1e-6 accurate; the refit drives the bound gap to round-off).
  auto try_polish = [&](const Eigen::VectorXd& z_in,
                        const Eigen::VectorXd& mu) -> std::optional<LpSolution> {
    const double act_tol = 1e-6 * b_scale;
    std::vector<int> rows, at_hi, at_lo;
    if (mr > 0) {
      Eigen::VectorXd slack = a * z_in - b;
      for (int j = 0; j < mr; ++j)
        if (slack[j] < act_tol) rows.push_back(j);
    }
    for (int i = 0; i < nz; ++i) {
      if (z_in[i] > box - 1e-6 * (1.0 + box)) at_hi.push_back(i);
      if (z_in[i] < -box + 1e-6 * (1.0 + box)) at_lo.push_back(i);
    }
    const int mrows = static_cast<int>(rows.size() + at_hi.size() + at_lo.size());
    Eigen::VectorXd z = z_in;
    if (mrows > 0) {
      Eigen::MatrixXd r(mrows, nz);
      Eigen::VectorXd rr(mrows);
      int k = 0;
      for (int j : rows) {
        r.row(k) = a.row(j);
        rr[k++] = b[j];
      }
      for (int i : at_hi) {
        r.row(k).setZero();
        r(k, i) = 1.0;
        rr[k++] = box;
      }
      for (int i : at_lo) {
        r.row(k).setZero();
        r(k, i) = 1.0;
        rr[k++] = -box;
      }
      z = r.completeOrthogonalDecomposition().solve(rr);
      // keep unconstrained directions at their iterate values: project the
      // particular solution back toward z_in inside the nullspace
      Eigen::MatrixXd rt = r.transpose();
      Eigen::VectorXd delta = z_in - z;
      Eigen::VectorXd corr =
          delta - rt * (rt.completeOrthogonalDecomposition().pseudoInverse() * delta);
      z += corr;
    }
    if (!z.allFinite()) return std::nullopt;
    if (z.lpNorm<Eigen::Infinity>() > box * (1.0 + 1e-9)) return std::nullopt;
    z = z.cwiseMax(-box).cwiseMin(box);
    if (!feasible_enough(z)) return std::nullopt;

    Eigen::VectorXd eta = Eigen::VectorXd::Zero(mr);
    if (mr > 0) {
      std::vector<char> bounded(static_cast<size_t>(nz), 0);
      for (int i : at_hi) bounded[i] = 1;
      for (int i : at_lo) bounded[i] = 1;
      std::vector<int> interior;
      for (int i = 0; i < nz; ++i)
        if (!bounded[i]) interior.push_back(i);
      if (!rows.empty() && !interior.empty()) {
        // stationarity on interior coordinates: (c + A^T eta)|interior = 0
        Eigen::MatrixXd at(static_cast<int>(interior.size()), static_cast<int>(rows.size()));
        Eigen::VectorXd target(static_cast<int>(interior.size()));
        for (size_t ii = 0; ii < interior.size(); ++ii) {
          target[static_cast<int>(ii)] = -c[interior[ii]];
          for (size_t jj = 0; jj < rows.size(); ++jj)
            at(static_cast<int>(ii), static_cast<int>(jj)) = a(rows[jj], interior[ii]);
        }
        Eigen::VectorXd eta_act = at.completeOrthogonalDecomposition().solve(target);
        for (size_t jj = 0; jj < rows.size(); ++jj)
          eta[rows[jj]] = std::max(0.0, eta_act[static_cast<int>(jj)]);
      }
      Eigen::VectorXd eta_raw = mu.cwiseMax(0.0);
      if (dual_bound(eta_raw) < dual_bound(eta)) eta = eta_raw;
    }
    const double value = c.dot(z);
    const double bound = dual_bound(eta);
    if (bound - value > 1e-7 * (1.0 + std::abs(value) + c_scale * box)) return std::nullopt;
    return LpSolution{z, value};
  };

  std::optional<LpSolution> delivered;
  auto check = [&](const CoreState& s, double r_consensus, double r_shift) -> bool {
    const Eigen::VectorXd z = s.v.head(nz);
    const double pri = mr > 0 ? std::max(0.0, (b - a * z).maxCoeff()) : 0.0;
    if (pri < 1e-6 * b_scale && r_consensus < 1e-6 * (1.0 + b_scale)) {
      if (auto polished = try_polish(z, s.mu)) {
        delivered = std::move(polished);
        return true;
      }
    }
    // fallback acceptance purely on residuals
    Eigen::VectorXd rvec = core.cost() - core.constraint_matrix().transpose() * s.mu;
    const double dua = dual_residual(core.cone(), rvec, s.v, core.free_mask(),
                                     1e-7 * (1.0 + box));
    if (pri <= config.tol_primal * b_scale && dua <= config.tol_dual * c_scale &&
        r_shift <= config.tol_dual * c_scale && feasible_enough(z)) {
      Eigen::VectorXd zc = z.cwiseMax(-box).cwiseMin(box);
      delivered = LpSolution{zc, c.dot(zc)};
      return true;
    }
    return false;
  };

  CoreResult run = core.run(config, check);
  if (delivered) return delivered;
  if (run.infeasible) return std::nullopt;

  // Iteration limit: accept a feasible point if we have one, otherwise
  // treat the instance as numerically unresolved.
  const Eigen::VectorXd z = run.state.v.head(nz).cwiseMax(-box).cwiseMin(box);
  if (feasible_enough(z)) return LpSolution{z, c.dot(z)};
  throw SolverNumericalError("lp_feasibility: iteration limit without a feasibility verdict");
}

const char* status_name(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::IterationLimit: return "iteration-limit";
  }
  return "unknown";
}

std::string solver_report_json(const GroupSolution& solution, double wall_time_ms) {
  nlohmann::json j;
  j["status"] = status_name(solution.status);
  if (solution.status == SolveStatus::Infeasible)
    j["infeasibility"] =
        solution.infeasibility == InfeasibilityKind::Certified ? "certified" : "heuristic";
  j["objective"] = solution.objective;
  j["iterations"] = solution.iterations;
  j["polished"] = solution.polished;
  j["residuals"] = {{"primal", solution.residuals.primal},
                    {"dual", solution.residuals.dual},
                    {"gap", solution.residuals.gap}};
  j["wall_time_ms"] = wall_time_ms;
  return j.dump(2);
}

}  // namespace atomnet

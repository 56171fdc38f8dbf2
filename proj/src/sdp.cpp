#include "sofsyn/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace sofsyn {

Matrix LmiBlock::evaluate(const Vector& v) const {
  Matrix m = constant_term.dense();
  for (const auto& [idx, coeff] : coefficient_terms) {
    if (idx < 0 || idx >= v.size())
      throw std::invalid_argument("LmiBlock::evaluate: variable index out of range");
    m += v[idx] * coeff.dense();
  }
  return m;
}

SdpProblem SdpProblem::with_vars(int num_vars) {
  if (num_vars <= 0)
    throw std::invalid_argument("SdpProblem: num_vars must be positive");
  SdpProblem p;
  p.num_vars = num_vars;
  p.objective = Vector::Zero(num_vars);
  p.eq_lhs = Matrix::Zero(0, num_vars);
  p.eq_rhs = Vector::Zero(0);
  p.lower_bounds = Vector::Constant(num_vars, -1e6);
  p.upper_bounds = Vector::Constant(num_vars, 1e6);
  return p;
}

void SdpProblem::validate() const {
  if (num_vars <= 0) throw std::invalid_argument("SdpProblem: num_vars must be positive");
  if (objective.size() != num_vars)
    throw std::invalid_argument("SdpProblem: objective length != num_vars");
  if (lmi_blocks.empty())
    throw std::invalid_argument("SdpProblem: at least one LMI block required");
  if (eq_lhs.cols() != num_vars)
    throw std::invalid_argument("SdpProblem: eq_lhs must have num_vars columns");
  if (eq_lhs.rows() != eq_rhs.size())
    throw std::invalid_argument("SdpProblem: eq_lhs rows != eq_rhs length");
  if (lower_bounds.size() != num_vars || upper_bounds.size() != num_vars)
    throw std::invalid_argument("SdpProblem: bound vectors must have num_vars entries");
  for (int i = 0; i < num_vars; ++i)
    if (!(lower_bounds[i] < upper_bounds[i]))
      throw std::invalid_argument("SdpProblem: empty bound interval");
  for (const auto& block : lmi_blocks) {
    if (block.dim <= 0 || block.constant_term.dim() != block.dim)
      throw std::invalid_argument("SdpProblem: block constant term has wrong dimension");
    for (const auto& [idx, coeff] : block.coefficient_terms) {
      if (idx < 0 || idx >= num_vars)
        throw std::invalid_argument("SdpProblem: coefficient variable index out of range");
      if (coeff.dim() != block.dim)
        throw std::invalid_argument("SdpProblem: coefficient matrix has wrong dimension");
    }
  }
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::MaxIterations: return "max_iterations";
    case SolveStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

namespace {

struct DenseBlock {
  Matrix f0;                  // includes the +tau*I shift: S(v) = -f0 - sum v_i F_i
  std::vector<int> vars;
  std::vector<Matrix> coeffs;
};

struct BarrierState {
  bool interior = false;
  double value = 0.0;
  Vector grad;  // v-space
  Matrix hess;  // v-space
};

std::vector<DenseBlock> densify(const SdpProblem& problem, double tau,
                                bool add_phase1_var, int phase1_index) {
  std::vector<DenseBlock> out;
  out.reserve(problem.lmi_blocks.size());
  for (const auto& block : problem.lmi_blocks) {
    DenseBlock d;
    d.f0 = block.constant_term.dense() + tau * Matrix::Identity(block.dim, block.dim);
    for (const auto& [idx, coeff] : block.coefficient_terms) {
      d.vars.push_back(idx);
      d.coeffs.push_back(coeff.dense());
    }
    if (add_phase1_var) {
      d.vars.push_back(phase1_index);
      d.coeffs.push_back(-Matrix::Identity(block.dim, block.dim));
    }
    out.push_back(std::move(d));
  }
  return out;
}

// Barrier for S_j(v) > 0 with S_j = -(f0_j + sum v_i F_i), plus box terms.
BarrierState evaluate_barrier(const std::vector<DenseBlock>& blocks,
                              const Vector& lo, const Vector& hi,
                              const Vector& v, bool with_derivatives) {
  const int n = static_cast<int>(v.size());
  BarrierState st;
  st.value = 0.0;
  if (with_derivatives) {
    st.grad = Vector::Zero(n);
    st.hess = Matrix::Zero(n, n);
  }
  for (int i = 0; i < n; ++i) {
    const double a = v[i] - lo[i];
    const double b = hi[i] - v[i];
    if (a <= 0.0 || b <= 0.0) return st;  // not interior
    st.value -= std::log(a) + std::log(b);
    if (with_derivatives) {
      st.grad[i] += -1.0 / a + 1.0 / b;
      st.hess(i, i) += 1.0 / (a * a) + 1.0 / (b * b);
    }
  }
  for (const auto& block : blocks) {
    Matrix s = -block.f0;
    for (size_t k = 0; k < block.vars.size(); ++k)
      s.noalias() -= v[block.vars[k]] * block.coeffs[k];
    Eigen::LLT<Matrix> llt(s);
    if (llt.info() != Eigen::Success) return st;  // not interior
    const Matrix l = llt.matrixL();
    double logdet = 0.0;
    for (int i = 0; i < s.rows(); ++i) logdet += std::log(l(i, i));
    st.value -= 2.0 * logdet;
    if (!with_derivatives) continue;
    const auto lower = l.triangularView<Eigen::Lower>();
    const size_t k = block.vars.size();
    std::vector<Matrix> u(k);
    for (size_t a = 0; a < k; ++a) {
      Matrix tmp = lower.solve(block.coeffs[a]);
      u[a] = lower.solve(tmp.transpose());
      st.grad[block.vars[a]] += u[a].trace();
    }
    for (size_t a = 0; a < k; ++a) {
      for (size_t b = a; b < k; ++b) {
        const double h = u[a].cwiseProduct(u[b]).sum();
        st.hess(block.vars[a], block.vars[b]) += h;
        if (block.vars[a] != block.vars[b]) st.hess(block.vars[b], block.vars[a]) += h;
      }
    }
  }
  st.interior = true;
  return st;
}

bool is_interior(const std::vector<DenseBlock>& blocks, const Vector& lo,
                 const Vector& hi, const Vector& v) {
  for (int i = 0; i < v.size(); ++i)
    if (v[i] <= lo[i] || v[i] >= hi[i]) return false;
  for (const auto& block : blocks) {
    Matrix s = -block.f0;
    for (size_t k = 0; k < block.vars.size(); ++k)
      s.noalias() -= v[block.vars[k]] * block.coeffs[k];
    if (Eigen::LLT<Matrix>(s).info() != Eigen::Success) return false;
  }
  return true;
}

struct AffineSubspace {
  Vector v0;   // particular solution of the equalities
  Matrix z;    // orthonormal null-space basis (num_vars x free_dims)
  bool consistent = true;
};

AffineSubspace eliminate_equalities(const Matrix& e, const Vector& f, int num_vars) {
  AffineSubspace sub;
  if (e.rows() == 0) {
    sub.v0 = Vector::Zero(num_vars);
    sub.z = Matrix::Identity(num_vars, num_vars);
    return sub;
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(e);
  sub.v0 = cod.solve(f);
  const double scale = 1.0 + f.cwiseAbs().maxCoeff() + e.cwiseAbs().maxCoeff();
  if ((e * sub.v0 - f).cwiseAbs().maxCoeff() > 1e-8 * scale) {
    sub.consistent = false;
    return sub;
  }
  Eigen::FullPivLU<Matrix> lu(e);
  lu.setThreshold(1e-12);
  Matrix kernel = lu.kernel();
  if (kernel.cols() == 1 && kernel.isZero(0.0)) {
    sub.z = Matrix::Zero(num_vars, 0);
  } else {
    Eigen::HouseholderQR<Matrix> qr(kernel);
    sub.z = qr.householderQ() * Matrix::Identity(num_vars, kernel.cols());
  }
  return sub;
}

enum class CenterOutcome { Converged, Budget, Failure };

// Minimizes t * c.v + barrier(v) over v = v0 + Z y by damped Newton steps.
class CenteringProblem {
 public:
  CenteringProblem(const std::vector<DenseBlock>& blocks, const Vector& lo,
                   const Vector& hi, const Vector& c, const AffineSubspace& sub)
      : blocks_(blocks), lo_(lo), hi_(hi), c_(c), sub_(sub) {}

  // Damped Newton: the step 1/(1 + lambda) needs no merit-function line
  // search, which matters once t is large enough that differences of the
  // barrier objective fall below double precision.
  CenterOutcome center(double t, Vector& y, int budget, int& used) const {
    used = 0;
    // lambda^2/2 tolerance; lambda ~ 2e-3 inflates the duality-gap bound by a
    // fraction of a percent while staying reachable at extreme curvatures.
    constexpr double kDecrementTol = 2.5e-6;
    while (used < budget) {
      const Vector v = sub_.v0 + sub_.z * y;
      BarrierState st = evaluate_barrier(blocks_, lo_, hi_, v, true);
      if (!st.interior) return CenterOutcome::Failure;
      Vector grad_y = sub_.z.transpose() * (t * c_ + st.grad);
      Matrix hess_y = sub_.z.transpose() * st.hess * sub_.z;

      // Jacobi equilibration keeps the solve usable at extreme curvatures.
      Vector scale = hess_y.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
      Matrix hs = scale.asDiagonal() * hess_y * scale.asDiagonal();
      Vector gs = scale.asDiagonal() * grad_y;

      Vector step;
      double reg = 0.0;
      for (;;) {
        Matrix h = hs;
        if (reg > 0.0) h += reg * Matrix::Identity(h.rows(), h.cols());
        Eigen::LDLT<Matrix> ldlt(h);
        Vector u = ldlt.solve(-gs);
        step = scale.asDiagonal() * u;
        if (ldlt.info() == Eigen::Success && step.allFinite() &&
            grad_y.dot(step) < 0.0)
          break;
        reg = (reg == 0.0) ? 1e-14 : reg * 100.0;
        if (reg > 1e-2) return CenterOutcome::Failure;
      }

      const double decrement_sq = -grad_y.dot(step);
      if (0.5 * decrement_sq <= kDecrementTol) return CenterOutcome::Converged;
      const double lambda = std::sqrt(decrement_sq);

      bool accepted = false;
      // While t is moderate the merit function is representable accurately,
      // and a backtracking search takes much longer steps than the damped
      // rule. Past that scale phi differences drown in rounding error.
      if (t <= 1e5) {
        const double phi = t * c_.dot(v) + st.value;
        double alpha = 1.0;
        for (int bt = 0; bt < 40 && !accepted; ++bt) {
          const Vector y_trial = y + alpha * step;
          const Vector v_trial = sub_.v0 + sub_.z * y_trial;
          if (is_interior(blocks_, lo_, hi_, v_trial)) {
            BarrierState trial = evaluate_barrier(blocks_, lo_, hi_, v_trial, false);
            const double phi_trial = t * c_.dot(v_trial) + trial.value;
            if (phi_trial <= phi - 0.01 * alpha * decrement_sq) {
              y = y_trial;
              accepted = true;
            }
          }
          alpha *= 0.5;
        }
      }
      if (!accepted) {
        double alpha = lambda > 0.25 ? 1.0 / (1.0 + lambda) : 1.0;
        for (int bt = 0; bt < 60 && !accepted; ++bt) {
          const Vector y_trial = y + alpha * step;
          if (is_interior(blocks_, lo_, hi_, sub_.v0 + sub_.z * y_trial)) {
            y = y_trial;
            accepted = true;
          }
          alpha *= 0.5;
        }
      }
      ++used;
      if (!accepted) return CenterOutcome::Failure;
    }
    return CenterOutcome::Budget;
  }

 private:
  const std::vector<DenseBlock>& blocks_;
  const Vector& lo_;
  const Vector& hi_;
  const Vector& c_;
  const AffineSubspace& sub_;
};

double barrier_parameter(const std::vector<DenseBlock>& blocks, int num_vars) {
  double nu = 2.0 * num_vars;  // every variable carries finite box bounds
  for (const auto& block : blocks) nu += block.f0.rows();
  return nu;
}

Vector block_slacks_at(const SdpProblem& problem, const Vector& v) {
  Vector slacks(problem.lmi_blocks.size());
  for (size_t j = 0; j < problem.lmi_blocks.size(); ++j)
    slacks[static_cast<int>(j)] = largest_eigenvalue(problem.lmi_blocks[j].evaluate(v));
  return slacks;
}

}  // namespace

SdpSolution solve(const SdpProblem& problem, const SolverConfig& config) {
  problem.validate();
  const double tau = config.strictness_margin;

  SdpSolution sol;
  sol.v = Vector::Zero(problem.num_vars);

  AffineSubspace sub = eliminate_equalities(problem.eq_lhs, problem.eq_rhs,
                                            problem.num_vars);
  if (!sub.consistent) {
    sol.status = SolveStatus::Infeasible;
    return sol;
  }

  // --- Phase I: minimize s subject to M_j(v) + tau I <= s I. ---
  const int n = problem.num_vars;
  std::vector<DenseBlock> blocks1 = densify(problem, tau, true, n);

  Vector v_start = sub.v0;
  for (int i = 0; i < n; ++i) {
    const double lo = problem.lower_bounds[i];
    const double hi = problem.upper_bounds[i];
    if (v_start[i] > lo && v_start[i] < hi) continue;
    // A coordinate pinned to its box edge can be recentered freely only when
    // no equality row touches it.
    const bool coupled = problem.eq_lhs.rows() > 0 &&
                         problem.eq_lhs.col(i).cwiseAbs().maxCoeff() > 0.0;
    if (coupled) {
      sol.status = SolveStatus::NumericalFailure;
      return sol;
    }
    const double pad = std::min(1.0, 0.25 * (hi - lo));
    v_start[i] = std::min(std::max(v_start[i], lo + pad), hi - pad);
  }

  double s0 = -std::numeric_limits<double>::infinity();
  for (const auto& block : problem.lmi_blocks)
    s0 = std::max(s0, largest_eigenvalue(block.evaluate(v_start)) + tau);
  s0 = std::max(s0 + 1.0, 1.0);
  if (!std::isfinite(s0) || s0 > 1e12) {
    sol.status = SolveStatus::NumericalFailure;
    return sol;
  }

  Vector lo1(n + 1), hi1(n + 1);
  lo1.head(n) = problem.lower_bounds;
  hi1.head(n) = problem.upper_bounds;
  lo1[n] = -1e6;
  hi1[n] = std::max(1e6, 2.0 * s0 + 10.0);

  AffineSubspace sub1;
  sub1.v0 = Vector(n + 1);
  sub1.v0.head(n) = v_start;
  sub1.v0[n] = s0;
  sub1.z = Matrix::Zero(n + 1, sub.z.cols() + 1);
  sub1.z.topLeftCorner(n, sub.z.cols()) = sub.z;
  sub1.z(n, sub.z.cols()) = 1.0;

  Vector c1 = Vector::Zero(n + 1);
  c1[n] = 1.0;

  const double nu1 = barrier_parameter(blocks1, n + 1);
  const double exit_margin = std::max(1e-4, 10.0 * tau);

  CenteringProblem phase1(blocks1, lo1, hi1, c1, sub1);
  Vector y1 = Vector::Zero(sub1.z.cols());
  double t = 1.0;
  bool phase1_feasible = false;
  const bool trace1 = std::getenv("SOFSYN_SDP_TRACE") != nullptr;
  int budget = config.max_iterations;
  for (;;) {
    int used = 0;
    CenterOutcome outcome = phase1.center(t, y1, budget - sol.iterations, used);
    sol.iterations += used;
    const double s_val = (sub1.v0 + sub1.z * y1)[n];
    sol.phase1_objective = s_val;
    if (trace1)
      std::fprintf(stderr, "phase1 t=%.3e used=%d outcome=%d s=%.6e\n", t, used,
                   static_cast<int>(outcome), s_val);
    if (outcome == CenterOutcome::Failure) {
      sol.status = SolveStatus::NumericalFailure;
      return sol;
    }
    if (outcome == CenterOutcome::Budget) {
      sol.status = SolveStatus::MaxIterations;
      sol.v = (sub1.v0 + sub1.z * y1).head(n);
      sol.objective_value = problem.objective.dot(sol.v);
      sol.block_slacks = block_slacks_at(problem, sol.v);
      return sol;
    }
    if (s_val <= -exit_margin) {
      phase1_feasible = true;
      break;
    }
    const double gap = nu1 / t;
    if (s_val - gap > 0.0 || gap <= config.duality_gap_tol) {
      phase1_feasible = s_val < 0.0;
      break;
    }
    t *= 10.0;
  }

  if (!phase1_feasible) {
    sol.status = SolveStatus::Infeasible;
    return sol;
  }

  // --- Phase II: follow the central path of the true objective. ---
  Vector v_feas = (sub1.v0 + sub1.z * y1).head(n);
  std::vector<DenseBlock> blocks2 = densify(problem, tau, false, -1);
  if (!is_interior(blocks2, problem.lower_bounds, problem.upper_bounds, v_feas)) {
    sol.status = SolveStatus::NumericalFailure;
    return sol;
  }

  // Express the start point in the null-space coordinates of the equalities.
  Vector y2 = sub.z.transpose() * (v_feas - sub.v0);

  const double nu2 = barrier_parameter(blocks2, n);
  CenteringProblem phase2(blocks2, problem.lower_bounds, problem.upper_bounds,
                          problem.objective, sub);
  const bool pure_feasibility = problem.objective.isZero(0.0);
  const bool trace = std::getenv("SOFSYN_SDP_TRACE") != nullptr;
  int phase2_budget = config.max_iterations;
  int phase2_used = 0;
  t = 1.0;
  for (;;) {
    int used = 0;
    CenterOutcome outcome = phase2.center(t, y2, phase2_budget - phase2_used, used);
    phase2_used += used;
    sol.iterations += used;
    if (trace)
      std::fprintf(stderr, "phase2 t=%.3e used=%d outcome=%d obj=%.9f gap=%.3e\n", t,
                   used, static_cast<int>(outcome),
                   problem.objective.dot(sub.v0 + sub.z * y2), nu2 / t);
    if (outcome == CenterOutcome::Failure) {
      sol.status = SolveStatus::NumericalFailure;
      return sol;
    }
    if (outcome == CenterOutcome::Budget) {
      sol.status = SolveStatus::MaxIterations;
      break;
    }
    // 0.9 absorbs the slight gap-bound inflation of approximate centering.
    if (pure_feasibility || nu2 / t <= 0.9 * config.duality_gap_tol) {
      sol.status = SolveStatus::Optimal;
      break;
    }
    t *= 10.0;
  }

  sol.v = sub.v0 + sub.z * y2;
  sol.objective_value = problem.objective.dot(sol.v);
  sol.block_slacks = block_slacks_at(problem, sol.v);
  return sol;
}

FeasibilityReport check_feasible(const SdpProblem& problem, const Vector& v,
                                 const SolverConfig& config) {
  problem.validate();
  if (v.size() != problem.num_vars)
    throw std::invalid_argument("check_feasible: vector length != num_vars");
  FeasibilityReport report;
  report.block_slacks = block_slacks_at(problem, v);
  report.equality_residual =
      problem.eq_lhs.rows() == 0
          ? 0.0
          : (problem.eq_lhs * v - problem.eq_rhs).cwiseAbs().maxCoeff();
  double bound_violation = 0.0;
  for (int i = 0; i < problem.num_vars; ++i) {
    bound_violation = std::max(bound_violation, problem.lower_bounds[i] - v[i]);
    bound_violation = std::max(bound_violation, v[i] - problem.upper_bounds[i]);
  }
  report.bound_violation = std::max(0.0, bound_violation);
  report.feasible =
      report.block_slacks.maxCoeff() <= -config.strictness_margin + config.feas_tol &&
      report.equality_residual <= config.feas_tol &&
      report.bound_violation <= config.feas_tol;
  return report;
}

void dump_problem(const SdpProblem& problem, const std::string& path) {
  problem.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("dump_problem: cannot open " + path);
  out << std::setprecision(17);
  out << "# sdp problem dump\n"
      << "# format: num_vars line; objective line; bounds lines;\n"
      << "# 'block <dim> <num_terms>' then the constant matrix (dense, row-major,\n"
      << "# one row per line) followed by 'term <var>' + matrix for each term;\n"
      << "# 'equalities <rows>' then [row | rhs] lines. Constraint: F0 + sum v_i F_i <= -tau I.\n";
  out << "num_vars " << problem.num_vars << "\n";
  out << "objective";
  for (int i = 0; i < problem.num_vars; ++i) out << " " << problem.objective[i];
  out << "\nlower";
  for (int i = 0; i < problem.num_vars; ++i) out << " " << problem.lower_bounds[i];
  out << "\nupper";
  for (int i = 0; i < problem.num_vars; ++i) out << " " << problem.upper_bounds[i];
  out << "\n";
  auto write_matrix = [&out](const Matrix& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        out << (c ? " " : "") << m(r, c);
      out << "\n";
    }
  };
  for (const auto& block : problem.lmi_blocks) {
    out << "block " << block.dim << " " << block.coefficient_terms.size() << "\n";
    write_matrix(block.constant_term.dense());
    for (const auto& [idx, coeff] : block.coefficient_terms) {
      out << "term " << idx << "\n";
      write_matrix(coeff.dense());
    }
  }
  out << "equalities " << problem.eq_lhs.rows() << "\n";
  for (Eigen::Index r = 0; r < problem.eq_lhs.rows(); ++r) {
    for (Eigen::Index c = 0; c < problem.eq_lhs.cols(); ++c)
      out << problem.eq_lhs(r, c) << " ";
    out << "| " << problem.eq_rhs[r] << "\n";
  }
}

}  // namespace sofsyn

#include "sofsyn/synthesis.hpp"

#include <cmath>
#include <functional>

namespace sofsyn {

const char* to_string(Method method) {
  switch (method) {
    case Method::Lemma3Analysis: return "lemma3_analysis";
    case Method::Theorem1: return "theorem1";
    case Method::Corollary1: return "corollary1";
    case Method::Corollary2: return "corollary2";
  }
  return "unknown";
}

std::optional<Method> method_from_string(const std::string& token) {
  if (token == "lemma3_analysis") return Method::Lemma3Analysis;
  if (token == "theorem1") return Method::Theorem1;
  if (token == "corollary1") return Method::Corollary1;
  if (token == "corollary2") return Method::Corollary2;
  return std::nullopt;
}

const char* to_string(GainRecoveryMode mode) {
  switch (mode) {
    case GainRecoveryMode::Exact: return "exact";
    case GainRecoveryMode::LeastSquares: return "least_squares";
    case GainRecoveryMode::Failed: return "failed";
    case GainRecoveryMode::NotApplicable: return "not_applicable";
  }
  return "unknown";
}

void SynthesisRequest::validate(const UncertainSystem& system) const {
  system.validate();
  if (!optimize_mu && !(mu > 0))
    throw std::invalid_argument("mu must be positive");
  if (optimize_mu && !(weight_zeta > 0))
    throw std::invalid_argument("weight_zeta must be positive when optimizing mu");
  if (fixed_gamma && gamma < 0)
    throw std::invalid_argument("fixed gamma must be >= 0");
  if (!fixed_gamma && !(weight_objective > 0))
    throw std::invalid_argument("weight_objective must be positive");
  if (method == Method::Corollary2) {
    if (optimize_mu)
      throw std::invalid_argument("corollary2 requires a fixed mu");
    if (fixed_gamma)
      throw std::invalid_argument("corollary2 does not take a fixed gamma");
    if (c_weights.size() != 0) {
      if (c_weights.rows() != system.n || c_weights.cols() != system.n)
        throw std::invalid_argument("c_weights must be n x n");
      if (!(c_weights.array() > 0.0).all())
        throw std::invalid_argument("c_weights must be positive elementwise");
    }
  }
  if (!(solver.strictness_margin > 0) || !(solver.feas_tol > 0) ||
      !(solver.duality_gap_tol > 0) || solver.max_iterations <= 0)
    throw std::invalid_argument("solver configuration fields must be positive");
}

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

struct Vars {
  Matrix P, G, Q, Acal;
  double alpha = 0.0, eps1 = 0.0, eps2 = 0.0, zeta = 0.0, omega = 0.0;
};

Matrix read_symmetric(const Vector& v, int offset, int n) {
  Matrix out = Matrix::Zero(n, n);
  int idx = offset;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) {
      const double value = v[idx++];
      if (i == j)
        out(i, j) = value;
      else
        out(i, j) = out(j, i) = value * kInvSqrt2;
    }
  return out;
}

Matrix read_rect(const Vector& v, int offset, int rows, int cols) {
  Matrix out(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) out(i, j) = v[offset + j * rows + i];
  return out;
}

Vars materialize(const SynthesisProblem& layout, const Vector& v) {
  Vars vars;
  vars.P = read_symmetric(v, layout.p_offset, layout.n);
  if (layout.g_offset >= 0)
    vars.G = read_rect(v, layout.g_offset, layout.g_rows, layout.g_cols);
  if (layout.q_offset >= 0) vars.Q = read_rect(v, layout.q_offset, layout.m, layout.m);
  if (layout.acal_offset >= 0)
    vars.Acal = read_rect(v, layout.acal_offset, layout.n, layout.n);
  if (layout.alpha_index >= 0) vars.alpha = v[layout.alpha_index];
  if (layout.eps1_index >= 0) vars.eps1 = v[layout.eps1_index];
  if (layout.eps2_index >= 0) vars.eps2 = v[layout.eps2_index];
  if (layout.zeta_index >= 0) vars.zeta = v[layout.zeta_index];
  if (layout.omega_index >= 0) vars.omega = v[layout.omega_index];
  return vars;
}

class BlockGrid {
 public:
  explicit BlockGrid(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    offsets_.assign(sizes_.size() + 1, 0);
    for (size_t i = 0; i < sizes_.size(); ++i)
      offsets_[i + 1] = offsets_[i] + sizes_[i];
    dense_ = Matrix::Zero(offsets_.back(), offsets_.back());
  }
  void set(int r, int c, const Matrix& block) {
    dense_.block(offsets_[r], offsets_[c], sizes_[r], sizes_[c]) = block;
    if (r != c)
      dense_.block(offsets_[c], offsets_[r], sizes_[c], sizes_[r]) = block.transpose();
  }
  const Matrix& dense() const { return dense_; }

 private:
  std::vector<int> sizes_;
  std::vector<int> offsets_;
  Matrix dense_;
};

using BlockFn = std::function<Matrix(const Vars&)>;

// Lowers affine symbolic blocks into LmiBlock coefficient lists by probing
// each decision coordinate with a basis vector.
void lower_blocks(SynthesisProblem& out, const std::vector<BlockFn>& builders,
                  const std::vector<std::string>& names) {
  const int total = out.sdp.num_vars;
  const Vector zero = Vector::Zero(total);
  const Vars vars0 = materialize(out, zero);
  for (size_t b = 0; b < builders.size(); ++b) {
    const Matrix f0 = builders[b](vars0);
    LmiBlock block;
    block.dim = static_cast<int>(f0.rows());
    block.constant_term = SymmetricMatrix::from_dense(f0);
    for (int i = 0; i < total; ++i) {
      Vector ei = zero;
      ei[i] = 1.0;
      const Matrix fi = builders[b](materialize(out, ei)) - f0;
      if (fi.cwiseAbs().maxCoeff() > 0.0)
        block.coefficient_terms.push_back({i, SymmetricMatrix::from_dense(fi)});
    }
    out.sdp.lmi_blocks.push_back(std::move(block));
    out.block_names.push_back(names[b]);
  }
}

}  // namespace

SymmetricMatrix SynthesisProblem::read_p(const Vector& v) const {
  return SymmetricMatrix::from_dense(read_symmetric(v, p_offset, n));
}
Matrix SynthesisProblem::read_g(const Vector& v) const {
  return g_offset >= 0 ? read_rect(v, g_offset, g_rows, g_cols) : Matrix();
}
Matrix SynthesisProblem::read_q(const Vector& v) const {
  return q_offset >= 0 ? read_rect(v, q_offset, m, m) : Matrix();
}
Matrix SynthesisProblem::read_acal(const Vector& v) const {
  return acal_offset >= 0 ? read_rect(v, acal_offset, n, n) : Matrix();
}

SynthesisProblem build_synthesis_problem(const UncertainSystem& system,
                                         const SynthesisRequest& request) {
  request.validate(system);
  const Method method = request.method;
  const int n = system.n, m = system.m, p = system.p, q = system.q, d = system.d;

  SynthesisProblem out;
  out.n = n;
  out.m = m;
  out.p = p;
  out.q = q;
  out.d = d;

  int next = 0;
  out.p_offset = next;
  next += n * (n + 1) / 2;
  if (method == Method::Theorem1) {
    out.g_offset = next;
    out.g_rows = n;
    out.g_cols = p;
    next += n * p;
  } else if (method == Method::Corollary1 || method == Method::Corollary2) {
    out.g_offset = next;
    out.g_rows = m;
    out.g_cols = p;
    next += m * p;
    out.q_offset = next;
    next += m * m;
  }
  if (method == Method::Corollary2) {
    out.acal_offset = next;
    next += n * n;
  }
  const bool maximize_gamma = !request.fixed_gamma && method != Method::Corollary2;
  if (maximize_gamma) out.alpha_index = next++;
  out.eps1_index = next++;
  out.eps2_index = next++;
  if (request.optimize_mu) out.zeta_index = next++;
  if (method == Method::Corollary2) out.omega_index = next++;

  out.sdp = SdpProblem::with_vars(next);

  // Gain-coupled terms; the uncontrolled analysis form has none.
  auto gain_a = [&, method](const Vars& vars) -> Matrix {
    Matrix lambda = system.A.transpose() * vars.P;
    if (method == Method::Theorem1)
      lambda += system.C.transpose() * vars.G.transpose();
    else if (method == Method::Corollary1 || method == Method::Corollary2)
      lambda += system.C.transpose() * vars.G.transpose() * system.B1.transpose();
    return lambda;
  };
  auto uncertainty_coupling = [&, method](const Vars& vars) -> Matrix {
    Matrix coupling = vars.P * system.M1;
    if (method == Method::Theorem1)
      coupling += vars.G * system.M2;
    else if (method == Method::Corollary1 || method == Method::Corollary2)
      coupling += system.B1 * vars.G * system.M2;
    return coupling;
  };
  auto disturbance_coupling = [&, method](const Vars& vars) -> Matrix {
    Matrix coupling = system.B2.transpose() * vars.P;
    if (method == Method::Theorem1)
      coupling += system.D.transpose() * vars.G.transpose();
    else if (method == Method::Corollary1 || method == Method::Corollary2)
      coupling += system.D.transpose() * vars.G.transpose() * system.B1.transpose();
    return coupling;
  };

  const Matrix hth = system.H.transpose() * system.H;
  const Matrix ntn = system.N.transpose() * system.N;
  const Matrix eye_n = Matrix::Identity(n, n);
  const double gamma_sq = request.gamma * request.gamma;

  std::vector<BlockFn> builders;
  std::vector<std::string> names;

  // Admissibility block: couples the Lyapunov decrement, the nonlinearity
  // bound and the norm-bounded uncertainty channel.
  if (maximize_gamma) {
    builders.push_back([&, method](const Vars& vars) -> Matrix {
      BlockGrid grid({n, n, n, n, q});
      grid.set(0, 0, hth - vars.P + vars.eps2 * ntn);
      grid.set(0, 1, method == Method::Corollary2 ? vars.Acal : eye_n);
      grid.set(0, 2, gain_a(vars));
      grid.set(1, 1, method == Method::Corollary2
                         ? Matrix(-eye_n)
                         : Matrix(-vars.alpha * eye_n));
      grid.set(2, 2, -0.5 * vars.P);
      grid.set(2, 3, vars.P);
      grid.set(2, 4, uncertainty_coupling(vars));
      grid.set(3, 3, vars.P - 2.0 * vars.eps1 * eye_n);
      grid.set(4, 4, -vars.eps2 * Matrix::Identity(q, q));
      return grid.dense();
    });
  } else {
    // Fixed admissible constant: the Schur pair collapses into the (1,1)
    // entry as (1 + eps1) gamma^2 I, leaving a feasibility block.
    builders.push_back([&](const Vars& vars) -> Matrix {
      BlockGrid grid({n, n, n, q});
      grid.set(0, 0, hth - vars.P + vars.eps2 * ntn +
                         (1.0 + vars.eps1) * gamma_sq * eye_n);
      grid.set(0, 1, gain_a(vars));
      grid.set(1, 1, -0.5 * vars.P);
      grid.set(1, 2, vars.P);
      grid.set(1, 3, uncertainty_coupling(vars));
      grid.set(2, 2, vars.P - 2.0 * vars.eps1 * eye_n);
      grid.set(3, 3, -vars.eps2 * Matrix::Identity(q, q));
      return grid.dense();
    });
  }
  names.push_back("admissibility");

  // Attenuation block: |z| <= mu |w| with zeta = mu^2 entering linearly.
  builders.push_back([&, request](const Vars& vars) -> Matrix {
    const double zeta = request.optimize_mu ? vars.zeta : request.mu * request.mu;
    BlockGrid grid({d, n, n});
    grid.set(0, 0, -zeta * Matrix::Identity(d, d));
    grid.set(0, 1, disturbance_coupling(vars));
    grid.set(0, 2, disturbance_coupling(vars));
    grid.set(1, 1, -0.5 * vars.P);
    grid.set(2, 2, -eye_n);
    return grid.dense();
  });
  names.push_back("attenuation");

  builders.push_back([&](const Vars& vars) -> Matrix { return -vars.P; });
  names.push_back("p_positive");

  if (request.cap_p_below_identity) {
    builders.push_back([&](const Vars& vars) -> Matrix { return vars.P - eye_n; });
    names.push_back("p_identity_cap");
  }

  if (method == Method::Corollary1 || method == Method::Corollary2) {
    const Matrix eye_m = Matrix::Identity(m, m);
    builders.push_back([&, eye_m](const Vars& vars) -> Matrix {
      BlockGrid grid({m, m});
      grid.set(0, 0, -eye_m);
      grid.set(0, 1, -(eye_m - vars.Q));
      grid.set(1, 1, -eye_m);
      return grid.dense();  // -Pi1, so Pi1 > 0 becomes -Pi1 <= -tau I
    });
    names.push_back("q_nonsingular");
  }

  if (method == Method::Corollary2) {
    Matrix c_weights = request.c_weights.size() == 0 ? Matrix::Ones(n, n)
                                                     : request.c_weights;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double cij = c_weights(i, j);
        builders.push_back([&, i, j, cij](const Vars& vars) -> Matrix {
          Matrix cell(1, 1);
          cell(0, 0) = vars.omega - cij * vars.Acal(i, j);
          return cell;
        });
        names.push_back("weight_floor_" + std::to_string(i + 1) + "_" +
                        std::to_string(j + 1));
      }
  }

  lower_blocks(out, builders, names);

  // Equality coupling P B1 = B1 Q, imposed row-wise.
  if (method == Method::Corollary1 || method == Method::Corollary2) {
    const int rows = n * m;
    const int total = out.sdp.num_vars;
    auto residual = [&](const Vector& v) -> Vector {
      const Vars vars = materialize(out, v);
      return vec(vars.P * system.B1 - system.B1 * vars.Q);
    };
    const Vector r0 = residual(Vector::Zero(total));
    Matrix e(rows, total);
    for (int i = 0; i < total; ++i) {
      Vector ei = Vector::Zero(total);
      ei[i] = 1.0;
      e.col(i) = residual(ei) - r0;
    }
    out.sdp.eq_lhs = e;
    out.sdp.eq_rhs = -r0;
  }

  // Objective and variable boxes.
  Vector c = Vector::Zero(out.sdp.num_vars);
  if (method == Method::Corollary2) {
    c[out.eps1_index] = 1.0;
    c[out.omega_index] = -1.0;
    for (int k = 0; k < n * n; ++k)
      out.sdp.lower_bounds[out.acal_offset + k] = 0.0;
    out.sdp.lower_bounds[out.omega_index] = 0.0;
  } else {
    if (maximize_gamma) c[out.alpha_index] = request.weight_objective;
    c[out.eps1_index] = request.weight_objective;
    if (request.optimize_mu) c[out.zeta_index] = request.weight_zeta;
  }
  out.sdp.objective = c;

  return out;
}

namespace {

int svd_rank(const Matrix& m, double rel_threshold = 1e-9) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const double smax = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
  if (smax == 0.0) return 0;
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > rel_threshold * smax) ++rank;
  return rank;
}

SynthesisResult run_synthesis(const UncertainSystem& system,
                              const SynthesisRequest& request) {
  SynthesisProblem problem = build_synthesis_problem(system, request);
  SdpSolution sol = solve(problem.sdp, request.solver);

  SynthesisResult result;
  result.method = request.method;
  result.status = sol.status;
  result.iterations = sol.iterations;
  result.mu = request.optimize_mu ? std::numeric_limits<double>::quiet_NaN()
                                  : request.mu;
  if (sol.status != SolveStatus::Optimal) return result;

  const Vector& v = sol.v;
  result.decision_vector = v;
  result.block_slacks = sol.block_slacks;
  result.objective_value = sol.objective_value;
  result.P = problem.read_p(v);
  result.eps1_star = v[problem.eps1_index];
  result.eps2 = v[problem.eps2_index];
  if (request.optimize_mu) result.mu = std::sqrt(v[problem.zeta_index]);

  if (problem.alpha_index >= 0) {
    result.alpha_star = v[problem.alpha_index];
    result.gamma_star =
        1.0 / std::sqrt(result.alpha_star * (1.0 + result.eps1_star));
  } else if (request.fixed_gamma) {
    result.gamma_star = request.gamma;
  }

  if (request.method == Method::Theorem1) {
    result.G = problem.read_g(v);
    GainRecovery recovery =
        recover_gain_kronecker(result.P, system.B1, result.G);
    result.rank_condition_holds = recovery.rank_condition;
    result.gain_residual = recovery.residual;
    if (!recovery.kbar.allFinite()) {
      result.gain_recovery = GainRecoveryMode::Failed;
    } else {
      result.K = system.B1.transpose() * recovery.kbar;
      result.gain_recovery = recovery.rank_condition
                                 ? GainRecoveryMode::Exact
                                 : GainRecoveryMode::LeastSquares;
    }
  } else if (request.method == Method::Corollary1 ||
             request.method == Method::Corollary2) {
    result.G = problem.read_g(v);
    result.Q = problem.read_q(v);
    Eigen::JacobiSVD<Matrix> svd(result.Q);
    result.q_min_singular_value = svd.singularValues().minCoeff();
    result.equality_residual =
        (result.P.dense() * system.B1 - system.B1 * result.Q)
            .cwiseAbs()
            .maxCoeff();
    if (result.q_min_singular_value <= 1e-9) {
      result.gain_recovery = GainRecoveryMode::Failed;  // defensive; the
      // nonsingularity block makes this unreachable for feasible problems
    } else {
      result.K = result.Q.partialPivLu().solve(result.G);
      result.gain_residual = spectral_norm(result.Q * result.K - result.G);
      result.gain_recovery = GainRecoveryMode::Exact;
    }
  }

  if (request.method == Method::Corollary2) {
    result.Acal = problem.read_acal(v);
    result.omega_star = v[problem.omega_index];
    result.Gamma_star =
        result.Acal / std::sqrt(1.0 + result.eps1_star);
    result.gamma_star = spectral_norm(result.Gamma_star);
  }

  return result;
}

}  // namespace

SynthesisResult analyze_lemma3(const UncertainSystem& system,
                               const SynthesisRequest& request) {
  SynthesisRequest req = request;
  req.method = Method::Lemma3Analysis;
  return run_synthesis(system, req);
}

SynthesisResult synth_theorem1(const UncertainSystem& system,
                               const SynthesisRequest& request) {
  SynthesisRequest req = request;
  req.method = Method::Theorem1;
  return run_synthesis(system, req);
}

SynthesisResult synth_corollary1(const UncertainSystem& system,
                                 const SynthesisRequest& request) {
  SynthesisRequest req = request;
  req.method = Method::Corollary1;
  return run_synthesis(system, req);
}

SynthesisResult synth_corollary2(const UncertainSystem& system,
                                 const SynthesisRequest& request) {
  SynthesisRequest req = request;
  req.method = Method::Corollary2;
  return run_synthesis(system, req);
}

SynthesisResult synthesize(const UncertainSystem& system,
                           const SynthesisRequest& request) {
  return run_synthesis(system, request);
}

GainRecovery recover_gain_kronecker(const SymmetricMatrix& p, const Matrix& b1,
                                    const Matrix& g) {
  const int n = p.dim();
  const int outputs = static_cast<int>(g.cols());
  if (b1.rows() != n || g.rows() != n)
    throw std::invalid_argument("recover_gain_kronecker: dimension mismatch");

  const Matrix pbb = p.dense() * b1 * b1.transpose();
  const Matrix coeff = kron(Matrix::Identity(outputs, outputs), pbb);
  const Vector rhs = vec(g);

  Matrix augmented(coeff.rows(), coeff.cols() + 1);
  augmented << coeff, rhs;

  GainRecovery out;
  out.rank_condition = svd_rank(coeff) == svd_rank(augmented);

  Eigen::JacobiSVD<Matrix> svd(coeff, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-9);
  const Vector kbar_vec = svd.solve(rhs);
  out.kbar = Matrix(n, outputs);
  for (int j = 0; j < outputs; ++j)
    for (int i = 0; i < n; ++i) out.kbar(i, j) = kbar_vec[j * n + i];
  out.residual = spectral_norm(pbb * out.kbar - g);
  return out;
}

Matrix transform_feedthrough(const Matrix& k, const Matrix& d1) {
  if (k.rows() != d1.cols() || k.cols() != d1.rows())
    throw std::invalid_argument("transform_feedthrough: K and D1 dims must be m x p / p x m");
  const int m = static_cast<int>(k.rows());
  const Matrix resolvent = Matrix::Identity(m, m) + k * d1;
  Eigen::JacobiSVD<Matrix> svd(resolvent);
  if (svd.singularValues().minCoeff() <= 1e-9)
    throw std::domain_error("transform_feedthrough: I + K D1 is singular");
  return resolvent.partialPivLu().solve(k);
}

}  // namespace sofsyn

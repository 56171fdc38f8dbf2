#include "sofsyn/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

namespace sofsyn {

namespace {
constexpr double kDivergenceLimit = 1e9;
}

Trajectory simulate(const UncertainSystem& system, const Matrix& K,
                    const NonlinearityDescriptor& phi, const UncertaintySignal& F,
                    const DisturbanceSignal& w, const Vector& x0, int horizon,
                    const SymmetricMatrix* P) {
  system.validate();
  if (horizon < 1) throw std::invalid_argument("simulate: horizon >= 1 required");
  if (x0.size() != system.n)
    throw std::invalid_argument("simulate: x0 must have n entries");
  if (K.rows() != system.m || K.cols() != system.p)
    throw std::invalid_argument("simulate: K must be m x p");
  if (F.q != system.q)
    throw std::invalid_argument("simulate: uncertainty signal dimension mismatch");
  if (w.d != system.d)
    throw std::invalid_argument("simulate: disturbance signal dimension mismatch");
  if (P && P->dim() != system.n)
    throw std::invalid_argument("simulate: P must be n x n");

  Trajectory traj;
  traj.horizon = horizon;
  traj.has_lyapunov = P != nullptr;
  const Matrix p_dense = P ? P->dense() : Matrix();

  Vector x = x0;
  for (int k = 0; k <= horizon; ++k) {
    const Matrix fk = F.at(k);
    const Vector wk = w.at(k);
    const Vector yk = (system.C + system.M2 * fk * system.N) * x + system.D * wk;
    const Vector uk = K * yk;
    traj.x.push_back(x);
    traj.y.push_back(yk);
    traj.u.push_back(uk);
    traj.z.push_back(system.H * x);
    traj.w.push_back(wk);
    if (P) traj.lyapunov.push_back(x.dot(p_dense * x));
    if (k == horizon) break;
    x = (system.A + system.M1 * fk * system.N) * x +
        evaluate_nonlinearity(phi, x, uk) + system.B1 * uk + system.B2 * wk;
    if (!x.allFinite() || x.norm() > kDivergenceLimit) {
      traj.diverged = true;
      break;
    }
  }
  return traj;
}

double empirical_l2_gain(const UncertainSystem& system, const Matrix& K,
                         const NonlinearityDescriptor& phi, const UncertaintySignal& F,
                         const std::vector<DisturbanceSignal>& w_ensemble,
                         int horizon) {
  if (w_ensemble.empty())
    throw std::invalid_argument("empirical_l2_gain: empty disturbance ensemble");
  double worst = 0.0;
  for (const DisturbanceSignal& w : w_ensemble) {
    const double w_energy = w.energy(horizon);
    if (w_energy <= 0.0)
      throw std::invalid_argument("empirical_l2_gain: zero-energy disturbance");
    Trajectory traj =
        simulate(system, K, phi, F, w, Vector::Zero(system.n), horizon);
    double z_energy = 0.0;
    for (const Vector& z : traj.z) z_energy += z.squaredNorm();
    double applied_energy = 0.0;
    for (const Vector& wk : traj.w) applied_energy += wk.squaredNorm();
    if (applied_energy <= 0.0)
      throw std::invalid_argument("empirical_l2_gain: zero-energy disturbance");
    worst = std::max(worst, std::sqrt(z_energy / applied_energy));
  }
  return worst;
}

LyapunovCheck lyapunov_decrement_check(const Trajectory& trajectory,
                                       double tolerance) {
  if (!trajectory.has_lyapunov)
    throw std::invalid_argument("lyapunov_decrement_check: trajectory lacks V");
  for (const Vector& wk : trajectory.w)
    if (wk.cwiseAbs().maxCoeff() != 0.0)
      throw std::invalid_argument("lyapunov_decrement_check: requires w = 0");
  LyapunovCheck check;
  for (size_t k = 0; k + 1 < trajectory.lyapunov.size(); ++k) {
    if (trajectory.x[k].norm() <= tolerance) continue;
    if (!(trajectory.lyapunov[k + 1] < trajectory.lyapunov[k])) {
      check.decreasing = false;
      check.first_violation = static_cast<int>(k);
      break;
    }
  }
  return check;
}

NonlinearityDescriptor random_sinusoid_perturbation(int n, double lipschitz,
                                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coeff_dist(-1.0, 1.0);
  std::uniform_int_distribution<int> source_dist(0, n - 1);
  Vector coefficients(n);
  Eigen::VectorXi sources(n);
  for (int i = 0; i < n; ++i) {
    coefficients[i] = coeff_dist(rng);
    sources[i] = source_dist(rng);
  }
  NonlinearityDescriptor desc =
      NonlinearityDescriptor::coordinate_sinusoid(coefficients, sources);
  const double current = desc.exact_lipschitz();
  if (current > 0.0 && lipschitz >= 0.0)
    desc = NonlinearityDescriptor::coordinate_sinusoid(
        coefficients * (lipschitz / current), sources);
  return desc;
}

double monte_carlo_robustness(const UncertainSystem& system, const Matrix& K,
                              const NonlinearityDescriptor& base_phi,
                              double perturbation_lipschitz, int trials,
                              std::uint64_t seed,
                              const MonteCarloOptions& options) {
  if (perturbation_lipschitz < 0)
    throw std::invalid_argument("monte_carlo_robustness: lipschitz must be >= 0");
  if (trials <= 0)
    throw std::invalid_argument("monte_carlo_robustness: trials must be positive");

  int converged = 0;
  for (int trial = 0; trial < trials; ++trial) {
    const std::uint64_t trial_seed = seed + 1000003ULL * (trial + 1);
    std::mt19937_64 rng(trial_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector x0(system.n);
    for (int i = 0; i < system.n; ++i) x0[i] = normal(rng);
    if (x0.norm() == 0.0) x0[0] = 1.0;
    x0 /= x0.norm();

    NonlinearityDescriptor delta = random_sinusoid_perturbation(
        system.n, perturbation_lipschitz, trial_seed ^ 0x5bd1e995ULL);
    NonlinearityDescriptor combined = NonlinearityDescriptor::custom(
        [base_phi, delta](const Vector& x, const Vector& u) {
          return Vector(evaluate_nonlinearity(base_phi, x, u) +
                        evaluate_nonlinearity(delta, x, u));
        },
        base_phi.declared_lipschitz + perturbation_lipschitz);

    Trajectory traj = simulate(
        system, K, combined, UncertaintySignal::random_switching(system.q, trial_seed),
        DisturbanceSignal::zero(system.d), x0, options.horizon);
    if (!traj.diverged &&
        traj.x.back().norm() <= options.convergence_ratio * x0.norm())
      ++converged;
  }
  return static_cast<double>(converged) / trials;
}

void write_trajectory_csv(const Trajectory& trajectory, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_trajectory_csv: cannot open " + path);
  const int n = trajectory.x.empty() ? 0 : static_cast<int>(trajectory.x[0].size());
  const int m = trajectory.u.empty() ? 0 : static_cast<int>(trajectory.u[0].size());
  const int p = trajectory.y.empty() ? 0 : static_cast<int>(trajectory.y[0].size());
  const int nz = trajectory.z.empty() ? 0 : static_cast<int>(trajectory.z[0].size());
  const int d = trajectory.w.empty() ? 0 : static_cast<int>(trajectory.w[0].size());

  out << "k";
  for (int i = 1; i <= n; ++i) out << ",x" << i;
  for (int i = 1; i <= m; ++i) out << ",u" << i;
  for (int i = 1; i <= p; ++i) out << ",y" << i;
  for (int i = 1; i <= nz; ++i) out << ",z" << i;
  for (int i = 1; i <= d; ++i) out << ",w" << i;
  if (trajectory.has_lyapunov) out << ",V";
  out << "\n";

  char buffer[64];
  auto emit = [&](double value) {
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    out << "," << buffer;
  };
  for (int k = 0; k < trajectory.steps_recorded(); ++k) {
    out << k;
    for (int i = 0; i < n; ++i) emit(trajectory.x[k][i]);
    for (int i = 0; i < m; ++i) emit(trajectory.u[k][i]);
    for (int i = 0; i < p; ++i) emit(trajectory.y[k][i]);
    for (int i = 0; i < nz; ++i) emit(trajectory.z[k][i]);
    for (int i = 0; i < d; ++i) emit(trajectory.w[k][i]);
    if (trajectory.has_lyapunov) emit(trajectory.lyapunov[k]);
    out << "\n";
  }
}

}  // namespace sofsyn

#pragma once

#include "sofsyn/synthesis.hpp"
#include "sofsyn/system.hpp"

#include <string>
#include <vector>

namespace sofsyn {

/// Time-indexed closed-loop record. Every array holds horizon + 1 samples
/// unless the run aborted; the dynamics can be replayed exactly from the
/// recorded inputs and the generating signals.
struct Trajectory {
  int horizon = 0;
  bool diverged = false;
  bool has_lyapunov = false;
  std::vector<Vector> x, u, y, z, w;
  std::vector<double> lyapunov;  // x^T P x when P was supplied

  int steps_recorded() const { return static_cast<int>(x.size()); }
};

/// Rolls out x+ = (A + M1 F N) x + phi(x,u) + B1 u + B2 w under u = K y,
/// y = (C + M2 F N) x + D w, recording z = H x and optionally x^T P x.
/// A state norm above 1e9 aborts the run with `diverged` set and the
/// partial trajectory retained.
Trajectory simulate(const UncertainSystem& system, const Matrix& K,
                    const NonlinearityDescriptor& phi, const UncertaintySignal& F,
                    const DisturbanceSignal& w, const Vector& x0, int horizon,
                    const SymmetricMatrix* P = nullptr);

/// Worst-case ratio sqrt(sum |z|^2) / sqrt(sum |w|^2) over the ensemble,
/// from zero initial state. Throws on a zero-energy disturbance.
double empirical_l2_gain(const UncertainSystem& system, const Matrix& K,
                         const NonlinearityDescriptor& phi, const UncertaintySignal& F,
                         const std::vector<DisturbanceSignal>& w_ensemble,
                         int horizon);

struct LyapunovCheck {
  bool decreasing = true;
  int first_violation = -1;
};

/// True iff V(k+1) < V(k) whenever |x(k)| > tolerance, for a trajectory
/// simulated with w = 0 and the Lyapunov value recorded.
LyapunovCheck lyapunov_decrement_check(const Trajectory& trajectory,
                                       double tolerance);

struct MonteCarloOptions {
  int horizon = 200;
  double convergence_ratio = 1e-3;  // require |x(horizon)| <= ratio * |x0|
};

/// Samples additive coordinate-sinusoid perturbations with Lipschitz constant
/// exactly `perturbation_lipschitz`, simulates from random unit initial
/// states with worst-case-seeking switching uncertainty and w = 0, and
/// returns the fraction of converging runs.
double monte_carlo_robustness(const UncertainSystem& system, const Matrix& K,
                              const NonlinearityDescriptor& base_phi,
                              double perturbation_lipschitz, int trials,
                              std::uint64_t seed,
                              const MonteCarloOptions& options = {});

/// Random coordinate-sinusoid descriptor rescaled to the requested Lipschitz
/// constant (exact for this catalog). Exposed for the robustness harnesses.
NonlinearityDescriptor random_sinusoid_perturbation(int n, double lipschitz,
                                                    std::uint64_t seed);

/// Header k,x1..xn,u1..um,y1..yp,z1..z_nz,w1..wd,V; 17 significant digits.
void write_trajectory_csv(const Trajectory& trajectory, const std::string& path);

}  // namespace sofsyn

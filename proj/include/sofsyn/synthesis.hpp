#pragma once

#include "sofsyn/sdp.hpp"
#include "sofsyn/system.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sofsyn {

/// Synthesis routes. The selector tokens double as the CLI values.
enum class Method { Lemma3Analysis, Theorem1, Corollary1, Corollary2 };

const char* to_string(Method method);
std::optional<Method> method_from_string(const std::string& token);

struct SynthesisRequest {
  Method method = Method::Corollary1;

  /// Attenuation level: fixed mu, or optimized through zeta = mu^2.
  double mu = 2.5;
  bool optimize_mu = false;

  /// Lipschitz mode: maximize the admissible constant (default), or check
  /// feasibility at a fixed constant with the admissibility variable removed.
  bool fixed_gamma = false;
  double gamma = 0.0;

  /// Scalarization weights for the combined objective.
  double weight_objective = 1.0;  // multiplies alpha + eps1 (or eps1 alone)
  double weight_zeta = 1.0;       // multiplies zeta when optimize_mu is set

  /// Element-wise emphasis weights c_ij > 0 (Corollary2 only); empty = all ones.
  Matrix c_weights;

  /// Adds P <= (1 - tau) I, which the admissibility derivation relies on.
  /// Switch off to reproduce the bare printed feasible set.
  bool cap_p_below_identity = true;

  SolverConfig solver;

  void validate(const UncertainSystem& system) const;
};

enum class GainRecoveryMode { Exact, LeastSquares, Failed, NotApplicable };

const char* to_string(GainRecoveryMode mode);

struct SynthesisResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  Method method = Method::Corollary1;

  SymmetricMatrix P;
  Matrix G;           // n x p (Theorem1) or m x p (corollaries)
  Matrix Q;           // m x m, corollaries only (0 x 0 otherwise)
  Matrix K;           // m x p recovered gain (0 x 0 when unavailable)
  Matrix Gamma_star;  // n x n matrix-type admissible bound, Corollary2 only
  Matrix Acal;        // raw matrix variable behind Gamma_star, Corollary2 only

  double alpha_star = std::numeric_limits<double>::quiet_NaN();
  double eps1_star = std::numeric_limits<double>::quiet_NaN();
  double eps2 = std::numeric_limits<double>::quiet_NaN();
  double gamma_star = std::numeric_limits<double>::quiet_NaN();
  double mu = std::numeric_limits<double>::quiet_NaN();
  double omega_star = std::numeric_limits<double>::quiet_NaN();  // Corollary2

  GainRecoveryMode gain_recovery = GainRecoveryMode::NotApplicable;
  double gain_residual = 0.0;
  bool rank_condition_holds = false;  // Theorem1 only

  // Diagnostics.
  Vector decision_vector;
  Vector block_slacks;
  double equality_residual = 0.0;
  double q_min_singular_value = 0.0;
  double objective_value = 0.0;
  int iterations = 0;
};

/// The lowered conic program plus enough layout information to rebuild the
/// printed blocks at any decision vector (used by certificate checks).
struct SynthesisProblem {
  SdpProblem sdp;
  std::vector<std::string> block_names;

  int n = 0, m = 0, p = 0, q = 0, d = 0;
  // Variable ranges inside the decision vector; -1 when absent.
  int p_offset = -1;
  int g_offset = -1, g_rows = 0, g_cols = 0;
  int q_offset = -1;
  int acal_offset = -1;
  int alpha_index = -1, eps1_index = -1, eps2_index = -1;
  int zeta_index = -1, omega_index = -1;

  SymmetricMatrix read_p(const Vector& v) const;
  Matrix read_g(const Vector& v) const;
  Matrix read_q(const Vector& v) const;
  Matrix read_acal(const Vector& v) const;
};

SynthesisProblem build_synthesis_problem(const UncertainSystem& system,
                                         const SynthesisRequest& request);

/// Stability / admissibility / attenuation analysis of the uncontrolled form
///   x+ = (A + M1 F N) x + phi + B2 w,  z = H x
/// (B1, C, D and M2 of the system are ignored).
SynthesisResult analyze_lemma3(const UncertainSystem& system,
                               const SynthesisRequest& request);

SynthesisResult synth_theorem1(const UncertainSystem& system,
                               const SynthesisRequest& request);
SynthesisResult synth_corollary1(const UncertainSystem& system,
                                 const SynthesisRequest& request);
SynthesisResult synth_corollary2(const UncertainSystem& system,
                                 const SynthesisRequest& request);

/// Dispatches on request.method.
SynthesisResult synthesize(const UncertainSystem& system,
                           const SynthesisRequest& request);

struct GainRecovery {
  Matrix kbar;           // n x p
  double residual = 0.0; // |P B1 B1^T Kbar - G| (spectral norm)
  bool rank_condition = false;
};

/// Solves (I_p kron P B1 B1^T) vec(Kbar) = vec(G) in the least-squares sense
/// and reports whether vec(G) lies in the column space (rank test on the
/// coefficient matrix vs. the augmented matrix, relative threshold 1e-9).
GainRecovery recover_gain_kronecker(const SymmetricMatrix& p, const Matrix& b1,
                                    const Matrix& g);

/// Gain for a plant whose output carries a direct feedthrough D1 of the
/// input: returns (I + K D1)^{-1} K. Throws std::domain_error when I + K D1
/// is singular.
Matrix transform_feedthrough(const Matrix& k, const Matrix& d1);

}  // namespace sofsyn

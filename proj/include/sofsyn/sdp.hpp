#pragma once

#include "sofsyn/matrix.hpp"

#include <string>
#include <utility>
#include <vector>

namespace sofsyn {

/// One affine matrix inequality block. The block represents the map
///   M(v) = F0 + sum_i v_i * F_i
/// and the constraint enforced by the solver is M(v) <= -tau * I, where tau
/// is SolverConfig::strictness_margin.
struct LmiBlock {
  int dim = 0;
  SymmetricMatrix constant_term;                               // F0
  std::vector<std::pair<int, SymmetricMatrix>> coefficient_terms;  // (var, Fi)

  Matrix evaluate(const Vector& v) const;
};

/// Canonical conic program:
///   minimize   objective . v
///   subject to M_j(v) <= -tau I   for every LMI block j
///              eq_lhs v = eq_rhs
///              lower <= v <= upper  (componentwise)
struct SdpProblem {
  int num_vars = 0;
  Vector objective;
  std::vector<LmiBlock> lmi_blocks;
  Matrix eq_lhs;   // zero-row matrix when there are no equalities
  Vector eq_rhs;
  Vector lower_bounds;
  Vector upper_bounds;

  /// Zero objective, no blocks, no equalities, default box [-1e6, 1e6].
  static SdpProblem with_vars(int num_vars);

  void validate() const;  // throws std::invalid_argument on malformed input
};

struct SolverConfig {
  double strictness_margin = 1e-6;  // tau: strict "< 0" becomes "<= -tau I"
  double feas_tol = 1e-7;
  double duality_gap_tol = 1e-7;
  int max_iterations = 200;  // Newton-step budget per phase
};

enum class SolveStatus { Optimal, Infeasible, MaxIterations, NumericalFailure };

const char* to_string(SolveStatus status);

struct SdpSolution {
  SolveStatus status = SolveStatus::NumericalFailure;
  Vector v;
  double objective_value = 0.0;
  Vector block_slacks;        // largest eigenvalue of M_j(v) per block
  int iterations = 0;         // total Newton steps across both phases
  double phase1_objective = 0.0;  // final value of the phase-I relaxation
};

struct FeasibilityReport {
  bool feasible = false;
  Vector block_slacks;
  double equality_residual = 0.0;  // max-norm of eq_lhs v - eq_rhs
  double bound_violation = 0.0;
};

/// Log-determinant barrier interior-point solver with a phase-I feasibility
/// stage. Equalities are eliminated onto the null space of eq_lhs before the
/// Newton iterations.
SdpSolution solve(const SdpProblem& problem, const SolverConfig& config = {});

/// Evaluates every block, equality and bound at `v`.
FeasibilityReport check_feasible(const SdpProblem& problem, const Vector& v,
                                 const SolverConfig& config = {});

/// Writes the problem in a plain-text block format (documented in the file
/// header it emits) for cross-checking against external solvers.
void dump_problem(const SdpProblem& problem, const std::string& path);

}  // namespace sofsyn

#pragma once

#include "sofsyn/matrix.hpp"

#include <optional>

namespace sofsyn {

/// Margins for additive nonlinear uncertainty on top of a synthesized loop.
struct RobustnessReport {
  double gamma_actual = 0.0;
  double gamma_star = 0.0;
  double normwise_margin = 0.0;  // gamma_star - gamma_actual; negative = none
  std::optional<Matrix> Gamma_actual;
  std::optional<Matrix> Gamma_star;
  Matrix elementwise_lower;
  Matrix elementwise_upper;
};

/// gamma_star - gamma_actual. Any additive uncertainty with Lipschitz
/// constant at most max(0, margin) is tolerated. Negative values are
/// returned unclamped so callers can tell "no margin" from "zero margin".
double normwise_margin(double gamma_actual, double gamma_star);

/// True iff a Jacobian norm bound fits inside the margin (boundary included).
bool jacobian_margin_check(double jacobian_norm_bound, double margin);

/// Truth of S S^T <= (T T^T) o (n I) in the semidefinite order, for square
/// S, T with |S| <= T elementwise. Throws when the precondition fails; the
/// inequality itself holds for every admissible pair.
bool gram_hadamard_bound_holds(const Matrix& s, const Matrix& t);

/// True iff |Gamma_delta| <= n^{-1/2} Gamma_star elementwise. When true, the
/// implied sigma_max(Gamma_delta) <= sigma_max(Gamma_star) is asserted too.
bool admissible_perturbation_check(const Matrix& gamma_delta,
                                   const Matrix& gamma_star);

/// Per-entry perturbation interval around Gamma:
///   -n^{-1/2} gamma*_ij - gamma_ij <= delta_ij <= n^{-1/2} gamma*_ij - gamma_ij
std::pair<Matrix, Matrix> elementwise_bounds(const Matrix& gamma,
                                             const Matrix& gamma_star);

RobustnessReport build_robustness_report(double gamma_actual, double gamma_star,
                                         const std::optional<Matrix>& Gamma_actual,
                                         const std::optional<Matrix>& Gamma_star);

}  // namespace sofsyn

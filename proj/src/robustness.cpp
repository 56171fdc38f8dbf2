#include "sofsyn/robustness.hpp"

#include <cmath>

namespace sofsyn {

double normwise_margin(double gamma_actual, double gamma_star) {
  if (gamma_actual < 0 || gamma_star < 0)
    throw std::invalid_argument("normwise_margin: constants must be >= 0");
  return gamma_star - gamma_actual;
}

bool jacobian_margin_check(double jacobian_norm_bound, double margin) {
  if (jacobian_norm_bound < 0 || margin < 0)
    throw std::invalid_argument("jacobian_margin_check: inputs must be >= 0");
  return jacobian_norm_bound <= margin;
}

bool gram_hadamard_bound_holds(const Matrix& s, const Matrix& t) {
  if (s.rows() != s.cols() || t.rows() != t.cols() || s.rows() != t.rows())
    throw std::invalid_argument("gram_hadamard_bound_holds: square equal dims required");
  if (!elementwise_leq(s.cwiseAbs(), t))
    throw std::invalid_argument("gram_hadamard_bound_holds: |S| <= T violated");
  const int n = static_cast<int>(s.rows());
  const Matrix lhs = s * s.transpose();
  const Matrix rhs = hadamard(t * t.transpose(),
                              static_cast<double>(n) * Matrix::Identity(n, n));
  const Matrix diff = rhs - lhs;
  const double scale = 1.0 + rhs.cwiseAbs().maxCoeff();
  return smallest_eigenvalue(0.5 * (diff + diff.transpose())) >= -1e-10 * scale;
}

bool admissible_perturbation_check(const Matrix& gamma_delta,
                                   const Matrix& gamma_star) {
  if (gamma_delta.rows() != gamma_delta.cols() ||
      gamma_star.rows() != gamma_star.cols() ||
      gamma_delta.rows() != gamma_star.rows())
    throw std::invalid_argument("admissible_perturbation_check: square equal dims required");
  const int n = static_cast<int>(gamma_delta.rows());
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  const bool admissible = elementwise_leq(gamma_delta.cwiseAbs(), scale * gamma_star);
  if (admissible) {
    // Sanity-check the implied spectral consequence.
    if (spectral_norm(gamma_delta) > spectral_norm(gamma_star) + 1e-10)
      throw std::logic_error(
          "admissible_perturbation_check: spectral consequence violated");
  }
  return admissible;
}

std::pair<Matrix, Matrix> elementwise_bounds(const Matrix& gamma,
                                             const Matrix& gamma_star) {
  if (gamma.rows() != gamma.cols() || gamma_star.rows() != gamma_star.cols() ||
      gamma.rows() != gamma_star.rows())
    throw std::invalid_argument("elementwise_bounds: square equal dims required");
  if (!(gamma_star.array() >= 0.0).all())
    throw std::invalid_argument("elementwise_bounds: Gamma_star must be >= 0 elementwise");
  const int n = static_cast<int>(gamma.rows());
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  Matrix lower = -scale * gamma_star - gamma;
  Matrix upper = scale * gamma_star - gamma;
  return {lower, upper};
}

RobustnessReport build_robustness_report(double gamma_actual, double gamma_star,
                                         const std::optional<Matrix>& Gamma_actual,
                                         const std::optional<Matrix>& Gamma_star) {
  RobustnessReport report;
  report.gamma_actual = gamma_actual;
  report.gamma_star = gamma_star;
  report.normwise_margin = normwise_margin(gamma_actual, gamma_star);
  report.Gamma_actual = Gamma_actual;
  report.Gamma_star = Gamma_star;
  if (Gamma_actual && Gamma_star) {
    auto [lower, upper] = elementwise_bounds(*Gamma_actual, *Gamma_star);
    report.elementwise_lower = lower;
    report.elementwise_upper = upper;
  }
  return report;
}

}  // namespace sofsyn

#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

namespace sofsyn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense symmetric matrix stored as the packed upper triangle, so the
/// reconstructed full matrix is symmetric by construction (M == M^T exactly).
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(int dim);

  /// Symmetrizes `m` as (m + m^T)/2. Throws if `m` is not square or the
  /// asymmetry exceeds `tol` relative to the largest entry.
  static SymmetricMatrix from_dense(const Matrix& m, double tol = 1e-9);

  static SymmetricMatrix identity(int dim);

  int dim() const { return dim_; }
  double operator()(int i, int j) const { return packed_[pack_index(i, j)]; }
  void set(int i, int j, double value) { packed_[pack_index(i, j)] = value; }

  Matrix dense() const;

  /// Packed coefficients in column-major upper-triangle order.
  const std::vector<double>& packed() const { return packed_; }

 private:
  int pack_index(int i, int j) const;

  int dim_ = 0;
  std::vector<double> packed_;
};

/// Throws std::invalid_argument when `a` contains NaN or infinity.
void require_finite(const Matrix& a, const char* what);

/// Kronecker (tensor) product: block (i,j) of the result is a(i,j) * b.
Matrix kron(const Matrix& a, const Matrix& b);

/// Entrywise (Hadamard) product. Throws on dimension mismatch.
Matrix hadamard(const Matrix& a, const Matrix& b);

/// Stacks the columns of `a` into a single column vector.
Vector vec(const Matrix& a);

/// True iff a(i,j) <= b(i,j) for every entry. Throws on dimension mismatch.
bool elementwise_leq(const Matrix& a, const Matrix& b);

/// Largest singular value, computed from the eigenvalues of the Gram matrix.
double spectral_norm(const Matrix& a);

/// Eigenvalues of a symmetric matrix in ascending order.
Vector symmetric_eigenvalues(const Matrix& a);

double smallest_eigenvalue(const Matrix& symmetric);
double largest_eigenvalue(const Matrix& symmetric);

/// True iff the smallest eigenvalue of `a` exceeds `margin` (margin >= 0).
bool is_positive_definite(const SymmetricMatrix& a, double margin);

/// Scale-aware default margin for definiteness decisions.
double default_definiteness_margin(const Matrix& a);

/// Truth of 2 x^T y <= x^T P x + y^T P^{-1} y for positive definite P.
/// Holds for every x, y; exposed as a property-test utility.
bool young_inequality_holds(const Vector& x, const Vector& y,
                            const SymmetricMatrix& p);

/// Truth of (A + D F E)^T P (A + D F E) <= A^T (P^{-1} - eps^{-1} D D^T)^{-1} A
/// + eps E^T E in the semidefinite order, for F^T F <= I, eps > 0 and
/// P^{-1} - eps^{-1} D D^T positive definite. Throws when the preconditions
/// fail; holds for every admissible input.
bool uncertainty_quadratic_bound_holds(const Matrix& a, const Matrix& d,
                                       const Matrix& e, const Matrix& f,
                                       const SymmetricMatrix& p, double eps);

}  // namespace sofsyn

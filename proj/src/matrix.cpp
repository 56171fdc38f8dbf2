#include "sofsyn/matrix.hpp"

#include <cmath>

namespace sofsyn {

SymmetricMatrix::SymmetricMatrix(int dim) : dim_(dim) {
  if (dim <= 0) throw std::invalid_argument("SymmetricMatrix: dim must be positive");
  packed_.assign(static_cast<size_t>(dim) * (dim + 1) / 2, 0.0);
}

int SymmetricMatrix::pack_index(int i, int j) const {
  if (i < 0 || j < 0 || i >= dim_ || j >= dim_)
    throw std::out_of_range("SymmetricMatrix: index out of range");
  if (i > j) std::swap(i, j);
  return j * (j + 1) / 2 + i;
}

SymmetricMatrix SymmetricMatrix::from_dense(const Matrix& m, double tol) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("SymmetricMatrix::from_dense: matrix is not square");
  require_finite(m, "SymmetricMatrix::from_dense");
  const double scale = 1.0 + m.cwiseAbs().maxCoeff();
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol * scale)
    throw std::invalid_argument("SymmetricMatrix::from_dense: matrix is not symmetric");
  SymmetricMatrix out(static_cast<int>(m.rows()));
  for (int j = 0; j < out.dim_; ++j)
    for (int i = 0; i <= j; ++i) out.set(i, j, 0.5 * (m(i, j) + m(j, i)));
  return out;
}

SymmetricMatrix SymmetricMatrix::identity(int dim) {
  SymmetricMatrix out(dim);
  for (int i = 0; i < dim; ++i) out.set(i, i, 1.0);
  return out;
}

Matrix SymmetricMatrix::dense() const {
  Matrix out(dim_, dim_);
  for (int j = 0; j < dim_; ++j)
    for (int i = 0; i <= j; ++i) out(i, j) = out(j, i) = (*this)(i, j);
  return out;
}

void require_finite(const Matrix& a, const char* what) {
  if (!a.allFinite())
    throw std::invalid_argument(std::string(what) + ": non-finite entry");
}

Matrix kron(const Matrix& a, const Matrix& b) {
  require_finite(a, "kron");
  require_finite(b, "kron");
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("hadamard: dimension mismatch");
  require_finite(a, "hadamard");
  require_finite(b, "hadamard");
  return a.cwiseProduct(b);
}

Vector vec(const Matrix& a) {
  require_finite(a, "vec");
  return a.reshaped();
}

bool elementwise_leq(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("elementwise_leq: dimension mismatch");
  require_finite(a, "elementwise_leq");
  require_finite(b, "elementwise_leq");
  return (a.array() <= b.array()).all();
}

double spectral_norm(const Matrix& a) {
  require_finite(a, "spectral_norm");
  if (a.size() == 0) return 0.0;
  // Gram matrix on the smaller side keeps the eigenproblem cheap.
  Matrix gram = a.rows() <= a.cols() ? Matrix(a * a.transpose())
                                     : Matrix(a.transpose() * a);
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

Vector symmetric_eigenvalues(const Matrix& a) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("symmetric_eigenvalues: matrix is not square");
  require_finite(a, "symmetric_eigenvalues");
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double smallest_eigenvalue(const Matrix& symmetric) {
  return symmetric_eigenvalues(symmetric).minCoeff();
}

double largest_eigenvalue(const Matrix& symmetric) {
  return symmetric_eigenvalues(symmetric).maxCoeff();
}

bool is_positive_definite(const SymmetricMatrix& a, double margin) {
  if (margin < 0) throw std::invalid_argument("is_positive_definite: margin must be >= 0");
  return smallest_eigenvalue(a.dense()) > margin;
}

double default_definiteness_margin(const Matrix& a) {
  return 1e-9 * (1.0 + (a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff()));
}

bool young_inequality_holds(const Vector& x, const Vector& y,
                            const SymmetricMatrix& p) {
  if (x.size() != y.size() || x.size() != p.dim())
    throw std::invalid_argument("young_inequality_holds: dimension mismatch");
  const Matrix pd = p.dense();
  Eigen::LLT<Matrix> llt(pd);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("young_inequality_holds: P is not positive definite");
  const double lhs = 2.0 * x.dot(y);
  const double rhs = x.dot(pd * x) + y.dot(llt.solve(y));
  return lhs <= rhs + 1e-10 * (1.0 + std::abs(rhs));
}

bool uncertainty_quadratic_bound_holds(const Matrix& a, const Matrix& d,
                                       const Matrix& e, const Matrix& f,
                                       const SymmetricMatrix& p, double eps) {
  if (eps <= 0)
    throw std::invalid_argument("uncertainty_quadratic_bound_holds: eps must be > 0");
  if (spectral_norm(f) > 1.0 + 1e-12)
    throw std::invalid_argument("uncertainty_quadratic_bound_holds: F^T F <= I violated");
  const Matrix pd = p.dense();
  Eigen::LLT<Matrix> llt(pd);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("uncertainty_quadratic_bound_holds: P is not positive definite");
  const Matrix p_inv = llt.solve(Matrix::Identity(p.dim(), p.dim()));
  const Matrix core = p_inv - (1.0 / eps) * d * d.transpose();
  if (smallest_eigenvalue(core) <= 0)
    throw std::invalid_argument(
        "uncertainty_quadratic_bound_holds: P^{-1} - eps^{-1} D D^T is not positive definite");
  const Matrix perturbed = a + d * f * e;
  const Matrix lhs = perturbed.transpose() * pd * perturbed;
  const Matrix rhs =
      a.transpose() * core.llt().solve(a) + eps * e.transpose() * e;
  const Matrix diff = rhs - lhs;
  const double scale = 1.0 + rhs.cwiseAbs().maxCoeff();
  return smallest_eigenvalue(0.5 * (diff + diff.transpose())) >= -1e-10 * scale;
}

}  // namespace sofsyn

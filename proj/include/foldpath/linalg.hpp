#pragma once

// Dense linear-algebra contract shared by the rest of foldpath.
//
// Factorizations are delegated to Eigen; this header pins down what the
// callers may rely on: descending singular values and eigenvalues, explicit
// failure on non-convergence, and a pivot test that flags numerically
// singular systems instead of returning garbage.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace foldpath {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kMachineEps = std::numeric_limits<double>::epsilon();
inline constexpr double kInf = std::numeric_limits<double>::infinity();

class PreconditionError : public std::invalid_argument {
public:
   using std::invalid_argument::invalid_argument;
};

class FactorizationError : public std::runtime_error {
public:
   using std::runtime_error::runtime_error;
};

class SingularMatrixError : public std::runtime_error {
public:
   SingularMatrixError(Index pivot, double pivot_value)
      : std::runtime_error("numerically singular matrix: pivot " + std::to_string(pivot) +
                           " has magnitude " + std::to_string(pivot_value)),
        pivot_(pivot),
        pivot_value_(pivot_value)
   {
   }

   Index pivot_index() const noexcept { return pivot_; }
   double pivot_value() const noexcept { return pivot_value_; }

private:
   Index pivot_;
   double pivot_value_;
};

struct SvdResult {
   Matrix U;
   Vector singular_values;  // non-increasing
   Matrix V;
};

struct SymEigResult {
   Vector eigenvalues;  // non-increasing
   Matrix eigenvectors;  // column i belongs to eigenvalues(i)
};

inline double max_abs(const Matrix& A) { return A.size() == 0 ? 0.0 : A.cwiseAbs().maxCoeff(); }

inline void require_finite(const Matrix& A, const char* what)
{
   if (A.rows() < 1 || A.cols() < 1) {
      throw PreconditionError(std::string(what) + ": empty matrix");
   }
   if (!A.allFinite()) {
      throw PreconditionError(std::string(what) + ": matrix has non-finite entries");
   }
}

inline SvdResult svd(const Matrix& A)
{
   require_finite(A, "svd");
   Eigen::BDCSVD<Matrix> dec(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
   if (dec.info() != Eigen::Success) {
      throw FactorizationError("svd: iteration failed to converge");
   }
   return {dec.matrixU(), dec.singularValues(), dec.matrixV()};
}

inline Vector singular_values(const Matrix& A)
{
   require_finite(A, "singular_values");
   Eigen::BDCSVD<Matrix> dec(A);
   if (dec.info() != Eigen::Success) {
      throw FactorizationError("singular_values: iteration failed to converge");
   }
   return dec.singularValues();
}

inline double spectral_norm(const Matrix& A)
{
   if (A.size() == 0) return 0.0;
   return singular_values(A)(0);
}

/// Symmetric eigendecomposition with eigenvalues sorted descending.
///
/// The input must be symmetric to within 1e-12 * max(1, max|a_ij|); it is
/// symmetrized as (A + A^T)/2 before factorization so that products such as
/// B*B^T, which carry rounding asymmetry, are accepted.
inline SymEigResult sym_eig(const Matrix& A)
{
   require_finite(A, "sym_eig");
   if (A.rows() != A.cols()) {
      throw PreconditionError("sym_eig: matrix is not square");
   }
   const double asym = max_abs(A - A.transpose());
   if (asym > 1e-12 * std::max(1.0, max_abs(A))) {
      throw PreconditionError("sym_eig: matrix is not symmetric (max asymmetry " +
                              std::to_string(asym) + ")");
   }
   const Matrix sym = 0.5 * (A + A.transpose());
   Eigen::SelfAdjointEigenSolver<Matrix> dec(sym);
   if (dec.info() != Eigen::Success) {
      throw FactorizationError("sym_eig: iteration failed to converge");
   }
   // Eigen returns ascending order.
   return {dec.eigenvalues().reverse(), dec.eigenvectors().rowwise().reverse()};
}

/// Solves A x = b by LU with partial pivoting.
///
/// Throws SingularMatrixError when a pivot satisfies |u_kk| <= N eps max|a_ij|.
inline Vector lu_solve(const Matrix& A, const Vector& b)
{
   require_finite(A, "lu_solve");
   if (A.rows() != A.cols()) {
      throw PreconditionError("lu_solve: matrix is not square");
   }
   if (b.size() != A.rows()) {
      throw PreconditionError("lu_solve: right-hand side has wrong length");
   }
   if (!b.allFinite()) {
      throw PreconditionError("lu_solve: right-hand side has non-finite entries");
   }
   const Index n = A.rows();
   const double pivot_tol = static_cast<double>(n) * kMachineEps * max_abs(A);
   Eigen::PartialPivLU<Matrix> lu(A);
   const auto& packed = lu.matrixLU();
   for (Index k = 0; k < n; ++k) {
      const double pivot = std::abs(packed(k, k));
      if (pivot <= pivot_tol) {
         throw SingularMatrixError(k, pivot);
      }
   }
   return lu.solve(b);
}

/// Minimum-norm least-squares solution of min ||A x - b||.
inline Vector least_squares(const Matrix& A, const Vector& b)
{
   require_finite(A, "least_squares");
   if (b.size() != A.rows()) {
      throw PreconditionError("least_squares: right-hand side has wrong length");
   }
   return A.completeOrthogonalDecomposition().solve(b);
}

}  // namespace foldpath

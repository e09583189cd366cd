#pragma once

// Full (unrestarted) GMRES over an abstract linear operator.
//
// Arnoldi uses modified Gram-Schmidt with a second pass whenever the new
// basis vector retains more than 1e-8 of its norm along the existing basis.
// The Hessenberg least-squares problem is reduced by Givens rotations as
// columns arrive, so the residual norm of every iterate is recorded.

#include <foldpath/linalg.hpp>

#include <cmath>
#include <functional>
#include <vector>

namespace foldpath {

/// Matrix-vector product contract. apply must be linear and, when the
/// operator is shared between concurrent solves, safe to call concurrently.
struct LinearOperator {
   Index dimension = 0;
   std::function<Vector(const Vector&)> apply;

   Vector operator()(const Vector& x) const { return apply(x); }
};

inline LinearOperator matrix_operator(Matrix A)
{
   const Index n = A.rows();
   return {n, [A = std::move(A)](const Vector& x) -> Vector { return A * x; }};
}

struct GmresTrace {
   std::vector<double> residual_norms;  // ||r_0||, ||r_1||, ...
   Index iterations = 0;
   bool converged = false;
   Vector solution;
};

inline GmresTrace gmres_solve(const LinearOperator& op, const Vector& b, const Vector& x0, double rel_tol,
                              Index max_iter)
{
   const Index n = op.dimension;
   if (b.size() != n || x0.size() != n) {
      throw PreconditionError("gmres: vector length does not match operator dimension");
   }
   if (!(rel_tol > 0.0 && rel_tol < 1.0)) {
      throw PreconditionError("gmres: relative tolerance must lie in (0, 1)");
   }
   if (max_iter < 0 || max_iter > n) {
      throw PreconditionError("gmres: max_iter must lie in [0, dimension]");
   }

   GmresTrace trace;
   trace.solution = x0;
   Vector r = b - op(x0);
   const double beta = r.norm();
   trace.residual_norms.push_back(beta);
   if (!std::isfinite(beta)) {
      throw PreconditionError("gmres: initial residual is not finite");
   }
   if (beta == 0.0) {
      trace.converged = true;
      return trace;
   }
   const double target = rel_tol * beta;

   Matrix V(n, max_iter + 1);
   Matrix H = Matrix::Zero(max_iter + 1, max_iter);
   Vector cs = Vector::Zero(max_iter);
   Vector sn = Vector::Zero(max_iter);
   Vector g = Vector::Zero(max_iter + 1);
   g(0) = beta;
   V.col(0) = r / beta;

   Index k = 0;
   while (k < max_iter) {
      Vector w = op(V.col(k));
      const double w_norm0 = w.norm();
      for (Index i = 0; i <= k; ++i) {
         H(i, k) = V.col(i).dot(w);
         w -= H(i, k) * V.col(i);
      }
      // Reorthogonalize if the first pass left a visible component along the basis.
      const double w_norm = w.norm();
      if (w_norm > 0.0 && (V.leftCols(k + 1).transpose() * w).cwiseAbs().maxCoeff() > 1e-8 * w_norm) {
         for (Index i = 0; i <= k; ++i) {
            const double h = V.col(i).dot(w);
            H(i, k) += h;
            w -= h * V.col(i);
         }
      }
      const double h_next = w.norm();
      H(k + 1, k) = h_next;
      const bool breakdown = h_next <= 1e-14 * w_norm0;

      for (Index i = 0; i < k; ++i) {
         const double hi = H(i, k);
         const double hi1 = H(i + 1, k);
         H(i, k) = cs(i) * hi + sn(i) * hi1;
         H(i + 1, k) = -sn(i) * hi + cs(i) * hi1;
      }
      const double den = std::hypot(H(k, k), H(k + 1, k));
      if (den == 0.0) {
         // The operator annihilated the Krylov direction; the system is singular on this space.
         break;
      }
      cs(k) = H(k, k) / den;
      sn(k) = H(k + 1, k) / den;
      H(k, k) = den;
      H(k + 1, k) = 0.0;
      g(k + 1) = -sn(k) * g(k);
      g(k) = cs(k) * g(k);
      ++k;

      const double res = std::abs(g(k));
      trace.residual_norms.push_back(res);
      if (res <= target || breakdown) {
         trace.converged = true;
         break;
      }
      V.col(k) = w / h_next;
   }

   trace.iterations = k;
   if (k > 0) {
      const Vector y = H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
      trace.solution = x0 + V.leftCols(k) * y;
   }
   return trace;
}

}  // namespace foldpath

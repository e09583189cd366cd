#pragma once

// Lower bounds for the smallest eigenvalue of a rank-one update A + y y^T of
// a symmetric positive semi-definite matrix A.
//
// With beta_1 >= ... >= beta_N the eigenvalues of A, u_N a unit eigenvector
// of beta_N, y_N = u_N^T y, gap = beta_{N-1} - beta_N and
// xi = |y_N| + sqrt(||y||^2 - y_N^2):
//
//   lambda_min(A + y y^T) >= min{beta_N + y_N^2 gap/(gap + xi^2), beta_{N-1} y_N^2/xi^2}
//   lambda_min(A + y y^T) >= max{beta_N, y_N^2 gap/(gap + xi^2)}
//
// and Weyl interlacing gives beta_N <= lambda_min(A + y y^T) <= beta_{N-1}.

#include <foldpath/linalg.hpp>

#include <algorithm>
#include <cmath>
#include <utility>

namespace foldpath {

struct RankOneBoundReport {
   double beta_N = 0.0;
   double beta_Nminus1 = kInf;  // +inf when N == 1
   double y_N = 0.0;
   double gap = kInf;
   double xi = 0.0;
   double bound_main = 0.0;
   double bound_helper = 0.0;
   double weyl_low = 0.0;
   double weyl_high = kInf;
   bool repeated_smallest = false;  // gap < 1e-12 ||A||; u_N is then one choice among several
};

namespace detail {

// gap / (gap + xi^2) with the N == 1 convention gap = +inf.
inline double gap_ratio(double gap, double xi)
{
   if (std::isinf(gap)) return 1.0;
   const double denom = gap + xi * xi;
   return denom > 0.0 ? gap / denom : 0.0;
}

struct PsdSpectrum {
   SymEigResult eig;
   double scale = 0.0;
};

inline PsdSpectrum psd_spectrum(const Matrix& A)
{
   PsdSpectrum out{sym_eig(A), 0.0};
   Vector& beta = out.eig.eigenvalues;
   out.scale = beta.cwiseAbs().maxCoeff();
   const double floor = -1e-10 * out.scale;
   if (beta(beta.size() - 1) < floor) {
      throw PreconditionError("rank-one bound: matrix is indefinite (smallest eigenvalue " +
                              std::to_string(beta(beta.size() - 1)) + ")");
   }
   beta = beta.cwiseMax(0.0);
   return out;
}

}  // namespace detail

inline RankOneBoundReport rank_one_lower_bound(const Matrix& A, const Vector& y)
{
   if (y.size() != A.rows()) {
      throw PreconditionError("rank-one bound: vector length does not match matrix");
   }
   if (!y.allFinite() || y.squaredNorm() == 0.0) {
      throw PreconditionError("rank-one bound: update vector must be finite and nonzero");
   }
   const auto spectrum = detail::psd_spectrum(A);
   const Vector& beta = spectrum.eig.eigenvalues;
   const Index n = beta.size();

   RankOneBoundReport r;
   r.beta_N = beta(n - 1);
   r.beta_Nminus1 = n > 1 ? beta(n - 2) : kInf;
   r.gap = r.beta_Nminus1 - r.beta_N;
   r.repeated_smallest = n > 1 && r.gap < 1e-12 * spectrum.scale;

   r.y_N = spectrum.eig.eigenvectors.col(n - 1).dot(y);
   const double rest = std::max(0.0, y.squaredNorm() - r.y_N * r.y_N);
   r.xi = std::abs(r.y_N) + std::sqrt(rest);

   const double ratio = detail::gap_ratio(r.gap, r.xi);
   const double yn2 = r.y_N * r.y_N;
   r.bound_main = std::max(r.beta_N, yn2 * ratio);
   if (n == 1) {
      r.bound_helper = r.beta_N + yn2;
   } else {
      r.bound_helper = std::min(r.beta_N + yn2 * ratio, r.beta_Nminus1 * yn2 / (r.xi * r.xi));
   }
   r.weyl_low = r.beta_N;
   r.weyl_high = r.beta_Nminus1;
   return r;
}

inline double rank_one_helper_bound(const Matrix& A, const Vector& y)
{
   return rank_one_lower_bound(A, y).bound_helper;
}

/// Weyl interval (beta_N, beta_{N-1}) for lambda_min(A + y y^T).
/// For N == 1 the upper end is +inf.
inline std::pair<double, double> weyl_interval(const Matrix& A, const Vector& y)
{
   if (y.size() != A.rows()) {
      throw PreconditionError("weyl_interval: vector length does not match matrix");
   }
   const Vector beta = sym_eig(A).eigenvalues;
   const Index n = beta.size();
   return {beta(n - 1), n > 1 ? beta(n - 2) : kInf};
}

}  // namespace foldpath

#pragma once

// SVD characterization of simple folds and the lower bound on the smallest
// singular value of the bordered Jacobian
//
//        [ G_u      G_lambda    ]
//   F_x = [ udot^T   lambdadot  ]
//
// A point is a simple fold when G_u has a one-dimensional kernel and the
// left singular vector u_N of the smallest singular value is not orthogonal
// to G_lambda. At regular points and simple folds F_x stays nonsingular, and
// sigma_min(F_x) is estimated from below through gap, xi, alpha and tau.

#include <foldpath/linalg.hpp>
#include <foldpath/spectral_bounds.hpp>

#include <cmath>
#include <optional>
#include <string_view>

namespace foldpath {

enum class BoundStatus {
   valid,
   alpha_vanished,
   tau_not_below_alpha,  // tau >= alpha
   tau_not_below_one,    // alpha > 1 and tau >= 1
};

inline std::string_view to_string(BoundStatus s)
{
   switch (s) {
      case BoundStatus::valid: return "valid";
      case BoundStatus::alpha_vanished: return "alpha vanished";
      case BoundStatus::tau_not_below_alpha: return "tau >= alpha";
      case BoundStatus::tau_not_below_one: return "tau >= 1";
   }
   return "unknown";
}

struct SigmaMinBound {
   std::optional<double> value;  // sqrt(1 - tau max{1/alpha, 1})
   // sqrt(min{alpha, 1} (1 - tau max{1/alpha, 1})). F_x F_x^T = D (I + E) with
   // D = diag(G_u G_u^T + G_lambda G_lambda^T, 1) and ||D^{-1}|| <= max{1/alpha, 1},
   // so the floor min{alpha, 1} survives in lambda_min(F_x F_x^T); value omits it
   // and can exceed sigma_min(F_x) when alpha < 1.
   std::optional<double> scaled_value;
   BoundStatus status = BoundStatus::valid;
   double perturbation = kInf;  // tau max{1/alpha, 1}, the bound on ||E||
};

struct FoldThresholds {
   double sigma_rel = 1e-6;  // sigma_N <= sigma_rel * sigma_1
   double proj_rel = 1e-6;   // |u_N^T G_lambda| > proj_rel * ||G_lambda||
};

struct FoldDiagnostics {
   double sigma_1 = 0.0;
   double sigma_N = 0.0;
   double sigma_Nminus1 = kInf;  // +inf when N == 1
   double gap = kInf;            // sigma_{N-1}^2 - sigma_N^2, +inf when N == 1
   double proj = 0.0;            // u_N^T G_lambda
   double xi = 0.0;
   double alpha = 0.0;
   double tau = 0.0;
   SigmaMinBound bound;
   double sigma_min_Fx_actual = 0.0;
   double Fx_norm = 0.0;
   bool is_simple_fold_candidate = false;
};

struct BorderedJacobian {
   Matrix G_u;
   Vector G_lambda;
   Vector tangent;
   Matrix assembled;
};

namespace detail {

inline Vector checked_unit_tangent(const Vector& tangent, Index expected_size)
{
   if (tangent.size() != expected_size) {
      throw PreconditionError("tangent has length " + std::to_string(tangent.size()) +
                              ", expected " + std::to_string(expected_size));
   }
   const double norm = tangent.norm();
   if (!std::isfinite(norm) || std::abs(norm - 1.0) > 1e-6) {
      throw PreconditionError("tangent is not of unit length (norm " + std::to_string(norm) + ")");
   }
   if (std::abs(norm - 1.0) > 1e-10) return tangent / norm;
   return tangent;
}

inline void check_blocks(const Matrix& G_u, const Vector& G_lambda)
{
   if (G_u.rows() != G_u.cols()) {
      throw PreconditionError("G_u must be square");
   }
   if (G_lambda.size() != G_u.rows()) {
      throw PreconditionError("G_lambda length does not match G_u");
   }
}

}  // namespace detail

inline BorderedJacobian assemble_bordered(const Matrix& G_u, const Vector& G_lambda, const Vector& tangent)
{
   detail::check_blocks(G_u, G_lambda);
   const Index n = G_u.rows();
   BorderedJacobian b{G_u, G_lambda, detail::checked_unit_tangent(tangent, n + 1), Matrix(n + 1, n + 1)};
   b.assembled.topLeftCorner(n, n) = G_u;
   b.assembled.topRightCorner(n, 1) = G_lambda;
   b.assembled.bottomRows(1) = b.tangent.transpose();
   return b;
}

inline SigmaMinBound sigma_min_bound(double alpha, double tau)
{
   SigmaMinBound out;
   if (!(alpha > 0.0)) {
      out.status = BoundStatus::alpha_vanished;
      return out;
   }
   out.perturbation = tau * std::max(1.0 / alpha, 1.0);
   if (tau >= alpha) {
      out.status = BoundStatus::tau_not_below_alpha;
   } else if (tau >= 1.0) {
      out.status = BoundStatus::tau_not_below_one;
   } else {
      out.value = std::sqrt(1.0 - out.perturbation);
      out.scaled_value = std::sqrt(std::min(alpha, 1.0) * (1.0 - out.perturbation));
   }
   return out;
}

inline SigmaMinBound sigma_min_bound(const FoldDiagnostics& d) { return sigma_min_bound(d.alpha, d.tau); }

inline double sigma_min_actual(const BorderedJacobian& b)
{
   const Vector s = singular_values(b.assembled);
   return s(s.size() - 1);
}

/// Largest admissible arclength step 1/(2 gamma_x gamma_F ||F_x^{-1}||).
inline double max_step_bound(double gamma_x, double gamma_F, double inv_norm)
{
   if (!(gamma_x > 0.0) || !(gamma_F > 0.0) || !(inv_norm > 0.0)) {
      throw PreconditionError("max_step_bound: all inputs must be positive");
   }
   return 1.0 / (2.0 * gamma_x * gamma_F * inv_norm);
}

inline FoldDiagnostics classify_point(const Matrix& G_u, const Vector& G_lambda, const Vector& tangent,
                                      const FoldThresholds& thresholds = {})
{
   const BorderedJacobian bordered = assemble_bordered(G_u, G_lambda, tangent);
   const Index n = G_u.rows();
   const SvdResult dec = svd(G_u);
   const Vector& sigma = dec.singular_values;

   FoldDiagnostics d;
   d.sigma_1 = sigma(0);
   d.sigma_N = sigma(n - 1);
   if (n > 1) {
      d.sigma_Nminus1 = sigma(n - 2);
      d.gap = d.sigma_Nminus1 * d.sigma_Nminus1 - d.sigma_N * d.sigma_N;
   }
   const auto u_N = dec.U.col(n - 1);
   d.proj = u_N.dot(G_lambda);
   d.xi = std::abs(d.proj) + (G_lambda - d.proj * u_N).norm();
   d.alpha = std::max(d.sigma_N * d.sigma_N, d.proj * d.proj * detail::gap_ratio(d.gap, d.xi));

   const Vector& t = bordered.tangent;
   d.tau = (G_u * t.head(n) + G_lambda * t(n)).norm();
   d.bound = sigma_min_bound(d.alpha, d.tau);

   const Vector fx_sigma = singular_values(bordered.assembled);
   d.sigma_min_Fx_actual = fx_sigma(fx_sigma.size() - 1);
   d.Fx_norm = fx_sigma(0);

   d.is_simple_fold_candidate = d.sigma_N <= thresholds.sigma_rel * d.sigma_1 &&
                                std::abs(d.proj) > thresholds.proj_rel * G_lambda.norm();
   return d;
}

/// Column order of the per-point diagnostics CSV.
inline constexpr std::string_view kFoldCsvHeader =
   "s,lambda,sigma_N,sigma_Nminus1,gap,proj,xi,alpha,tau,bound,actual";

}  // namespace foldpath

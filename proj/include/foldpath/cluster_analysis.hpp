#pragma once

// Identity + low rank + small splittings of Jacobians, the bordered splitting
// of the pseudo-arclength Jacobian, and empirical checks of the GMRES residual
// envelope ||r_{p+k}|| <= C ||E||^k ||r_0||.

#include <foldpath/fold_analysis.hpp>
#include <foldpath/gmres.hpp>
#include <foldpath/linalg.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace foldpath {

struct SplittingReport {
   Index p = 0;                            // rank of K
   double E_norm = 0.0;                    // ||E||_2 = sigma_{p+1}(J - I)
   double threshold = 0.0;                 // absolute cutoff used to count outliers
   std::vector<double> K_singular_values;  // sigma_1..sigma_p of J - I
   std::vector<double> singular_values;    // full spectrum of J - I, for tail plots
   Index bordered_rank_bound = 2;          // p + 2
   Index observed_gmres_plateau = -1;      // filled by observe_gmres_plateau, -1 if not measured
   double jbound_C_fit = kInf;             // filled by verify_jbound, +inf if not measured
};

struct LowRankSplitting {
   Matrix K;
   Matrix E;
   SplittingReport report;
};

struct BorderedSplitting {
   Matrix F_x;
   Matrix K_bordered;
   Index numeric_rank = 0;
   double remainder_norm = 0.0;  // ||F_x - I - K_bordered||_2
   bool rank_ok = false;         // numeric_rank <= p + 2
   SplittingReport report;
};

struct JboundCheck {
   double C_fit = kInf;
   bool holds = false;
   Index p_hat = 0;
   GmresTrace trace;
};

class InsufficientDataError : public std::runtime_error {
public:
   using std::runtime_error::runtime_error;
};

/// Splits J = I + K + E where K keeps the singular triplets of J - I above
/// eps * sigma_1(J - I).
inline LowRankSplitting split_low_rank(const Matrix& J, double eps_rel = 1e-3)
{
   if (J.rows() != J.cols()) throw PreconditionError("split_low_rank: matrix must be square");
   if (!(eps_rel >= 0.0)) throw PreconditionError("split_low_rank: eps must be >= 0");
   const Index n = J.rows();
   const Matrix D = J - Matrix::Identity(n, n);
   const SvdResult dec = svd(D);
   const Vector& sigma = dec.singular_values;

   LowRankSplitting out;
   SplittingReport& r = out.report;
   r.threshold = eps_rel * sigma(0);
   for (Index i = 0; i < n; ++i) {
      r.singular_values.push_back(sigma(i));
      if (sigma(i) > r.threshold) {
         r.K_singular_values.push_back(sigma(i));
         ++r.p;
      }
   }
   r.E_norm = r.p < n ? sigma(r.p) : 0.0;
   r.bordered_rank_bound = r.p + 2;
   out.K = dec.U.leftCols(r.p) * sigma.head(r.p).asDiagonal() * dec.V.leftCols(r.p).transpose();
   out.E = D - out.K;
   return out;
}

inline Index numeric_rank(const Matrix& A, double rel_tol = 1e-10)
{
   const Vector s = singular_values(A);
   if (s(0) == 0.0) return 0;
   Index rank = 0;
   for (Index i = 0; i < s.size(); ++i) {
      if (s(i) > rel_tol * s(0)) ++rank;
   }
   return rank;
}

/// Bordered splitting F_x = I + Kb + diag(E, 0) with
///
///   Kb = [ K       G_lambda       ]
///        [ udot^T  lambdadot - 1  ]
///
/// whose range lies in Range(K) x {0} + span{(G_lambda, 0)} + span{(0, 1)},
/// so rank(Kb) <= p + 2. Takes the splitting J = I + K + E as given.
inline BorderedSplitting bordered_splitting(const LowRankSplitting& split, const Vector& G_lambda,
                                            const Vector& tangent)
{
   const Index n = split.K.rows();
   if (split.K.cols() != n || split.E.rows() != n || split.E.cols() != n) {
      throw PreconditionError("bordered_splitting: K and E must be square of equal size");
   }
   const Matrix J = Matrix::Identity(n, n) + split.K + split.E;
   const BorderedJacobian bj = assemble_bordered(J, G_lambda, tangent);

   BorderedSplitting out;
   out.report = split.report;
   out.report.bordered_rank_bound = split.report.p + 2;
   out.F_x = bj.assembled;
   out.K_bordered = Matrix::Zero(n + 1, n + 1);
   out.K_bordered.topLeftCorner(n, n) = split.K;
   out.K_bordered.topRightCorner(n, 1) = G_lambda;
   out.K_bordered.bottomLeftCorner(1, n) = bj.tangent.head(n).transpose();
   out.K_bordered(n, n) = bj.tangent(n) - 1.0;

   out.numeric_rank = numeric_rank(out.K_bordered);
   out.rank_ok = out.numeric_rank <= split.report.p + 2;
   out.remainder_norm = spectral_norm(out.F_x - Matrix::Identity(n + 1, n + 1) - out.K_bordered);
   return out;
}

/// As above, with K and E obtained from split_low_rank(J, eps_rel).
inline BorderedSplitting bordered_splitting(const Matrix& J, const Vector& G_lambda, const Vector& tangent,
                                            double eps_rel = 1e-3)
{
   detail::check_blocks(J, G_lambda);
   return bordered_splitting(split_low_rank(J, eps_rel), G_lambda, tangent);
}

/// Runs GMRES from x0 = 0 to near machine tolerance and fits the smallest C
/// with ||r_{p_hat+k}|| <= C E_norm^k ||r_0|| for every recorded k >= 0.
///
/// Residuals at or below the run tolerance (rel_tol ||r_0||) are not resolved
/// by the envelope and are skipped.
inline JboundCheck verify_jbound(const LinearOperator& op, Index p_hat, double E_norm, const Vector& b,
                                 double rel_tol = 1e-14)
{
   if (p_hat < 0) throw PreconditionError("verify_jbound: p_hat must be >= 0");
   if (!(E_norm >= 0.0)) throw PreconditionError("verify_jbound: E_norm must be >= 0");

   JboundCheck out;
   out.p_hat = p_hat;
   out.trace = gmres_solve(op, b, Vector::Zero(op.dimension), rel_tol, op.dimension);
   const auto& res = out.trace.residual_norms;
   if (static_cast<Index>(res.size()) <= p_hat) {
      throw InsufficientDataError("verify_jbound: GMRES trace has " + std::to_string(res.size() - 1) +
                                  " iterations, fewer than p_hat = " + std::to_string(p_hat));
   }
   const double r0 = res.front();
   if (r0 == 0.0) {
      out.C_fit = 0.0;
      out.holds = true;
      return out;
   }
   const double floor = rel_tol * r0;
   double C = 0.0;
   for (std::size_t j = static_cast<std::size_t>(p_hat); j < res.size(); ++j) {
      const auto k = static_cast<double>(j - static_cast<std::size_t>(p_hat));
      if (res[j] <= floor) continue;
      const double envelope = std::pow(E_norm, k) * r0;
      C = std::max(C, envelope > 0.0 ? res[j] / envelope : kInf);
   }
   out.C_fit = C;
   out.holds = std::isfinite(C) && out.trace.converged;
   return out;
}

/// Number of GMRES iterations needed to bring the residual down to the
/// cluster level E_norm ||r_0|| (the outlier-elimination phase).
inline Index observe_gmres_plateau(const LinearOperator& op, double E_norm, const Vector& b)
{
   const GmresTrace t = gmres_solve(op, b, Vector::Zero(op.dimension), 1e-14, op.dimension);
   const double target = std::max(E_norm, 1e-14) * t.residual_norms.front();
   for (std::size_t j = 0; j < t.residual_norms.size(); ++j) {
      if (t.residual_norms[j] <= target) return static_cast<Index>(j);
   }
   return -1;
}

}  // namespace foldpath

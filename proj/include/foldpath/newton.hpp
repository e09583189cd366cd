#pragma once

// Newton's method with a direct (LU) or matrix-free Newton-GMRES linear
// solve, plus an estimate of the observed convergence order.

#include <foldpath/gmres.hpp>
#include <foldpath/linalg.hpp>

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace foldpath {

using ResidualMap = std::function<Vector(const Vector&)>;
using JacobianMap = std::function<Matrix(const Vector&)>;

/// Thrown by a residual map when the iterate leaves the region where the
/// map is defined.
class DomainError : public std::runtime_error {
public:
   using std::runtime_error::runtime_error;
};

struct NewtonOptions {
   double abs_tol = 1e-10;
   double rel_tol = 1e-10;
   int max_iter = 20;
   double forcing = 1e-4;  // GMRES relative tolerance, fixed
   Index gmres_max_iter = 0;  // 0: use the system dimension
};

struct NewtonResult {
   Vector solution;
   int iterations = 0;
   std::vector<double> step_norms;
   std::vector<double> residual_norms;  // ||F(x_0)||, ||F(x_1)||, ...
   std::vector<Index> gmres_iterations_per_step;  // empty for the direct backend
   bool converged = false;
   std::optional<double> q_order_estimate;
};

enum class NewtonFailure { singular_jacobian, gmres_stalled, domain_error, non_finite };

class NewtonError : public std::runtime_error {
public:
   NewtonError(NewtonFailure kind, const std::string& what, Vector iterate,
               std::optional<GmresTrace> trace = std::nullopt)
      : std::runtime_error(what), kind_(kind), iterate_(std::move(iterate)), trace_(std::move(trace))
   {
   }

   NewtonFailure kind() const noexcept { return kind_; }
   const Vector& iterate() const noexcept { return iterate_; }
   const std::optional<GmresTrace>& gmres_trace() const noexcept { return trace_; }

private:
   NewtonFailure kind_;
   Vector iterate_;
   std::optional<GmresTrace> trace_;
};

/// Least-squares slope of log s_{k+1} against log s_k. About 2 for a
/// q-quadratically converging sequence, about 1 for a linear one.
inline std::optional<double> q_order_estimate(const std::vector<double>& step_norms)
{
   std::vector<double> logs;
   for (double s : step_norms) {
      if (s > 0.0 && std::isfinite(s)) logs.push_back(std::log(s));
   }
   if (logs.size() < 3) return std::nullopt;
   const std::size_t m = logs.size() - 1;
   double mx = 0.0;
   double my = 0.0;
   for (std::size_t k = 0; k < m; ++k) {
      mx += logs[k];
      my += logs[k + 1];
   }
   mx /= static_cast<double>(m);
   my /= static_cast<double>(m);
   double sxy = 0.0;
   double sxx = 0.0;
   for (std::size_t k = 0; k < m; ++k) {
      sxy += (logs[k] - mx) * (logs[k + 1] - my);
      sxx += (logs[k] - mx) * (logs[k] - mx);
   }
   if (sxx == 0.0) return std::nullopt;
   return sxy / sxx;
}

/// Forward-difference approximation of J(x) v given F(x).
/// Step h = sqrt(eps) (1 + ||x||) / ||v||.
inline Vector fd_directional_derivative(const ResidualMap& F, const Vector& x, const Vector& Fx, const Vector& v)
{
   const double v_norm = v.norm();
   if (v_norm == 0.0) return Vector::Zero(Fx.size());
   const double h = std::sqrt(kMachineEps) * (1.0 + x.norm()) / v_norm;
   return (F(x + h * v) - Fx) / h;
}

namespace detail {

inline Vector evaluate(const ResidualMap& F, const Vector& x)
{
   try {
      Vector r = F(x);
      if (!r.allFinite()) {
         throw NewtonError(NewtonFailure::non_finite, "newton: residual is not finite", x);
      }
      return r;
   } catch (const DomainError& e) {
      throw NewtonError(NewtonFailure::domain_error, std::string("newton: ") + e.what(), x);
   }
}

template <class StepSolver>
NewtonResult newton_loop(const ResidualMap& F, const Vector& x0, const NewtonOptions& opt, StepSolver&& solve_step)
{
   NewtonResult res;
   res.solution = x0;
   Vector r = evaluate(F, res.solution);
   const double r0 = r.norm();
   res.residual_norms.push_back(r0);
   const double stop = opt.abs_tol + opt.rel_tol * r0;

   while (true) {
      if (res.residual_norms.back() <= stop) {
         res.converged = true;
         break;
      }
      if (res.iterations >= opt.max_iter) break;
      const Vector step = solve_step(res.solution, r, res);
      res.solution += step;
      res.step_norms.push_back(step.norm());
      ++res.iterations;
      r = evaluate(F, res.solution);
      res.residual_norms.push_back(r.norm());
   }
   res.q_order_estimate = q_order_estimate(res.step_norms);
   return res;
}

}  // namespace detail

inline NewtonResult newton_direct(const ResidualMap& F, const JacobianMap& J, const Vector& x0,
                                  const NewtonOptions& opt = {})
{
   return detail::newton_loop(F, x0, opt, [&](const Vector& x, const Vector& r, NewtonResult&) -> Vector {
      Matrix jac;
      try {
         jac = J(x);
      } catch (const DomainError& e) {
         throw NewtonError(NewtonFailure::domain_error, std::string("newton: ") + e.what(), x);
      }
      if (jac.rows() != r.size() || jac.cols() != x.size()) {
         throw PreconditionError("newton: Jacobian shape does not match the residual");
      }
      try {
         return lu_solve(jac, -r);
      } catch (const SingularMatrixError& e) {
         throw NewtonError(NewtonFailure::singular_jacobian, std::string("newton: ") + e.what(), x);
      } catch (const PreconditionError& e) {
         throw NewtonError(NewtonFailure::non_finite, std::string("newton: ") + e.what(), x);
      }
   });
}

inline NewtonResult newton_gmres(const ResidualMap& F, const Vector& x0, const NewtonOptions& opt = {})
{
   return detail::newton_loop(F, x0, opt, [&](const Vector& x, const Vector& r, NewtonResult& res) -> Vector {
      const Index n = x.size();
      LinearOperator jv{n, [&](const Vector& v) { return fd_directional_derivative(F, x, r, v); }};
      const Index max_iter = opt.gmres_max_iter > 0 ? std::min(opt.gmres_max_iter, n) : n;
      GmresTrace trace;
      try {
         trace = gmres_solve(jv, -r, Vector::Zero(n), opt.forcing, max_iter);
      } catch (const DomainError& e) {
         throw NewtonError(NewtonFailure::domain_error, std::string("newton: ") + e.what(), x);
      }
      if (!trace.converged) {
         throw NewtonError(NewtonFailure::gmres_stalled, "newton: GMRES did not reach the forcing tolerance", x,
                           std::move(trace));
      }
      res.gmres_iterations_per_step.push_back(trace.iterations);
      return trace.solution;
   });
}

}  // namespace foldpath

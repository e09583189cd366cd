#pragma once

// Parameter continuation and pseudo-arclength continuation drivers.
//
// Pseudo-arclength continuation solves the extended system
//
//   F(x, s) = ( G(u, lambda) ; xdot_0^T (x - x_0) - (s - s_0) ) = 0,   x = (u, lambda),
//
// for successive s, which stays solvable through simple folds where the
// parameter-continuation Jacobian G_u becomes singular.

#include <foldpath/fold_analysis.hpp>
#include <foldpath/linalg.hpp>
#include <foldpath/newton.hpp>
#include <foldpath/problems.hpp>

#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace foldpath {

class ContinuationError : public std::runtime_error {
public:
   using std::runtime_error::runtime_error;
};

enum class LinearBackend { direct, gmres };
enum class Predictor { none, euler_secant };

inline std::string_view to_string(LinearBackend b) { return b == LinearBackend::direct ? "direct" : "gmres"; }
inline std::string_view to_string(Predictor p) { return p == Predictor::none ? "none" : "euler-secant"; }

struct ContinuationOptions {
   LinearBackend backend = LinearBackend::direct;
   Predictor predictor = Predictor::euler_secant;
   NewtonOptions newton;
   bool adaptive = false;  // halve ds on Newton failure, restore after two easy steps
   double ds_min_ratio = 1.0 / 64.0;
   double lambda_min = -kInf;
   double lambda_max = kInf;
   std::size_t max_points = 1000000;
   bool record_diagnostics = true;
   FoldThresholds thresholds;
};

struct NewtonSummary {
   int iterations = 0;
   bool converged = true;
   double final_residual = 0.0;
   std::vector<Index> gmres_iterations;
   std::optional<double> q_order;

   double krylovs_per_newton() const
   {
      if (gmres_iterations.empty()) return 0.0;
      const double total = static_cast<double>(std::accumulate(gmres_iterations.begin(), gmres_iterations.end(), Index{0}));
      return total / static_cast<double>(gmres_iterations.size());
   }
};

inline NewtonSummary summarize(const NewtonResult& r)
{
   return {r.iterations, r.converged, r.residual_norms.back(), r.gmres_iterations_per_step, r.q_order_estimate};
}

struct PathPoint {
   Vector u;
   double lambda = 0.0;
   double s = 0.0;
   Vector tangent;  // unit tangent forming the bottom row of F_x when this point was solved
   double functional = 0.0;
   std::optional<FoldDiagnostics> diagnostics;
   NewtonSummary newton;
};

struct PathFailure {
   double s = 0.0;
   double lambda = 0.0;
   std::string reason;
};

struct Path {
   std::string algorithm;  // "paramc" or "psarc"
   std::string problem_id;
   double step = 0.0;      // dlambda or ds
   ContinuationOptions config;
   std::vector<PathPoint> points;
   std::optional<PathFailure> failure;

   bool complete() const { return !failure.has_value(); }
};

/// N(x, s) = xdot_0^T (x - x_0) - (s - s_0).
struct NormalizationEq {
   Vector x0;
   double s0 = 0.0;
   Vector tangent0;

   double operator()(const Vector& x, double s) const { return tangent0.dot(x - x0) - (s - s0); }
};

inline Vector join(const Vector& u, double lambda)
{
   Vector x(u.size() + 1);
   x << u, lambda;
   return x;
}

inline Vector extended_residual(const Problem& problem, const NormalizationEq& eq, const Vector& x, double s)
{
   const Index n = problem.dimension();
   if (x.size() != n + 1 || eq.x0.size() != n + 1 || eq.tangent0.size() != n + 1) {
      throw PreconditionError("extended_residual: vectors must have length N + 1");
   }
   Vector r(n + 1);
   r.head(n) = problem.residual(x.head(n), x(n));
   r(n) = eq(x, s);
   return r;
}

inline Matrix extended_jacobian(const Problem& problem, const NormalizationEq& eq, const Vector& x)
{
   const Index n = problem.dimension();
   Matrix J(n + 1, n + 1);
   J.topLeftCorner(n, n) = problem.jacobian(x.head(n), x(n));
   J.topRightCorner(n, 1) = problem.lambda_derivative(x.head(n), x(n));
   J.bottomRows(1) = eq.tangent0.transpose();
   return J;
}

/// Unit chord from x_prev to x_curr, flipped if it opposes prev_tangent.
inline Vector secant_tangent(const Vector& x_prev, const Vector& x_curr, const Vector* prev_tangent = nullptr)
{
   if (x_prev.size() != x_curr.size()) throw PreconditionError("secant_tangent: length mismatch");
   Vector d = x_curr - x_prev;
   const double len = d.norm();
   if (!(len > 0.0)) throw ContinuationError("secant_tangent: points coincide");
   d /= len;
   if (prev_tangent != nullptr && prev_tangent->dot(d) < 0.0) d = -d;
   return d;
}

/// Exact unit tangent from G_u udot = -G_lambda with lambdadot > 0.
inline Vector initial_tangent(const Problem& problem, const Vector& x0)
{
   const Index n = problem.dimension();
   if (x0.size() != n + 1) throw PreconditionError("initial_tangent: point must have length N + 1");
   const Vector u = x0.head(n);
   Vector udot;
   try {
      udot = lu_solve(problem.jacobian(u, x0(n)), -problem.lambda_derivative(u, x0(n)));
   } catch (const SingularMatrixError&) {
      throw ContinuationError("initial_tangent: G_u is singular at the starting point; start away from the fold");
   }
   Vector t = join(udot, 1.0);
   return t / t.norm();
}

namespace detail {

inline NewtonResult solve_with(const ContinuationOptions& opt, const ResidualMap& F, const JacobianMap& J,
                               const Vector& guess)
{
   return opt.backend == LinearBackend::direct ? newton_direct(F, J, guess, opt.newton)
                                               : newton_gmres(F, guess, opt.newton);
}

inline std::optional<FoldDiagnostics> diagnose(const Problem& problem, const Vector& x, const Vector& tangent,
                                               const ContinuationOptions& opt)
{
   if (!opt.record_diagnostics) return std::nullopt;
   const Index n = problem.dimension();
   const Vector u = x.head(n);
   return classify_point(problem.jacobian(u, x(n)), problem.lambda_derivative(u, x(n)), tangent, opt.thresholds);
}

inline PathPoint make_point(const Problem& problem, const Vector& x, double s, const Vector& tangent,
                            const ContinuationOptions& opt, NewtonSummary stats)
{
   const Index n = problem.dimension();
   PathPoint p;
   p.u = x.head(n);
   p.lambda = x(n);
   p.s = s;
   p.tangent = tangent;
   p.functional = problem.functional(p.u);
   p.diagnostics = diagnose(problem, x, tangent, opt);
   p.newton = std::move(stats);
   return p;
}

}  // namespace detail

/// Parameter continuation: solve G(u, lambda) = 0 at lambda_init + k dlambda,
/// each time starting Newton from the previous solution.
///
/// A Newton failure after the first point truncates the path and records the
/// failure; this is the expected outcome when the path approaches a fold.
inline Path paramc(const Problem& problem, double lambda_init, double lambda_end, double dlambda, const Vector& u_init,
                   const ContinuationOptions& opt = {})
{
   if (!(dlambda > 0.0)) throw PreconditionError("paramc: dlambda must be positive");
   if (!(lambda_init < lambda_end)) throw PreconditionError("paramc: need lambda_init < lambda_end");
   const Index n = problem.dimension();
   if (u_init.size() != n) throw PreconditionError("paramc: initial iterate has wrong length");

   Path path;
   path.algorithm = "paramc";
   path.problem_id = problem.id();
   path.step = dlambda;
   path.config = opt;

   Vector u = u_init;
   Vector tangent = Vector::Unit(n + 1, n);
   for (long k = 0;; ++k) {
      const double lambda = lambda_init + static_cast<double>(k) * dlambda;
      if (lambda > lambda_end + 1e-12 * std::abs(dlambda) || path.points.size() >= opt.max_points) break;

      const ResidualMap F = [&](const Vector& v) { return problem.residual(v, lambda); };
      const JacobianMap J = [&](const Vector& v) { return problem.jacobian(v, lambda); };
      std::string reason;
      NewtonResult res;
      try {
         res = detail::solve_with(opt, F, J, u);
         if (!res.converged) reason = "Newton did not converge in " + std::to_string(res.iterations) + " iterations";
      } catch (const NewtonError& e) {
         reason = e.what();
      }
      if (!reason.empty()) {
         if (path.points.empty()) {
            throw ContinuationError("paramc: no solution at the starting parameter: " + reason);
         }
         path.failure = PathFailure{path.points.back().s + dlambda, lambda, reason};
         break;
      }

      const Vector x = join(res.solution, lambda);
      if (!path.points.empty()) {
         const Vector prev = join(path.points.back().u, path.points.back().lambda);
         tangent = secant_tangent(prev, x, &tangent);
      }
      const double s = path.points.empty() ? 0.0 : path.points.back().s + (x - join(path.points.back().u, path.points.back().lambda)).norm();
      path.points.push_back(detail::make_point(problem, x, s, tangent, opt, summarize(res)));
      u = res.solution;
   }
   return path;
}

/// Pseudo-arclength continuation from a solution x_init = (u, lambda) with
/// unit tangent tangent_init, advancing s by ds per accepted point until s_end.
inline Path psarc(const Problem& problem, double s_end, double ds, const Vector& x_init, const Vector& tangent_init,
                  const ContinuationOptions& opt = {})
{
   const Index n = problem.dimension();
   if (!(ds > 0.0)) throw PreconditionError("psarc: ds must be positive");
   if (x_init.size() != n + 1) throw PreconditionError("psarc: initial point must have length N + 1");
   const Vector t_init = detail::checked_unit_tangent(tangent_init, n + 1);
   const double start_residual = problem.residual(x_init.head(n), x_init(n)).norm();
   if (!(start_residual <= 10.0 * opt.newton.abs_tol + 1e-8)) {
      throw PreconditionError("psarc: initial point does not solve G (residual " + std::to_string(start_residual) + ")");
   }

   Path path;
   path.algorithm = "psarc";
   path.problem_id = problem.id();
   path.step = ds;
   path.config = opt;

   Vector x0 = x_init;
   Vector t0 = t_init;
   double s = 0.0;
   NewtonSummary start;
   start.final_residual = start_residual;
   path.points.push_back(detail::make_point(problem, x0, s, t0, opt, std::move(start)));

   const double ds_min = ds * opt.ds_min_ratio;
   double h = ds;
   int easy_steps = 0;
   while (s + h <= s_end + 1e-9 * ds && path.points.size() < opt.max_points) {
      const NormalizationEq eq{x0, s, t0};
      const double s_next = s + h;
      const ResidualMap F = [&](const Vector& x) { return extended_residual(problem, eq, x, s_next); };
      const JacobianMap J = [&](const Vector& x) { return extended_jacobian(problem, eq, x); };
      const Vector guess = opt.predictor == Predictor::euler_secant ? Vector(x0 + h * t0) : x0;

      std::string reason;
      NewtonResult res;
      try {
         res = detail::solve_with(opt, F, J, guess);
         if (!res.converged) reason = "Newton did not converge in " + std::to_string(res.iterations) + " iterations";
      } catch (const NewtonError& e) {
         reason = e.what();
      }
      if (!reason.empty()) {
         if (opt.adaptive && 0.5 * h >= ds_min) {
            h *= 0.5;
            easy_steps = 0;
            continue;
         }
         path.failure = PathFailure{s_next, x0(n), reason};
         break;
      }

      const Vector x1 = res.solution;
      s = s_next;
      const Vector t1 = secant_tangent(x0, x1, &t0);
      path.points.push_back(detail::make_point(problem, x1, s, t0, opt, summarize(res)));
      x0 = x1;
      t0 = t1;

      if (opt.adaptive) {
         easy_steps = res.iterations <= 3 ? easy_steps + 1 : 0;
         if (easy_steps >= 2 && h < ds) {
            h = std::min(ds, 2.0 * h);
            easy_steps = 0;
         }
      }
      if (x1(n) < opt.lambda_min || x1(n) > opt.lambda_max) break;
   }
   return path;
}

}  // namespace foldpath

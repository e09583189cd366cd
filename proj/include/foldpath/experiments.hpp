#pragma once

// Experiment runner: H-equation continuation runs with their plots and the
// seeded property suites. Each run writes CSV/JSON/SVG artifacts plus a
// verdict JSON into the configured output directory.

#include <foldpath/cluster_analysis.hpp>
#include <foldpath/config.hpp>
#include <foldpath/continuation.hpp>
#include <foldpath/io.hpp>
#include <foldpath/problems.hpp>
#include <foldpath/random.hpp>
#include <foldpath/spectral_bounds.hpp>
#include <foldpath/svg.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

namespace foldpath::experiments {

enum ExitCode : int { kSuccess = 0, kPartialPath = 2, kPropertyViolation = 3, kConfigError = 4 };

struct Outcome {
   int exit_code = kSuccess;
   json verdict;
   std::vector<std::string> artifacts;
};

inline ContinuationOptions continuation_options(const RunConfig& cfg)
{
   ContinuationOptions o;
   o.backend = cfg.backend == "gmres" ? LinearBackend::gmres : LinearBackend::direct;
   o.predictor = cfg.predictor == "none" ? Predictor::none : Predictor::euler_secant;
   o.newton.forcing = cfg.forcing;
   o.adaptive = cfg.adaptive;
   o.thresholds = {cfg.fold_sigma_rel, cfg.fold_proj_rel};
   return o;
}

/// Pseudo-arclength run on the H-equation from the exact solution H = 1 at c = 0.
inline Path heq_psarc(const HEquation& heq, double ds, double s_end, const ContinuationOptions& opt)
{
   const Vector x0 = join(Vector::Ones(heq.dimension()), 0.0);
   return psarc(heq, s_end, ds, x0, initial_tangent(heq, x0), opt);
}

/// Parameter continuation on the H-equation from c = 0 toward c_end.
inline Path heq_paramc(const HEquation& heq, double dlambda, double c_end, const ContinuationOptions& opt)
{
   return paramc(heq, 0.0, c_end, dlambda, Vector::Ones(heq.dimension()), opt);
}

struct FoldSummary {
   std::size_t index = 0;
   double max_c = -kInf;
   double norm_at_max_c = 0.0;
   double null_residual = kInf;  // ||G_H phi|| / ||phi|| with phi_i = mu_i H_i
   double min_sigma_N = kInf;    // smallest sigma_N(G_u) recorded along the path
};

inline FoldSummary fold_summary(const Path& path, const HEquation& heq)
{
   FoldSummary f;
   for (std::size_t i = 0; i < path.points.size(); ++i) {
      const PathPoint& p = path.points[i];
      if (p.lambda > f.max_c) {
         f.max_c = p.lambda;
         f.index = i;
      }
      if (p.diagnostics) f.min_sigma_N = std::min(f.min_sigma_N, p.diagnostics->sigma_N);
   }
   if (path.points.empty()) return f;
   const PathPoint& top = path.points[f.index];
   f.norm_at_max_c = top.functional;
   const Vector phi = heq.null_vector(top.u);
   f.null_residual = (heq.jacobian(top.u, top.lambda) * phi).norm() / phi.norm();
   return f;
}

struct BranchComparison {
   double max_lower_gap = 0.0;
   double max_upper_gap = 0.0;
   std::size_t lower_points = 0;
   std::size_t upper_points = 0;
};

/// Distance of the path functional to the closed-form branch norms. A point
/// belongs to the lower branch when its norm is at most 2.
inline BranchComparison compare_with_closed_form(const Path& path)
{
   BranchComparison b;
   for (const PathPoint& p : path.points) {
      if (p.lambda <= 0.0 || p.lambda > 1.0) continue;
      const bool lower = p.functional <= 2.0;
      const double exact = HEquation::closed_form_norm(p.lambda, lower ? -1 : +1);
      const double gap = std::abs(p.functional - exact);
      if (lower) {
         b.max_lower_gap = std::max(b.max_lower_gap, gap);
         ++b.lower_points;
      } else {
         b.max_upper_gap = std::max(b.max_upper_gap, gap);
         ++b.upper_points;
      }
   }
   return b;
}

struct SigmaSummary {
   double min_actual = kInf;
   double min_sigma_N = kInf;
   std::size_t bound_checked = 0;
   std::size_t bound_violations = 0;         // actual < bound - 1e-8 ||F_x||
   std::size_t scaled_bound_violations = 0;  // actual < scaled bound - 1e-8 ||F_x||
   std::size_t alpha_violations = 0;         // lambda_min(G_u G_u^T + G_l G_l^T) < alpha
   double worst_bound_margin = kInf;         // min over checked points of actual - bound
   double worst_bound_c = 0.0;
};

inline SigmaSummary sigma_summary(const Path& path, const Problem& problem)
{
   SigmaSummary s;
   for (const PathPoint& p : path.points) {
      if (!p.diagnostics) continue;
      const FoldDiagnostics& d = *p.diagnostics;
      s.min_actual = std::min(s.min_actual, d.sigma_min_Fx_actual);
      s.min_sigma_N = std::min(s.min_sigma_N, d.sigma_N);
      const double slack = 1e-8 * d.Fx_norm;
      if (d.bound.value) {
         ++s.bound_checked;
         const double margin = d.sigma_min_Fx_actual - *d.bound.value;
         if (margin < s.worst_bound_margin) {
            s.worst_bound_margin = margin;
            s.worst_bound_c = p.lambda;
         }
         if (margin < -slack) ++s.bound_violations;
         if (d.sigma_min_Fx_actual < *d.bound.scaled_value - slack) ++s.scaled_bound_violations;
      }
      const Matrix G_u = problem.jacobian(p.u, p.lambda);
      const Vector G_l = problem.lambda_derivative(p.u, p.lambda);
      const Matrix A = G_u * G_u.transpose() + G_l * G_l.transpose();
      const Vector beta = sym_eig(0.5 * (A + A.transpose())).eigenvalues;
      if (beta(beta.size() - 1) < d.alpha - 1e-10 * std::max(1.0, beta(0))) ++s.alpha_violations;
   }
   return s;
}

struct KrylovSummary {
   std::vector<double> c;
   std::vector<double> krylovs_per_newton;
   double max_kpn = 0.0;
   double early_mean = 0.0;  // first third of the solved points
   double late_mean = 0.0;   // last third
   double max_c = -kInf;
   bool past_fold = false;   // reached c >= 0.99 and turned back
};

inline KrylovSummary krylov_summary(const Path& path)
{
   KrylovSummary k;
   for (std::size_t i = 1; i < path.points.size(); ++i) {
      k.c.push_back(path.points[i].lambda);
      k.krylovs_per_newton.push_back(path.points[i].newton.krylovs_per_newton());
   }
   for (const PathPoint& p : path.points) k.max_c = std::max(k.max_c, p.lambda);
   const std::size_t n = k.c.size();
   if (n == 0) return k;
   k.max_kpn = *std::max_element(k.krylovs_per_newton.begin(), k.krylovs_per_newton.end());
   const std::size_t third = std::max<std::size_t>(1, n / 3);
   double early = 0.0, late = 0.0;
   for (std::size_t i = 0; i < third; ++i) {
      early += k.krylovs_per_newton[i];
      late += k.krylovs_per_newton[n - 1 - i];
   }
   k.early_mean = early / static_cast<double>(third);
   k.late_mean = late / static_cast<double>(third);
   k.past_fold = k.max_c >= 0.99 && path.points.back().lambda < k.max_c;
   return k;
}

struct FuzzSummary {
   long trials = 0;
   long bound_violations = 0;
   long helper_violations = 0;
   long weyl_violations = 0;
   long aligned_violations = 0;
   double worst_bound_excess = -kInf;  // max of (bound - oracle) / scale
   double worst_aligned_error = 0.0;   // max relative error in the aligned equality
   json examples = json::array();      // first few violations

   long violations() const { return bound_violations + helper_violations + weyl_violations + aligned_violations; }
};

/// Randomized check of the rank-one bounds against lambda_min(A + y y^T)
/// computed independently as sigma_min([B y])^2 for A = B B^T.
inline FuzzSummary bounds_fuzz(long trials, std::uint64_t seed, long max_dimension)
{
   random::Engine rng(seed);
   FuzzSummary f;
   f.trials = trials;
   auto oracle = [](const Matrix& B, const Vector& y) {
      Matrix By(B.rows(), B.cols() + 1);
      By << B, y;
      const Vector s = singular_values(By);
      const double smin = s(B.rows() - 1);
      return smin * smin;
   };
   auto note = [&](const char* kind, long trial, double lhs, double rhs) {
      if (f.examples.size() < 10) f.examples.push_back({{"kind", kind}, {"trial", trial}, {"lhs", lhs}, {"rhs", rhs}});
   };

   for (long t = 0; t < trials; ++t) {
      const Index n = random::uniform_index(rng, 2, std::max<long>(2, max_dimension));
      const random::PsdSample sample = random::psd(rng, n);
      Vector y = random::gaussian_vector(rng, n) * std::pow(10.0, random::uniform(rng, -2.0, 1.5));
      const SymEigResult eig = sym_eig(sample.A);
      const Vector u_N = eig.eigenvectors.col(n - 1);
      if (random::uniform(rng, 0.0, 1.0) < 0.3) {
         // Push y toward the bottom eigenvector so the second branch of the bound is active.
         y = u_N * (y.norm() * (random::uniform(rng, 0.0, 1.0) < 0.5 ? 1.0 : -1.0)) +
             y * std::pow(10.0, random::uniform(rng, -6.0, -1.0));
      }

      const RankOneBoundReport r = rank_one_lower_bound(sample.A, y);
      const double lam = oracle(sample.B, y);
      const double scale = std::abs(eig.eigenvalues(0)) + y.squaredNorm();
      const double tol = 1e-9 * scale;
      f.worst_bound_excess = std::max(f.worst_bound_excess, (r.bound_main - lam) / scale);
      if (r.bound_main > lam + tol) {
         ++f.bound_violations;
         note("bound_main", t, r.bound_main, lam);
      }
      if (r.bound_helper > lam + tol) {
         ++f.helper_violations;
         note("bound_helper", t, r.bound_helper, lam);
      }
      if (lam < r.weyl_low - tol || lam > r.weyl_high + tol) {
         ++f.weyl_violations;
         note("weyl", t, lam, r.weyl_low);
      }

      const double amp = y.norm() * (random::uniform(rng, 0.0, 1.0) < 0.5 ? 1.0 : -1.0);
      const Vector y_aligned = amp * u_N;
      const RankOneBoundReport ra = rank_one_lower_bound(sample.A, y_aligned);
      const double expected = std::min(ra.beta_N + y_aligned.squaredNorm(), ra.beta_Nminus1);
      const double got = oracle(sample.B, y_aligned);
      const double err = std::abs(got - expected) / (std::abs(eig.eigenvalues(0)) + y_aligned.squaredNorm());
      f.worst_aligned_error = std::max(f.worst_aligned_error, err);
      if (err > 1e-10) {
         ++f.aligned_violations;
         note("aligned", t, got, expected);
      }
   }
   return f;
}

struct ToySummary {
   Path path;
   double max_lambda = -kInf;
   double max_closed_form_error = 0.0;  // |u - sign(u) sqrt(1 - lambda)|
   bool decreasing_after_fold = true;
   bool crossed_fold = false;           // u changed sign
};

inline ToySummary toy_fold_check(double ds, double s_end, const ContinuationOptions& opt = {})
{
   const ToyFoldProblem toy;
   const Vector x0 = join(Vector::Ones(1), 0.0);
   ToySummary t;
   t.path = psarc(toy, s_end, ds, x0, initial_tangent(toy, x0), opt);
   std::size_t top = 0;
   for (std::size_t i = 0; i < t.path.points.size(); ++i) {
      const PathPoint& p = t.path.points[i];
      if (p.lambda > t.max_lambda) {
         t.max_lambda = p.lambda;
         top = i;
      }
      const double u = p.u(0);
      const double exact = std::copysign(std::sqrt(std::max(0.0, 1.0 - p.lambda)), u);
      t.max_closed_form_error = std::max(t.max_closed_form_error, std::abs(u - exact));
      if (u < 0.0) t.crossed_fold = true;
   }
   for (std::size_t i = top + 1; i < t.path.points.size(); ++i) {
      if (!(t.path.points[i].lambda < t.path.points[i - 1].lambda)) t.decreasing_after_fold = false;
   }
   return t;
}

struct ClusterSummary {
   SplittingReport split;
   JboundCheck jbound;
   Index planted_p = 0;
   double planted_E_norm = 0.0;
};

inline ClusterSummary cluster_verify(Index dimension, Index p, double eps, std::uint64_t seed, double split_eps)
{
   const ClusterOperator co = synthetic_cluster_operator(dimension, p, eps, seed);
   random::Engine rng(seed ^ 0x9e3779b97f4a7c15ULL);
   const Vector b = random::gaussian_vector(rng, dimension);
   ClusterSummary s;
   s.planted_p = p;
   s.planted_E_norm = eps;
   s.split = split_low_rank(co.J, split_eps).report;
   s.jbound = verify_jbound(co.op, p + 1, eps, b);
   s.split.jbound_C_fit = s.jbound.C_fit;
   s.split.observed_gmres_plateau = observe_gmres_plateau(co.op, eps, b);
   return s;
}

namespace detail {

inline std::filesystem::path out_file(const RunConfig& cfg, const std::string& name)
{
   return std::filesystem::path(cfg.out) / name;
}

inline void emit(Outcome& o, const RunConfig& cfg, const std::string& name, const std::string& content)
{
   const auto file = out_file(cfg, name);
   write_atomic(file, content);
   o.artifacts.push_back(file.string());
}

inline void finish(Outcome& o, const RunConfig& cfg)
{
   o.verdict["experiment"] = cfg.experiment;
   o.verdict["exit_code"] = o.exit_code;
   emit(o, cfg, cfg.experiment + ".config", cfg.to_text());
   emit(o, cfg, cfg.experiment + ".verdict.json", o.verdict.dump(2) + "\n");
}

inline json path_status(const Path& path)
{
   json j = {{"points", path.points.size()}, {"complete", path.complete()}};
   if (path.failure) j["failure"] = {{"lambda", path.failure->lambda}, {"reason", path.failure->reason}};
   return j;
}

inline std::vector<double> column(const Path& path, double (*get)(const PathPoint&))
{
   std::vector<double> out;
   for (const PathPoint& p : path.points) out.push_back(get(p));
   return out;
}

}  // namespace detail

inline Outcome run_fig1(const RunConfig& cfg)
{
   Outcome o;
   const HEquation heq(cfg.nodes);
   const Path path = heq_psarc(heq, cfg.ds, cfg.s_end, continuation_options(cfg));
   const FoldSummary fold = fold_summary(path, heq);
   const BranchComparison cmp = compare_with_closed_form(path);

   detail::emit(o, cfg, "fig1_path.csv", path_csv(path));
   detail::emit(o, cfg, "fig1_path.json", to_json(path).dump() + "\n");

   double top = 0.0;
   for (const PathPoint& p : path.points) top = std::max(top, p.functional);
   svg::Series lower{"closed form, lower branch", {}, {}, "#2ca02c", false, true};
   svg::Series upper{"closed form, upper branch", {}, {}, "#d62728", false, true};
   for (int i = 0; i <= 400; ++i) {
      const double c = i / 400.0;
      lower.x.push_back(c);
      lower.y.push_back(HEquation::closed_form_norm(c, -1));
      const double up = HEquation::closed_form_norm(c, +1);
      if (up <= 1.05 * top) {
         upper.x.push_back(c);
         upper.y.push_back(up);
      }
   }
   svg::Series computed{"computed path", detail::column(path, [](const PathPoint& p) { return p.lambda; }),
                        detail::column(path, [](const PathPoint& p) { return p.functional; }), "#1f77b4", true};
   detail::emit(o, cfg, "fig1.svg",
                svg::render({"||H||_1 as a function of c", "c", "||H||_1"}, {computed, lower, upper}));

   o.verdict["path"] = detail::path_status(path);
   o.verdict["max_c"] = fold.max_c;
   o.verdict["norm_at_max_c"] = fold.norm_at_max_c;
   o.verdict["null_vector_residual"] = fold.null_residual;
   o.verdict["max_lower_branch_gap"] = cmp.max_lower_gap;
   o.verdict["max_upper_branch_gap"] = cmp.max_upper_gap;
   o.exit_code = path.complete() ? kSuccess : kPartialPath;
   detail::finish(o, cfg);
   return o;
}

inline Outcome run_fig2(const RunConfig& cfg)
{
   Outcome o;
   const HEquation heq(cfg.nodes);
   ContinuationOptions opt = continuation_options(cfg);
   opt.record_diagnostics = true;
   const Path path = heq_psarc(heq, cfg.ds, cfg.s_end, opt);
   const SigmaSummary sig = sigma_summary(path, heq);
   const Path contrast = heq_paramc(heq, cfg.dlambda, 1.5, opt);

   detail::emit(o, cfg, "fig2_path.csv", path_csv(path));
   detail::emit(o, cfg, "fig2_paramc.csv", path_csv(contrast));

   auto c_of = [](const PathPoint& p) { return p.lambda; };
   svg::Series actual{"sigma_min(F_x)", {}, {}, "#1f77b4", true};
   svg::Series bound{"lower bound", {}, {}, "#ff7f0e", false, true};
   svg::Series scaled{"lower bound with min(alpha,1) factor", {}, {}, "#9467bd", false, true};
   svg::Series gu{"sigma_min(G_u), psarc", {}, {}, "#2ca02c"};
   svg::Series gu_param{"sigma_min(G_u), paramc", {}, {}, "#d62728", true};
   for (const PathPoint& p : path.points) {
      if (!p.diagnostics) continue;
      const FoldDiagnostics& d = *p.diagnostics;
      actual.x.push_back(c_of(p));
      actual.y.push_back(d.sigma_min_Fx_actual);
      gu.x.push_back(c_of(p));
      gu.y.push_back(d.sigma_N);
      if (d.bound.value) {
         bound.x.push_back(c_of(p));
         bound.y.push_back(*d.bound.value);
         scaled.x.push_back(c_of(p));
         scaled.y.push_back(*d.bound.scaled_value);
      }
   }
   for (const PathPoint& p : contrast.points) {
      if (!p.diagnostics) continue;
      gu_param.x.push_back(c_of(p));
      gu_param.y.push_back(p.diagnostics->sigma_N);
   }
   detail::emit(o, cfg, "fig2.svg",
                svg::render({"sigma_min(F_(H,c)) as a function of c", "c", "singular value"},
                            {actual, bound, scaled, gu, gu_param}));

   double paramc_min_sigma = kInf;
   for (const PathPoint& p : contrast.points) {
      if (p.diagnostics) paramc_min_sigma = std::min(paramc_min_sigma, p.diagnostics->sigma_N);
   }
   o.verdict["path"] = detail::path_status(path);
   o.verdict["min_sigma_min_Fx"] = sig.min_actual;
   o.verdict["min_sigma_N_Gu"] = sig.min_sigma_N;
   o.verdict["bound_points_checked"] = sig.bound_checked;
   o.verdict["bound_violations"] = sig.bound_violations;
   o.verdict["scaled_bound_violations"] = sig.scaled_bound_violations;
   o.verdict["alpha_violations"] = sig.alpha_violations;
   o.verdict["worst_bound_margin"] = json_number(sig.worst_bound_margin);
   o.verdict["paramc"] = detail::path_status(contrast);
   o.verdict["paramc_min_sigma_N_Gu"] = json_number(paramc_min_sigma);
   o.exit_code = path.complete() ? kSuccess : kPartialPath;
   detail::finish(o, cfg);
   return o;
}

inline Outcome run_fig3(const RunConfig& cfg)
{
   Outcome o;
   const HEquation heq(cfg.nodes);
   ContinuationOptions opt = continuation_options(cfg);
   opt.record_diagnostics = false;
   const Path path = heq_psarc(heq, cfg.ds, cfg.s_end, opt);
   const KrylovSummary k = krylov_summary(path);

   detail::emit(o, cfg, "fig3_path.csv", path_csv(path));
   svg::Series kpn{"GMRES iterations per Newton step", k.c, k.krylovs_per_newton, "#1f77b4", true};
   detail::emit(o, cfg, "fig3.svg", svg::render({"Krylovs per Newton", "c", "average inner iterations"}, {kpn}));

   o.verdict["path"] = detail::path_status(path);
   o.verdict["max_krylovs_per_newton"] = k.max_kpn;
   o.verdict["early_mean"] = k.early_mean;
   o.verdict["late_mean"] = k.late_mean;
   o.verdict["max_c"] = k.max_c;
   o.verdict["past_fold"] = k.past_fold;
   o.exit_code = path.complete() ? kSuccess : kPartialPath;
   detail::finish(o, cfg);
   return o;
}

inline Outcome run_suite(const RunConfig& cfg)
{
   Outcome o;
   bool ok = true;
   if (cfg.experiment == "bounds-fuzz") {
      const FuzzSummary f = bounds_fuzz(cfg.trials, cfg.seed, cfg.max_dimension);
      o.verdict = {
         {"trials", f.trials},
         {"bound_violations", f.bound_violations},
         {"helper_violations", f.helper_violations},
         {"weyl_violations", f.weyl_violations},
         {"aligned_violations", f.aligned_violations},
         {"worst_bound_excess", json_number(f.worst_bound_excess)},
         {"worst_aligned_error", json_number(f.worst_aligned_error)},
         {"violations", f.examples},
      };
      ok = f.violations() == 0;
   } else if (cfg.experiment == "toy-fold") {
      const ToySummary t = toy_fold_check(cfg.ds, cfg.s_end, continuation_options(cfg));
      detail::emit(o, cfg, "toy_fold_path.csv", path_csv(t.path));
      o.verdict = {
         {"path", detail::path_status(t.path)},
         {"max_lambda", t.max_lambda},
         {"max_closed_form_error", t.max_closed_form_error},
         {"decreasing_after_fold", t.decreasing_after_fold},
         {"crossed_fold", t.crossed_fold},
      };
      ok = t.path.complete() && std::abs(t.max_lambda - 1.0) <= 1e-3 && t.max_closed_form_error <= 1e-6 &&
           t.decreasing_after_fold && t.crossed_fold;
   } else if (cfg.experiment == "cluster-verify") {
      const ClusterSummary c =
         cluster_verify(cfg.cluster_dimension, cfg.cluster_p, cfg.cluster_eps, cfg.seed, cfg.split_eps);
      detail::emit(o, cfg, "cluster_trace.csv", gmres_trace_csv(c.jbound.trace));
      detail::emit(o, cfg, "cluster_singular_values.csv", singular_value_tail_csv(c.split));
      o.verdict = {
         {"planted_p", c.planted_p},
         {"planted_E_norm", c.planted_E_norm},
         {"split", to_json(c.split)},
         {"jbound", to_json(c.jbound)},
      };
      ok = c.jbound.holds && c.jbound.C_fit <= 1e3;
   } else {
      throw ConfigError("run_suite: '" + cfg.experiment + "' is not a property suite");
   }
   o.verdict["passed"] = ok;
   o.exit_code = ok ? kSuccess : kPropertyViolation;
   detail::finish(o, cfg);
   return o;
}

inline Outcome run(const RunConfig& cfg)
{
   cfg.validate();
   if (cfg.experiment == "fig1-bifurcation") return run_fig1(cfg);
   if (cfg.experiment == "fig2-sigmamin") return run_fig2(cfg);
   if (cfg.experiment == "fig3-krylovs") return run_fig3(cfg);
   return run_suite(cfg);
}

}  // namespace foldpath::experiments

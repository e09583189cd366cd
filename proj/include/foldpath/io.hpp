#pragma once

// CSV and JSON serialization of paths, diagnostics, solver traces and
// reports. Column orders are fixed; numbers use 17 significant digits so
// files round-trip and identical runs produce identical bytes.

#include <foldpath/cluster_analysis.hpp>
#include <foldpath/continuation.hpp>
#include <foldpath/fold_analysis.hpp>
#include <foldpath/gmres.hpp>
#include <foldpath/newton.hpp>
#include <foldpath/spectral_bounds.hpp>

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

namespace foldpath {

using json = nlohmann::json;

inline constexpr std::string_view kPathSchema = "foldpath.path/1";
inline constexpr std::string_view kPathCsvHeader =
   "s,lambda,functional,sigma_N,sigma_Nminus1,gap,proj,xi,alpha,tau,bound,actual,"
   "scaled_bound,newton_iterations,krylovs_per_newton";

inline std::string format_number(double v)
{
   if (std::isnan(v)) return "nan";
   if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
   char buf[32];
   std::snprintf(buf, sizeof buf, "%.17g", v);
   return buf;
}

inline std::string format_optional(const std::optional<double>& v) { return v ? format_number(*v) : "nan"; }

/// JSON has no inf/nan; encode them as strings so nothing is silently lost.
inline json json_number(double v)
{
   if (std::isfinite(v)) return v;
   return format_number(v);
}

inline json json_optional(const std::optional<double>& v) { return v ? json_number(*v) : json(nullptr); }

inline void write_atomic(const std::filesystem::path& target, const std::string& content)
{
   if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
   std::filesystem::path tmp = target;
   tmp += ".tmp";
   {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
      out << content;
      if (!out) throw std::runtime_error("write to " + tmp.string() + " failed");
   }
   std::filesystem::rename(tmp, target);
}

inline std::string fold_csv_row(double s, double lambda, const FoldDiagnostics& d)
{
   std::ostringstream os;
   os << format_number(s) << ',' << format_number(lambda) << ',' << format_number(d.sigma_N) << ','
      << format_number(d.sigma_Nminus1) << ',' << format_number(d.gap) << ',' << format_number(d.proj) << ','
      << format_number(d.xi) << ',' << format_number(d.alpha) << ',' << format_number(d.tau) << ','
      << format_optional(d.bound.value) << ',' << format_number(d.sigma_min_Fx_actual);
   return os.str();
}

inline std::string path_csv(const Path& path)
{
   std::ostringstream os;
   os << kPathCsvHeader << '\n';
   for (const PathPoint& p : path.points) {
      os << format_number(p.s) << ',' << format_number(p.lambda) << ',' << format_number(p.functional) << ',';
      if (p.diagnostics) {
         const FoldDiagnostics& d = *p.diagnostics;
         os << format_number(d.sigma_N) << ',' << format_number(d.sigma_Nminus1) << ',' << format_number(d.gap)
            << ',' << format_number(d.proj) << ',' << format_number(d.xi) << ',' << format_number(d.alpha) << ','
            << format_number(d.tau) << ',' << format_optional(d.bound.value) << ','
            << format_number(d.sigma_min_Fx_actual) << ',' << format_optional(d.bound.scaled_value) << ',';
      } else {
         os << "nan,nan,nan,nan,nan,nan,nan,nan,nan,nan,";
      }
      os << p.newton.iterations << ',' << format_number(p.newton.krylovs_per_newton()) << '\n';
   }
   return os.str();
}

inline std::string gmres_trace_csv(const GmresTrace& t)
{
   std::ostringstream os;
   os << "iteration,residual_norm\n";
   for (std::size_t i = 0; i < t.residual_norms.size(); ++i) {
      os << i << ',' << format_number(t.residual_norms[i]) << '\n';
   }
   return os.str();
}

inline std::string singular_value_tail_csv(const SplittingReport& r)
{
   std::ostringstream os;
   os << "index,singular_value\n";
   for (std::size_t i = 0; i < r.singular_values.size(); ++i) {
      os << i + 1 << ',' << format_number(r.singular_values[i]) << '\n';
   }
   return os.str();
}

inline json to_json(const NewtonResult& r)
{
   json j;
   j["converged"] = r.converged;
   j["iterations"] = r.iterations;
   json steps = json::array();
   for (double s : r.step_norms) steps.push_back(json_number(s));
   json res = json::array();
   for (double v : r.residual_norms) res.push_back(json_number(v));
   j["step_norms"] = steps;
   j["residual_norms"] = res;
   j["gmres_iterations_per_step"] = r.gmres_iterations_per_step;
   j["q_order_estimate"] = json_optional(r.q_order_estimate);
   return j;
}

inline json to_json(const FoldDiagnostics& d)
{
   return {
      {"sigma_1", json_number(d.sigma_1)},
      {"sigma_N", json_number(d.sigma_N)},
      {"sigma_Nminus1", json_number(d.sigma_Nminus1)},
      {"gap", json_number(d.gap)},
      {"proj", json_number(d.proj)},
      {"xi", json_number(d.xi)},
      {"alpha", json_number(d.alpha)},
      {"tau", json_number(d.tau)},
      {"bound", json_optional(d.bound.value)},
      {"scaled_bound", json_optional(d.bound.scaled_value)},
      {"bound_status", std::string(to_string(d.bound.status))},
      {"perturbation", json_number(d.bound.perturbation)},
      {"actual", json_number(d.sigma_min_Fx_actual)},
      {"Fx_norm", json_number(d.Fx_norm)},
      {"is_simple_fold_candidate", d.is_simple_fold_candidate},
   };
}

inline json to_json(const Vector& v)
{
   json a = json::array();
   for (Index i = 0; i < v.size(); ++i) a.push_back(json_number(v(i)));
   return a;
}

inline json to_json(const ContinuationOptions& o)
{
   return {
      {"backend", std::string(to_string(o.backend))},
      {"predictor", std::string(to_string(o.predictor))},
      {"abs_tol", o.newton.abs_tol},
      {"rel_tol", o.newton.rel_tol},
      {"max_newton_iterations", o.newton.max_iter},
      {"forcing", o.newton.forcing},
      {"adaptive", o.adaptive},
      {"ds_min_ratio", o.ds_min_ratio},
      {"lambda_min", json_number(o.lambda_min)},
      {"lambda_max", json_number(o.lambda_max)},
      {"record_diagnostics", o.record_diagnostics},
   };
}

inline json to_json(const Path& path)
{
   json j;
   j["schema"] = kPathSchema;
   j["algorithm"] = path.algorithm;
   j["problem_id"] = path.problem_id;
   j["step"] = path.step;
   j["config"] = to_json(path.config);
   json points = json::array();
   for (const PathPoint& p : path.points) {
      json q;
      q["s"] = p.s;
      q["lambda"] = p.lambda;
      q["functional"] = json_number(p.functional);
      q["u"] = to_json(p.u);
      q["tangent"] = to_json(p.tangent);
      q["diagnostics"] = p.diagnostics ? to_json(*p.diagnostics) : json(nullptr);
      q["newton"] = {
         {"iterations", p.newton.iterations},
         {"converged", p.newton.converged},
         {"final_residual", json_number(p.newton.final_residual)},
         {"gmres_iterations", p.newton.gmres_iterations},
         {"q_order", json_optional(p.newton.q_order)},
      };
      points.push_back(std::move(q));
   }
   j["points"] = std::move(points);
   if (path.failure) {
      j["failure"] = {{"s", path.failure->s}, {"lambda", path.failure->lambda}, {"reason", path.failure->reason}};
   } else {
      j["failure"] = nullptr;
   }
   return j;
}

inline json to_json(const RankOneBoundReport& r)
{
   return {
      {"beta_N", json_number(r.beta_N)},       {"beta_Nminus1", json_number(r.beta_Nminus1)},
      {"y_N", json_number(r.y_N)},             {"gap", json_number(r.gap)},
      {"xi", json_number(r.xi)},               {"bound_main", json_number(r.bound_main)},
      {"bound_helper", json_number(r.bound_helper)}, {"weyl_low", json_number(r.weyl_low)},
      {"weyl_high", json_number(r.weyl_high)}, {"repeated_smallest", r.repeated_smallest},
   };
}

inline json to_json(const SplittingReport& r)
{
   json sv = json::array();
   for (double s : r.K_singular_values) sv.push_back(json_number(s));
   return {
      {"p", r.p},
      {"E_norm", json_number(r.E_norm)},
      {"threshold", json_number(r.threshold)},
      {"K_singular_values", sv},
      {"bordered_rank_bound", r.bordered_rank_bound},
      {"observed_gmres_plateau", r.observed_gmres_plateau},
      {"jbound_C_fit", json_number(r.jbound_C_fit)},
   };
}

inline json to_json(const JboundCheck& c)
{
   json res = json::array();
   for (double v : c.trace.residual_norms) res.push_back(json_number(v));
   return {
      {"C_fit", json_number(c.C_fit)}, {"holds", c.holds}, {"p_hat", c.p_hat},
      {"iterations", c.trace.iterations}, {"converged", c.trace.converged}, {"residual_norms", res},
   };
}

}  // namespace foldpath

#pragma once

// Run configuration for the experiment runner.
//
// File format: one `key = value` pair per line, `#` starts a comment, blank
// lines ignored. `schema_version = 1` is required. Keys not given take the
// defaults of the selected experiment; the resolved configuration is written
// next to the results.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace foldpath {

class ConfigError : public std::runtime_error {
public:
   using std::runtime_error::runtime_error;
};

inline constexpr int kConfigSchemaVersion = 1;

inline const std::vector<std::string>& experiment_names()
{
   static const std::vector<std::string> names{"fig1-bifurcation", "fig2-sigmamin", "fig3-krylovs",
                                               "bounds-fuzz",      "cluster-verify", "toy-fold"};
   return names;
}

struct RunConfig {
   std::string experiment = "fig1-bifurcation";
   long nodes = 200;
   double ds = 0.5;
   double s_end = 60.0;
   std::string backend = "direct";  // direct | gmres
   std::string predictor = "euler-secant";
   double forcing = 1e-4;
   bool adaptive = false;
   double dlambda = 0.05;  // parameter-continuation contrast run
   std::uint64_t seed = 42;
   long trials = 10000;
   long max_dimension = 12;
   long cluster_dimension = 100;
   long cluster_p = 3;
   double cluster_eps = 1e-2;
   double split_eps = 1e-3;
   double fold_sigma_rel = 1e-6;
   double fold_proj_rel = 1e-6;
   std::string out = "results";

   static RunConfig defaults_for(const std::string& experiment)
   {
      RunConfig c;
      c.experiment = experiment;
      if (experiment == "fig3-krylovs") {
         c.nodes = 400;
         c.ds = 0.02;
         c.s_end = 60.0;
         c.backend = "gmres";
      } else if (experiment == "toy-fold") {
         c.nodes = 1;
         c.ds = 1e-2;
         c.s_end = 3.0;
      }
      return c;
   }

   std::string to_text() const
   {
      std::ostringstream os;
      os.precision(17);
      os << "schema_version = " << kConfigSchemaVersion << '\n'
         << "experiment = " << experiment << '\n'
         << "nodes = " << nodes << '\n'
         << "ds = " << ds << '\n'
         << "s_end = " << s_end << '\n'
         << "backend = " << backend << '\n'
         << "predictor = " << predictor << '\n'
         << "forcing = " << forcing << '\n'
         << "adaptive = " << (adaptive ? "true" : "false") << '\n'
         << "dlambda = " << dlambda << '\n'
         << "seed = " << seed << '\n'
         << "trials = " << trials << '\n'
         << "max_dimension = " << max_dimension << '\n'
         << "cluster_dimension = " << cluster_dimension << '\n'
         << "cluster_p = " << cluster_p << '\n'
         << "cluster_eps = " << cluster_eps << '\n'
         << "split_eps = " << split_eps << '\n'
         << "fold_sigma_rel = " << fold_sigma_rel << '\n'
         << "fold_proj_rel = " << fold_proj_rel << '\n'
         << "out = " << out << '\n';
      return os.str();
   }

   void validate() const
   {
      bool known = false;
      for (const auto& n : experiment_names()) known = known || n == experiment;
      if (!known) throw ConfigError("unknown experiment '" + experiment + "'");
      auto positive = [](double v, const char* key) {
         if (!(v > 0.0)) throw ConfigError(std::string(key) + " must be positive");
      };
      positive(static_cast<double>(nodes), "nodes");
      positive(ds, "ds");
      positive(s_end, "s_end");
      positive(forcing, "forcing");
      positive(dlambda, "dlambda");
      positive(static_cast<double>(trials), "trials");
      positive(static_cast<double>(max_dimension), "max_dimension");
      positive(static_cast<double>(cluster_dimension), "cluster_dimension");
      positive(cluster_eps, "cluster_eps");
      positive(split_eps, "split_eps");
      positive(fold_sigma_rel, "fold_sigma_rel");
      positive(fold_proj_rel, "fold_proj_rel");
      if (forcing >= 1.0) throw ConfigError("forcing must be < 1");
      if (cluster_p < 0 || cluster_p >= cluster_dimension) throw ConfigError("need 0 <= cluster_p < cluster_dimension");
      if (backend != "direct" && backend != "gmres") throw ConfigError("backend must be 'direct' or 'gmres'");
      if (predictor != "none" && predictor != "euler-secant") {
         throw ConfigError("predictor must be 'none' or 'euler-secant'");
      }
      if (out.empty()) throw ConfigError("out must not be empty");
   }

   /// Applies one key/value pair; throws ConfigError on unknown keys or bad values.
   void set(const std::string& key, const std::string& value)
   {
      if (key == "experiment") experiment = value;
      else if (key == "nodes") nodes = parse<long>(key, value);
      else if (key == "ds") ds = parse<double>(key, value);
      else if (key == "s_end") s_end = parse<double>(key, value);
      else if (key == "backend") backend = value;
      else if (key == "predictor") predictor = value;
      else if (key == "forcing") forcing = parse<double>(key, value);
      else if (key == "adaptive") adaptive = parse_bool(key, value);
      else if (key == "dlambda") dlambda = parse<double>(key, value);
      else if (key == "seed") seed = parse<std::uint64_t>(key, value);
      else if (key == "trials") trials = parse<long>(key, value);
      else if (key == "max_dimension") max_dimension = parse<long>(key, value);
      else if (key == "cluster_dimension") cluster_dimension = parse<long>(key, value);
      else if (key == "cluster_p") cluster_p = parse<long>(key, value);
      else if (key == "cluster_eps") cluster_eps = parse<double>(key, value);
      else if (key == "split_eps") split_eps = parse<double>(key, value);
      else if (key == "fold_sigma_rel") fold_sigma_rel = parse<double>(key, value);
      else if (key == "fold_proj_rel") fold_proj_rel = parse<double>(key, value);
      else if (key == "out") out = value;
      else throw ConfigError("unknown configuration key '" + key + "'");
   }

private:
   template <class T>
   static T parse(const std::string& key, const std::string& value)
   {
      T out{};
      const char* first = value.data();
      const char* last = value.data() + value.size();
      auto [ptr, ec] = std::from_chars(first, last, out);
      if (value.empty() || ec != std::errc() || ptr != last) {
         throw ConfigError("bad value for " + key + ": '" + value + "'");
      }
      return out;
   }

   static bool parse_bool(const std::string& key, const std::string& value)
   {
      if (value == "true" || value == "1" || value == "yes") return true;
      if (value == "false" || value == "0" || value == "no") return false;
      throw ConfigError("bad boolean for " + key + ": '" + value + "'");
   }
};

namespace detail {

inline std::string trim(std::string_view s)
{
   const auto b = s.find_first_not_of(" \t\r");
   if (b == std::string_view::npos) return {};
   const auto e = s.find_last_not_of(" \t\r");
   return std::string(s.substr(b, e - b + 1));
}

}  // namespace detail

/// Parses the key/value text format. The experiment key selects defaults
/// before the remaining keys are applied.
inline RunConfig parse_config(std::istream& in)
{
   std::vector<std::pair<std::string, std::string>> entries;
   std::string line;
   int line_no = 0;
   bool have_version = false;
   std::string experiment;
   while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string body = detail::trim(line);
      if (body.empty()) continue;
      const auto eq = body.find('=');
      if (eq == std::string::npos) {
         throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
      }
      const std::string key = detail::trim(std::string_view(body).substr(0, eq));
      const std::string value = detail::trim(std::string_view(body).substr(eq + 1));
      if (key == "schema_version") {
         if (value != std::to_string(kConfigSchemaVersion)) {
            throw ConfigError("unsupported schema_version '" + value + "'");
         }
         have_version = true;
      } else if (key == "experiment") {
         experiment = value;
      } else {
         entries.emplace_back(key, value);
      }
   }
   if (!have_version) throw ConfigError("missing schema_version");
   if (experiment.empty()) throw ConfigError("missing experiment");
   RunConfig cfg = RunConfig::defaults_for(experiment);
   for (const auto& [k, v] : entries) cfg.set(k, v);
   cfg.validate();
   return cfg;
}

inline RunConfig load_config(const std::string& file)
{
   std::ifstream in(file);
   if (!in) throw ConfigError("cannot open config file '" + file + "'");
   return parse_config(in);
}

}  // namespace foldpath

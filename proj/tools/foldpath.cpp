// foldpath: experiment runner.
//
//   foldpath run <config-file> [overrides]
//   foldpath run --experiment fig1-bifurcation [--nodes 200 --ds 0.5 --backend direct --out DIR]
//   foldpath list
//
// FOLDPATH_SEED in the environment overrides the configured seed.

#include <foldpath/experiments.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

namespace {

using foldpath::ConfigError;
using foldpath::RunConfig;
namespace ex = foldpath::experiments;

// Keys exposed as --key flags; each maps straight onto RunConfig::set.
const char* const kOverrideKeys[] = {
   "nodes",     "ds",         "s_end",   "backend",           "predictor", "forcing",     "adaptive",
   "dlambda",   "seed",       "trials",  "max_dimension",     "cluster_dimension",        "cluster_p",
   "cluster_eps", "split_eps", "fold_sigma_rel", "fold_proj_rel", "out",
};

RunConfig resolve(const std::string& config_file, const std::string& experiment,
                  const std::map<std::string, std::string>& overrides)
{
   RunConfig cfg;
   if (!config_file.empty()) {
      cfg = foldpath::load_config(config_file);
      if (!experiment.empty() && experiment != cfg.experiment) {
         throw ConfigError("--experiment '" + experiment + "' conflicts with config file experiment '" +
                           cfg.experiment + "'");
      }
   } else {
      if (experiment.empty()) throw ConfigError("give a config file or --experiment");
      cfg = RunConfig::defaults_for(experiment);
   }
   for (const auto& [key, value] : overrides) cfg.set(key, value);
   if (const char* env = std::getenv("FOLDPATH_SEED")) cfg.set("seed", env);
   cfg.validate();
   return cfg;
}

}  // namespace

int main(int argc, char** argv)
{
   CLI::App app{"foldpath: pseudo-arclength continuation experiments"};
   app.require_subcommand(1);

   CLI::App* run = app.add_subcommand("run", "run one experiment");
   std::string config_file;
   std::string experiment;
   run->add_option("config", config_file, "key = value configuration file")->check(CLI::ExistingFile);
   run->add_option("--experiment,-e", experiment, "experiment name (see `foldpath list`)");
   std::map<std::string, std::string> overrides;
   for (const char* key : kOverrideKeys) {
      run->add_option_function<std::string>(
         std::string("--") + key, [&overrides, key](const std::string& v) { overrides[key] = v; },
         std::string("override ") + key);
   }
   bool quiet = false;
   run->add_flag("--quiet,-q", quiet, "print only the exit status line");

   CLI::App* list = app.add_subcommand("list", "list experiment names and their defaults");

   try {
      app.parse(argc, argv);
   } catch (const CLI::ParseError& e) {
      const int rc = app.exit(e);
      return rc == 0 ? 0 : ex::kConfigError;
   }

   if (list->parsed()) {
      for (const auto& name : foldpath::experiment_names()) {
         std::cout << "# " << name << '\n' << RunConfig::defaults_for(name).to_text() << '\n';
      }
      return 0;
   }

   RunConfig cfg;
   try {
      cfg = resolve(config_file, experiment, overrides);
   } catch (const ConfigError& e) {
      std::cerr << "foldpath: config error: " << e.what() << '\n';
      return ex::kConfigError;
   }

   try {
      const ex::Outcome out = ex::run(cfg);
      if (!quiet) {
         std::cout << out.verdict.dump(2) << '\n';
         for (const auto& a : out.artifacts) std::cout << "wrote " << a << '\n';
      }
      std::cout << cfg.experiment << ": exit " << out.exit_code << '\n';
      return out.exit_code;
   } catch (const ConfigError& e) {
      std::cerr << "foldpath: config error: " << e.what() << '\n';
      return ex::kConfigError;
   } catch (const foldpath::ContinuationError& e) {
      std::cerr << "foldpath: continuation failed: " << e.what() << '\n';
      return ex::kPartialPath;
   } catch (const std::exception& e) {
      std::cerr << "foldpath: " << e.what() << '\n';
      return 1;
   }
}

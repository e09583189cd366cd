#include <foldpath/config.hpp>
#include <foldpath/experiments.hpp>
#include <foldpath/io.hpp>
#include <foldpath/svg.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace foldpath;
namespace fs = std::filesystem;

namespace {

RunConfig parse(const std::string& text)
{
   std::istringstream in(text);
   return parse_config(in);
}

std::string slurp(const fs::path& p)
{
   std::ifstream in(p, std::ios::binary);
   std::ostringstream os;
   os << in.rdbuf();
   return os.str();
}

fs::path scratch_dir(const std::string& name)
{
   const fs::path d = fs::temp_directory_path() / ("foldpath_test_" + name);
   fs::remove_all(d);
   return d;
}

}  // namespace

TEST(Config, DefaultsPerExperiment)
{
   const RunConfig f1 = RunConfig::defaults_for("fig1-bifurcation");
   EXPECT_EQ(f1.nodes, 200);
   EXPECT_DOUBLE_EQ(f1.ds, 0.5);
   EXPECT_EQ(f1.backend, "direct");
   const RunConfig f3 = RunConfig::defaults_for("fig3-krylovs");
   EXPECT_EQ(f3.nodes, 400);
   EXPECT_DOUBLE_EQ(f3.ds, 0.02);
   EXPECT_EQ(f3.backend, "gmres");
}

TEST(Config, ParseOverridesDefaults)
{
   const RunConfig c = parse("# comment\nschema_version = 1\nexperiment = fig3-krylovs\nnodes = 100  # fewer\n"
                             "adaptive = true\nseed = 7\n\n");
   EXPECT_EQ(c.experiment, "fig3-krylovs");
   EXPECT_EQ(c.nodes, 100);
   EXPECT_DOUBLE_EQ(c.ds, 0.02);
   EXPECT_TRUE(c.adaptive);
   EXPECT_EQ(c.seed, 7u);
}

TEST(Config, RoundTripThroughText)
{
   RunConfig c = RunConfig::defaults_for("bounds-fuzz");
   c.set("trials", "123");
   c.set("forcing", "3.5e-5");
   const RunConfig d = parse(c.to_text());
   EXPECT_EQ(d.to_text(), c.to_text());
}

TEST(Config, Errors)
{
   EXPECT_THROW(parse("experiment = fig1-bifurcation\n"), ConfigError);
   EXPECT_THROW(parse("schema_version = 2\nexperiment = fig1-bifurcation\n"), ConfigError);
   EXPECT_THROW(parse("schema_version = 1\n"), ConfigError);
   EXPECT_THROW(parse("schema_version = 1\nexperiment = fig9\n"), ConfigError);
   EXPECT_THROW(parse("schema_version = 1\nexperiment = toy-fold\nds = -1\n"), ConfigError);
   EXPECT_THROW(parse("schema_version = 1\nexperiment = toy-fold\nds = 0.1x\n"), ConfigError);
   EXPECT_THROW(parse("schema_version = 1\nexperiment = toy-fold\ncolour = red\n"), ConfigError);
   EXPECT_THROW(parse("schema_version = 1\nexperiment = toy-fold\nbackend = cg\n"), ConfigError);
   EXPECT_THROW(parse("schema_version = 1\nexperiment = toy-fold\njunk line\n"), ConfigError);
   EXPECT_THROW(load_config("/nonexistent/foldpath.cfg"), ConfigError);
}

TEST(Io, NumberFormatting)
{
   EXPECT_EQ(format_number(0.1), "0.10000000000000001");
   EXPECT_EQ(format_number(kInf), "inf");
   EXPECT_EQ(format_number(std::nan("")), "nan");
   EXPECT_EQ(format_optional(std::nullopt), "nan");
   EXPECT_EQ(json_number(-kInf), json("-inf"));
   EXPECT_EQ(json_number(2.5), json(2.5));
}

TEST(Io, FoldCsvRowMatchesHeader)
{
   const FoldDiagnostics d = classify_point(Matrix::Identity(2, 2), Vector::Ones(2), Vector::Unit(3, 2));
   const std::string row = fold_csv_row(0.5, 0.25, d);
   EXPECT_EQ(std::count(row.begin(), row.end(), ','), std::count(kFoldCsvHeader.begin(), kFoldCsvHeader.end(), ','));
}

TEST(Io, PathCsvColumns)
{
   const ToyFoldProblem toy;
   const Vector x0 = join(Vector::Ones(1), 0.0);
   const Path p = psarc(toy, 0.05, 0.01, x0, initial_tangent(toy, x0));
   const std::string csv = path_csv(p);
   std::istringstream in(csv);
   std::string line;
   std::getline(in, line);
   EXPECT_EQ(line, kPathCsvHeader);
   const auto commas = std::count(line.begin(), line.end(), ',');
   int rows = 0;
   while (std::getline(in, line)) {
      EXPECT_EQ(std::count(line.begin(), line.end(), ','), commas);
      ++rows;
   }
   EXPECT_EQ(rows, static_cast<int>(p.points.size()));
   const json j = to_json(p);
   EXPECT_EQ(j["schema"], std::string(kPathSchema));
   EXPECT_EQ(j["points"].size(), p.points.size());
   EXPECT_TRUE(j["failure"].is_null());
}

TEST(Io, AtomicWriteLeavesNoTemporary)
{
   const fs::path d = scratch_dir("atomic");
   write_atomic(d / "a.txt", "hello\n");
   EXPECT_EQ(slurp(d / "a.txt"), "hello\n");
   EXPECT_FALSE(fs::exists(d / "a.txt.tmp"));
   write_atomic(d / "a.txt", "again\n");
   EXPECT_EQ(slurp(d / "a.txt"), "again\n");
}

TEST(Svg, RendersSeriesAndEscapes)
{
   const std::string s = svg::render({"a < b", "x", "y"}, {{"line", {0.0, 1.0, 2.0}, {1.0, 4.0, 9.0}}});
   EXPECT_NE(s.find("<svg"), std::string::npos);
   EXPECT_NE(s.find("<polyline"), std::string::npos);
   EXPECT_NE(s.find("a &lt; b"), std::string::npos);
   EXPECT_EQ(s.substr(s.size() - 7), "</svg>\n");
}

TEST(Svg, SkipsNonFinitePoints)
{
   const std::string s = svg::render({"t", "x", "y", true}, {{"l", {1.0, 2.0, 3.0}, {1.0, 0.0, 100.0}}});
   EXPECT_EQ(s.find("nan"), std::string::npos);
   EXPECT_EQ(s.find("inf"), std::string::npos);
}

TEST(Experiments, ToyFoldSuitePasses)
{
   RunConfig cfg = RunConfig::defaults_for("toy-fold");
   cfg.out = scratch_dir("toy").string();
   const experiments::Outcome o = experiments::run(cfg);
   EXPECT_EQ(o.exit_code, experiments::kSuccess);
   EXPECT_TRUE(o.verdict["passed"].get<bool>());
   EXPECT_TRUE(fs::exists(fs::path(cfg.out) / "toy-fold.verdict.json"));
   EXPECT_TRUE(fs::exists(fs::path(cfg.out) / "toy-fold.config"));
}

TEST(Experiments, BoundsFuzzSmall)
{
   const experiments::FuzzSummary f = experiments::bounds_fuzz(500, 42, 12);
   EXPECT_EQ(f.violations(), 0);
   EXPECT_TRUE(f.examples.empty());
}

TEST(Experiments, ClusterVerifySuite)
{
   RunConfig cfg = RunConfig::defaults_for("cluster-verify");
   cfg.out = scratch_dir("cluster").string();
   const experiments::Outcome o = experiments::run(cfg);
   EXPECT_EQ(o.exit_code, experiments::kSuccess);
}

TEST(Experiments, PropertyViolationExitCode)
{
   // Steps this coarse cut the fold corner: max lambda misses 1 by more than 1e-3.
   RunConfig cfg = RunConfig::defaults_for("toy-fold");
   cfg.ds = 0.5;
   cfg.out = scratch_dir("toy_bad").string();
   const experiments::Outcome o = experiments::run(cfg);
   EXPECT_EQ(o.exit_code, experiments::kPropertyViolation);
   EXPECT_FALSE(o.verdict["passed"].get<bool>());
}

TEST(Experiments, PartialPathExitCode)
{
   RunConfig cfg = RunConfig::defaults_for("fig1-bifurcation");
   cfg.nodes = 20;
   cfg.ds = 40.0;
   cfg.s_end = 200.0;
   cfg.out = scratch_dir("partial").string();
   const experiments::Outcome o = experiments::run(cfg);
   EXPECT_EQ(o.exit_code, experiments::kPartialPath);
   EXPECT_FALSE(o.verdict["path"]["complete"].get<bool>());
   EXPECT_TRUE(fs::exists(fs::path(cfg.out) / "fig1_path.csv"));
}

TEST(Experiments, DeterministicArtifacts)
{
   for (const char* name : {"fig1-bifurcation", "fig2-sigmamin", "bounds-fuzz"}) {
      RunConfig cfg = RunConfig::defaults_for(name);
      cfg.nodes = 30;
      cfg.s_end = 8.0;
      cfg.trials = 200;
      cfg.out = scratch_dir(std::string("det_a_") + name).string();
      const experiments::Outcome a = experiments::run(cfg);
      cfg.out = scratch_dir(std::string("det_b_") + name).string();
      const experiments::Outcome b = experiments::run(cfg);
      ASSERT_EQ(a.artifacts.size(), b.artifacts.size());
      for (std::size_t i = 0; i < a.artifacts.size(); ++i) {
         const fs::path fa = a.artifacts[i];
         const fs::path fb = b.artifacts[i];
         EXPECT_EQ(fa.filename(), fb.filename());
         if (fa.extension() == ".config") continue;  // differs only in the out line
         EXPECT_EQ(slurp(fa), slurp(fb)) << fa;
      }
   }
}

TEST(Experiments, FiguresHavePairedCsv)
{
   RunConfig cfg = RunConfig::defaults_for("fig3-krylovs");
   cfg.nodes = 40;
   cfg.ds = 0.1;
   cfg.s_end = 4.0;
   cfg.out = scratch_dir("fig3").string();
   const experiments::Outcome o = experiments::run(cfg);
   EXPECT_EQ(o.exit_code, experiments::kSuccess);
   EXPECT_TRUE(fs::exists(fs::path(cfg.out) / "fig3.svg"));
   EXPECT_TRUE(fs::exists(fs::path(cfg.out) / "fig3_path.csv"));
}

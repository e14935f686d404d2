#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "kdviss/experiment.hpp"

namespace kdviss {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("kdviss_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

std::set<std::string> manifest_files(const fs::path& dir) {
  std::istringstream in(slurp(dir / "manifest.txt"));
  std::set<std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("file=", 0) == 0) out.insert(line.substr(5));
  }
  return out;
}

std::set<std::string> files_on_disk(const fs::path& dir) {
  std::set<std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().filename() != "manifest.txt") out.insert(e.path().filename().string());
  }
  return out;
}

TEST(ParseConfig, MinimalWithDefaults) {
  const ExperimentConfig c = parse("domain.L = 6.0  # comment\ndomain.n_interior = 31\n\ntime.T = 0.5\n");
  EXPECT_DOUBLE_EQ(c.length, 6.0);
  EXPECT_EQ(c.n_interior, 31u);
  EXPECT_DOUBLE_EQ(c.t_final, 0.5);
  EXPECT_DOUBLE_EQ(c.dt, 1e-3);
  EXPECT_EQ(c.saturation_kind, "none");
  EXPECT_EQ(c.echo.size(), 3u);
}

TEST(ParseConfig, MissingLengthNamesTheField) {
  try {
    parse("domain.n_interior = 31\ntime.T = 0.01\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "domain.L");
    EXPECT_EQ(e.line(), 0);
    EXPECT_NE(std::string(e.what()).find("domain.L"), std::string::npos);
  }
}

TEST(ParseConfig, BadValuesReportTheirLine) {
  const std::string base = "domain.L = 6\ndomain.n_interior = 31\ntime.T = 1\n";
  auto line_of = [](const std::string& text) {
    try {
      parse(text);
    } catch (const ConfigError& e) {
      return e.line();
    }
    return -1;
  };
  EXPECT_EQ(line_of(base + "time.dt = abc\n"), 4);
  EXPECT_EQ(line_of(base + "bogus.key = 1\n"), 4);
  EXPECT_EQ(line_of(base + "domain.L = 7\n"), 4);
  EXPECT_EQ(line_of(base + "saturation.kind = cubic\n"), 4);
  EXPECT_EQ(line_of(base + "saturation.kind = hilbert\ntime.dt = 0.5\n"), 5);
  EXPECT_EQ(line_of(base + "analysis.dissipation = V1\n"), 4);
  EXPECT_EQ(line_of(base + "saturation.kind = pointwise\nanalysis.dissipation = V\n"), 5);
  EXPECT_EQ(line_of(base + "saturation.kind = hilbert\ndisturbance.kind = cosine\n"
                           "disturbance.amplitude = 0.1\nanalysis.dissipation = V2\n"), 7);
  EXPECT_EQ(line_of("domain.L = -1\ndomain.n_interior = 31\ntime.T = 1\n"), 1);
  EXPECT_EQ(line_of("domain.L = 1\ndomain.n_interior = 3\ntime.T = 1\n"), 2);
}

TEST(ParseConfig, PresetSkipsRequiredFields) {
  const ExperimentConfig c = parse("preset = figure1\noutput_dir = x\n");
  EXPECT_EQ(c.preset, "figure1");
}

TEST(RunExperiment, ShortRunWritesTrajectoryAndManifest) {
  const fs::path dir = scratch("short");
  ExperimentConfig c = parse("domain.L = 6.283185307179586\ndomain.n_interior = 31\ntime.T = 0.001\n"
                             "saturation.kind = hilbert\noutput_dir = " + dir.string() + "\n");
  const RunSummary s = run_experiment(c);
  ASSERT_EQ(s.files, std::vector<std::string>{"trajectory.csv"});
  const std::string traj = slurp(dir / "trajectory.csv");
  EXPECT_EQ(line_count(traj), 3u);  // header and two records
  const std::string manifest = slurp(dir / "manifest.txt");
  EXPECT_NE(manifest.find("config.time.T=0.001\n"), std::string::npos);
  EXPECT_NE(manifest.find("brs.holds=true\n"), std::string::npos);
  EXPECT_EQ(manifest_files(dir), files_on_disk(dir));
}

TEST(RunExperiment, AllAnalysesAndByteIdenticalRerun) {
  const fs::path dir = scratch("full");
  const std::string text = "domain.L = 6.283185307179586\ndomain.n_interior = 31\ntime.T = 1\ntime.dt = 2e-3\n"
                           "disturbance.kind = cosine\ndisturbance.amplitude = 0.05\n"
                           "saturation.kind = hilbert\nanalysis.axioms = true\nanalysis.axiom_samples = 200\n"
                           "analysis.dissipation = V1\nanalysis.gap = true\nanalysis.semiglobal = 1, 2\n"
                           "analysis.semiglobal_samples = 2\nanalysis.certificate = true\noutput.states = true\n"
                           "output_dir = " + dir.string() + "\n";
  const RunSummary s = run_experiment(parse(text));
  const std::set<std::string> expected{"trajectory.csv", "states.csv", "axioms.txt", "dissipation.csv",
                                       "gap.csv", "semiglobal.txt", "certificate.txt"};
  EXPECT_EQ(std::set<std::string>(s.files.begin(), s.files.end()), expected);
  EXPECT_EQ(manifest_files(dir), expected);
  EXPECT_EQ(files_on_disk(dir), expected);
  ASSERT_TRUE(s.certificate.has_value());
  EXPECT_TRUE(s.certificate->valid);

  std::map<std::string, std::string> first;
  for (const auto& f : expected) first[f] = slurp(dir / f);
  first["manifest.txt"] = slurp(dir / "manifest.txt");
  run_experiment(parse(text));
  for (const auto& [name, body] : first) EXPECT_EQ(slurp(dir / name), body) << name;
}

TEST(RunExperiment, OutputRootEnvironment) {
  const fs::path root = scratch("root");
  ::setenv("KDVISS_OUTPUT_ROOT", root.c_str(), 1);
  EXPECT_EQ(resolve_output_dir("a/b"), root / "a/b");
  EXPECT_EQ(resolve_output_dir("/abs"), fs::path("/abs"));
  ::unsetenv("KDVISS_OUTPUT_ROOT");
  EXPECT_EQ(resolve_output_dir("a/b"), fs::path("a/b"));
}

TEST(Figure1, FourCsvFilesAndManifest) {
  const fs::path dir = scratch("figure1");
  Figure1Settings s;
  s.n_interior = 31;
  s.t_final = 0.5;
  s.dt = 1e-2;
  const Figure1Result r = reproduce_figure1(dir, {}, s);
  const std::set<std::string> expected{"figure1_surface.csv", "figure1_norms.csv",
                                       "figure1_disturbed_observables.csv", "figure1_linear_observables.csv"};
  EXPECT_EQ(std::set<std::string>(r.files.begin(), r.files.end()), expected);
  EXPECT_EQ(files_on_disk(dir), expected);
  EXPECT_EQ(manifest_files(dir), expected);
  const std::string norms = slurp(dir / "figure1_norms.csv");
  EXPECT_EQ(norms.substr(0, norms.find('\n')), "t,norm_disturbed,norm_linear");
  EXPECT_EQ(line_count(norms), 52u);
  const std::string first = slurp(dir / "figure1_surface.csv");
  reproduce_figure1(dir, {}, s);
  EXPECT_EQ(slurp(dir / "figure1_surface.csv"), first);
}

TEST(Figure1, InitialProfile) {
  const Grid g(2.0 * std::numbers::pi, 127);
  const StateVector z = one_minus_cosine(g);
  EXPECT_NEAR(norm_linf(z), 2.0, 1e-3);
  EXPECT_NEAR(z[63], 2.0, 1e-12);  // x = pi
}

}  // namespace
}  // namespace kdviss

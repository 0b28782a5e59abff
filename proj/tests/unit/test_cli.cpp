#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <string>

#include <gmock/gmock.h>
#include <gtest/gtest.h>
#include <json.hpp>

#include "support.hpp"

using countergm::testing::read_file;
using countergm::testing::TempDir;
using ::testing::HasSubstr;
using json = nlohmann::json;

namespace {

const std::string kCli = COUNTERGM_CLI_PATH;
const std::string kData = COUNTERGM_DATA_DIR;

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult run(const TempDir& dir, const std::string& args) {
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string cmd = "'" + kCli + "' " + args + " >'" + out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out);
  r.err = read_file(err);
  return r;
}

std::string example(const std::string& name) { return "'" + kData + "/example5/" + name + "'"; }

json load(const std::filesystem::path& p) { return json::parse(read_file(p)); }

}  // namespace

TEST(CliFit, MpleOnBundledExample) {
  TempDir dir;
  const CliResult r = run(dir, "fit --config " + example("fit.json") + " --out '" + dir.path().string() + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  const json est = load(dir / "estimate.json");
  EXPECT_EQ(est["method_tag"], "mple");
  EXPECT_EQ(est["theta"].size(), 3u);
  EXPECT_EQ(est["se"].size(), 3u);
  EXPECT_EQ(est["terms"], json({"sum", "nonzero", "nodeocov(x)"}));
  EXPECT_TRUE(est["converged"].get<bool>());
  EXPECT_EQ(json::parse(r.out), est);
}

TEST(CliFit, FlagsOnlyWithoutConfig) {
  TempDir dir;
  const CliResult r = run(dir, "fit --graph " + example("edges.csv") + " --nodes 5 --terms sum,nonzero --seed 3 --out '" +
                             dir.path().string() + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(load(dir / "estimate.json")["theta"].size(), 2u);
}

TEST(CliFit, UnresolvedCovariateExitsOne) {
  TempDir dir;
  const CliResult r = run(dir, "fit --graph " + example("edges.csv") + " --nodes 5 --terms 'sum,nodeocov(z)' --seed 1 --out '" +
                             dir.path().string() + "'");
  EXPECT_EQ(r.code, 1);
  EXPECT_THAT(r.err, HasSubstr("unresolved covariate"));
}

TEST(CliFit, McmleWithMpleSeedIsTagged) {
  TempDir dir;
  const CliResult r = run(dir, "fit --config " + example("fit.json") +
                             " --method mcmle --seed-method mple --interval 256 --samples 512 --out '" +
                             dir.path().string() + "'");
  ASSERT_NE(r.code, 1) << r.err;
  EXPECT_EQ(load(dir / "estimate.json")["method_tag"], "mple-mcmle");
}

TEST(CliFit, NonConvergenceExitsTwoAndStillWrites) {
  TempDir dir;
  const CliResult r = run(dir, "fit --config " + example("fit.json") +
                             " --method mcmle --seed-method zeros --max-iterations 1 --interval 16 --samples 64 --out '" +
                             dir.path().string() + "'");
  EXPECT_EQ(r.code, 2) << r.err;
  const json est = load(dir / "estimate.json");
  EXPECT_FALSE(est["converged"].get<bool>());
  EXPECT_FALSE(est["warnings"].empty());
}

TEST(CliConfig, UnknownKeyNamesFileAndLine) {
  TempDir dir;
  dir.write("bad.json", "{\n  \"seed\": 1,\n  \"bogus\": true\n}\n");
  const CliResult r = run(dir, "fit --config '" + (dir / "bad.json").string() + "'");
  EXPECT_EQ(r.code, 1);
  EXPECT_THAT(r.err, HasSubstr("bad.json:3"));
  EXPECT_THAT(r.err, HasSubstr("bogus"));
}

TEST(CliConfig, MalformedJsonNamesLine) {
  TempDir dir;
  dir.write("broken.json", "{\n  \"seed\": 1,\n  \"model\": {\n}\n");
  const CliResult r = run(dir, "fit --config '" + (dir / "broken.json").string() + "'");
  EXPECT_EQ(r.code, 1);
  EXPECT_THAT(r.err, HasSubstr("broken.json:"));
}

TEST(CliConfig, FlagsOverrideConfig) {
  TempDir dir;
  const CliResult r = run(dir, "fit --config " + example("fit.json") + " --terms sum --out '" + dir.path().string() + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(load(dir / "estimate.json")["terms"], json({"sum"}));
  EXPECT_EQ(load(dir / "manifest.json")["config"]["model"]["terms"], json({"sum"}));
}

TEST(CliManifest, GeneratedSeedIsPrintedAndRecorded) {
  TempDir dir;
  const CliResult r = run(dir, "fit --graph " + example("edges.csv") + " --nodes 5 --terms sum --method cd --out '" +
                             dir.path().string() + "'");
  ASSERT_NE(r.code, 1) << r.err;
  const auto pos = r.err.find("seed: ");
  ASSERT_NE(pos, std::string::npos) << r.err;
  const std::uint64_t printed = std::stoull(r.err.substr(pos + 6));
  const json manifest = load(dir / "manifest.json");
  EXPECT_EQ(manifest["seed"].get<std::uint64_t>(), printed);
  EXPECT_EQ(manifest["command"], "fit");
  EXPECT_TRUE(manifest.contains("version"));
}

TEST(CliManifest, ResolvedConfigReproducesRun) {
  TempDir dir;
  std::filesystem::create_directories(dir / "a");
  std::filesystem::create_directories(dir / "b");
  const CliResult first = run(dir, "fit --config " + example("fit.json") + " --method cd --chains 64 --out '" +
                                 (dir / "a").string() + "'");
  ASSERT_NE(first.code, 1) << first.err;
  std::ofstream(dir / "resolved.json") << load(dir / "a" / "manifest.json")["config"].dump(2);
  const CliResult second = run(dir, "fit --config '" + (dir / "resolved.json").string() + "' --out '" + (dir / "b").string() + "'");
  ASSERT_EQ(second.code, first.code) << second.err;
  const json a = load(dir / "a" / "estimate.json"), b = load(dir / "b" / "estimate.json");
  EXPECT_EQ(a["theta"], b["theta"]);
  EXPECT_EQ(a["se"], b["se"]);
}

TEST(CliSummarize, WritesSummary) {
  TempDir dir;
  const CliResult r = run(dir, "summarize --graph " + example("edges.csv") + " --nodes 5 --out '" + dir.path().string() + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  const json s = load(dir / "summary.json");
  EXPECT_TRUE(s.contains("max_value"));
  EXPECT_TRUE(s.contains("density"));
}

TEST(CliSimulate, WritesTracesAndDiagnostics) {
  TempDir dir;
  const CliResult r = run(dir, "simulate --nodes 5 --terms sum,nonzero --theta 0.2,-0.5 --interval 10 --samples 50 --seed 4 "
                         "--write-graphs --out '" + dir.path().string() + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string traces = read_file(dir / "traces.csv");
  EXPECT_EQ(traces.substr(0, traces.find('\n')), "sum,nonzero");
  EXPECT_EQ(std::count(traces.begin(), traces.end(), '\n'), 51);
  EXPECT_TRUE(load(dir / "diagnostics.json").contains("acceptance_rate"));
  EXPECT_TRUE(std::filesystem::exists(dir / "graphs" / "sample_00049.csv"));
}

TEST(CliStudy, BundledConfigWritesReportsAndIsReproducible) {
  TempDir dir;
  const std::string cfg = "'" + kData + "/studies/desk_small.json'";
  const CliResult a = run(dir, "study --config " + cfg + " --out '" + (dir / "a").string() + "'");
  ASSERT_EQ(a.code, 0) << a.err;
  for (const char* f : {"report.csv", "raw.csv", "report.json", "timings.csv", "manifest.json"})
    EXPECT_TRUE(std::filesystem::exists(dir / "a" / f)) << f;
  const std::string report = read_file(dir / "a" / "report.csv");
  EXPECT_EQ(report.substr(0, report.find('\n')), "method,coefficient,arb,se,rmse,calibration,coverage,mean_seconds,failures");
  EXPECT_THAT(a.out, HasSubstr("mple-mcmle"));

  const CliResult b = run(dir, "study --config " + cfg + " --out '" + (dir / "b").string() + "'");
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(read_file(dir / "a" / "raw.csv"), read_file(dir / "b" / "raw.csv"));
}

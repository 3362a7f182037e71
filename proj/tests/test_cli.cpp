#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct CliRun {
  int status;
  std::string out;
};

CliRun run(const std::string& args) {
  const std::string cmd = std::string(ELLWB_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
  const int st = pclose(p);
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "ellwb_cli_test";
  fs::create_directories(d);
  return d / name;
}

}  // namespace

TEST(Cli, IdentitiesPassWithSeed42) {
  const CliRun r = run("--command identities --seed 42 --tol 1e-9");
  EXPECT_EQ(r.status, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_GE(j["checks"].size(), 17u);
  for (const auto& c : j["checks"]) {
    EXPECT_LT(c["residual"].get<double>(), 1e-9);
    EXPECT_FALSE(c["worst_point"].empty());
  }
}

TEST(Cli, NegativeImaginaryTauIsAUsageError) {
  const std::string cmd = std::string(ELLWB_CLI_PATH) + " --command identities --tau-im -1 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  std::string out;
  char buf[512];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
  const int st = pclose(p);
  EXPECT_EQ(WEXITSTATUS(st), 2);
  EXPECT_NE(out.find("tau-im"), std::string::npos) << out;
}

TEST(Cli, UsageErrorsNameTheField) {
  EXPECT_EQ(run("--command nonsense").status, 2);
  EXPECT_EQ(run("--command identities --tol 0").status, 2);
  EXPECT_EQ(run("--command identities --tol -1").status, 2);
  EXPECT_EQ(run("--command integrate --flow XYZ").status, 2);
  EXPECT_EQ(run("--command integrate --nu0 1,2,3").status, 2);
  EXPECT_EQ(run("--command identities --format yaml").status, 2);
}

TEST(Cli, FailingTolerancesExitOne) {
  const CliRun r = run("--command lax-check --tol 1e-30 --samples 2");
  EXPECT_EQ(r.status, 1);
  EXPECT_FALSE(nlohmann::json::parse(r.out)["pass"].get<bool>());
}

TEST(Cli, RepeatedRunsAreByteIdentical) {
  for (const char* cmd : {"--command identities --samples 10", "--command chain-check --sites 2",
                          "--command reflection-check --format csv"}) {
    const CliRun a = run(cmd), b = run(cmd);
    EXPECT_EQ(a.status, 0) << cmd;
    EXPECT_FALSE(a.out.empty());
    EXPECT_EQ(a.out, b.out) << cmd;
  }
}

TEST(Cli, SeedChangesTheSampling) {
  EXPECT_NE(run("--command identities --samples 5 --seed 1").out, run("--command identities --samples 5 --seed 2").out);
}

TEST(Cli, PviCrosscheckWritesTrajectory) {
  const fs::path rep = scratch("pvi.json"), traj = scratch("pvi.csv");
  const CliRun r = run("--command crosscheck-pvi --tau-re 0.15 --tau-im 1.05 --out " + rep.string() + " --trajectory " +
                    traj.string());
  EXPECT_EQ(r.status, 0);
  std::istringstream csv(slurp(traj));
  std::string header, line;
  std::getline(csv, header);
  EXPECT_EQ(header, "tau_re,tau_im,u_re,u_im,du_re,du_im,X_re,X_im,t_re,t_im,pvi_residual");
  int rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 10);
    // 17 significant digits
    EXPECT_NE(line.find("e"), std::string::npos);
  }
  EXPECT_GT(rows, 2);
  const auto j = nlohmann::json::parse(slurp(rep));
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_EQ(j["command"], "crosscheck-pvi");
}

TEST(Cli, IntegrateTrajectoryForEachFlow) {
  for (const char* flow : {"ZVG", "NAZVG", "CI", "EPVI"}) {
    const fs::path traj = scratch(std::string(flow) + ".csv");
    const CliRun r = run(std::string("--command integrate --flow ") + flow + " --s-end 0.5 --trajectory " + traj.string());
    EXPECT_EQ(r.status, 0) << flow;
    std::istringstream csv(slurp(traj));
    std::string header;
    std::getline(csv, header);
    EXPECT_EQ(header.rfind("s,time_re,time_im,", 0), 0u) << header;
  }
}

TEST(Cli, ConfigFileMatchesFlags) {
  const fs::path cfg = scratch("run.toml");
  std::ofstream(cfg) << "command = \"chain-check\"\nsites = 1\nseed = 7\ntau-im = 1.2\n";
  const CliRun a = run("--config " + cfg.string());
  const CliRun b = run("--command chain-check --sites 1 --seed 7 --tau-im 1.2");
  EXPECT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, CsvReportHasOneLinePerCheck) {
  const CliRun r = run("--command hecke-map --format csv");
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out.rfind("check,description,residual,tolerance,negative_control,pass\n", 0), 0u);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 3);
}

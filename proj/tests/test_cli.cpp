#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
};

CliResult run(std::string const& args)
{
  std::string const cmd = std::string{LATTICE_LAB_EXE} + " " + args + " 2>/dev/null";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe)
    throw std::runtime_error("popen failed");
  CliResult r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0)
    r.out.append(buf.data(), n);
  int const status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch(std::string const& name)
{
  fs::path const p = fs::temp_directory_path() / ("lattice_lab_cli_" + name);
  fs::remove_all(p);
  return p;
}

} // namespace

TEST(Cli, HelpListsSubcommands)
{
  CliResult const r = run("--help");
  EXPECT_EQ(r.code, 0);
  for (auto const* sub : {"periodize", "parseval", "rd-table", "shells", "mc-vs-shells", "kernel-envelope",
                          "theorem-check", "sharpness", "run-all"})
    EXPECT_NE(r.out.find(sub), std::string::npos) << sub;
}

TEST(Cli, RdTableSummary)
{
  CliResult const r = run("rd-table --dim 4 --nmax 50");
  ASSERT_EQ(r.code, 0);
  auto const j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["d"], 4);
  EXPECT_EQ(j["n_max"], 50);
  auto const& odd = j["bounds"][1];
  EXPECT_EQ(odd["parity"], "odd");
  EXPECT_EQ(odd["ratios"][0]["min"], 8.0);
}

TEST(Cli, RangeRejectionExitsWithTwo)
{
  CliResult const r = run("theorem-check --dim 3 --variant T1");
  EXPECT_EQ(r.code, 2);
  auto const j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j["records"].empty());
  EXPECT_EQ(j["range_rejections"][0]["variant"], "T1");
}

TEST(Cli, TheoremCheckRecordsRatios)
{
  CliResult const r = run("theorem-check --dim 4 --variant T1 --variant T2 --p 1.2");
  ASSERT_EQ(r.code, 0);
  auto const j = nlohmann::json::parse(r.out);
  ASSERT_EQ(j["records"].size(), 2u);
  for (auto const& rec : j["records"])
    EXPECT_DOUBLE_EQ(rec["ratio"].get<double>(), rec["lhs"].get<double>() / rec["rhs"].get<double>());
  EXPECT_EQ(j["records"][0]["p"], 1.0);
}

TEST(Cli, BadArgumentsFail)
{
  EXPECT_NE(run("rd-table --format xml").code, 0);
  EXPECT_NE(run("theorem-check --dim 4 --variant T9").code, 0);
  EXPECT_NE(run("no-such-command").code, 0);
}

TEST(Cli, OutputDirectoryAndCsv)
{
  fs::path const dir = scratch("shells");
  CliResult const r = run("shells --dim 4 --nmax 20 --format csv --out " + dir.string());
  ASSERT_EQ(r.code, 0);
  ASSERT_TRUE(fs::exists(dir / "shells.json"));
  std::ifstream is{dir / "shells.csv"};
  std::string header;
  std::getline(is, header);
  EXPECT_EQ(header, "n,r_d,A,contribution");
  fs::remove_all(dir);
}

TEST(Cli, SharpnessPlatePasses)
{
  CliResult const r = run("sharpness --kind plate --dim 4 --p 1.3333333333333333");
  ASSERT_EQ(r.code, 0);
  auto const j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j["passed"].get<bool>());
}

TEST(Cli, ParsevalWritesSummary)
{
  fs::path const dir = scratch("parseval");
  CliResult const r = run("parseval --dim 3 --out " + dir.string());
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(fs::exists(dir / "parseval.json"));
  fs::remove_all(dir);
}

#include "hk/app.hpp"
#include "hk/config.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace hk;
namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

fs::path scratch(const std::string& name)
{
  const fs::path p = fs::temp_directory_path() / ("hk_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const ordered_json& doc)
{
  const fs::path p = dir / "config.json";
  std::ofstream(p) << doc.dump(2);
  return p;
}

int run_cli(const std::string& args, const std::string& env = "")
{
  const std::string cmd = env + " " + HK_CLI + " " + args + " > /dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ordered_json laminate(std::vector<double> ladder = {0.25, 0.125, 0.0625, 0.03125})
{
  return {{"schema_version", 1}, {"preset", "laminate-p2"}, {"ladder", ladder}};
}

}  // namespace

TEST(Config, PresetsParse)
{
  for (const auto& name : preset_names()) {
    const auto c = parse_config({{"schema_version", 1}, {"preset", name}});
    EXPECT_EQ(c.preset, name);
    EXPECT_EQ(c.ladder.size(), 4u);
    EXPECT_TRUE(c.B.has_value());
    EXPECT_EQ(c.hash.size(), 64u);
    EXPECT_NO_THROW(c.spec.validate());
  }
  const auto v = parse_config({{"schema_version", 1}, {"preset", "variable-exponent"}});
  EXPECT_EQ(v.spec.p, 2.0);
  EXPECT_EQ(v.spec.phases[0].exponent, 3.0);
}

TEST(Config, ShippedConfigFilesParse)
{
  for (const auto& e : fs::directory_iterator(fs::path(HK_SOURCE_DIR) / "configs"))
    EXPECT_NO_THROW(load_config(e.path().string())) << e.path();
}

TEST(Config, ErrorsCarryPointers)
{
  auto pointer_of = [](const ordered_json& doc) {
    try {
      parse_config(doc);
    } catch (const ConfigError& e) {
      return e.pointer();
    }
    return std::string("<none>");
  };
  ordered_json no_p = {{"schema_version", 1},
                       {"operator", {{"family", "power-law"}, {"sigma", {1.0, 4.0}}}},
                       {"geometry", {{"kind", "laminate"}, {"size", 0.5}}},
                       {"ladder", {0.25}}};
  EXPECT_EQ(pointer_of(no_p), "/operator/p");
  EXPECT_EQ(pointer_of(laminate({})), "/ladder");
  EXPECT_EQ(pointer_of(laminate({0.25, 0.3})), "/ladder/1");
  EXPECT_EQ(pointer_of(laminate({0.125, 0.25})), "/ladder/1");
  EXPECT_EQ(pointer_of({{"preset", "laminate-p2"}}), "/schema_version");
  EXPECT_EQ(pointer_of({{"schema_version", 2}, {"preset", "laminate-p2"}}), "/schema_version");
  EXPECT_EQ(pointer_of({{"schema_version", 1}, {"preset", "laminate-p2"}, {"bogus", 1}}), "/bogus");
  EXPECT_EQ(pointer_of({{"schema_version", 1}, {"preset", "nope"}}), "/preset");
  EXPECT_EQ(pointer_of({{"schema_version", 1}, {"preset", "laminate-p2"}, {"seed", -1}}), "/seed");
  EXPECT_EQ(pointer_of({{"schema_version", 1}, {"preset", "laminate-p2"}, {"grids", {{"n", 6}}}}), "/grids/n");
}

TEST(Config, HashDependsOnContent)
{
  const auto a = parse_config(laminate());
  const auto b = parse_config(laminate());
  const auto c = parse_config(laminate({0.25, 0.125}));
  EXPECT_EQ(a.hash, b.hash);
  EXPECT_NE(a.hash, c.hash);
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Cli, ConfigErrorsExitThree)
{
  const auto dir = scratch("errors");
  ordered_json no_p = {{"schema_version", 1},
                       {"operator", {{"family", "power-law"}, {"sigma", {1.0, 4.0}}}},
                       {"geometry", {{"kind", "laminate"}, {"size", 0.5}}},
                       {"ladder", {0.25}}};
  EXPECT_EQ(run_cli("cell --config " + write_config(dir, no_p).string()), 3);
  EXPECT_EQ(run_cli("corrector-study --config " + write_config(dir, laminate({})).string()), 3);
  EXPECT_EQ(run_cli("cell --config " + (dir / "missing.json").string()), 3);
  EXPECT_EQ(run_cli("nosuch --config x"), 3);
  const auto ok = write_config(dir, laminate()).string();
  EXPECT_EQ(run_cli("cell --config " + ok + " --out " + (dir / "o").string(), "HK_THREADS=zero"), 3);
  EXPECT_EQ(run_cli("cell --config " + ok + " --threads 0"), 3);
}

TEST(Cli, VerifyIdentityPasses)
{
  const auto dir = scratch("verify");
  const auto cfg = fs::path(HK_SOURCE_DIR) / "configs" / "identity-linear.json";
  EXPECT_EQ(run_cli("verify --config " + cfg.string() + " --out " + dir.string()), 0);
  const auto j = ordered_json::parse(slurp(dir / "verify.json"));
  EXPECT_TRUE(j["results"]["all_pass"].get<bool>());
}

TEST(Cli, CorrectorStudyWritesOneRowPerEps)
{
  const auto dir = scratch("study");
  const auto cfg = write_config(dir, laminate());
  ASSERT_EQ(run_cli("corrector-study --config " + cfg.string() + " --out " + (dir / "a").string()), 0);
  std::istringstream csv(slurp(dir / "a" / "corrector.csv"));
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(csv, line)) rows.push_back(line);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0], "epsilon,E_exp,E_avg,E_dm,E_nocorr");
  EXPECT_EQ(rows[1].substr(0, 5), "0.25,");
  const auto j = ordered_json::parse(slurp(dir / "a" / "corrector.json"));
  EXPECT_EQ(j["kind"], "corrector-study");
  EXPECT_EQ(j["provenance"]["config_hash"], parse_config(laminate()).hash);
  EXPECT_EQ(j["provenance"]["preset"], "laminate-p2");
  EXPECT_EQ(j["results"]["entries"].size(), 4u);
}

TEST(Cli, OutputsAreReproducible)
{
  const auto dir = scratch("repro");
  const auto cfg = write_config(dir, laminate({0.25, 0.125, 0.0625})).string();
  for (const char* sub : {"effective", "corrector-study"}) {
    ASSERT_EQ(run_cli(std::string(sub) + " --config " + cfg + " --out " + (dir / "a").string()), 0);
    ASSERT_EQ(run_cli(std::string(sub) + " --config " + cfg + " --out " + (dir / "b").string() + " --threads 2"), 0);
  }
  int files = 0;
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    EXPECT_EQ(slurp(e.path()), slurp(dir / "b" / e.path().filename())) << e.path().filename();
    ++files;
  }
  EXPECT_GE(files, 3);
}

TEST(App, InProcessRunReportsConfigErrors)
{
  const auto dir = scratch("inproc");
  const auto cfg = write_config(dir, {{"schema_version", 1}, {"preset", "laminate-p2"}, {"geometry", {{"kind", "hexagon"}}}});
  std::ostringstream log, err;
  EXPECT_EQ(run_app({"cell", cfg.string(), (dir / "o").string(), 1}, log, err), kExitConfigError);
  EXPECT_NE(err.str().find("/geometry/kind"), std::string::npos);
}

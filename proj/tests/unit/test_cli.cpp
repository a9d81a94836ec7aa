#include <gtest/gtest.h>

#include <cstdlib>
#include <set>
#include <sys/wait.h>

#include <json.hpp>

#include "test_util.hpp"

namespace fs = std::filesystem;
using ntnpos::test::readFile;
using ntnpos::test::scratchDir;
using ntnpos::test::writeFile;

namespace {

int runCli(const std::string& args, const fs::path& stderrFile = "/dev/null") {
    const std::string cmd = std::string(NTNPOS_CLI_PATH) + " " + args + " >/dev/null 2>" + stderrFile.string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

nlohmann::json manifest(const fs::path& dir) { return nlohmann::json::parse(readFile(dir / "manifest.json")); }

}  // namespace

TEST(Cli, RepeatedRunsAreByteIdentical) {
    const fs::path dir = scratchDir("cli_repeat");
    writeFile(dir / "c.json", R"({"variant": "multi-leo", "n_ue_drops": 60, "seed": 12})");
    const std::string cfg = "--config " + (dir / "c.json").string();
    ASSERT_EQ(runCli("multi-leo " + cfg + " --out " + (dir / "a").string()), 0);
    ASSERT_EQ(runCli("multi-leo " + cfg + " --out " + (dir / "b").string()), 0);
    ASSERT_EQ(runCli("multi-leo " + cfg + " --workers 3 --out " + (dir / "c").string()), 0);
    const std::string a = readFile(dir / "a" / "samples.csv");
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, readFile(dir / "b" / "samples.csv"));
    EXPECT_EQ(a, readFile(dir / "c" / "samples.csv"));
}

TEST(Cli, SeedFlagOverridesConfig) {
    const fs::path dir = scratchDir("cli_seed");
    writeFile(dir / "c.json", R"({"variant": "single-leo", "n_ue_drops": 20, "seed": 1})");
    ASSERT_EQ(runCli("single-leo --config " + (dir / "c.json").string() + " --seed 99 --out " + dir.string()), 0);
    EXPECT_EQ(manifest(dir)["seed"], 99);
    EXPECT_EQ(manifest(dir)["resolved_config"]["seed"], 99);
}

TEST(Cli, JsonFormatEmitsArray) {
    const fs::path dir = scratchDir("cli_json");
    writeFile(dir / "c.json", R"({"variant": "gnss-leo", "n_ue_drops": 10})");
    ASSERT_EQ(runCli("gnss-leo --format json --config " + (dir / "c.json").string() + " --out " + dir.string()), 0);
    const auto samples = nlohmann::json::parse(readFile(dir / "samples.json"));
    ASSERT_TRUE(samples.is_array());
    EXPECT_EQ(samples.size(), 50u);
    for (const char* key : {"ue_lat_deg", "ue_lon_deg", "case_id", "peb_m", "gdop", "degenerate"}) {
        EXPECT_TRUE(samples[0].contains(key)) << key;
    }
    EXPECT_FALSE(fs::exists(dir / "samples.csv"));
}

TEST(Cli, ReproduceFiguresCoversEveryCase) {
    const fs::path dir = scratchDir("cli_repro");
    writeFile(dir / "c.json", R"({"variant": "single-leo", "n_ue_drops": 30})");
    ASSERT_EQ(runCli("reproduce-figures --config " + (dir / "c.json").string() + " --out " + dir.string()), 0);
    const std::string box = readFile(dir / "boxplot.csv");
    for (const char* id : {"single-leo_T2s", "single-leo_T10s", "multi-leo_3tdoa", "multi-leo_3tdoa+rtt",
                           "multi-leo_4tdoa", "multi-leo_4tdoa+rtt", "gnss2+leo_T2s", "gnss2+leo_T5s",
                           "gnss2+leo_T7s", "gnss2+leo_T10s", "gnss-only"}) {
        EXPECT_NE(box.find(std::string("\n") + id + ","), std::string::npos) << id;
    }
    std::size_t rows = 0;
    for (char ch : box) rows += ch == '\n';
    EXPECT_EQ(rows, 1u + 18u);
}

TEST(Cli, ManifestListsEveryOutputAndRecordsProvenance) {
    const fs::path dir = scratchDir("cli_manifest");
    writeFile(dir / "c.json", R"({"variant": "single-leo", "n_ue_drops": 5})");
    ASSERT_EQ(runCli("single-leo --config " + (dir / "c.json").string() + " --out " + dir.string()), 0);
    const auto m = manifest(dir);
    std::set<std::string> listed;
    for (const auto& o : m["outputs"]) listed.insert(o.get<std::string>());
    std::set<std::string> present;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().filename() != "c.json") present.insert(e.path().filename().string());
    }
    EXPECT_EQ(listed, present);
    EXPECT_EQ(m["asset_checksums"].size(), 12u);
    EXPECT_TRUE(m["warnings"].empty());
    EXPECT_TRUE(m["errors"].empty());
    EXPECT_TRUE(m["calibration"].contains("processing_gain_db"));
    EXPECT_EQ(m["config_hash"].get<std::string>().size(), 64u);
    EXPECT_FALSE(m["started_at"].get<std::string>().empty());
}

TEST(Cli, ReorderedConfigKeysGiveSameHash) {
    const fs::path dir = scratchDir("cli_hash");
    writeFile(dir / "a.json", R"({"variant": "single-leo", "n_ue_drops": 5, "seed": 3})");
    writeFile(dir / "b.json", R"({"seed": 3, "n_ue_drops": 5, "variant": "single-leo"})");
    ASSERT_EQ(runCli("single-leo --config " + (dir / "a.json").string() + " --out " + (dir / "a").string()), 0);
    ASSERT_EQ(runCli("single-leo --config " + (dir / "b.json").string() + " --out " + (dir / "b").string()), 0);
    EXPECT_EQ(manifest(dir / "a")["config_hash"], manifest(dir / "b")["config_hash"]);
}

TEST(Cli, TamperedAssetIsFlaggedInManifest) {
    const fs::path dir = scratchDir("cli_tamper");
    fs::create_directories(dir / "assets");
    for (const auto& e : fs::directory_iterator(NTNPOS_DEFAULT_ASSET_DIR)) {
        fs::copy_file(e.path(), dir / "assets" / e.path().filename());
    }
    writeFile(dir / "assets" / "urban_sf_sigma_los.csv", readFile(dir / "assets" / "urban_sf_sigma_los.csv") + "\n");
    writeFile(dir / "c.json", R"({"variant": "single-leo", "n_ue_drops": 5, "asset_dir": ")" +
                                  (dir / "assets").string() + R"("})");
    ASSERT_EQ(runCli("single-leo --config " + (dir / "c.json").string() + " --out " + (dir / "out").string()), 0);
    const auto warnings = manifest(dir / "out")["warnings"];
    ASSERT_EQ(warnings.size(), 1u);
    EXPECT_NE(warnings[0].get<std::string>().find("urban_sf_sigma_los.csv"), std::string::npos);
}

TEST(Cli, ErrorsExitNonzeroWithDiagnostics) {
    const fs::path dir = scratchDir("cli_errors");
    writeFile(dir / "bad.json", R"({"variant": "multi-leo", "n_active_satellites": 5})");
    EXPECT_NE(runCli("multi-leo --config " + (dir / "bad.json").string() + " --out " + (dir / "o").string(),
                     dir / "err.txt"),
              0);
    EXPECT_NE(readFile(dir / "err.txt").find("n_active_satellites"), std::string::npos);
    const auto m = manifest(dir / "o");
    EXPECT_FALSE(m["errors"].empty());

    writeFile(dir / "typo.json", R"({"variant": "single-leo", "altittude": 1})");
    EXPECT_NE(runCli("single-leo --config " + (dir / "typo.json").string() + " --out " + (dir / "t").string(),
                     dir / "err2.txt"),
              0);
    EXPECT_NE(readFile(dir / "err2.txt").find("altittude"), std::string::npos);

    EXPECT_NE(runCli("single-leo --config " + (dir / "missing.json").string()), 0);
    EXPECT_NE(runCli("multi-leo --config " + (dir / "typo.json").string() + " --out " + (dir / "m").string()), 0);
    EXPECT_NE(runCli("no-such-command"), 0);
}

TEST(Cli, ValidateWritesReport) {
    const fs::path dir = scratchDir("cli_validate");
    writeFile(dir / "c.json", R"({"variant": "multi-leo", "validation": {"trials": 100}})");
    ASSERT_EQ(runCli("validate --config " + (dir / "c.json").string() + " --out " + dir.string()), 0);
    const auto r = nlohmann::json::parse(readFile(dir / "validation.json"));
    EXPECT_EQ(r["trials"], 100);
    EXPECT_GT(r["ratio"].get<double>(), 0.0);
}

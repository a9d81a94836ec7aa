#include <gtest/gtest.h>

#include <charconv>
#include <random>
#include <sstream>

#include "ntnpos/output.hpp"
#include "test_util.hpp"

using namespace ntnpos;
using ntnpos::test::tables;

namespace {

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

std::vector<std::string> fields(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    for (std::string f; std::getline(in, f, ',');) out.push_back(f);
    return out;
}

ResultsBundle smallRun(Variant v, std::size_t drops) {
    ScenarioConfig c = ScenarioConfig::defaults(v);
    c.ueDrops = drops;
    return run(c, tables());
}

}  // namespace

TEST(Output, DoublesRoundTrip) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> expo(-300, 300);
    for (int i = 0; i < 10000; ++i) {
        const double x = std::ldexp(mant(rng), expo(rng));
        const std::string s = formatDouble(x);
        double back = 0.0;
        std::from_chars(s.data(), s.data() + s.size(), back);
        EXPECT_EQ(back, x);
    }
    EXPECT_EQ(formatDouble(std::numeric_limits<double>::quiet_NaN()), "nan");
    EXPECT_EQ(formatDouble(0.1), "0.1");
}

TEST(Output, SamplesCsvLayout) {
    const ResultsBundle b = smallRun(Variant::MultiLeo, 20);
    const auto rows = lines(samplesCsv(std::span(&b, 1)));
    ASSERT_EQ(rows.size(), 1u + 4u * 20u);
    EXPECT_EQ(rows[0], "ue_lat_deg,ue_lon_deg,case_id,peb_m,gdop,degenerate");
    const auto f = fields(rows[1]);
    ASSERT_EQ(f.size(), 6u);
    EXPECT_EQ(f[2], "multi-leo_3tdoa");
    EXPECT_EQ(std::stod(f[3]), b.cases[0].samples.samples[0].result.peb);
    EXPECT_TRUE(f[5] == "0" || f[5] == "1");
}

TEST(Output, JsonSamplesCarryTheSameFields) {
    const ResultsBundle b = smallRun(Variant::SingleLeo, 15);
    const auto rows = lines(samplesCsv(std::span(&b, 1)));
    const nlohmann::json j = samplesJson(std::span(&b, 1));
    ASSERT_TRUE(j.is_array());
    ASSERT_EQ(j.size(), rows.size() - 1);
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto f = fields(rows[i + 1]);
        EXPECT_EQ(j[i]["case_id"], f[2]);
        EXPECT_EQ(j[i]["ue_lat_deg"].get<double>(), std::stod(f[0]));
        EXPECT_EQ(j[i]["ue_lon_deg"].get<double>(), std::stod(f[1]));
        if (j[i]["degenerate"].get<bool>()) {
            EXPECT_TRUE(j[i]["peb_m"].is_null());
            EXPECT_EQ(f[3], "nan");
        } else {
            EXPECT_EQ(j[i]["peb_m"].get<double>(), std::stod(f[3]));
        }
    }
}

TEST(Output, BoxplotAndSummaryAgree) {
    const ResultsBundle b = smallRun(Variant::GnssLeo, 40);
    const auto rows = lines(boxplotCsv(std::span(&b, 1)));
    ASSERT_EQ(rows.size(), 6u);
    EXPECT_EQ(rows[0], "case_id,mean,median,q1,q3,whisker_lo,whisker_hi,n_outliers");
    const nlohmann::json summary = summaryJson(std::span(&b, 1));
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto f = fields(rows[i]);
        ASSERT_EQ(f.size(), 8u);
        const auto& s = summary.at(f[0]);
        EXPECT_EQ(s["mean"].get<double>(), std::stod(f[1]));
        EXPECT_EQ(s["median"].get<double>(), std::stod(f[2]));
        EXPECT_EQ(s["n_outliers"].get<std::size_t>(), std::stoul(f[7]));
    }
}

TEST(Output, ManifestListsOutputs) {
    const auto dir = ntnpos::test::scratchDir("manifest");
    const ResultsBundle b = smallRun(Variant::SingleLeo, 5);
    RunManifest m;
    m.command = "single-leo";
    writeResults(dir, std::span(&b, 1), SampleFormat::Csv, m);
    writeManifest(dir, m);
    const nlohmann::json j = nlohmann::json::parse(ntnpos::test::readFile(dir / "manifest.json"));
    EXPECT_EQ(j["tool_version"], std::string(kToolVersion));
    const std::vector<std::string> outputs = j["outputs"];
    EXPECT_EQ(outputs, (std::vector<std::string>{"samples.csv", "summary.json", "boxplot.csv", "manifest.json"}));
    for (const auto& o : outputs) EXPECT_TRUE(std::filesystem::exists(dir / o)) << o;
    EXPECT_THROW(writeOutput(dir / "missing" / "deeper", "x.txt", "x", m), std::runtime_error);
}

TEST(Output, TimestampFormat) {
    const std::string t = utcTimestamp();
    ASSERT_EQ(t.size(), 20u);
    EXPECT_EQ(t[4], '-');
    EXPECT_EQ(t[10], 'T');
    EXPECT_EQ(t.back(), 'Z');
}

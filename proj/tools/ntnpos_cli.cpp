#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ntnpos/channel.hpp"
#include "ntnpos/checksum.hpp"
#include "ntnpos/config.hpp"
#include "ntnpos/errors.hpp"
#include "ntnpos/estimator.hpp"
#include "ntnpos/output.hpp"
#include "ntnpos/scenarios.hpp"

namespace fs = std::filesystem;
using namespace ntnpos;

namespace {

struct Options {
    std::string configPath;
    std::optional<std::uint64_t> seed;
    std::string outDir{"."};
    std::string format{"csv"};
    unsigned workers{1};
};

void addCommonFlags(CLI::App* cmd, Options& opt) {
    cmd->add_option("--config", opt.configPath, "JSON configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--seed", opt.seed, "random seed (overrides the config)");
    cmd->add_option("--out", opt.outDir, "output directory")->capture_default_str();
    cmd->add_option("--format", opt.format, "sample format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    cmd->add_option("--workers", opt.workers, "worker threads; results do not depend on it")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
}

ScenarioConfig loadConfig(const Options& opt, Variant fallback) {
    ScenarioConfig c = opt.configPath.empty() ? ScenarioConfig::defaults(fallback) : parseConfigFile(opt.configPath);
    if (opt.seed) c.seed = *opt.seed;
    validateConfig(c);
    return c;
}

ChannelTables loadTables(const ScenarioConfig& c) {
    return ChannelTables::load(c.assetDir.empty() ? ChannelTables::defaultDirectory() : c.assetDir);
}

// Per-study defaults with the shared settings of `base`.
ScenarioConfig studyConfig(const ScenarioConfig& base, Variant v) {
    ScenarioConfig c = ScenarioConfig::defaults(v);
    c.seed = base.seed;
    c.ueDrops = base.ueDrops;
    c.scenarioClass = base.scenarioClass;
    c.losOnly = base.losOnly;
    c.links = base.links;
    c.coverageCenter = base.coverageCenter;
    c.tdoaSyncError = base.tdoaSyncError;
    c.degenerateThreshold = base.degenerateThreshold;
    c.assetDir = base.assetDir;
    return c;
}

void recordTables(const ChannelTables& tables, RunManifest& manifest) {
    manifest.assetChecksums = tables.checksums();
    for (const auto& f : tables.checksumMismatches()) {
        manifest.warnings.push_back("channel table " + f + " does not match its pinned checksum");
    }
}

nlohmann::json calibrationConstants(const ScenarioConfig& c) {
    return {{"processing_gain_db", c.links.processingGainDb},
            {"calibrated_processing_gain_db", kCalibratedProcessingGainDb}};
}

SampleFormat sampleFormat(const Options& opt) { return opt.format == "json" ? SampleFormat::Json : SampleFormat::Csv; }

void runStudy(const Options& opt, Variant variant, RunManifest& manifest) {
    ScenarioConfig c = loadConfig(opt, variant);
    const bool gnssCommand = variant == Variant::GnssLeo;
    const bool matches = c.variant == variant || (gnssCommand && c.variant == Variant::GnssOnly);
    if (!matches) {
        throw ConfigError("variant", "'" + std::string(toString(c.variant)) + "' does not match the " +
                                         std::string(toString(variant)) + " command");
    }
    manifest.seed = c.seed;
    manifest.configHash = configHash(c);
    manifest.resolvedConfig = toJson(c);
    manifest.calibration = calibrationConstants(c);

    const ChannelTables tables = loadTables(c);
    recordTables(tables, manifest);
    const ResultsBundle bundle = run(c, tables, opt.workers);
    manifest.errors.insert(manifest.errors.end(), bundle.errors.begin(), bundle.errors.end());
    writeResults(opt.outDir, std::span(&bundle, 1), sampleFormat(opt), manifest);
}

void runReproduce(const Options& opt, RunManifest& manifest) {
    const ScenarioConfig base = loadConfig(opt, Variant::SingleLeo);
    manifest.seed = base.seed;
    manifest.calibration = calibrationConstants(base);
    const ChannelTables tables = loadTables(base);
    recordTables(tables, manifest);

    std::vector<ResultsBundle> bundles;
    nlohmann::json configs = nlohmann::json::array();
    for (Variant v : {Variant::SingleLeo, Variant::MultiLeo, Variant::GnssLeo}) {
        const ScenarioConfig c = studyConfig(base, v);
        configs.push_back(toJson(c));
        bundles.push_back(run(c, tables, opt.workers));
        manifest.errors.insert(manifest.errors.end(), bundles.back().errors.begin(), bundles.back().errors.end());
    }
    manifest.resolvedConfig = configs;
    manifest.configHash = sha256Hex(configs.dump());
    writeResults(opt.outDir, bundles, sampleFormat(opt), manifest);
}

void runValidate(const Options& opt, RunManifest& manifest) {
    const ScenarioConfig c = loadConfig(opt, Variant::MultiLeo);
    manifest.seed = c.seed;
    manifest.configHash = configHash(c);
    manifest.resolvedConfig = toJson(c);
    manifest.calibration = calibrationConstants(c);
    const ChannelTables tables = loadTables(c);
    recordTables(tables, manifest);

    const ValidationReport report = validate(c, tables, opt.workers);
    const nlohmann::json j = validationJson(report);
    writeOutput(opt.outDir, "validation.json", j.dump(2) + "\n", manifest);
    std::cout << j.dump(2) << "\n";
}

void runCalibrate(const Options& opt, double low, double high, double step, RunManifest& manifest) {
    const ScenarioConfig base = loadConfig(opt, Variant::SingleLeo);
    manifest.seed = base.seed;
    manifest.configHash = configHash(base);
    manifest.resolvedConfig = toJson(base);
    const ChannelTables tables = loadTables(base);
    recordTables(tables, manifest);

    const CalibrationResult result = calibrateProcessingGain(base, tables, low, high, step, opt.workers);
    nlohmann::json grid = nlohmann::json::array();
    for (const auto& p : result.grid) grid.push_back({{"processing_gain_db", p.processingGainDb}, {"log_error", p.logError}});
    const nlohmann::json j{{"best_processing_gain_db", result.bestProcessingGainDb}, {"grid", grid}};
    manifest.calibration = j;
    writeOutput(opt.outDir, "calibration.json", j.dump(2) + "\n", manifest);
    std::cout << "best processing gain: " << formatDouble(result.bestProcessingGainDb) << " dB\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Position error bounds for satellite-based UE positioning"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));

    Options opt;
    double calLow = -10.0, calHigh = 30.0, calStep = 1.0;

    auto* single = app.add_subcommand("single-leo", "single LEO round-trip sweep over measurement time");
    auto* multi = app.add_subcommand("multi-leo", "hexagonal multi-LEO TDOA cases");
    auto* gnss = app.add_subcommand("gnss-leo", "two GNSS satellites plus one LEO, and the GNSS-only baseline");
    auto* val = app.add_subcommand("validate", "estimator Monte Carlo against the bound at a fixed UE");
    auto* repro = app.add_subcommand("reproduce-figures", "all single-LEO, multi-LEO and GNSS+LEO cases in one run");
    auto* cal = app.add_subcommand("calibrate", "grid search of the LEO processing gain");
    for (auto* cmd : {single, multi, gnss, val, repro, cal}) addCommonFlags(cmd, opt);
    cal->add_option("--low", calLow, "lowest gain, dB")->capture_default_str();
    cal->add_option("--high", calHigh, "highest gain, dB")->capture_default_str();
    cal->add_option("--step", calStep, "grid step, dB")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    RunManifest manifest;
    manifest.startedAt = utcTimestamp();
    CLI::App* cmd = app.get_subcommands().front();
    manifest.command = cmd->get_name();

    bool canWriteManifest = false;
    try {
        fs::create_directories(opt.outDir);
        canWriteManifest = true;
        if (cmd == single) runStudy(opt, Variant::SingleLeo, manifest);
        if (cmd == multi) runStudy(opt, Variant::MultiLeo, manifest);
        if (cmd == gnss) runStudy(opt, Variant::GnssLeo, manifest);
        if (cmd == val) runValidate(opt, manifest);
        if (cmd == repro) runReproduce(opt, manifest);
        if (cmd == cal) runCalibrate(opt, calLow, calHigh, calStep, manifest);
    } catch (const std::exception& e) {
        manifest.errors.push_back(e.what());
    }

    for (const auto& w : manifest.warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& e : manifest.errors) std::cerr << "error: " << e << "\n";

    if (canWriteManifest) {
        manifest.finishedAt = utcTimestamp();
        try {
            writeManifest(opt.outDir, manifest);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return EXIT_FAILURE;
        }
    }
    return manifest.errors.empty() ? EXIT_SUCCESS : EXIT_FAILURE;
}

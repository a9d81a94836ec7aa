#include "ntnpos/output.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <stdexcept>

namespace ntnpos {

namespace {

using nlohmann::json;

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json statsJson(const CaseResult& c) {
    const SummaryStats& s = c.stats;
    json j{{"count", s.count}, {"degenerate", s.degenerate}, {"failed", c.failed}};
    if (!c.hasStats) {
        j["mean"] = nullptr;
        return j;
    }
    j["mean"] = s.mean;
    j["median"] = s.median;
    j["q1"] = s.q1;
    j["q3"] = s.q3;
    j["whisker_lo"] = s.whiskerLow;
    j["whisker_hi"] = s.whiskerHigh;
    j["n_outliers"] = s.outliers;
    return j;
}

}  // namespace

std::string formatDouble(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

std::string samplesCsv(std::span<const ResultsBundle> bundles) {
    std::string out = "ue_lat_deg,ue_lon_deg,case_id,peb_m,gdop,degenerate\n";
    for (const auto& b : bundles) {
        for (const auto& c : b.cases) {
            for (const auto& s : c.samples.samples) {
                out += formatDouble(rad2deg(s.ue.latitude));
                out += ',';
                out += formatDouble(rad2deg(s.ue.longitude));
                out += ',';
                out += c.samples.caseId;
                out += ',';
                out += formatDouble(s.result.peb);
                out += ',';
                out += formatDouble(s.result.gdop);
                out += s.result.degenerate ? ",1\n" : ",0\n";
            }
        }
    }
    return out;
}

json samplesJson(std::span<const ResultsBundle> bundles) {
    json out = json::array();
    for (const auto& b : bundles) {
        for (const auto& c : b.cases) {
            for (const auto& s : c.samples.samples) {
                out.push_back({{"ue_lat_deg", number(rad2deg(s.ue.latitude))},
                               {"ue_lon_deg", number(rad2deg(s.ue.longitude))},
                               {"case_id", c.samples.caseId},
                               {"peb_m", number(s.result.peb)},
                               {"gdop", number(s.result.gdop)},
                               {"degenerate", s.result.degenerate}});
            }
        }
    }
    return out;
}

json summaryJson(std::span<const ResultsBundle> bundles) {
    json out = json::object();
    for (const auto& b : bundles) {
        for (const auto& c : b.cases) out[c.samples.caseId] = statsJson(c);
    }
    return out;
}

std::string boxplotCsv(std::span<const ResultsBundle> bundles) {
    std::string out = "case_id,mean,median,q1,q3,whisker_lo,whisker_hi,n_outliers\n";
    for (const auto& b : bundles) {
        for (const auto& c : b.cases) {
            if (!c.hasStats) continue;
            const SummaryStats& s = c.stats;
            out += c.samples.caseId;
            for (double v : {s.mean, s.median, s.q1, s.q3, s.whiskerLow, s.whiskerHigh}) {
                out += ',';
                out += formatDouble(v);
            }
            out += ',' + std::to_string(s.outliers) + '\n';
        }
    }
    return out;
}

json validationJson(const ValidationReport& r) {
    return json{{"variant", r.variant},
                {"ue_lat_deg", rad2deg(r.ue.latitude)},
                {"ue_lon_deg", rad2deg(r.ue.longitude)},
                {"initial_guess_lat_deg", rad2deg(r.initialGuess.latitude)},
                {"initial_guess_lon_deg", rad2deg(r.initialGuess.longitude)},
                {"trials", r.trials},
                {"converged", r.converged},
                {"degenerate", r.degenerate},
                {"snr_boost_db", r.snrBoostDb},
                {"rmse_m", number(r.rmse)},
                {"peb_m", number(r.peb)},
                {"ratio", number(r.ratio)},
                {"convergence_rate", r.convergenceRate},
                {"mean_error_norm_m", number(r.meanErrorNorm)}};
}

json RunManifest::toJson() const {
    return json{{"tool_version", toolVersion},
                {"command", command},
                {"config_hash", configHash},
                {"seed", seed},
                {"started_at", startedAt},
                {"finished_at", finishedAt},
                {"resolved_config", resolvedConfig},
                {"calibration", calibration},
                {"asset_checksums", assetChecksums},
                {"warnings", warnings},
                {"outputs", outputs},
                {"errors", errors}};
}

std::string utcTimestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void writeOutput(const std::filesystem::path& dir, const std::string& name, const std::string& content,
                 RunManifest& manifest) {
    const std::filesystem::path path = dir / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    out.close();
    if (!out) throw std::runtime_error("failed writing " + path.string());
    manifest.outputs.push_back(name);
}

void writeResults(const std::filesystem::path& dir, std::span<const ResultsBundle> bundles, SampleFormat format,
                  RunManifest& manifest) {
    if (format == SampleFormat::Csv) {
        writeOutput(dir, "samples.csv", samplesCsv(bundles), manifest);
    } else {
        writeOutput(dir, "samples.json", samplesJson(bundles).dump(2) + "\n", manifest);
    }
    writeOutput(dir, "summary.json", summaryJson(bundles).dump(2) + "\n", manifest);
    writeOutput(dir, "boxplot.csv", boxplotCsv(bundles), manifest);
}

void writeManifest(const std::filesystem::path& dir, RunManifest& manifest) {
    manifest.outputs.push_back("manifest.json");
    const std::filesystem::path path = dir / "manifest.json";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << manifest.toJson().dump(2) << "\n";
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace ntnpos

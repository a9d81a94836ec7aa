#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ntnpos/estimator.hpp"
#include "ntnpos/scenarios.hpp"

namespace ntnpos {

inline constexpr std::string_view kToolVersion = "0.1.0";

enum class SampleFormat { Csv, Json };

/// Shortest decimal text that parses back to the same double; "nan"/"inf"/"-inf" otherwise.
std::string formatDouble(double x);

/// Header: ue_lat_deg,ue_lon_deg,case_id,peb_m,gdop,degenerate. Cases in order, UEs in drop order.
std::string samplesCsv(std::span<const ResultsBundle> bundles);
/// Array of objects with the samples.csv fields; non-finite numbers become null.
nlohmann::json samplesJson(std::span<const ResultsBundle> bundles);
/// Object keyed by case id holding the SummaryStats fields.
nlohmann::json summaryJson(std::span<const ResultsBundle> bundles);
/// Header: case_id,mean,median,q1,q3,whisker_lo,whisker_hi,n_outliers.
std::string boxplotCsv(std::span<const ResultsBundle> bundles);
nlohmann::json validationJson(const ValidationReport& report);

struct RunManifest {
    std::string toolVersion{kToolVersion};
    std::string command;
    std::string configHash;
    std::uint64_t seed{0};
    std::string startedAt;   // UTC, ISO 8601
    std::string finishedAt;
    nlohmann::json resolvedConfig;  // one config object, or an array for multi-study runs
    nlohmann::json calibration;
    std::map<std::string, std::string> assetChecksums;
    std::vector<std::string> warnings;
    std::vector<std::string> outputs;
    std::vector<std::string> errors;

    nlohmann::json toJson() const;
};

/// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utcTimestamp();

/// Writes `content` to `dir / name` and appends `name` to `manifest.outputs`. Throws std::runtime_error on IO failure.
void writeOutput(const std::filesystem::path& dir, const std::string& name, const std::string& content,
                 RunManifest& manifest);

/// Writes samples (csv or json), summary.json and boxplot.csv.
void writeResults(const std::filesystem::path& dir, std::span<const ResultsBundle> bundles, SampleFormat format,
                  RunManifest& manifest);

/// Adds manifest.json to the output list and writes it last.
void writeManifest(const std::filesystem::path& dir, RunManifest& manifest);

}  // namespace ntnpos

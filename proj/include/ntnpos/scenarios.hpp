#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ntnpos/channel.hpp"
#include "ntnpos/fisher.hpp"
#include "ntnpos/geometry.hpp"
#include "ntnpos/stats.hpp"

namespace ntnpos {

enum class Variant { SingleLeo, MultiLeo, GnssLeo, GnssOnly };

std::string_view toString(Variant v);
Variant variantFromString(std::string_view name);  // throws std::invalid_argument

/// LEO processing gain fitted against the reference case means; see `calibrateProcessingGain`.
inline constexpr double kCalibratedProcessingGainDb = 3.0;

struct LinkBudget {
    LinkParams leoDownlink{LinkParams::leoDownlink()};
    LinkParams leoUplink{LinkParams::leoUplink()};
    LinkParams gnssDownlink{LinkParams::gnssDownlink()};
    AntennaPattern pattern{};
    double neighborPenaltyDb{6.0};
    double processingGainDb{kCalibratedProcessingGainDb};  // applied to LEO links only
};

struct ValidationSettings {
    std::size_t trials{2000};
    double snrBoostDb{0.0};
    double ueOffset{-1.0};       // m from the coverage center; negative = half the cap radius
    double ueBearing{deg2rad(45.0)};
    std::size_t activeSatellites{4};
    bool rttAugmentation{false};
};

struct ScenarioConfig {
    Variant variant{Variant::SingleLeo};
    double leoAltitude{600.0e3};
    double gnssAltitude{20200.0e3};
    std::vector<double> measurementTimes{2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::size_t virtualAnchors{10};
    std::vector<int> activeSatellites{3, 4};
    std::vector<bool> rttAugmentation{false, true};
    double rttMeasurementTime{10.0};
    std::size_t ueDrops{1000};
    std::uint64_t seed{0};
    ScenarioClass scenarioClass{ScenarioClass::Urban};
    bool losOnly{false};
    double gnssElevationMask{deg2rad(30.0)};
    double hexLonGap{deg2rad(13.0)};
    double hexLatGap{deg2rad(6.9)};
    Geodetic coverageCenter{};
    double tdoaSyncError{0.0};  // m, per-satellite timing error added to TDOA sigmas
    double degenerateThreshold{kDefaultDegenerateThreshold};
    LinkBudget links{};
    ValidationSettings validation{};
    std::filesystem::path assetDir{};  // empty = bundled tables

    /// Defaults for `variant` (altitudes and measurement times differ per study).
    static ScenarioConfig defaults(Variant variant);
};

/// Throws ConfigError naming the offending field.
void validateConfig(const ScenarioConfig& config);

struct PebSample {
    Geodetic ue{};
    PebResult result{};
    std::string error;  // non-empty when the sample could not be evaluated
};

struct PebSampleSet {
    std::string caseId;
    std::vector<PebSample> samples;
};

struct CaseResult {
    PebSampleSet samples;
    SummaryStats stats{};
    bool hasStats{false};
    std::size_t failed{0};
};

struct ResultsBundle {
    ScenarioConfig config;
    std::vector<CaseResult> cases;
    std::vector<std::string> errors;

    const CaseResult& find(std::string_view caseId) const;  // throws std::out_of_range
};

/// Uniform-by-area UE positions over the ground cap within half the 3 dB beamwidth of a serving
/// satellite at `altitude` above `center`. Deterministic in (seed, drop index).
std::vector<Geodetic> dropUes(const ScenarioConfig& config, const Geodetic& center, double altitude);

/// Single draw for drop `index`, used by `dropUes`.
Geodetic dropUe(const Geodetic& center, double altitude, double beamwidth, std::mt19937_64& rng);

std::string singleLeoCaseId(double measurementTime);
std::string multiLeoCaseId(int activeSatellites, bool rtt);
std::string gnssLeoCaseId(double measurementTime);
inline constexpr std::string_view kGnssOnlyCaseId = "gnss-only";

/// Per-link ranging accuracy derived from the link budget.
class LinkModel {
public:
    LinkModel(const ScenarioConfig& config, const ChannelTables& tables);

    /// Large-scale state for the link UE-`sat`, drawn from `rng`.
    ChannelState draw(const EcefVector& ue, const EcefVector& sat, std::mt19937_64& rng) const;

    /// Round-trip set over `anchors` of the serving satellite whose beam points at `aim`.
    MeasurementSet servingRtt(const EcefVector& ue, const AnchorSet& anchors, const EcefVector& aim,
                              const ChannelState& channel) const;

    /// Downlink range sigma for a LEO; neighbors take the fixed penalty and no pattern loss.
    double leoDownlinkSigma(const EcefVector& ue, const EcefVector& sat, const EcefVector& aim, bool neighbor,
                            const ChannelState& channel) const;
    double gnssSigma(const EcefVector& ue, const EcefVector& sat) const;

    /// Every LEO link SNR is shifted by `db` (validation SNR sweeps).
    void setSnrBoost(double db) { snrBoostDb_ = db; }

private:
    const ScenarioConfig& config_;
    const ChannelTables& tables_;
    double snrBoostDb_{0.0};
};

/// GNSS satellite placed at `elevation`/`azimuth` from `ue` on the sphere of radius R + altitude.
SatelliteState gnssSatellite(const EcefVector& ue, double elevation, double azimuth, double altitude);

std::vector<PebSampleSet> runSingleLeo(const ScenarioConfig& config, const ChannelTables& tables, unsigned workers = 1);
std::vector<PebSampleSet> runMultiLeo(const ScenarioConfig& config, const ChannelTables& tables, unsigned workers = 1);
/// Hybrid 2-GNSS + LEO cases per measurement time, then the 3-GNSS baseline. The baseline alone for
/// Variant::GnssOnly.
std::vector<PebSampleSet> runGnssLeo(const ScenarioConfig& config, const ChannelTables& tables, unsigned workers = 1);

/// Box-plot statistics over the non-degenerate samples. Throws EmptyStatisticsError when none exist.
SummaryStats summarize(const PebSampleSet& samples);

/// Dispatches on the variant; `workers` never changes the result.
ResultsBundle run(const ScenarioConfig& config, const ChannelTables& tables, unsigned workers = 1);

struct ReferenceMean {
    Variant variant;
    std::string caseId;
    double meanPeb;  // m
};

/// Published mean PEB values of the three case studies.
const std::vector<ReferenceMean>& referenceMeans();

struct CalibrationPoint {
    double processingGainDb;
    double logError;  // sum of squared natural-log ratios against the reference means
};

struct CalibrationResult {
    double bestProcessingGainDb;
    std::vector<CalibrationPoint> grid;
};

/// Grid search of the LEO processing gain minimizing the log-ratio error of every reference mean.
CalibrationResult calibrateProcessingGain(const ScenarioConfig& base, const ChannelTables& tables, double lowDb = -10.0,
                                          double highDb = 30.0, double stepDb = 1.0, unsigned workers = 1);

}  // namespace ntnpos

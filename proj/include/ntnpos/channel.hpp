#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "ntnpos/constants.hpp"

namespace ntnpos {

enum class AntennaModel { BesselAperture, GaussianApprox };

struct AntennaPattern {
    double peakGainDbi{30.0};
    double beamwidth{deg2rad(4.4127)};  // full 3 dB beamwidth, radians
    AntennaModel model{AntennaModel::BesselAperture};
};

/// Normalized gain in dB relative to peak. Exactly 0 at boresight and -3.01 dB at beamwidth/2.
/// Pattern nulls are floored at -100 dB.
double antennaGain(const AntennaPattern& pattern, double offBoresight);

/// 20 log10(4 pi d f / c)
double freeSpacePathLoss(double distance, double carrier);

enum class ScenarioClass { DenseUrban, Urban, SuburbanRural };

std::string_view toString(ScenarioClass c);
ScenarioClass scenarioClassFromString(std::string_view name);  // throws std::invalid_argument

/// Elevation-indexed table with linear interpolation between grid points.
struct ElevationTable {
    std::vector<double> elevationsDeg;
    std::vector<double> values;

    /// Elevations below the first grid point use the first entry.
    double at(double elevationRad) const;
};

struct ShadowingParams {
    double sigmaDb{0.0};
    double clutterLossDb{0.0};
};

/// LOS probability, shadow-fading sigma and clutter-loss tables per scenario class, loaded from
/// `<class>_<quantity>.csv` files (columns elevation_deg,value).
class ChannelTables {
public:
    static ChannelTables load(const std::filesystem::path& dir);
    static const std::filesystem::path& defaultDirectory();

    /// Probability of line of sight; throws VisibilityError for elevation <= 0.
    double losProbability(ScenarioClass c, double elevation) const;
    ShadowingParams shadowing(ScenarioClass c, double elevation, bool los) const;

    const std::filesystem::path& directory() const { return dir_; }
    /// SHA-256 of every loaded file, keyed by file name.
    const std::map<std::string, std::string>& checksums() const { return checksums_; }
    /// Files whose checksum differs from the pinned release values.
    const std::vector<std::string>& checksumMismatches() const { return mismatches_; }

    static const std::map<std::string, std::string>& pinnedChecksums();

private:
    struct ClassTables {
        ElevationTable losProbability;
        ElevationTable sigmaLos;
        ElevationTable sigmaNlos;
        ElevationTable clutterLoss;
    };

    const ClassTables& forClass(ScenarioClass c) const { return classes_[static_cast<std::size_t>(c)]; }

    std::filesystem::path dir_;
    std::array<ClassTables, 3> classes_;
    std::map<std::string, std::string> checksums_;
    std::vector<std::string> mismatches_;
};

/// Large-scale state of one link for one UE drop.
struct ChannelState {
    bool los{true};
    double shadowDb{0.0};
    double clutterDb{0.0};
};

/// Draws LOS state and shadowing for one link. Always consumes one uniform and one normal variate
/// so that toggling `losOnly` leaves the rest of the random stream untouched.
ChannelState drawChannelState(const ChannelTables& tables, ScenarioClass c, double elevation, bool losOnly,
                              std::mt19937_64& rng);

enum class LinkDirection { LeoDownlink, LeoUplink, GnssDownlink };

struct LinkParams {
    LinkDirection direction{LinkDirection::LeoDownlink};
    double carrier{2.0e9};        // Hz
    double bandwidth{10.0e6};     // Hz
    double eirpDbw{44.0};         // total EIRP, dBW
    double gOverTDbK{-31.6};      // receiver G/T, dB/K
    double extraLossDb{3.0};      // polarization and atmospheric losses
    double neighborPenaltyDb{0.0};
    double processingGainDb{0.0};
    double cn0DbHz{44.0};         // GNSS only: received carrier-to-noise density
    double integrationTime{0.02}; // GNSS only: coherent integration, s

    static LinkParams leoDownlink();
    static LinkParams leoUplink();
    static LinkParams gnssDownlink();
};

/// Total EIRP from a density in dBW/MHz.
double eirpFromDensity(double dbwPerMhz, double bandwidth);

struct LinkInputs {
    double distance{0.0};
    double offBoresight{0.0};
    bool neighbor{false};
    ChannelState channel{};
};

struct LinkRealization {
    bool los{true};
    double pathLossDb{0.0};
    double shadowDb{0.0};
    double clutterDb{0.0};
    double antennaGainDb{0.0};
    double snrDb{0.0};
};

LinkRealization linkSnr(const LinkParams& params, const AntennaPattern& pattern, const LinkInputs& inputs);

}  // namespace ntnpos

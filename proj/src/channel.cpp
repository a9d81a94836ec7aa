#include "ntnpos/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ntnpos/errors.hpp"

namespace ntnpos {

namespace {

constexpr double kGainFloorDb = -100.0;

// Argument at which the aperture field 2 J1(x)/x falls to 1/sqrt(2), i.e. the half-power point.
double besselHalfPowerArgument() {
    static const double root = [] {
        const double target = 1.0 / std::sqrt(2.0);
        double lo = 0.5, hi = 3.0;
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            const double field = 2.0 * std::cyl_bessel_j(1.0, mid) / mid;
            (field > target ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }();
    return root;
}

}  // namespace

double antennaGain(const AntennaPattern& pattern, double offBoresight) {
    if (!(pattern.beamwidth > 0.0 && pattern.beamwidth < kPi)) {
        throw std::invalid_argument("antenna beamwidth must lie in (0, pi)");
    }
    const double theta = std::abs(offBoresight);
    if (theta == 0.0) return 0.0;

    double gainDb = 0.0;
    switch (pattern.model) {
    case AntennaModel::BesselAperture: {
        const double ka = besselHalfPowerArgument() / std::sin(0.5 * pattern.beamwidth);
        const double x = ka * std::sin(theta);
        const double field = 2.0 * std::cyl_bessel_j(1.0, x) / x;
        gainDb = 10.0 * std::log10(std::max(field * field, 1e-300));
        break;
    }
    case AntennaModel::GaussianApprox: {
        const double u = 2.0 * theta / pattern.beamwidth;
        gainDb = 10.0 * std::log10(0.5) * u * u;
        break;
    }
    }
    return std::max(gainDb, kGainFloorDb);
}

double freeSpacePathLoss(double distance, double carrier) {
    if (!(distance > 0.0)) throw std::invalid_argument("distance must be positive");
    return 20.0 * std::log10(4.0 * kPi * distance * carrier / kSpeedOfLight);
}

std::string_view toString(ScenarioClass c) {
    switch (c) {
    case ScenarioClass::DenseUrban: return "dense-urban";
    case ScenarioClass::Urban: return "urban";
    case ScenarioClass::SuburbanRural: return "suburban-rural";
    }
    return "unknown";
}

ScenarioClass scenarioClassFromString(std::string_view name) {
    if (name == "dense-urban") return ScenarioClass::DenseUrban;
    if (name == "urban") return ScenarioClass::Urban;
    if (name == "suburban-rural") return ScenarioClass::SuburbanRural;
    throw std::invalid_argument("unknown scenario class '" + std::string(name) +
                                "' (expected dense-urban, urban or suburban-rural)");
}

double ElevationTable::at(double elevationRad) const {
    if (!(elevationRad > 0.0)) {
        throw VisibilityError("elevation " + std::to_string(rad2deg(elevationRad)) + " deg is below the horizon");
    }
    const double e = rad2deg(elevationRad);
    if (e <= elevationsDeg.front()) return values.front();
    if (e >= elevationsDeg.back()) return values.back();
    const auto it = std::upper_bound(elevationsDeg.begin(), elevationsDeg.end(), e);
    const std::size_t hi = static_cast<std::size_t>(it - elevationsDeg.begin());
    const std::size_t lo = hi - 1;
    const double w = (e - elevationsDeg[lo]) / (elevationsDeg[hi] - elevationsDeg[lo]);
    return values[lo] + w * (values[hi] - values[lo]);
}

ChannelState drawChannelState(const ChannelTables& tables, ScenarioClass c, double elevation, bool losOnly,
                              std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double u = uniform(rng);
    const double z = normal(rng);

    ChannelState state;
    if (losOnly) return state;
    state.los = u < tables.losProbability(c, elevation);
    const ShadowingParams sp = tables.shadowing(c, elevation, state.los);
    state.shadowDb = sp.sigmaDb * z;
    state.clutterDb = sp.clutterLossDb;
    return state;
}

LinkParams LinkParams::leoDownlink() {
    LinkParams p;
    p.direction = LinkDirection::LeoDownlink;
    p.eirpDbw = eirpFromDensity(34.0, p.bandwidth);
    p.gOverTDbK = -31.6;
    return p;
}

LinkParams LinkParams::leoUplink() {
    LinkParams p;
    p.direction = LinkDirection::LeoUplink;
    p.eirpDbw = 23.0 - 30.0;  // 23 dBm handset, 0 dBi
    p.gOverTDbK = 1.1;
    return p;
}

LinkParams LinkParams::gnssDownlink() {
    LinkParams p;
    p.direction = LinkDirection::GnssDownlink;
    p.carrier = 1575.42e6;
    p.bandwidth = 15.345e6;
    p.extraLossDb = 0.0;
    p.cn0DbHz = 44.0;
    p.integrationTime = 0.02;
    return p;
}

double eirpFromDensity(double dbwPerMhz, double bandwidth) { return dbwPerMhz + 10.0 * std::log10(bandwidth / 1.0e6); }

LinkRealization linkSnr(const LinkParams& params, const AntennaPattern& pattern, const LinkInputs& inputs) {
    if (!(params.bandwidth > 0.0) || !(params.carrier > 0.0)) {
        throw std::invalid_argument("link carrier and bandwidth must be positive");
    }
    if (params.neighborPenaltyDb < 0.0) throw std::invalid_argument("neighbor penalty must be non-negative");

    LinkRealization out;
    out.los = inputs.channel.los;
    out.pathLossDb = freeSpacePathLoss(inputs.distance, params.carrier);
    out.shadowDb = inputs.channel.shadowDb;
    out.clutterDb = inputs.channel.clutterDb;

    const double penalty = inputs.neighbor ? params.neighborPenaltyDb : 0.0;
    const double common = out.shadowDb + out.clutterDb + params.extraLossDb + penalty;

    if (params.direction == LinkDirection::GnssDownlink) {
        // received C/N0 already folds in transmit power, path loss and receiver noise
        out.antennaGainDb = 0.0;
        out.snrDb = params.cn0DbHz + 10.0 * std::log10(params.integrationTime) - common + params.processingGainDb;
        return out;
    }

    out.antennaGainDb = antennaGain(pattern, inputs.offBoresight);
    const double noiseDb = 10.0 * std::log10(kBoltzmann * params.bandwidth);
    out.snrDb = params.eirpDbw + params.gOverTDbK - out.pathLossDb - common + out.antennaGainDb - noiseDb +
                params.processingGainDb;
    return out;
}

}  // namespace ntnpos

#include "ntnpos/scenarios.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

#include "ntnpos/errors.hpp"
#include "ntnpos/parallel.hpp"
#include "ntnpos/rng.hpp"

namespace ntnpos {

namespace {

// Random stream tags, one per study.
constexpr std::uint64_t kStreamSingleLeo = 1;
constexpr std::uint64_t kStreamMultiLeo = 2;
constexpr std::uint64_t kStreamGnssLeo = 3;

std::string formatSeconds(double t) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), t);
    return std::string(buf, res.ptr) + "s";
}

PebSample evaluateSample(const Geodetic& ue, std::span<const MeasurementSet> sets, double threshold) {
    PebSample sample;
    sample.ue = ue;
    try {
        sample.result = evaluate(geodeticToEcef(ue), sets, threshold);
    } catch (const std::exception& e) {
        sample.result.degenerate = true;
        sample.result.peb = std::numeric_limits<double>::quiet_NaN();
        sample.result.gdop = std::numeric_limits<double>::quiet_NaN();
        sample.error = e.what();
    }
    return sample;
}

Geodetic groundPoint(const Geodetic& g) { return {g.latitude, g.longitude, 0.0}; }

}  // namespace

std::string_view toString(Variant v) {
    switch (v) {
    case Variant::SingleLeo: return "single-leo";
    case Variant::MultiLeo: return "multi-leo";
    case Variant::GnssLeo: return "gnss-leo";
    case Variant::GnssOnly: return "gnss-only";
    }
    return "unknown";
}

Variant variantFromString(std::string_view name) {
    if (name == "single-leo") return Variant::SingleLeo;
    if (name == "multi-leo") return Variant::MultiLeo;
    if (name == "gnss-leo") return Variant::GnssLeo;
    if (name == "gnss-only") return Variant::GnssOnly;
    throw std::invalid_argument("unknown variant '" + std::string(name) +
                                "' (expected single-leo, multi-leo, gnss-leo or gnss-only)");
}

ScenarioConfig ScenarioConfig::defaults(Variant variant) {
    ScenarioConfig c;
    c.variant = variant;
    switch (variant) {
    case Variant::SingleLeo:
        break;
    case Variant::MultiLeo:
        c.leoAltitude = 780.0e3;
        c.measurementTimes = {};
        break;
    case Variant::GnssLeo:
    case Variant::GnssOnly:
        c.measurementTimes = {2, 5, 7, 10};
        break;
    }
    return c;
}

void validateConfig(const ScenarioConfig& c) {
    if (!(c.leoAltitude > 0.0)) throw ConfigError("leo_altitude_m", "must be positive");
    if (!(c.gnssAltitude > 0.0)) throw ConfigError("gnss_altitude_m", "must be positive");
    if (c.ueDrops < 1) throw ConfigError("n_ue_drops", "must be at least 1");
    if (c.virtualAnchors < 2) throw ConfigError("n_virtual_anchors", "must be at least 2");
    const bool usesTimes = c.variant == Variant::SingleLeo || c.variant == Variant::GnssLeo;
    if (usesTimes && c.measurementTimes.empty()) {
        throw ConfigError("measurement_times_s", "must be non-empty for " + std::string(toString(c.variant)));
    }
    for (double t : c.measurementTimes) {
        if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("measurement_times_s", "entries must be positive");
    }
    if (!(c.rttMeasurementTime > 0.0)) throw ConfigError("rtt_measurement_time_s", "must be positive");
    if (c.activeSatellites.empty()) throw ConfigError("n_active_satellites", "must list at least one value");
    for (int k : c.activeSatellites) {
        if (k != 3 && k != 4) throw ConfigError("n_active_satellites", "the number of active satellites is 3 or 4");
    }
    if (c.rttAugmentation.empty()) throw ConfigError("rtt_augmentation", "must list at least one value");
    if (!(c.gnssElevationMask >= 0.0 && c.gnssElevationMask < kPi / 2)) {
        throw ConfigError("gnss_elevation_mask_deg", "must lie in [0, 90)");
    }
    if (!(c.hexLonGap > 0.0)) throw ConfigError("hex.lon_gap_deg", "must be positive");
    if (!(c.hexLatGap >= 0.0)) throw ConfigError("hex.lat_gap_deg", "must be non-negative");
    if (!(c.tdoaSyncError >= 0.0)) throw ConfigError("tdoa_sync_error_m", "must be non-negative");
    if (!(c.degenerateThreshold > 0.0)) throw ConfigError("degenerate_threshold", "must be positive");
    if (!(c.links.pattern.beamwidth > 0.0 && c.links.pattern.beamwidth < kPi)) {
        throw ConfigError("antenna.beamwidth_deg", "must lie in (0, 180)");
    }
    if (!(c.links.neighborPenaltyDb >= 0.0)) throw ConfigError("links.neighbor_penalty_db", "must be non-negative");
    const std::pair<const char*, const LinkParams*> links[] = {{"links.leo_downlink", &c.links.leoDownlink},
                                                               {"links.leo_uplink", &c.links.leoUplink},
                                                               {"links.gnss_downlink", &c.links.gnssDownlink}};
    for (const auto& [name, p] : links) {
        if (!(p->bandwidth > 0.0)) throw ConfigError(std::string(name) + ".bandwidth_hz", "must be positive");
        if (!(p->carrier > 0.0)) throw ConfigError(std::string(name) + ".carrier_hz", "must be positive");
        if (!(p->integrationTime > 0.0)) throw ConfigError(std::string(name) + ".integration_time_s", "must be positive");
    }
    if (c.validation.trials < 1) throw ConfigError("validation.trials", "must be at least 1");
    if (c.validation.activeSatellites != 3 && c.validation.activeSatellites != 4) {
        throw ConfigError("validation.n_active_satellites", "the number of active satellites is 3 or 4");
    }
}

const CaseResult& ResultsBundle::find(std::string_view caseId) const {
    for (const auto& c : cases) {
        if (c.samples.caseId == caseId) return c;
    }
    throw std::out_of_range("no case '" + std::string(caseId) + "' in results");
}

Geodetic dropUe(const Geodetic& center, double altitude, double beamwidth, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const double cap = capCentralAngle(altitude, 0.5 * beamwidth);
    const double cosTheta = 1.0 - uniform(rng) * (1.0 - std::cos(cap));
    const double azimuth = 2.0 * kPi * uniform(rng);
    const double sinTheta = std::sqrt(std::max(0.0, 1.0 - cosTheta * cosTheta));

    const Eigen::Matrix3d enu = enuRotation(groundPoint(center));
    const EcefVector dir = cosTheta * enu.row(2).transpose() +
                           sinTheta * (std::cos(azimuth) * enu.row(1).transpose() +
                                       std::sin(azimuth) * enu.row(0).transpose());
    Geodetic g = ecefToGeodetic(EcefVector(kEarthRadius * dir));
    g.altitude = 0.0;
    return g;
}

std::vector<Geodetic> dropUes(const ScenarioConfig& config, const Geodetic& center, double altitude) {
    const std::uint64_t stream = config.variant == Variant::MultiLeo ? kStreamMultiLeo
                                 : config.variant == Variant::SingleLeo ? kStreamSingleLeo
                                                                        : kStreamGnssLeo;
    std::vector<Geodetic> ues;
    ues.reserve(config.ueDrops);
    for (std::size_t i = 0; i < config.ueDrops; ++i) {
        auto rng = substream(config.seed, stream, i);
        ues.push_back(dropUe(center, altitude, config.links.pattern.beamwidth, rng));
    }
    return ues;
}

std::string singleLeoCaseId(double t) { return "single-leo_T" + formatSeconds(t); }

std::string multiLeoCaseId(int k, bool rtt) {
    return "multi-leo_" + std::to_string(k) + "tdoa" + (rtt ? "+rtt" : "");
}

std::string gnssLeoCaseId(double t) { return "gnss2+leo_T" + formatSeconds(t); }

LinkModel::LinkModel(const ScenarioConfig& config, const ChannelTables& tables) : config_(config), tables_(tables) {}

ChannelState LinkModel::draw(const EcefVector& ue, const EcefVector& sat, std::mt19937_64& rng) const {
    return drawChannelState(tables_, config_.scenarioClass, elevationAngle(ue, sat), config_.losOnly, rng);
}

namespace {

LinkParams withGain(LinkParams p, const LinkBudget& budget, double boostDb) {
    p.processingGainDb += budget.processingGainDb + boostDb;
    p.neighborPenaltyDb = budget.neighborPenaltyDb;
    return p;
}

}  // namespace

MeasurementSet LinkModel::servingRtt(const EcefVector& ue, const AnchorSet& anchors, const EcefVector& aim,
                                     const ChannelState& channel) const {
    const LinkParams dl = withGain(config_.links.leoDownlink, config_.links, snrBoostDb_);
    const LinkParams ul = withGain(config_.links.leoUplink, config_.links, snrBoostDb_);
    std::vector<double> sigmaDl, sigmaUl;
    sigmaDl.reserve(anchors.size());
    sigmaUl.reserve(anchors.size());
    for (const auto& a : anchors.anchors) {
        LinkInputs in;
        in.distance = (a.position - ue).norm();
        in.offBoresight = offBoresightAngle(a.position, aim, ue);
        in.channel = channel;
        sigmaDl.push_back(toaRangeSigma(linkSnr(dl, config_.links.pattern, in).snrDb, dl.bandwidth));
        sigmaUl.push_back(toaRangeSigma(linkSnr(ul, config_.links.pattern, in).snrDb, ul.bandwidth));
    }
    return MeasurementSet::rtt(anchors, std::move(sigmaDl), std::move(sigmaUl));
}

double LinkModel::leoDownlinkSigma(const EcefVector& ue, const EcefVector& sat, const EcefVector& aim, bool neighbor,
                                   const ChannelState& channel) const {
    const LinkParams dl = withGain(config_.links.leoDownlink, config_.links, snrBoostDb_);
    LinkInputs in;
    in.distance = (sat - ue).norm();
    in.offBoresight = neighbor ? 0.0 : offBoresightAngle(sat, aim, ue);
    in.neighbor = neighbor;
    in.channel = channel;
    const double s = toaRangeSigma(linkSnr(dl, config_.links.pattern, in).snrDb, dl.bandwidth);
    return std::hypot(s, config_.tdoaSyncError);
}

double LinkModel::gnssSigma(const EcefVector& ue, const EcefVector& sat) const {
    const LinkParams& p = config_.links.gnssDownlink;
    LinkInputs in;
    in.distance = (sat - ue).norm();
    const double s = toaRangeSigma(linkSnr(p, config_.links.pattern, in).snrDb, p.bandwidth);
    return std::hypot(s, config_.tdoaSyncError);
}

SatelliteState gnssSatellite(const EcefVector& ue, double elevation, double azimuth, double altitude) {
    const Eigen::Matrix3d enu = enuRotation(ecefToGeodetic(ue));
    const EcefVector dir = std::cos(elevation) * (std::sin(azimuth) * enu.row(0).transpose() +
                                                  std::cos(azimuth) * enu.row(1).transpose()) +
                           std::sin(elevation) * enu.row(2).transpose();
    // range along `dir` to the sphere of radius R + altitude
    const double r = kEarthRadius + altitude;
    const double b = ue.dot(dir);
    const double range = -b + std::sqrt(b * b - (ue.squaredNorm() - r * r));

    SatelliteState s;
    s.position = ue + range * dir;
    s.role = SatelliteRole::Gnss;
    EcefVector along = EcefVector::UnitZ().cross(s.position);
    if (along.norm() < 1e-6 * r) along = EcefVector::UnitX().cross(s.position);
    s.velocity = along.normalized() * std::sqrt(kEarthMu / r);
    return s;
}

std::vector<PebSampleSet> runSingleLeo(const ScenarioConfig& config, const ChannelTables& tables, unsigned workers) {
    const LinkModel links(config, tables);
    const Geodetic center = groundPoint(config.coverageCenter);
    const EcefVector aim = geodeticToEcef(center);
    const OrbitSpec orbit = orbitThrough(center, config.leoAltitude);
    const EcefVector servingAtEpoch = propagateCircularOrbit(orbit, 0.0).position;

    std::vector<AnchorSet> windows;
    std::vector<PebSampleSet> out;
    for (double t : config.measurementTimes) {
        windows.push_back(makeVirtualAnchors(orbit, t, config.virtualAnchors));
        out.push_back({singleLeoCaseId(t), std::vector<PebSample>(config.ueDrops)});
    }

    parallelFor(config.ueDrops, workers, [&](std::size_t i) {
        auto rng = substream(config.seed, kStreamSingleLeo, i);
        const Geodetic ue = dropUe(center, config.leoAltitude, config.links.pattern.beamwidth, rng);
        const EcefVector ueEcef = geodeticToEcef(ue);
        const ChannelState channel = links.draw(ueEcef, servingAtEpoch, rng);
        for (std::size_t c = 0; c < windows.size(); ++c) {
            try {
                const MeasurementSet set = links.servingRtt(ueEcef, windows[c], aim, channel);
                out[c].samples[i] = evaluateSample(ue, std::span(&set, 1), config.degenerateThreshold);
            } catch (const std::exception& e) {
                out[c].samples[i] = PebSample{ue, {true, NAN, NAN, INFINITY}, e.what()};
            }
        }
    });
    return out;
}

std::vector<PebSampleSet> runMultiLeo(const ScenarioConfig& config, const ChannelTables& tables, unsigned workers) {
    const LinkModel links(config, tables);
    const Geodetic center = groundPoint(config.coverageCenter);
    const EcefVector aim = geodeticToEcef(center);
    const AnchorSet grid = hexConstellation(center, config.hexLonGap, config.hexLatGap, config.leoAltitude);
    const OrbitSpec servingOrbit = orbitThrough(center, config.leoAltitude);
    const AnchorSet rttWindow = makeVirtualAnchors(servingOrbit, config.rttMeasurementTime, config.virtualAnchors);

    struct Case {
        int k;
        bool rtt;
    };
    std::vector<Case> cases;
    std::vector<PebSampleSet> out;
    for (int k : config.activeSatellites) {
        for (bool rtt : config.rttAugmentation) {
            cases.push_back({k, rtt});
            out.push_back({multiLeoCaseId(k, rtt), std::vector<PebSample>(config.ueDrops)});
        }
    }

    parallelFor(config.ueDrops, workers, [&](std::size_t i) {
        auto rng = substream(config.seed, kStreamMultiLeo, i);
        const Geodetic ue = dropUe(center, config.leoAltitude, config.links.pattern.beamwidth, rng);
        const EcefVector ueEcef = geodeticToEcef(ue);

        std::vector<ChannelState> channels;
        std::vector<double> sigmas;
        for (std::size_t s = 0; s < grid.size(); ++s) {
            channels.push_back(links.draw(ueEcef, grid[s].position, rng));
        }
        for (std::size_t s = 0; s < grid.size(); ++s) {
            sigmas.push_back(links.leoDownlinkSigma(ueEcef, grid[s].position, aim, s != grid.serving, channels[s]));
        }

        for (std::size_t c = 0; c < cases.size(); ++c) {
            try {
                const SatelliteSelection sel =
                    selectSatellites(ueEcef, grid, sigmas, static_cast<std::size_t>(cases[c].k));
                const AnchorSet active = subset(grid, sel.indices);
                std::vector<double> activeSigmas;
                for (std::size_t idx : sel.indices) activeSigmas.push_back(sigmas[idx]);
                std::vector<MeasurementSet> sets;
                sets.push_back(MeasurementSet::tdoa(active, std::move(activeSigmas), active.serving));
                if (cases[c].rtt) sets.push_back(links.servingRtt(ueEcef, rttWindow, aim, channels[grid.serving]));
                out[c].samples[i] = evaluateSample(ue, sets, config.degenerateThreshold);
            } catch (const std::exception& e) {
                out[c].samples[i] = PebSample{ue, {true, NAN, NAN, INFINITY}, e.what()};
            }
        }
    });
    return out;
}

std::vector<PebSampleSet> runGnssLeo(const ScenarioConfig& config, const ChannelTables& tables, unsigned workers) {
    const LinkModel links(config, tables);
    const Geodetic center = groundPoint(config.coverageCenter);
    const EcefVector aim = geodeticToEcef(center);
    const OrbitSpec orbit = orbitThrough(center, config.leoAltitude);
    const EcefVector servingAtEpoch = propagateCircularOrbit(orbit, 0.0).position;
    const bool hybrid = config.variant != Variant::GnssOnly;

    std::vector<AnchorSet> windows;
    std::vector<PebSampleSet> out;
    if (hybrid) {
        for (double t : config.measurementTimes) {
            windows.push_back(makeVirtualAnchors(orbit, t, config.virtualAnchors));
            out.push_back({gnssLeoCaseId(t), std::vector<PebSample>(config.ueDrops)});
        }
    }
    out.push_back({std::string(kGnssOnlyCaseId), std::vector<PebSample>(config.ueDrops)});
    const std::size_t baseline = out.size() - 1;

    parallelFor(config.ueDrops, workers, [&](std::size_t i) {
        auto rng = substream(config.seed, kStreamGnssLeo, i);
        const Geodetic ue = dropUe(center, config.leoAltitude, config.links.pattern.beamwidth, rng);
        const EcefVector ueEcef = geodeticToEcef(ue);
        const ChannelState channel = links.draw(ueEcef, servingAtEpoch, rng);

        // sky positions uniform by solid angle above the elevation mask
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        AnchorSet gnss;
        std::vector<double> gnssSigmas;
        const double sinMask = std::sin(config.gnssElevationMask);
        for (int g = 0; g < 3; ++g) {
            const double el = std::asin(sinMask + (1.0 - sinMask) * uniform(rng));
            const double az = 2.0 * kPi * uniform(rng);
            gnss.anchors.push_back(gnssSatellite(ueEcef, el, az, config.gnssAltitude));
            gnssSigmas.push_back(links.gnssSigma(ueEcef, gnss.anchors.back().position));
        }

        try {
            const MeasurementSet three = MeasurementSet::tdoa(gnss, gnssSigmas, 0);
            out[baseline].samples[i] = evaluateSample(ue, std::span(&three, 1), config.degenerateThreshold);
        } catch (const std::exception& e) {
            out[baseline].samples[i] = PebSample{ue, {true, NAN, NAN, INFINITY}, e.what()};
        }
        if (!hybrid) return;

        const std::size_t pair[] = {0, 1};
        const AnchorSet two = subset(gnss, pair);
        for (std::size_t c = 0; c < windows.size(); ++c) {
            try {
                std::vector<MeasurementSet> sets;
                sets.push_back(MeasurementSet::tdoa(two, {gnssSigmas[0], gnssSigmas[1]}, 0));
                sets.push_back(links.servingRtt(ueEcef, windows[c], aim, channel));
                out[c].samples[i] = evaluateSample(ue, sets, config.degenerateThreshold);
            } catch (const std::exception& e) {
                out[c].samples[i] = PebSample{ue, {true, NAN, NAN, INFINITY}, e.what()};
            }
        }
    });
    return out;
}

SummaryStats summarize(const PebSampleSet& samples) {
    std::vector<double> values;
    std::size_t degenerate = 0;
    for (const auto& s : samples.samples) {
        if (s.result.degenerate || !s.error.empty()) {
            ++degenerate;
        } else {
            values.push_back(s.result.peb);
        }
    }
    return summarize(values, degenerate);
}

ResultsBundle run(const ScenarioConfig& config, const ChannelTables& tables, unsigned workers) {
    validateConfig(config);
    ResultsBundle bundle;
    bundle.config = config;

    std::vector<PebSampleSet> sets;
    switch (config.variant) {
    case Variant::SingleLeo: sets = runSingleLeo(config, tables, workers); break;
    case Variant::MultiLeo: sets = runMultiLeo(config, tables, workers); break;
    case Variant::GnssLeo:
    case Variant::GnssOnly: sets = runGnssLeo(config, tables, workers); break;
    }

    for (auto& s : sets) {
        CaseResult cr;
        for (const auto& sample : s.samples) {
            if (!sample.error.empty()) ++cr.failed;
        }
        try {
            cr.stats = summarize(s);
            cr.hasStats = true;
        } catch (const EmptyStatisticsError& e) {
            bundle.errors.push_back(s.caseId + ": " + e.what());
        }
        cr.samples = std::move(s);
        bundle.cases.push_back(std::move(cr));
    }
    return bundle;
}

const std::vector<ReferenceMean>& referenceMeans() {
    static const std::vector<ReferenceMean> kMeans = [] {
        std::vector<ReferenceMean> m;
        const double single[] = {2220.19, 1692.03, 1440.50, 1300.16, 1214.39, 1158.84, 1121.87, 1096.73, 1078.49};
        for (int t = 2; t <= 10; ++t) m.push_back({Variant::SingleLeo, singleLeoCaseId(t), single[t - 2]});
        m.push_back({Variant::MultiLeo, multiLeoCaseId(3, false), 187.68});
        m.push_back({Variant::MultiLeo, multiLeoCaseId(3, true), 96.25});
        m.push_back({Variant::MultiLeo, multiLeoCaseId(4, false), 53.75});
        m.push_back({Variant::MultiLeo, multiLeoCaseId(4, true), 33.64});
        const double hybridTimes[] = {2, 5, 7, 10};
        const double hybrid[] = {184.04, 118.37, 88.85, 60.88};
        for (int i = 0; i < 4; ++i) m.push_back({Variant::GnssLeo, gnssLeoCaseId(hybridTimes[i]), hybrid[i]});
        m.push_back({Variant::GnssLeo, std::string(kGnssOnlyCaseId), 11.93});
        return m;
    }();
    return kMeans;
}

CalibrationResult calibrateProcessingGain(const ScenarioConfig& base, const ChannelTables& tables, double lowDb,
                                          double highDb, double stepDb, unsigned workers) {
    if (!(stepDb > 0.0) || highDb < lowDb) throw std::invalid_argument("invalid calibration grid");

    CalibrationResult result;
    result.bestProcessingGainDb = lowDb;
    double bestError = std::numeric_limits<double>::infinity();
    const auto steps = static_cast<int>(std::floor((highDb - lowDb) / stepDb + 1e-9));

    for (int s = 0; s <= steps; ++s) {
        const double gain = lowDb + stepDb * s;
        double error = 0.0;
        for (Variant v : {Variant::SingleLeo, Variant::MultiLeo, Variant::GnssLeo}) {
            ScenarioConfig cfg = ScenarioConfig::defaults(v);
            cfg.seed = base.seed;
            cfg.ueDrops = base.ueDrops;
            cfg.scenarioClass = base.scenarioClass;
            cfg.losOnly = base.losOnly;
            cfg.links = base.links;
            cfg.links.processingGainDb = gain;
            const ResultsBundle bundle = run(cfg, tables, workers);
            for (const auto& ref : referenceMeans()) {
                if (ref.variant != v) continue;
                const CaseResult& cr = bundle.find(ref.caseId);
                const double ratio = cr.hasStats ? cr.stats.mean / ref.meanPeb : 1e6;
                error += std::log(ratio) * std::log(ratio);
            }
        }
        result.grid.push_back({gain, error});
        if (error < bestError) {
            bestError = error;
            result.bestProcessingGainDb = gain;
        }
    }
    return result;
}

}  // namespace ntnpos

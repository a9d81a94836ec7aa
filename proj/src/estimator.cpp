#include "ntnpos/estimator.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "ntnpos/errors.hpp"
#include "ntnpos/parallel.hpp"
#include "ntnpos/rng.hpp"

namespace ntnpos {

namespace {

constexpr std::uint64_t kStreamValidation = 100;

// Point at great-circle distance `distance` from `origin` along `bearing` (0 = north).
Geodetic destination(const Geodetic& origin, double distance, double bearing) {
    const Eigen::Matrix3d enu = enuRotation(origin);
    const double theta = distance / (kEarthRadius + origin.altitude);
    const EcefVector dir = std::cos(theta) * enu.row(2).transpose() +
                           std::sin(theta) * (std::cos(bearing) * enu.row(1).transpose() +
                                              std::sin(bearing) * enu.row(0).transpose());
    Geodetic g = ecefToGeodetic(EcefVector((kEarthRadius + origin.altitude) * dir));
    g.altitude = origin.altitude;
    return g;
}

struct Linearization {
    Eigen::MatrixXd whitenedJacobian;
    Eigen::VectorXd whitenedResidual;
};

Linearization linearize(std::span<const SyntheticMeasurements> measurements, const EcefVector& position) {
    Eigen::Index rows = 0;
    for (const auto& m : measurements) rows += m.observed.size();

    Linearization lin{Eigen::MatrixXd(rows, 2), Eigen::VectorXd(rows)};
    Eigen::Index at = 0;
    for (const auto& m : measurements) {
        const Eigen::Index n = m.observed.size();
        const Eigen::LLT<Eigen::MatrixXd> llt(m.set.covariance);
        if (llt.info() != Eigen::Success) throw std::invalid_argument("measurement covariance is not positive definite");
        const Eigen::MatrixXd j = jacobian(position, m.set);
        const Eigen::VectorXd r = m.observed - predictObservables(position, m.set);
        lin.whitenedJacobian.middleRows(at, n) = llt.matrixL().solve(j);
        lin.whitenedResidual.segment(at, n) = llt.matrixL().solve(r);
        at += n;
    }
    return lin;
}

SolveResult gaussNewton(std::span<const SyntheticMeasurements> measurements, const Geodetic& initialGuess,
                        const SolverOptions& options, double stepScale) {
    const double radius = kEarthRadius + initialGuess.altitude;
    EcefVector position = geodeticToEcef(initialGuess);

    SolveResult result;
    for (std::size_t it = 1; it <= options.maxIterations; ++it) {
        const Linearization lin = linearize(measurements, position);
        const Eigen::Matrix2d normal = lin.whitenedJacobian.transpose() * lin.whitenedJacobian;
        const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(normal);
        if (!(eig.eigenvalues()(0) >= options.degenerateThreshold)) {
            throw DegenerateGeometryError("normal equations are singular at the current estimate");
        }
        const Eigen::Vector2d step =
            stepScale * normal.ldlt().solve(lin.whitenedJacobian.transpose() * lin.whitenedResidual);
        if (!step.allFinite()) break;

        const Eigen::Matrix3d enu = enuRotation(ecefToGeodetic(position));
        position += step.x() * enu.row(0).transpose() + step.y() * enu.row(1).transpose();
        position *= radius / position.norm();

        result.iterations = it;
        if (step.norm() < options.stepTolerance) {
            result.converged = true;
            break;
        }
    }
    result.residualNorm = linearize(measurements, position).whitenedResidual.norm();
    result.estimate = ecefToGeodetic(position);
    result.estimate.altitude = initialGuess.altitude;
    return result;
}

}  // namespace

SyntheticMeasurements simulateMeasurements(const Geodetic& truth, const MeasurementSet& set, std::mt19937_64& rng,
                                           double noiseScale) {
    SyntheticMeasurements out;
    out.set = set;
    out.truth = geodeticToEcef(truth);
    out.observed = predictObservables(out.truth, set);

    const Eigen::Index n = out.observed.size();
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(rng);
    if (noiseScale == 0.0 || set.covariance.isZero(0.0)) return out;

    // symmetric square root tolerates semi-definite covariances
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(set.covariance);
    const Eigen::VectorXd roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    out.observed += noiseScale * (eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose() * z);
    return out;
}

SyntheticMeasurements simulateMeasurements(const Geodetic& truth, const MeasurementSet& set, std::uint64_t seed,
                                           double noiseScale) {
    auto rng = substream(seed, kStreamValidation, 0);
    return simulateMeasurements(truth, set, rng, noiseScale);
}

SolveResult solve(std::span<const SyntheticMeasurements> measurements, const Geodetic& initialGuess,
                  const SolverOptions& options) {
    if (measurements.empty()) throw std::invalid_argument("no measurements to solve");
    SolveResult full = gaussNewton(measurements, initialGuess, options, 1.0);
    if (full.converged) return full;
    SolveResult halved = gaussNewton(measurements, initialGuess, options, 0.5);
    return halved.converged ? halved : full;
}

Geodetic validationUe(const ScenarioConfig& config) {
    const Geodetic center{config.coverageCenter.latitude, config.coverageCenter.longitude, 0.0};
    double offset = config.validation.ueOffset;
    if (offset < 0.0) {
        offset = 0.5 * kEarthRadius * capCentralAngle(config.leoAltitude, 0.5 * config.links.pattern.beamwidth);
    }
    return destination(center, offset, config.validation.ueBearing);
}

std::vector<MeasurementSet> validationMeasurements(const ScenarioConfig& config, const ChannelTables& tables,
                                                   const Geodetic& ue, double snrBoostDb) {
    ScenarioConfig losConfig = config;
    losConfig.losOnly = true;
    LinkModel links(losConfig, tables);
    links.setSnrBoost(snrBoostDb);

    const Geodetic center{config.coverageCenter.latitude, config.coverageCenter.longitude, 0.0};
    const EcefVector aim = geodeticToEcef(center);
    const EcefVector ueEcef = geodeticToEcef(ue);
    const OrbitSpec orbit = orbitThrough(center, config.leoAltitude);
    const ChannelState los{};

    std::vector<MeasurementSet> sets;
    auto longestWindow = [&] {
        double t = config.rttMeasurementTime;
        if (!config.measurementTimes.empty()) {
            t = *std::max_element(config.measurementTimes.begin(), config.measurementTimes.end());
        }
        return makeVirtualAnchors(orbit, t, config.virtualAnchors);
    };

    switch (config.variant) {
    case Variant::SingleLeo:
        sets.push_back(links.servingRtt(ueEcef, longestWindow(), aim, los));
        break;
    case Variant::MultiLeo: {
        const AnchorSet grid = hexConstellation(center, config.hexLonGap, config.hexLatGap, config.leoAltitude);
        std::vector<double> sigmas;
        for (std::size_t s = 0; s < grid.size(); ++s) {
            sigmas.push_back(links.leoDownlinkSigma(ueEcef, grid[s].position, aim, s != grid.serving, los));
        }
        const SatelliteSelection sel = selectSatellites(ueEcef, grid, sigmas, config.validation.activeSatellites);
        const AnchorSet active = subset(grid, sel.indices);
        std::vector<double> activeSigmas;
        for (std::size_t idx : sel.indices) activeSigmas.push_back(sigmas[idx]);
        sets.push_back(MeasurementSet::tdoa(active, std::move(activeSigmas), active.serving));
        if (config.validation.rttAugmentation) {
            sets.push_back(links.servingRtt(ueEcef, makeVirtualAnchors(orbit, config.rttMeasurementTime,
                                                                       config.virtualAnchors),
                                            aim, los));
        }
        break;
    }
    case Variant::GnssLeo:
    case Variant::GnssOnly: {
        // fixed, well-spread sky geometry
        const double el[] = {deg2rad(70.0), deg2rad(45.0), deg2rad(50.0)};
        const double az[] = {deg2rad(20.0), deg2rad(140.0), deg2rad(260.0)};
        const std::size_t count = config.variant == Variant::GnssOnly ? 3 : 2;
        AnchorSet gnss;
        std::vector<double> sigmas;
        for (std::size_t g = 0; g < count; ++g) {
            gnss.anchors.push_back(gnssSatellite(ueEcef, el[g], az[g], config.gnssAltitude));
            sigmas.push_back(links.gnssSigma(ueEcef, gnss.anchors.back().position));
        }
        sets.push_back(MeasurementSet::tdoa(gnss, std::move(sigmas), 0));
        if (config.variant == Variant::GnssLeo) sets.push_back(links.servingRtt(ueEcef, longestWindow(), aim, los));
        break;
    }
    }
    return sets;
}

ValidationReport validate(const ScenarioConfig& config, const ChannelTables& tables, unsigned workers,
                          double noiseScale) {
    validateConfig(config);
    ValidationReport report;
    report.variant = std::string(toString(config.variant));
    report.ue = validationUe(config);
    report.trials = config.validation.trials;
    report.snrBoostDb = config.validation.snrBoostDb;

    const std::vector<MeasurementSet> sets =
        validationMeasurements(config, tables, report.ue, config.validation.snrBoostDb);
    const EcefVector truth = geodeticToEcef(report.ue);
    const PebResult bound = evaluate(truth, sets, config.degenerateThreshold);
    if (bound.degenerate) throw DegenerateGeometryError("validation geometry has a degenerate information matrix");
    report.peb = bound.peb;

    const Geodetic center{config.coverageCenter.latitude, config.coverageCenter.longitude, 0.0};
    report.initialGuess = center;
    if (config.variant == Variant::SingleLeo) {
        // one satellite cannot tell the two sides of its ground track apart; start on the UE's side
        const OrbitSpec orbit = orbitThrough(center, config.leoAltitude);
        const SatelliteState s = propagateCircularOrbit(orbit, 0.0);
        const EcefVector crossTrack = s.velocity.cross(s.position).normalized();
        const double side = (truth - geodeticToEcef(center)).dot(crossTrack) >= 0.0 ? 1.0 : -1.0;
        const double bearing = std::atan2(crossTrack.dot(enuRotation(center).row(0)),
                                          crossTrack.dot(enuRotation(center).row(1)));
        report.initialGuess = destination(center, 1000.0, side > 0 ? bearing : bearing + kPi);
    }

    struct Trial {
        bool solved{false};
        bool converged{false};
        Eigen::Vector2d error{Eigen::Vector2d::Zero()};
    };
    std::vector<Trial> trials(report.trials);
    const Eigen::Matrix3d enuAtTruth = enuRotation(report.ue);

    parallelFor(report.trials, workers, [&](std::size_t t) {
        auto rng = substream(config.seed, kStreamValidation, t);
        std::vector<SyntheticMeasurements> meas;
        for (const auto& s : sets) meas.push_back(simulateMeasurements(report.ue, s, rng, noiseScale));
        try {
            const SolveResult sr = solve(meas, report.initialGuess);
            const EcefVector d = geodeticToEcef(sr.estimate) - truth;
            trials[t].solved = true;
            trials[t].converged = sr.converged;
            trials[t].error = (enuAtTruth * d).head<2>();
        } catch (const DegenerateGeometryError&) {
            trials[t].solved = false;
        }
    });

    Eigen::Vector2d meanError = Eigen::Vector2d::Zero();
    double sumSq = 0.0;
    for (const Trial& t : trials) {
        if (!t.solved) {
            ++report.degenerate;
            continue;
        }
        if (!t.converged) continue;
        ++report.converged;
        sumSq += t.error.squaredNorm();
        meanError += t.error;
    }
    report.convergenceRate = static_cast<double>(report.converged) / static_cast<double>(report.trials);
    if (report.converged > 0) {
        const auto n = static_cast<double>(report.converged);
        report.rmse = std::sqrt(sumSq / n);
        report.meanErrorNorm = (meanError / n).norm();
    } else {
        report.rmse = std::numeric_limits<double>::quiet_NaN();
        report.meanErrorNorm = std::numeric_limits<double>::quiet_NaN();
    }
    report.ratio = report.rmse / report.peb;
    return report;
}

}  // namespace ntnpos

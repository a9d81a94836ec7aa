#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "ntnpos/channel.hpp"
#include "ntnpos/fisher.hpp"
#include "ntnpos/scenarios.hpp"

namespace ntnpos {

struct SyntheticMeasurements {
    MeasurementSet set;
    Eigen::VectorXd observed;  // ranges or range differences, m
    EcefVector truth{EcefVector::Zero()};
};

/// Observables at `truth` plus zero-mean Gaussian noise with the set covariance scaled by
/// `noiseScale` (0 gives the exact geometric values).
SyntheticMeasurements simulateMeasurements(const Geodetic& truth, const MeasurementSet& set, std::mt19937_64& rng,
                                           double noiseScale = 1.0);
SyntheticMeasurements simulateMeasurements(const Geodetic& truth, const MeasurementSet& set, std::uint64_t seed,
                                           double noiseScale = 1.0);

struct SolverOptions {
    double stepTolerance{1e-4};  // m
    std::size_t maxIterations{50};
    double degenerateThreshold{kDefaultDegenerateThreshold};
};

struct SolveResult {
    Geodetic estimate{};
    std::size_t iterations{0};
    bool converged{false};
    double residualNorm{0.0};  // whitened
};

/// Weighted Gauss-Newton over horizontal position at the altitude of `initialGuess`. Falls back to
/// one retry with halved steps when the full-step run fails to converge. Throws
/// DegenerateGeometryError when the normal equations are singular.
SolveResult solve(std::span<const SyntheticMeasurements> measurements, const Geodetic& initialGuess,
                  const SolverOptions& options = {});

struct ValidationReport {
    std::string variant;
    Geodetic ue{};
    Geodetic initialGuess{};
    std::size_t trials{0};
    std::size_t converged{0};
    std::size_t degenerate{0};
    double snrBoostDb{0.0};
    double rmse{0.0};
    double peb{0.0};
    double ratio{0.0};  // rmse / peb
    double convergenceRate{0.0};
    double meanErrorNorm{0.0};  // norm of the mean horizontal error vector (bias)
};

/// Measurement sets for the fixed validation UE of `config.variant`, links in LOS.
std::vector<MeasurementSet> validationMeasurements(const ScenarioConfig& config, const ChannelTables& tables,
                                                   const Geodetic& ue, double snrBoostDb);

/// Fixed validation UE: `validation.ueOffset` from the coverage center along `validation.ueBearing`.
Geodetic validationUe(const ScenarioConfig& config);

/// Monte Carlo simulate-and-solve trials against the bound at the fixed UE.
ValidationReport validate(const ScenarioConfig& config, const ChannelTables& tables, unsigned workers = 1,
                          double noiseScale = 1.0);

}  // namespace ntnpos

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ntnpos/geometry.hpp"

namespace ntnpos {

enum class MeasurementKind { Rtt, Tdoa };

/// Fisher information for the horizontal (east, north) UE position, m^-2.
using Fim = Eigen::Matrix2d;
/// Partials of the observables with respect to (east, north) displacement, one row per observable.
using Jacobian = Eigen::Matrix<double, Eigen::Dynamic, 2>;

inline constexpr double kDefaultDegenerateThreshold = 1e-12;  // m^-2, smallest FIM eigenvalue

/// Range-domain standard deviation of a single delay estimate, meters: the delay CRLB for a flat
/// spectrum of width `bandwidth` (RMS bandwidth B/sqrt(12)). Throws for non-positive linear SNR.
double toaRangeSigma(double snrDb, double bandwidth);

/// Range sigma of a round-trip measurement, range = c * RTT / 2.
double rttRangeSigma(double sigmaDownlink, double sigmaUplink);

/// Covariance of range differences against `reference`: sigma_i^2 + sigma_ref^2 on the diagonal,
/// sigma_ref^2 off the diagonal. Rows follow anchor order with the reference skipped.
Eigen::MatrixXd tdoaCovariance(std::span<const double> sigmas, std::size_t reference);

struct MeasurementSet {
    MeasurementKind kind{MeasurementKind::Rtt};
    AnchorSet anchors;
    std::size_t reference{0};
    std::vector<double> sigmaDownlink;
    std::vector<double> sigmaUplink;
    Eigen::MatrixXd covariance;

    /// Independent round-trip ranges, diagonal covariance.
    static MeasurementSet rtt(AnchorSet anchors, std::vector<double> sigmaDownlink, std::vector<double> sigmaUplink);
    /// Downlink range differences against `reference`.
    static MeasurementSet tdoa(AnchorSet anchors, std::vector<double> sigmaDownlink, std::size_t reference);

    std::size_t measurementCount() const;
};

/// Noise-free observables: ranges (rtt) or range differences to the reference (tdoa), meters.
Eigen::VectorXd predictObservables(const EcefVector& ue, const MeasurementSet& set);

/// Analytical Jacobian in the east-north frame at `ue`. Throws VisibilityError when an anchor is at
/// or below the UE horizon.
Jacobian jacobian(const EcefVector& ue, const MeasurementSet& set);

/// J^T R^-1 J. Throws std::invalid_argument when R is not positive definite or sizes disagree.
Fim fisherInformation(const Jacobian& j, const Eigen::MatrixXd& covariance);

struct PebResult {
    bool degenerate{false};
    double peb{0.0};              // m; NaN when degenerate
    double gdop{0.0};             // NaN when not computed or degenerate
    double conditionNumber{0.0};
};

/// sqrt(trace(F^-1)) unless the smallest eigenvalue falls below `threshold`.
PebResult peb(const Fim& f, double threshold = kDefaultDegenerateThreshold);

/// Geometric dilution: the PEB obtained with R scaled to unit mean variance.
double gdop(const Jacobian& j, const Eigen::MatrixXd& covariance, double threshold = kDefaultDegenerateThreshold);

/// Joint bound for independent measurement sets, with GDOP over the stacked system.
PebResult evaluate(const EcefVector& ue, std::span<const MeasurementSet> sets,
                   double threshold = kDefaultDegenerateThreshold);

struct SatelliteSelection {
    std::vector<std::size_t> indices;  // ascending, always contains the serving index
    double gdop{0.0};
};

/// Exhaustive search for the k-subset containing the serving anchor with the smallest GDOP for a
/// TDOA set referenced to the serving anchor. Ties go to the lexicographically smallest index set.
/// Throws std::invalid_argument if k exceeds the number of anchors or k < 2.
SatelliteSelection selectSatellites(const EcefVector& ue, const AnchorSet& visible,
                                    std::span<const double> sigmaDownlink, std::size_t k);

/// Restricts `set` to `indices` (ascending), keeping the serving anchor as serving.
AnchorSet subset(const AnchorSet& set, std::span<const std::size_t> indices);

}  // namespace ntnpos

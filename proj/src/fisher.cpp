#include "ntnpos/fisher.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

#include "ntnpos/constants.hpp"
#include "ntnpos/errors.hpp"

namespace ntnpos {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Tolerance under which two GDOP values count as a tie.
constexpr double kTieTolerance = 1e-9;

}  // namespace

double toaRangeSigma(double snrDb, double bandwidth) {
    if (!(bandwidth > 0.0)) throw std::invalid_argument("bandwidth must be positive");
    const double snr = std::pow(10.0, snrDb / 10.0);
    if (!(snr > 0.0) || !std::isfinite(snrDb)) {
        throw std::invalid_argument("linear SNR must be positive and finite");
    }
    return kSpeedOfLight * std::sqrt(3.0 / (2.0 * kPi * kPi * bandwidth * bandwidth * snr));
}

double rttRangeSigma(double sigmaDownlink, double sigmaUplink) {
    if (sigmaDownlink < 0.0 || sigmaUplink < 0.0) throw std::invalid_argument("range sigmas must be non-negative");
    return 0.5 * std::sqrt(sigmaDownlink * sigmaDownlink + sigmaUplink * sigmaUplink);
}

Eigen::MatrixXd tdoaCovariance(std::span<const double> sigmas, std::size_t reference) {
    const std::size_t n = sigmas.size();
    if (n < 2) throw std::invalid_argument("TDOA needs at least two anchors");
    if (reference >= n) throw std::invalid_argument("TDOA reference index out of range");

    const double refVar = sigmas[reference] * sigmas[reference];
    Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n - 1),
                                                    static_cast<Eigen::Index>(n - 1), refVar);
    Eigen::Index row = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i == reference) continue;
        cov(row, row) += sigmas[i] * sigmas[i];
        ++row;
    }
    return cov;
}

MeasurementSet MeasurementSet::rtt(AnchorSet anchors, std::vector<double> sigmaDownlink,
                                   std::vector<double> sigmaUplink) {
    const std::size_t n = anchors.size();
    if (n == 0) throw std::invalid_argument("RTT set needs at least one anchor");
    if (sigmaDownlink.size() != n || sigmaUplink.size() != n) {
        throw std::invalid_argument("RTT sigma vectors must match the anchor count");
    }
    MeasurementSet set;
    set.kind = MeasurementKind::Rtt;
    set.covariance = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double s = rttRangeSigma(sigmaDownlink[i], sigmaUplink[i]);
        set.covariance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = s * s;
    }
    set.anchors = std::move(anchors);
    set.reference = set.anchors.serving;
    set.sigmaDownlink = std::move(sigmaDownlink);
    set.sigmaUplink = std::move(sigmaUplink);
    return set;
}

MeasurementSet MeasurementSet::tdoa(AnchorSet anchors, std::vector<double> sigmaDownlink, std::size_t reference) {
    if (sigmaDownlink.size() != anchors.size()) {
        throw std::invalid_argument("TDOA sigma vector must match the anchor count");
    }
    MeasurementSet set;
    set.kind = MeasurementKind::Tdoa;
    set.covariance = tdoaCovariance(sigmaDownlink, reference);
    set.anchors = std::move(anchors);
    set.reference = reference;
    set.sigmaDownlink = std::move(sigmaDownlink);
    return set;
}

std::size_t MeasurementSet::measurementCount() const {
    return kind == MeasurementKind::Rtt ? anchors.size() : anchors.size() - 1;
}

Eigen::VectorXd predictObservables(const EcefVector& ue, const MeasurementSet& set) {
    const std::size_t n = set.anchors.size();
    Eigen::VectorXd ranges(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        ranges(static_cast<Eigen::Index>(i)) = (set.anchors[i].position - ue).norm();
    }
    if (set.kind == MeasurementKind::Rtt) return ranges;

    Eigen::VectorXd diffs(static_cast<Eigen::Index>(n - 1));
    Eigen::Index row = 0;
    const double refRange = ranges(static_cast<Eigen::Index>(set.reference));
    for (std::size_t i = 0; i < n; ++i) {
        if (i == set.reference) continue;
        diffs(row++) = ranges(static_cast<Eigen::Index>(i)) - refRange;
    }
    return diffs;
}

Jacobian jacobian(const EcefVector& ue, const MeasurementSet& set) {
    const Eigen::Matrix3d enu = enuRotation(ecefToGeodetic(ue));
    const std::size_t n = set.anchors.size();

    // d(range_i)/d(east, north) = -(unit vector UE->anchor_i) projected on east and north
    Eigen::Matrix<double, Eigen::Dynamic, 2> rangeRows(static_cast<Eigen::Index>(n), 2);
    for (std::size_t i = 0; i < n; ++i) {
        const EcefVector& sat = set.anchors[i].position;
        if (!(elevationAngle(ue, sat) > 0.0)) {
            throw VisibilityError("anchor " + std::to_string(i) + " is below the UE horizon");
        }
        const EcefVector u = (sat - ue).normalized();
        rangeRows.row(static_cast<Eigen::Index>(i)) << -u.dot(enu.row(0)), -u.dot(enu.row(1));
    }
    if (set.kind == MeasurementKind::Rtt) return rangeRows;

    Jacobian j(static_cast<Eigen::Index>(n - 1), 2);
    Eigen::Index row = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i == set.reference) continue;
        j.row(row++) = rangeRows.row(static_cast<Eigen::Index>(i)) -
                       rangeRows.row(static_cast<Eigen::Index>(set.reference));
    }
    return j;
}

Fim fisherInformation(const Jacobian& j, const Eigen::MatrixXd& covariance) {
    if (covariance.rows() != j.rows() || covariance.cols() != j.rows()) {
        throw std::invalid_argument("covariance size does not match the Jacobian");
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(covariance);
    if (llt.info() != Eigen::Success) throw std::invalid_argument("covariance is not positive definite");
    const Eigen::MatrixXd whitened = llt.matrixL().solve(j);
    Fim f = whitened.transpose() * whitened;
    return 0.5 * (f + f.transpose());
}

PebResult peb(const Fim& f, double threshold) {
    PebResult out;
    out.gdop = kNaN;
    const Eigen::SelfAdjointEigenSolver<Fim> eig(f);
    const double lmin = eig.eigenvalues()(0);
    const double lmax = eig.eigenvalues()(1);
    out.conditionNumber = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
    if (!(lmin >= threshold)) {
        out.degenerate = true;
        out.peb = kNaN;
        return out;
    }
    out.peb = std::sqrt(1.0 / lmin + 1.0 / lmax);
    return out;
}

double gdop(const Jacobian& j, const Eigen::MatrixXd& covariance, double threshold) {
    const double meanVar = covariance.diagonal().mean();
    const PebResult unit = peb(fisherInformation(j, covariance / meanVar), threshold);
    return unit.degenerate ? kNaN : unit.peb;
}

PebResult evaluate(const EcefVector& ue, std::span<const MeasurementSet> sets, double threshold) {
    if (sets.empty()) throw std::invalid_argument("no measurement sets to evaluate");
    Eigen::Index rows = 0;
    for (const auto& s : sets) rows += static_cast<Eigen::Index>(s.measurementCount());

    Jacobian j(rows, 2);
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(rows, rows);
    Eigen::Index at = 0;
    for (const auto& s : sets) {
        const Jacobian js = jacobian(ue, s);
        j.middleRows(at, js.rows()) = js;
        r.block(at, at, js.rows(), js.rows()) = s.covariance;
        at += js.rows();
    }
    PebResult out = peb(fisherInformation(j, r), threshold);
    if (!out.degenerate) out.gdop = gdop(j, r, threshold);
    return out;
}

AnchorSet subset(const AnchorSet& set, std::span<const std::size_t> indices) {
    AnchorSet out;
    out.serving = 0;
    for (std::size_t k = 0; k < indices.size(); ++k) {
        out.anchors.push_back(set.anchors.at(indices[k]));
        if (indices[k] == set.serving) out.serving = k;
    }
    return out;
}

SatelliteSelection selectSatellites(const EcefVector& ue, const AnchorSet& visible,
                                    std::span<const double> sigmaDownlink, std::size_t k) {
    const std::size_t n = visible.size();
    if (k > n) {
        throw std::invalid_argument("cannot select " + std::to_string(k) + " of " + std::to_string(n) + " satellites");
    }
    if (k < 2) throw std::invalid_argument("TDOA selection needs at least two satellites");
    if (sigmaDownlink.size() != n) throw std::invalid_argument("sigma vector must match the anchor count");

    auto score = [&](const std::vector<std::size_t>& idx) {
        std::vector<double> sig;
        for (std::size_t i : idx) sig.push_back(sigmaDownlink[i]);
        const AnchorSet chosen = subset(visible, idx);
        try {
            const MeasurementSet set = MeasurementSet::tdoa(chosen, std::move(sig), chosen.serving);
            const double g = gdop(jacobian(ue, set), set.covariance);
            return std::isnan(g) ? std::numeric_limits<double>::infinity() : g;
        } catch (const VisibilityError&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    SatelliteSelection best;
    best.gdop = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> current;

    // lexicographic enumeration of the k-subsets that contain the serving index
    std::function<void(std::size_t)> visit = [&](std::size_t next) {
        if (current.size() == k) {
            const bool hasServing = std::find(current.begin(), current.end(), visible.serving) != current.end();
            if (!hasServing) return;
            const double g = score(current);
            if (best.indices.empty() || g < best.gdop * (1.0 - kTieTolerance) ||
                (std::isinf(best.gdop) && !std::isinf(g))) {
                best.indices = current;
                best.gdop = g;
            }
            return;
        }
        for (std::size_t i = next; i < n; ++i) {
            if (n - i < k - current.size()) break;
            current.push_back(i);
            visit(i + 1);
            current.pop_back();
        }
    };
    visit(0);
    return best;
}

}  // namespace ntnpos

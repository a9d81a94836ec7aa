#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <limits>

#include <cmath>
#include <random>
#include <vector>

#include "ntnpos/errors.hpp"
#include "ntnpos/fisher.hpp"

using namespace ntnpos;

namespace {

SatelliteState satelliteAbove(const Geodetic& ue, double el, double az, double altitude) {
    const EcefVector p = geodeticToEcef(ue);
    const Eigen::Matrix3d enu = enuRotation(ue);
    const EcefVector dir = std::cos(el) * (std::sin(az) * enu.row(0).transpose() + std::cos(az) * enu.row(1).transpose()) +
                           std::sin(el) * enu.row(2).transpose();
    const double r = kEarthRadius + altitude;
    const double b = p.dot(dir);
    SatelliteState s;
    s.position = p + (-b + std::sqrt(b * b - (p.squaredNorm() - r * r))) * dir;
    return s;
}

AnchorSet randomAnchors(const Geodetic& ue, std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> el(deg2rad(15.0), deg2rad(89.0)), az(0.0, 2.0 * kPi),
        alt(500.0e3, 2.0e7);
    AnchorSet set;
    for (std::size_t i = 0; i < n; ++i) set.anchors.push_back(satelliteAbove(ue, el(rng), az(rng), alt(rng)));
    return set;
}

Jacobian centralDifference(const EcefVector& ue, const MeasurementSet& set, double h) {
    const Eigen::Matrix3d enu = enuRotation(ecefToGeodetic(ue));
    Jacobian j(static_cast<Eigen::Index>(set.measurementCount()), 2);
    for (int axis = 0; axis < 2; ++axis) {
        const EcefVector d = h * enu.row(axis).transpose();
        j.col(axis) = (predictObservables(ue + d, set) - predictObservables(ue - d, set)) / (2.0 * h);
    }
    return j;
}

}  // namespace

TEST(Fisher, ToaSigmaClosedForm) {
    EXPECT_NEAR(toaRangeSigma(10.0, 10.0e6), 3.70, 0.01);
    // sigma scales as 1/sqrt(snr) and 1/B
    EXPECT_NEAR(toaRangeSigma(30.0, 10.0e6), toaRangeSigma(10.0, 10.0e6) / 10.0, 1e-12);
    EXPECT_NEAR(toaRangeSigma(10.0, 20.0e6), toaRangeSigma(10.0, 10.0e6) / 2.0, 1e-12);
    EXPECT_THROW(toaRangeSigma(10.0, 0.0), std::invalid_argument);
    EXPECT_THROW(toaRangeSigma(-std::numeric_limits<double>::infinity(), 1.0e6), std::invalid_argument);
}

TEST(Fisher, RttSigmaCombinesLegs) {
    EXPECT_DOUBLE_EQ(rttRangeSigma(3.0, 4.0), 2.5);
    EXPECT_THROW(rttRangeSigma(-1.0, 1.0), std::invalid_argument);
}

TEST(Fisher, TdoaCovarianceStructure) {
    const std::vector<double> sig{1.0, 2.0, 3.0, 4.0};
    const Eigen::MatrixXd c = tdoaCovariance(sig, 1);
    Eigen::Matrix3d expected;
    expected << 5, 4, 4, 4, 13, 4, 4, 4, 20;
    EXPECT_TRUE(c.isApprox(expected));
    EXPECT_THROW(tdoaCovariance(std::vector<double>{1.0}, 0), std::invalid_argument);
    EXPECT_THROW(tdoaCovariance(sig, 4), std::invalid_argument);
}

TEST(Fisher, JacobianMatchesCentralDifferences) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> lat(-1.2, 1.2), lon(-kPi, kPi);
    std::uniform_int_distribution<int> count(3, 8);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const Geodetic ue{lat(rng), lon(rng), 0.0};
        const EcefVector p = geodeticToEcef(ue);
        const AnchorSet anchors = randomAnchors(ue, static_cast<std::size_t>(count(rng)), rng);
        const std::vector<double> sig(anchors.size(), 1.0);
        const MeasurementSet set = trial % 2 ? MeasurementSet::rtt(anchors, sig, sig)
                                             : MeasurementSet::tdoa(anchors, sig, trial % anchors.size());
        const Jacobian analytic = jacobian(p, set);
        const Jacobian numeric = centralDifference(p, set, 1.0);
        const double err = (analytic - numeric).norm() / analytic.norm();
        worst = std::max(worst, err);
    }
    EXPECT_LT(worst, 1e-6);
}

TEST(Fisher, JacobianRejectsAnchorBelowHorizon) {
    const Geodetic ue{};
    AnchorSet set;
    set.anchors.push_back(satelliteAbove(ue, deg2rad(45.0), 0.0, 600.0e3));
    SatelliteState below;
    below.position = -geodeticToEcef(ue);
    set.anchors.push_back(below);
    const std::vector<double> sig{1.0, 1.0};
    EXPECT_THROW(jacobian(geodeticToEcef(ue), MeasurementSet::rtt(set, sig, sig)), VisibilityError);
}

TEST(Fisher, PebOfDiagonalFim) {
    Fim f = Fim::Zero();
    f(0, 0) = 1.0 / 9.0;
    f(1, 1) = 1.0 / 16.0;
    const PebResult r = peb(f);
    EXPECT_FALSE(r.degenerate);
    EXPECT_NEAR(r.peb, 5.0, 1e-12);
    EXPECT_NEAR(r.conditionNumber, 16.0 / 9.0, 1e-12);

    Fim rank1 = Fim::Zero();
    rank1(0, 0) = 1.0;
    EXPECT_TRUE(peb(rank1).degenerate);
    EXPECT_TRUE(std::isnan(peb(rank1).peb));
}

TEST(Fisher, PebEqualsSqrtTraceInverse) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        Eigen::Matrix2d a;
        a << n(rng), n(rng), n(rng), n(rng);
        const Fim f = a * a.transpose() + 1e-3 * Fim::Identity();
        EXPECT_NEAR(peb(f).peb, std::sqrt(f.inverse().trace()), 1e-9 * std::sqrt(f.inverse().trace()));
    }
}

TEST(Fisher, FisherInformationMatchesDirectFormula) {
    std::mt19937_64 rng(8);
    const Geodetic ue{0.1, 0.2, 0.0};
    const AnchorSet anchors = randomAnchors(ue, 5, rng);
    const std::vector<double> sig{1.0, 2.0, 0.5, 3.0, 1.5};
    const MeasurementSet set = MeasurementSet::tdoa(anchors, sig, 2);
    const Jacobian j = jacobian(geodeticToEcef(ue), set);
    const Fim f = fisherInformation(j, set.covariance);
    const Fim direct = j.transpose() * set.covariance.inverse() * j;
    EXPECT_TRUE(f.isApprox(direct, 1e-10));
    EXPECT_THROW(fisherInformation(j, Eigen::MatrixXd::Identity(2, 2)), std::invalid_argument);
    EXPECT_THROW(fisherInformation(j, -Eigen::MatrixXd::Identity(4, 4)), std::invalid_argument);
}

TEST(Fisher, GdopIsScaleInvariant) {
    std::mt19937_64 rng(9);
    const Geodetic ue{};
    const AnchorSet anchors = randomAnchors(ue, 5, rng);
    const std::vector<double> sig{1.0, 2.0, 1.0, 3.0, 1.5};
    const MeasurementSet set = MeasurementSet::tdoa(anchors, sig, 0);
    const Jacobian j = jacobian(geodeticToEcef(ue), set);
    const double g = gdop(j, set.covariance);
    EXPECT_NEAR(gdop(j, 100.0 * set.covariance), g, 1e-9 * g);
    const double p1 = peb(fisherInformation(j, set.covariance)).peb;
    const double p2 = peb(fisherInformation(j, 4.0 * set.covariance)).peb;
    EXPECT_NEAR(p2, 2.0 * p1, 1e-9 * p1);
}

TEST(Fisher, AddingInformationNeverIncreasesPeb) {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_int_distribution<int> rank(1, 2);
    int checked = 0;
    for (int i = 0; i < 500; ++i) {
        Eigen::Matrix2d a;
        a << n(rng), n(rng), n(rng), n(rng);
        const Fim base = a * a.transpose() + 1e-6 * Fim::Identity();
        Eigen::Matrix<double, 2, Eigen::Dynamic> b(2, rank(rng));
        for (Eigen::Index c = 0; c < b.cols(); ++c) b.col(c) << n(rng), n(rng);
        const Fim added = base + b * b.transpose();
        const PebResult before = peb(base), after = peb(added);
        if (before.degenerate || after.degenerate) continue;
        EXPECT_LE(after.peb, before.peb * (1.0 + 1e-12));
        ++checked;
    }
    EXPECT_GT(checked, 450);
}

TEST(Fisher, EvaluateStacksIndependentSets) {
    std::mt19937_64 rng(10);
    const Geodetic ue{0.05, -0.02, 0.0};
    const EcefVector p = geodeticToEcef(ue);
    const AnchorSet a = randomAnchors(ue, 4, rng), b = randomAnchors(ue, 3, rng);
    const std::vector<double> sa{1.0, 2.0, 3.0, 4.0}, sb{0.5, 0.7, 0.9};
    const std::vector<MeasurementSet> sets{MeasurementSet::tdoa(a, sa, 0), MeasurementSet::rtt(b, sb, sb)};
    const Fim sum = fisherInformation(jacobian(p, sets[0]), sets[0].covariance) +
                    fisherInformation(jacobian(p, sets[1]), sets[1].covariance);
    const PebResult r = evaluate(p, sets);
    EXPECT_NEAR(r.peb, std::sqrt(sum.inverse().trace()), 1e-9 * r.peb);
    EXPECT_GT(r.gdop, 0.0);
}

TEST(Fisher, UeOnGroundTrackIsDegenerate) {
    const Geodetic center{};
    const OrbitSpec orbit = orbitThrough(center, 600.0e3);
    const AnchorSet anchors = makeVirtualAnchors(orbit, 10.0, 10);
    const std::vector<double> sig(10, 5.0);
    const MeasurementSet set = MeasurementSet::rtt(anchors, sig, sig);

    for (double latKm : {0.0, 5.0, -12.0}) {
        const Geodetic onTrack{latKm * 1e3 / kEarthRadius, 0.0, 0.0};
        const PebResult r = evaluate(geodeticToEcef(onTrack), std::span(&set, 1));
        EXPECT_TRUE(r.degenerate) << latKm;
        // the cross-track column is identically zero
        EXPECT_LT(jacobian(geodeticToEcef(onTrack), set).col(0).cwiseAbs().maxCoeff(), 1e-12);
    }
    const Geodetic offTrack{0.0, 10.0e3 / kEarthRadius, 0.0};
    EXPECT_FALSE(evaluate(geodeticToEcef(offTrack), std::span(&set, 1)).degenerate);
}

TEST(Fisher, SelectionMatchesBruteForce) {
    const Geodetic center{};
    const AnchorSet hex = hexConstellation(center, deg2rad(13.0), deg2rad(6.9), 780.0e3);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> off(-0.003, 0.003), sigma(1.0, 30.0);
    for (int trial = 0; trial < 30; ++trial) {
        const EcefVector ue = geodeticToEcef(Geodetic{off(rng), off(rng), 0.0});
        std::vector<double> sig;
        for (int i = 0; i < 7; ++i) sig.push_back(sigma(rng));
        for (std::size_t k : {3u, 4u}) {
            const SatelliteSelection sel = selectSatellites(ue, hex, sig, k);
            ASSERT_EQ(sel.indices.size(), k);
            EXPECT_TRUE(std::find(sel.indices.begin(), sel.indices.end(), hex.serving) != sel.indices.end());
            EXPECT_TRUE(std::is_sorted(sel.indices.begin(), sel.indices.end()));

            // brute force over bitmasks
            double best = std::numeric_limits<double>::infinity();
            for (unsigned mask = 0; mask < 128; ++mask) {
                if (std::popcount(mask) != static_cast<int>(k) || !(mask & 1u)) continue;
                std::vector<std::size_t> idx;
                std::vector<double> s;
                for (std::size_t i = 0; i < 7; ++i) {
                    if (mask & (1u << i)) {
                        idx.push_back(i);
                        s.push_back(sig[i]);
                    }
                }
                const AnchorSet sub = subset(hex, idx);
                const MeasurementSet set = MeasurementSet::tdoa(sub, s, sub.serving);
                best = std::min(best, gdop(jacobian(ue, set), set.covariance));
            }
            EXPECT_NEAR(sel.gdop, best, 1e-9 * best);
        }
    }
}

TEST(Fisher, SelectionTieBreaksLexicographically) {
    // UE at the center of a symmetric grid with equal sigmas: mirror subsets tie
    const AnchorSet hex = hexConstellation(Geodetic{}, deg2rad(13.0), deg2rad(6.9), 780.0e3);
    const std::vector<double> sig(7, 10.0);
    const EcefVector ue = geodeticToEcef(Geodetic{});
    const SatelliteSelection sel = selectSatellites(ue, hex, sig, 3);
    std::vector<std::size_t> mirrored = sel.indices;
    // mirror east-west: W<->E, SW<->SE, NW<->NE
    const std::size_t mirror[] = {0, 2, 1, 4, 3, 6, 5};
    for (auto& i : mirrored) i = mirror[i];
    std::sort(mirrored.begin(), mirrored.end());
    EXPECT_LE(sel.indices, mirrored);
}

TEST(Fisher, SelectionRejectsBadCounts) {
    const AnchorSet hex = hexConstellation(Geodetic{}, deg2rad(13.0), deg2rad(6.9), 780.0e3);
    const std::vector<double> sig(7, 1.0);
    const EcefVector ue = geodeticToEcef(Geodetic{});
    EXPECT_THROW(selectSatellites(ue, hex, sig, 8), std::invalid_argument);
    EXPECT_THROW(selectSatellites(ue, hex, sig, 1), std::invalid_argument);
    EXPECT_THROW(selectSatellites(ue, hex, std::vector<double>(3, 1.0), 3), std::invalid_argument);
}

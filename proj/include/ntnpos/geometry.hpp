#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "ntnpos/constants.hpp"

namespace ntnpos {

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

/// Earth-centered Earth-fixed position or velocity, meters (per second).
using EcefVector = Vector3<double>;
/// Local east-north-up vector, meters.
using EnuVector = Vector3<double>;

/// Latitude/longitude in radians, altitude in meters above the spherical Earth.
template <typename Scalar>
struct GeodeticT {
    Scalar latitude{0};
    Scalar longitude{0};
    Scalar altitude{0};
};
using Geodetic = GeodeticT<double>;

template <typename Scalar>
Vector3<Scalar> geodeticToEcef(const GeodeticT<Scalar>& g) {
    using std::cos;
    using std::sin;
    const Scalar r = Scalar(kEarthRadius) + g.altitude;
    return Vector3<Scalar>(r * cos(g.latitude) * cos(g.longitude),
                           r * cos(g.latitude) * sin(g.longitude),
                           r * sin(g.latitude));
}

template <typename Derived>
GeodeticT<typename Derived::Scalar> ecefToGeodetic(const Eigen::MatrixBase<Derived>& p) {
    using Scalar = typename Derived::Scalar;
    using std::atan2;
    using std::hypot;
    GeodeticT<Scalar> g;
    const Scalar horizontal = hypot(p.x(), p.y());
    g.latitude = atan2(p.z(), horizontal);
    g.longitude = atan2(p.y(), p.x());
    if (g.longitude >= Scalar(kPi)) g.longitude -= Scalar(2 * kPi);
    g.altitude = p.norm() - Scalar(kEarthRadius);
    return g;
}

/// Rows are the east, north and up unit vectors at `origin`, expressed in ECEF.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> enuRotation(const GeodeticT<Scalar>& origin) {
    using std::cos;
    using std::sin;
    const Scalar sl = sin(origin.latitude), cl = cos(origin.latitude);
    const Scalar so = sin(origin.longitude), co = cos(origin.longitude);
    Eigen::Matrix<Scalar, 3, 3> rot;
    rot << -so, co, Scalar(0),
           -sl * co, -sl * so, cl,
           cl * co, cl * so, sl;
    return rot;
}

template <typename Derived>
Vector3<typename Derived::Scalar> ecefToEnu(const Eigen::MatrixBase<Derived>& point,
                                            const GeodeticT<typename Derived::Scalar>& origin) {
    return enuRotation(origin) * (point - geodeticToEcef(origin));
}

template <typename Derived>
Vector3<typename Derived::Scalar> enuToEcef(const Eigen::MatrixBase<Derived>& enu,
                                            const GeodeticT<typename Derived::Scalar>& origin) {
    return enuRotation(origin).transpose() * enu + geodeticToEcef(origin);
}

/// Elevation of `sat` seen from `ue` in radians; negative below the local horizon.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar elevationAngle(const Eigen::MatrixBase<DerivedA>& ue,
                                         const Eigen::MatrixBase<DerivedB>& sat) {
    using std::asin;
    using Scalar = typename DerivedA::Scalar;
    const Vector3<Scalar> los = (sat - ue).normalized();
    const Scalar s = los.dot(ue.normalized());
    return asin(std::clamp(s, Scalar(-1), Scalar(1)));
}

/// Angle at `sat` between its boresight (towards `aim`) and the direction to `target`.
inline double offBoresightAngle(const EcefVector& sat, const EcefVector& aim, const EcefVector& target) {
    const EcefVector a = (aim - sat).normalized();
    const EcefVector b = (target - sat).normalized();
    return std::atan2(a.cross(b).norm(), a.dot(b));
}

/// Earth central angle of the ground cap seen within `offNadir` of nadir from `altitude`.
double capCentralAngle(double altitude, double offNadir);

struct OrbitSpec {
    double altitude{600.0e3};
    double inclination{kPi / 2};
    double ascendingNode{0.0};
    double argumentOfLatitude{0.0};  // at the scenario epoch
};

double orbitalRadius(const OrbitSpec& spec);
double angularRate(const OrbitSpec& spec);
double orbitalSpeed(const OrbitSpec& spec);
double orbitalPeriod(const OrbitSpec& spec);

enum class SatelliteRole { ServingLeo, NeighborLeo, Gnss };

struct SatelliteState {
    EcefVector position{EcefVector::Zero()};
    EcefVector velocity{EcefVector::Zero()};
    double time{0.0};
    SatelliteRole role{SatelliteRole::ServingLeo};
};

struct AnchorSet {
    std::vector<SatelliteState> anchors;
    std::size_t serving{0};

    std::size_t size() const { return anchors.size(); }
    const SatelliteState& operator[](std::size_t i) const { return anchors[i]; }
    const SatelliteState& servingState() const { return anchors.at(serving); }
};

SatelliteState propagateCircularOrbit(const OrbitSpec& spec, double t,
                                      SatelliteRole role = SatelliteRole::ServingLeo);

/// Orbit whose epoch sub-satellite point is `subPoint`, heading along `azimuth` (0 = north).
OrbitSpec orbitThrough(const Geodetic& subPoint, double altitude, double azimuth = 0.0);

/// `count` states spaced uniformly in time over [-T/2, +T/2] around the epoch, endpoints included.
/// The serving index points at the sample closest to the epoch.
AnchorSet makeVirtualAnchors(const OrbitSpec& spec, double measurementTime, std::size_t count);

/// Seven satellites: the center (serving, index 0), two same-row neighbors at +-lonGap and
/// four side-row neighbors at (+-latGap, +-lonGap/2).
AnchorSet hexConstellation(const Geodetic& center, double lonGap, double latGap, double altitude);

}  // namespace ntnpos

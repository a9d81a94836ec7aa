#include "ntnpos/geometry.hpp"

#include <stdexcept>

namespace ntnpos {

double capCentralAngle(double altitude, double offNadir) {
    const double ratio = (kEarthRadius + altitude) / kEarthRadius * std::sin(offNadir);
    if (ratio >= 1.0) {
        // beam edge grazes or misses the Earth: cap extends to the horizon
        return std::acos(kEarthRadius / (kEarthRadius + altitude));
    }
    return std::asin(ratio) - offNadir;
}

double orbitalRadius(const OrbitSpec& spec) { return kEarthRadius + spec.altitude; }

double angularRate(const OrbitSpec& spec) {
    const double r = orbitalRadius(spec);
    return std::sqrt(kEarthMu / (r * r * r));
}

double orbitalSpeed(const OrbitSpec& spec) { return std::sqrt(kEarthMu / orbitalRadius(spec)); }

double orbitalPeriod(const OrbitSpec& spec) { return 2.0 * kPi / angularRate(spec); }

namespace {

Eigen::Matrix3d perifocalToEcef(const OrbitSpec& spec) {
    return (Eigen::AngleAxisd(spec.ascendingNode, Eigen::Vector3d::UnitZ()) *
            Eigen::AngleAxisd(spec.inclination, Eigen::Vector3d::UnitX()))
        .toRotationMatrix();
}

}  // namespace

SatelliteState propagateCircularOrbit(const OrbitSpec& spec, double t, SatelliteRole role) {
    const double r = orbitalRadius(spec);
    const double w = angularRate(spec);
    const double u = spec.argumentOfLatitude + w * t;
    const Eigen::Matrix3d rot = perifocalToEcef(spec);

    SatelliteState s;
    s.position = rot * Eigen::Vector3d(r * std::cos(u), r * std::sin(u), 0.0);
    s.velocity = rot * Eigen::Vector3d(-r * w * std::sin(u), r * w * std::cos(u), 0.0);
    s.time = t;
    s.role = role;
    return s;
}

OrbitSpec orbitThrough(const Geodetic& subPoint, double altitude, double azimuth) {
    const Eigen::Matrix3d enu = enuRotation(subPoint);
    const Eigen::Vector3d up = enu.row(2).transpose();
    const Eigen::Vector3d heading =
        std::cos(azimuth) * enu.row(1).transpose() + std::sin(azimuth) * enu.row(0).transpose();
    const Eigen::Vector3d normal = up.cross(heading).normalized();

    OrbitSpec spec;
    spec.altitude = altitude;
    spec.inclination = std::acos(std::clamp(normal.z(), -1.0, 1.0));
    Eigen::Vector3d node = Eigen::Vector3d::UnitZ().cross(normal);
    if (node.norm() < 1e-12) {
        node = Eigen::Vector3d::UnitX();  // equatorial orbit: node direction is arbitrary
    }
    node.normalize();
    spec.ascendingNode = std::atan2(node.y(), node.x());
    spec.argumentOfLatitude = std::atan2(node.cross(up).dot(normal), node.dot(up));
    return spec;
}

AnchorSet makeVirtualAnchors(const OrbitSpec& spec, double measurementTime, std::size_t count) {
    if (!(measurementTime > 0.0)) throw std::invalid_argument("measurement time must be positive");
    if (count < 2) throw std::invalid_argument("at least two virtual anchors are required");

    AnchorSet set;
    set.anchors.reserve(count);
    const double step = measurementTime / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) {
        const double t = -0.5 * measurementTime + step * static_cast<double>(i);
        set.anchors.push_back(propagateCircularOrbit(spec, t, SatelliteRole::ServingLeo));
    }
    set.serving = count / 2;
    return set;
}

AnchorSet hexConstellation(const Geodetic& center, double lonGap, double latGap, double altitude) {
    if (!(lonGap > 0.0) || latGap < 0.0) throw std::invalid_argument("grid gaps must be positive");

    struct Offset {
        double dlat, dlon;
    };
    const Offset offsets[] = {
        {0.0, 0.0},
        {0.0, -lonGap},
        {0.0, lonGap},
        {-latGap, -0.5 * lonGap},
        {-latGap, 0.5 * lonGap},
        {latGap, -0.5 * lonGap},
        {latGap, 0.5 * lonGap},
    };

    AnchorSet set;
    set.serving = 0;
    for (std::size_t i = 0; i < std::size(offsets); ++i) {
        Geodetic sub{center.latitude + offsets[i].dlat, center.longitude + offsets[i].dlon, 0.0};
        const OrbitSpec orbit = orbitThrough(sub, altitude);
        set.anchors.push_back(propagateCircularOrbit(
            orbit, 0.0, i == 0 ? SatelliteRole::ServingLeo : SatelliteRole::NeighborLeo));
    }
    return set;
}

}  // namespace ntnpos

#pragma once

// Conversions between pixel offsets on a geo-registered raster and GPS
// coordinates, on a locally spherical earth, plus the camera/world sensor
// transform.
//
// Conventions used throughout the library:
//   - stored GPS values are degrees, all trigonometry is done in radians
//   - raster x grows east, raster y grows south (image convention)
//   - world axes are right-handed: X east, Y north, Z up

#include <array>
#include <cmath>

#include "uavnav/error.hpp"

namespace uavnav::geodesy {

inline constexpr double kMeanEarthRadiusM = 6371000.0;
inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double deg2rad(double d) { return d * (kPi / 180.0); }
inline constexpr double rad2deg(double r) { return r * (180.0 / kPi); }

struct GeoPoint {
    double lat = 0.0;  // degrees, [-90, 90]
    double lon = 0.0;  // degrees, [-180, 180]
};

struct PixelOffset {
    double dx = 0.0;  // pixels, east-positive
    double dy = 0.0;  // pixels, south-positive
};

// Ties a raster to the globe: `center` is the GPS location of the raster's
// center pixel, `gsd` the ground sampling distance in meters per pixel.
struct GeoAnchor {
    GeoPoint center;
    double gsd = 1.0;
    double earth_radius = kMeanEarthRadiusM;
};

namespace detail {
inline void check_anchor(const GeoAnchor& a) {
    if (!(a.gsd > 0.0))
        throw ValidationError("geodesy: gsd must be positive");
    if (std::abs(a.center.lat) >= 89.9)
        throw ValidationError("geodesy: anchor latitude too close to a pole");
}
}  // namespace detail

// GPS location of the pixel at `off` from the anchor's center pixel.
// Latitude decreases with dy (y grows south), longitude increases with dx.
inline GeoPoint pixel_offset_to_gps(const GeoAnchor& a, const PixelOffset& off) {
    detail::check_anchor(a);
    const double sy = a.gsd * off.dy / a.earth_radius;
    const double sx = a.gsd * off.dx / (a.earth_radius * std::cos(deg2rad(a.center.lat)));
    if (std::abs(sy) > 1.0 || std::abs(sx) > 1.0)
        throw ValidationError("geodesy: pixel offset outside the representable span");
    return GeoPoint{a.center.lat - rad2deg(std::asin(sy)),
                    a.center.lon + rad2deg(std::asin(sx))};
}

// Exact algebraic inverse of pixel_offset_to_gps.
inline PixelOffset gps_to_pixel_offset(const GeoAnchor& a, const GeoPoint& target) {
    detail::check_anchor(a);
    const double dlat = a.center.lat - target.lat;
    const double dlon = target.lon - a.center.lon;
    // sin() stops being invertible past a quarter turn from the anchor.
    if (std::abs(dlat) > 90.0 || std::abs(dlon) > 90.0)
        throw ValidationError("geodesy: target outside the representable span");
    return PixelOffset{
        a.earth_radius * std::cos(deg2rad(a.center.lat)) * std::sin(deg2rad(dlon)) / a.gsd,
        a.earth_radius * std::sin(deg2rad(dlat)) / a.gsd};
}

// ---------------------------------------------------------------------------
// Sensor model
// ---------------------------------------------------------------------------

// Row-major homogeneous 4x4 transform. Points use w=1, directions w=0.
struct Mat4 {
    std::array<std::array<double, 4>, 4> m{};

    static Mat4 identity() {
        Mat4 r;
        for (int i = 0; i < 4; ++i) r.m[i][i] = 1.0;
        return r;
    }

    friend Mat4 operator*(const Mat4& a, const Mat4& b) {
        Mat4 r;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                double s = 0.0;
                for (int k = 0; k < 4; ++k) s += a.m[i][k] * b.m[k][j];
                r.m[i][j] = s;
            }
        return r;
    }

    std::array<double, 4> operator*(const std::array<double, 4>& v) const {
        std::array<double, 4> r{};
        for (int i = 0; i < 4; ++i)
            for (int k = 0; k < 4; ++k) r[i] += m[i][k] * v[k];
        return r;
    }
};

inline Mat4 rotation_about_x(double angle_rad) {
    const double c = std::cos(angle_rad), s = std::sin(angle_rad);
    Mat4 r = Mat4::identity();
    r.m[1][1] = c; r.m[1][2] = -s;
    r.m[2][1] = s; r.m[2][2] = c;
    return r;
}

inline Mat4 rotation_about_y(double angle_rad) {
    const double c = std::cos(angle_rad), s = std::sin(angle_rad);
    Mat4 r = Mat4::identity();
    r.m[0][0] = c;  r.m[0][2] = s;
    r.m[2][0] = -s; r.m[2][2] = c;
    return r;
}

inline Mat4 rotation_about_z(double angle_rad) {
    const double c = std::cos(angle_rad), s = std::sin(angle_rad);
    Mat4 r = Mat4::identity();
    r.m[0][0] = c; r.m[0][1] = -s;
    r.m[1][0] = s; r.m[1][1] = c;
    return r;
}

inline Mat4 translation(double tx, double ty, double tz) {
    Mat4 r = Mat4::identity();
    r.m[0][3] = tx; r.m[1][3] = ty; r.m[2][3] = tz;
    return r;
}

// Vehicle pose feeding the sensor transform. Angles are radians; lat/lon are
// degrees like everywhere else.
struct SensorPose {
    double lat = 0.0;
    double lon = 0.0;
    double altitude = 0.0;         // meters above ground, > 0
    double elevation_angle = 0.0;  // camera, about its Y axis
    double scan_angle = 0.0;       // camera, about its Z axis
    double pitch = 0.0;            // vehicle, about Y
    double roll = 0.0;             // vehicle, about X
    double heading = 0.0;          // vehicle, about Z
};

// Vehicle east/north position in meters on the sine-projected local plane
// with origin at (0 deg, 0 deg); the same projection pixel offsets use.
inline std::array<double, 2> local_east_north(const GeoPoint& p,
                                              double earth_radius = kMeanEarthRadiusM) {
    return {earth_radius * std::cos(deg2rad(p.lat)) * std::sin(deg2rad(p.lon)),
            earth_radius * std::sin(deg2rad(p.lat))};
}

// Ordered product Gy * Gz * Ry * Rx * Rz * T mapping world coordinates into
// the camera frame. The translation carries the negated vehicle position so
// identity rotations leave a pure shift by (-x, -y, -altitude).
inline Mat4 sensor_model_matrix(const SensorPose& pose) {
    if (!(pose.altitude > 0.0))
        throw ValidationError("geodesy: sensor altitude must be positive");
    const auto en = local_east_north(GeoPoint{pose.lat, pose.lon});
    const Mat4 t = translation(-en[0], -en[1], -pose.altitude);
    return rotation_about_y(pose.elevation_angle) *
           rotation_about_z(pose.scan_angle) *
           rotation_about_y(pose.pitch) *
           rotation_about_x(pose.roll) *
           rotation_about_z(pose.heading) * t;
}

}  // namespace uavnav::geodesy

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "uavnav/geodesy.hpp"

using namespace uavnav;
using namespace uavnav::geodesy;

// Expected values below were computed ahead of time with a 40-digit
// evaluation of the lat/lon offset formulas (mpmath), then frozen here.
namespace {
constexpr double kLatDy1000Gsd0884 = -0.0007950002996576674726;  // deg
constexpr double kLonDx1000Lat45 = 0.0011243002059026241373;     // deg
}  // namespace

TEST_CASE("pixel_offset_to_gps: zero offset is the identity") {
    GeoAnchor a{GeoPoint{37.25, -5.5}, 0.0884};
    GeoPoint p = pixel_offset_to_gps(a, PixelOffset{0.0, 0.0});
    CHECK(p.lat == a.center.lat);
    CHECK(p.lon == a.center.lon);
}

TEST_CASE("pixel_offset_to_gps matches the high-precision oracle") {
    SECTION("1000 px due south at the equator") {
        GeoAnchor a{GeoPoint{0.0, 0.0}, 0.0884};
        GeoPoint p = pixel_offset_to_gps(a, PixelOffset{0.0, 1000.0});
        CHECK_THAT(p.lat, Catch::Matchers::WithinAbs(kLatDy1000Gsd0884, 1e-15));
        CHECK(p.lon == 0.0);
    }
    SECTION("1000 px due east at 45 degrees north") {
        GeoAnchor a{GeoPoint{45.0, 10.0}, 0.0884};
        GeoPoint p = pixel_offset_to_gps(a, PixelOffset{1000.0, 0.0});
        CHECK_THAT(p.lon - a.center.lon, Catch::Matchers::WithinAbs(kLonDx1000Lat45, 1e-15));
        CHECK(p.lat == a.center.lat);
    }
}

TEST_CASE("gps_to_pixel_offset: anchor center maps to (0,0)") {
    GeoAnchor a{GeoPoint{-12.0, 44.0}, 0.5};
    PixelOffset off = gps_to_pixel_offset(a, a.center);
    CHECK(off.dx == 0.0);
    CHECK(off.dy == 0.0);
}

TEST_CASE("gps_to_pixel_offset inverts the oracle point") {
    GeoAnchor a{GeoPoint{0.0, 0.0}, 0.0884};
    // 88.4 m due south of the anchor, per the frozen oracle latitude.
    GeoPoint target{kLatDy1000Gsd0884, 0.0};
    PixelOffset off = gps_to_pixel_offset(a, target);
    CHECK_THAT(off.dx, Catch::Matchers::WithinAbs(0.0, 1e-6));
    CHECK_THAT(off.dy, Catch::Matchers::WithinAbs(1000.0, 1e-6));
}

TEST_CASE("round trip pixel->GPS->pixel is identity within 1e-6 px") {
    std::mt19937 rng(20240617u);
    std::uniform_real_distribution<double> lat_d(-60.0, 60.0);
    std::uniform_real_distribution<double> lon_d(-179.0, 179.0);
    std::uniform_real_distribution<double> off_d(-4096.0, 4096.0);
    for (int i = 0; i < 1000; ++i) {
        GeoAnchor a{GeoPoint{lat_d(rng), lon_d(rng)}, 0.0884};
        PixelOffset in{off_d(rng), off_d(rng)};
        PixelOffset out = gps_to_pixel_offset(a, pixel_offset_to_gps(a, in));
        REQUIRE_THAT(out.dx, Catch::Matchers::WithinAbs(in.dx, 1e-6));
        REQUIRE_THAT(out.dy, Catch::Matchers::WithinAbs(in.dy, 1e-6));
    }
}

TEST_CASE("pixel_offset_to_gps is monotone in both axes") {
    GeoAnchor a{GeoPoint{48.3, 7.7}, 0.25};
    double prev_lat = pixel_offset_to_gps(a, PixelOffset{0.0, -2000.0}).lat;
    double prev_lon = pixel_offset_to_gps(a, PixelOffset{-2000.0, 0.0}).lon;
    for (double d = -1900.0; d <= 2000.0; d += 100.0) {
        double lat = pixel_offset_to_gps(a, PixelOffset{0.0, d}).lat;
        double lon = pixel_offset_to_gps(a, PixelOffset{d, 0.0}).lon;
        REQUIRE(lat < prev_lat);
        REQUIRE(lon > prev_lon);
        prev_lat = lat;
        prev_lon = lon;
    }
}

TEST_CASE("geodesy error paths") {
    CHECK_THROWS_AS(pixel_offset_to_gps(GeoAnchor{GeoPoint{89.95, 0.0}, 1.0}, PixelOffset{1, 1}),
                    ValidationError);
    // asin argument beyond [-1, 1]: offset farther than a quarter circumference.
    GeoAnchor a{GeoPoint{0.0, 0.0}, 1e6};
    CHECK_THROWS_AS(pixel_offset_to_gps(a, PixelOffset{0.0, 1e5}), ValidationError);
    CHECK_THROWS_AS(gps_to_pixel_offset(GeoAnchor{GeoPoint{0.0, 0.0}, 1.0}, GeoPoint{0.0, 120.0}),
                    ValidationError);
    CHECK_THROWS_AS(pixel_offset_to_gps(GeoAnchor{GeoPoint{0.0, 0.0}, 0.0}, PixelOffset{}),
                    ValidationError);
}

// ---------------------------------------------------------------------------
// Sensor model
// ---------------------------------------------------------------------------

namespace {

// Independent per-factor construction: plain 2D arrays multiplied by a
// hand-rolled loop, no Mat4 involved.
using Raw4 = std::array<std::array<double, 4>, 4>;

Raw4 raw_identity() {
    Raw4 r{};
    for (int i = 0; i < 4; ++i) r[i][i] = 1.0;
    return r;
}

Raw4 raw_mul(const Raw4& a, const Raw4& b) {
    Raw4 r{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k) r[i][j] += a[i][k] * b[k][j];
    return r;
}

Raw4 raw_rx(double t) {
    Raw4 r = raw_identity();
    r[1][1] = std::cos(t); r[1][2] = -std::sin(t);
    r[2][1] = std::sin(t); r[2][2] = std::cos(t);
    return r;
}
Raw4 raw_ry(double t) {
    Raw4 r = raw_identity();
    r[0][0] = std::cos(t);  r[0][2] = std::sin(t);
    r[2][0] = -std::sin(t); r[2][2] = std::cos(t);
    return r;
}
Raw4 raw_rz(double t) {
    Raw4 r = raw_identity();
    r[0][0] = std::cos(t); r[0][1] = -std::sin(t);
    r[1][0] = std::sin(t); r[1][1] = std::cos(t);
    return r;
}
Raw4 raw_translate(double x, double y, double z) {
    Raw4 r = raw_identity();
    r[0][3] = x; r[1][3] = y; r[2][3] = z;
    return r;
}

}  // namespace

TEST_CASE("sensor_model_matrix with all angles zero is a pure translation") {
    SensorPose pose;
    pose.lat = 0.0;
    pose.lon = 0.0;
    pose.altitude = 50.0;
    Mat4 m = sensor_model_matrix(pose);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK_THAT(m.m[i][j], Catch::Matchers::WithinAbs(i == j ? 1.0 : 0.0, 1e-15));
    CHECK(m.m[0][3] == 0.0);
    CHECK(m.m[1][3] == 0.0);
    CHECK(m.m[2][3] == -50.0);

    // Nonzero position: shift equals the negated local east/north coordinates.
    pose.lat = 28.600558;
    pose.lon = -81.197722;
    auto en = local_east_north(GeoPoint{pose.lat, pose.lon});
    Mat4 m2 = sensor_model_matrix(pose);
    CHECK_THAT(m2.m[0][3], Catch::Matchers::WithinAbs(-en[0], 1e-9));
    CHECK_THAT(m2.m[1][3], Catch::Matchers::WithinAbs(-en[1], 1e-9));
    CHECK(m2.m[2][3] == -50.0);
}

TEST_CASE("heading of pi/2 turns a unit east direction to north") {
    SensorPose pose;
    pose.altitude = 50.0;
    pose.heading = kPi / 2.0;
    Mat4 m = sensor_model_matrix(pose);
    auto v = m * std::array<double, 4>{1.0, 0.0, 0.0, 0.0};  // direction, w = 0
    CHECK_THAT(v[0], Catch::Matchers::WithinAbs(0.0, 1e-12));
    CHECK_THAT(v[1], Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK_THAT(v[2], Catch::Matchers::WithinAbs(0.0, 1e-12));
}

TEST_CASE("sensor_model_matrix equals the explicit per-factor product") {
    // Small lat/lon keeps translation entries O(100) so the element-wise
    // absolute bound is meaningful.
    SensorPose pose;
    pose.lat = 0.002;
    pose.lon = -0.0015;
    pose.altitude = 80.0;
    pose.elevation_angle = 0.31;
    pose.scan_angle = -0.73;
    pose.pitch = 0.05;
    pose.roll = -0.11;
    pose.heading = 2.4;

    auto en = local_east_north(GeoPoint{pose.lat, pose.lon});
    Raw4 expected = raw_mul(
        raw_ry(pose.elevation_angle),
        raw_mul(raw_rz(pose.scan_angle),
                raw_mul(raw_ry(pose.pitch),
                        raw_mul(raw_rx(pose.roll),
                                raw_mul(raw_rz(pose.heading),
                                        raw_translate(-en[0], -en[1], -pose.altitude))))));

    Mat4 got = sensor_model_matrix(pose);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            REQUIRE_THAT(got.m[i][j], Catch::Matchers::WithinAbs(expected[i][j], 1e-12));
}

TEST_CASE("every rotation factor is orthonormal") {
    std::mt19937 rng(7u);
    std::uniform_real_distribution<double> ang(-3.0, 3.0);
    for (int n = 0; n < 25; ++n) {
        for (Mat4 r : {rotation_about_x(ang(rng)), rotation_about_y(ang(rng)),
                       rotation_about_z(ang(rng))}) {
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    double dot = 0.0;
                    for (int k = 0; k < 3; ++k) dot += r.m[k][i] * r.m[k][j];
                    REQUIRE_THAT(dot, Catch::Matchers::WithinAbs(i == j ? 1.0 : 0.0, 1e-12));
                }
        }
    }
}

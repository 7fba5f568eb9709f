#pragma once

// Global weighted shortest path over a weight grid: A* with an admissible
// euclidean heuristic, waypoint simplification, and KML/TXT export.
//
// Planning is templated over a WeightGrid so the same search runs on the
// static map and on the dynamically inflated map.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <queue>
#include <string>
#include <unordered_set>
#include <vector>

#include "uavnav/error.hpp"
#include "uavnav/geodesy.hpp"
#include "uavnav/weightmap.hpp"

namespace uavnav::planner {

struct Cell {
    int x = 0;
    int y = 0;
    bool operator==(const Cell&) const = default;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline double euclid_px(const Cell& a, const Cell& b) {
    const double dx = a.x - b.x, dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

template <typename G>
concept WeightGrid = requires(const G& g, int x, int y) {
    { g.width() } -> std::convertible_to<int>;
    { g.height() } -> std::convertible_to<int>;
    { g.weight(x, y) } -> std::convertible_to<double>;
    { g.min_weight() } -> std::convertible_to<double>;
    { g.gsd() } -> std::convertible_to<double>;
};

// 8-connected route from start to goal. total_cost is the sum of step_cost
// over consecutive cells and total_length_m the polyline length in meters.
struct PixelPath {
    std::vector<Cell> cells;
    double total_cost = 0.0;
    double total_length_m = 0.0;
};

inline constexpr double kSqrt2 = 1.41421356237309504880;

// Segment cost between 8-neighbors: euclidean step length times the mean of
// the endpoint weights. The mean keeps edges symmetric, so path reversal
// never changes cost.
template <WeightGrid G>
double step_cost(const G& map, const Cell& from, const Cell& to) {
    const int dx = std::abs(from.x - to.x), dy = std::abs(from.y - to.y);
    if (dx > 1 || dy > 1 || (dx == 0 && dy == 0))
        throw ValidationError("step_cost: cells are not 8-neighbors");
    const double dist = (dx + dy == 2) ? kSqrt2 : 1.0;
    return dist * 0.5 * (map.weight(from.x, from.y) + map.weight(to.x, to.y));
}

namespace detail {

struct OpenEntry {
    double f;
    double h;
    std::int32_t idx;
};

// Min-heap order: lower f first; among equal f the lower h; then row-major
// cell index. Fully deterministic expansions.
struct OpenOrder {
    bool operator()(const OpenEntry& a, const OpenEntry& b) const {
        if (a.f != b.f) return a.f > b.f;
        if (a.h != b.h) return a.h > b.h;
        return a.idx > b.idx;
    }
};

inline constexpr std::array<std::array<int, 2>, 8> kNeighbors{
    {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};

}  // namespace detail

// A* over the 8-connected grid. h(n) = euclid(n, goal) * min_weight is
// admissible and consistent under the mean-endpoint edge rule, so the first
// expansion of the goal carries the optimal cost.
template <WeightGrid G>
PixelPath plan_path(const G& map, const Cell& start, const Cell& goal) {
    const int w = map.width(), h = map.height();
    auto inside = [&](const Cell& c) {
        return c.x >= 0 && c.y >= 0 && c.x < w && c.y < h;
    };
    if (!inside(start) || !inside(goal))
        throw ValidationError("plan_path: endpoint outside the raster");

    PixelPath path;
    if (start == goal) {
        path.cells = {start};
        return path;
    }

    const double h_scale = map.min_weight();
    const Cell goal_c = goal;
    auto heuristic = [&](int x, int y) {
        return euclid_px(Cell{x, y}, goal_c) * h_scale;
    };

    const std::size_t n = static_cast<std::size_t>(w) * h;
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> g(n, kInf);
    std::vector<std::int32_t> parent(n, -1);
    std::vector<std::uint8_t> closed(n, 0);
    std::priority_queue<detail::OpenEntry, std::vector<detail::OpenEntry>,
                        detail::OpenOrder>
        open;

    const std::int32_t start_i = start.y * w + start.x;
    const std::int32_t goal_i = goal.y * w + goal.x;
    g[start_i] = 0.0;
    open.push({heuristic(start.x, start.y), heuristic(start.x, start.y), start_i});

    while (!open.empty()) {
        const auto top = open.top();
        open.pop();
        if (closed[top.idx]) continue;  // stale heap entry
        closed[top.idx] = 1;
        if (top.idx == goal_i) break;

        const int cx = top.idx % w, cy = top.idx / w;
        const double wc = map.weight(cx, cy);
        for (const auto& [ox, oy] : detail::kNeighbors) {
            const int nx = cx + ox, ny = cy + oy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            const std::int32_t ni = ny * w + nx;
            if (closed[ni]) continue;
            const double dist = (ox != 0 && oy != 0) ? kSqrt2 : 1.0;
            const double tentative =
                g[top.idx] + dist * 0.5 * (wc + map.weight(nx, ny));
            if (tentative < g[ni]) {
                g[ni] = tentative;
                parent[ni] = top.idx;
                const double hn = heuristic(nx, ny);
                open.push({tentative + hn, hn, ni});
            }
        }
    }

    if (!closed[goal_i])
        throw ValidationError("plan_path: goal unreachable");  // guarded; cannot occur

    std::vector<Cell> rev;
    for (std::int32_t i = goal_i; i != -1; i = parent[i])
        rev.push_back(Cell{i % w, i / w});
    path.cells.assign(rev.rbegin(), rev.rend());
    path.total_cost = g[goal_i];
    for (std::size_t i = 1; i < path.cells.size(); ++i)
        path.total_length_m += euclid_px(path.cells[i - 1], path.cells[i]) * map.gsd();
    return path;
}

// Recomputes the cost of a path, validating the PixelPath invariants.
template <WeightGrid G>
double path_cost(const G& map, const PixelPath& path) {
    if (path.cells.empty()) throw ValidationError("path_cost: empty path");
    std::unordered_set<std::int64_t> seen;
    for (const Cell& c : path.cells) {
        if (c.x < 0 || c.y < 0 || c.x >= map.width() || c.y >= map.height())
            throw ValidationError("path_cost: cell outside the raster");
        if (!seen.insert(static_cast<std::int64_t>(c.y) * map.width() + c.x).second)
            throw ValidationError("path_cost: repeated cell");
    }
    double total = 0.0;
    for (std::size_t i = 1; i < path.cells.size(); ++i)
        total += step_cost(map, path.cells[i - 1], path.cells[i]);
    return total;
}

// ---------------------------------------------------------------------------
// Polyline geometry along a path
// ---------------------------------------------------------------------------

inline double path_length_px(const PixelPath& path) {
    double len = 0.0;
    for (std::size_t i = 1; i < path.cells.size(); ++i)
        len += euclid_px(path.cells[i - 1], path.cells[i]);
    return len;
}

// Point at arc length s (pixels) along the cell-center polyline; clamped to
// the endpoints.
inline Vec2 point_at_arc(const PixelPath& path, double s) {
    if (path.cells.empty()) throw ValidationError("point_at_arc: empty path");
    if (s <= 0.0)
        return Vec2{double(path.cells.front().x), double(path.cells.front().y)};
    for (std::size_t i = 1; i < path.cells.size(); ++i) {
        const double seg = euclid_px(path.cells[i - 1], path.cells[i]);
        if (s <= seg) {
            const double t = seg > 0.0 ? s / seg : 0.0;
            return Vec2{path.cells[i - 1].x + t * (path.cells[i].x - path.cells[i - 1].x),
                        path.cells[i - 1].y + t * (path.cells[i].y - path.cells[i - 1].y)};
        }
        s -= seg;
    }
    return Vec2{double(path.cells.back().x), double(path.cells.back().y)};
}

// Direction of travel at arc length s, as the angle a with unit direction
// (sin a, cos a) in image coordinates (the same convention object bearings
// use).
inline double heading_at_arc(const PixelPath& path, double s) {
    if (path.cells.size() < 2) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 1; i < path.cells.size(); ++i) {
        const double seg = euclid_px(path.cells[i - 1], path.cells[i]);
        if (s <= acc + seg || i + 1 == path.cells.size()) {
            const double dx = path.cells[i].x - path.cells[i - 1].x;
            const double dy = path.cells[i].y - path.cells[i - 1].y;
            double a = std::atan2(dx, dy);
            if (a < 0.0) a += 2.0 * geodesy::kPi;
            return a;
        }
        acc += seg;
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Waypoint simplification (Douglas-Peucker)
// ---------------------------------------------------------------------------

namespace detail {

inline double point_segment_distance_px(const Cell& p, const Cell& a, const Cell& b) {
    const double abx = b.x - a.x, aby = b.y - a.y;
    const double apx = p.x - a.x, apy = p.y - a.y;
    const double len2 = abx * abx + aby * aby;
    double t = len2 > 0.0 ? (apx * abx + apy * aby) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = apx - t * abx, dy = apy - t * aby;
    return std::sqrt(dx * dx + dy * dy);
}

inline void douglas_peucker(const std::vector<Cell>& pts, std::size_t lo,
                            std::size_t hi, double tol, std::vector<bool>& keep) {
    if (hi <= lo + 1) return;
    double worst = -1.0;
    std::size_t split = lo;
    for (std::size_t i = lo + 1; i < hi; ++i) {
        const double d = point_segment_distance_px(pts[i], pts[lo], pts[hi]);
        if (d > worst) {
            worst = d;
            split = i;
        }
    }
    if (worst > tol) {
        keep[split] = true;
        douglas_peucker(pts, lo, split, tol, keep);
        douglas_peucker(pts, split, hi, tol, keep);
    }
}

}  // namespace detail

// Polyline simplification: endpoints preserved, every dropped cell stays
// within tolerance_px of the simplified polyline.
inline std::vector<Cell> simplify_to_waypoints(const PixelPath& path,
                                               double tolerance_px) {
    if (tolerance_px < 0.0) throw ValidationError("simplify: negative tolerance");
    const auto& pts = path.cells;
    if (pts.size() <= 2) return pts;
    std::vector<bool> keep(pts.size(), false);
    keep.front() = keep.back() = true;
    detail::douglas_peucker(pts, 0, pts.size() - 1, tolerance_px, keep);
    std::vector<Cell> out;
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (keep[i]) out.push_back(pts[i]);
    return out;
}

// ---------------------------------------------------------------------------
// Waypoint export
// ---------------------------------------------------------------------------

struct Waypoint {
    double lat = 0.0;
    double lon = 0.0;
    double altitude_m = 0.0;
    double velocity_mps = 0.0;
};

struct WaypointList {
    std::vector<Waypoint> waypoints;
    double acceptance_radius_m = 5.0;
};

enum class WaypointFormat { Kml, Txt };

inline constexpr double kDefaultMissionAltitudeM = 50.0;
inline constexpr double kMaxVelocityMps = 15.0;

inline WaypointList make_waypoint_list(const std::vector<Cell>& cells,
                                       const mapbuild::WeightMap& map,
                                       double altitude_m, double velocity_mps) {
    if (cells.empty()) throw ValidationError("waypoints: empty cell list");
    if (!(altitude_m > 0.0)) throw ValidationError("waypoints: altitude must be positive");
    if (!(velocity_mps > 0.0) || velocity_mps > kMaxVelocityMps)
        throw ValidationError("waypoints: velocity must be in (0, 15] m/s");
    WaypointList list;
    list.waypoints.reserve(cells.size());
    for (const Cell& c : cells) {
        const auto gps = map.cell_to_gps(c.x, c.y);
        list.waypoints.push_back(Waypoint{gps.lat, gps.lon, altitude_m, velocity_mps});
    }
    return list;
}

// QGC WPL 110 rows: index, current, frame(3), command(16), p1..p4, lat, lon,
// alt, autocontinue.
inline std::string export_txt(const WaypointList& list) {
    std::string out = "QGC WPL 110\n";
    char row[256];
    for (std::size_t i = 0; i < list.waypoints.size(); ++i) {
        const Waypoint& wp = list.waypoints[i];
        std::snprintf(row, sizeof(row),
                      "%zu\t%d\t3\t16\t0\t0\t0\t0\t%.9f\t%.9f\t%.6f\t1\n", i,
                      i == 0 ? 1 : 0, wp.lat, wp.lon, wp.altitude_m);
        out += row;
    }
    return out;
}

inline std::string export_kml(const WaypointList& list) {
    std::string out =
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<kml xmlns=\"http://www.opengis.net/kml/2.2\">\n"
        "  <Document>\n"
        "    <name>uavnav mission</name>\n"
        "    <Placemark>\n"
        "      <name>route</name>\n"
        "      <LineString>\n"
        "        <altitudeMode>relativeToGround</altitudeMode>\n"
        "        <coordinates>\n";
    char buf[160];
    for (const Waypoint& wp : list.waypoints) {
        std::snprintf(buf, sizeof(buf), "          %.9f,%.9f,%.3f\n", wp.lon, wp.lat,
                      wp.altitude_m);
        out += buf;
    }
    out +=
        "        </coordinates>\n"
        "      </LineString>\n"
        "    </Placemark>\n";
    for (std::size_t i = 0; i < list.waypoints.size(); ++i) {
        const Waypoint& wp = list.waypoints[i];
        std::snprintf(buf, sizeof(buf),
                      "    <Placemark>\n      <name>WP%zu</name>\n"
                      "      <description>fly-to at %.1f m/s, accept within %.1f m"
                      "</description>\n",
                      i, wp.velocity_mps, list.acceptance_radius_m);
        out += buf;
        std::snprintf(buf, sizeof(buf),
                      "      <Point><coordinates>%.9f,%.9f,%.3f</coordinates></Point>\n"
                      "    </Placemark>\n",
                      wp.lon, wp.lat, wp.altitude_m);
        out += buf;
    }
    out += "  </Document>\n</kml>\n";
    return out;
}

inline std::string export_waypoints(const std::vector<Cell>& cells,
                                    const mapbuild::WeightMap& map, double altitude_m,
                                    double velocity_mps, WaypointFormat format) {
    const WaypointList list = make_waypoint_list(cells, map, altitude_m, velocity_mps);
    return format == WaypointFormat::Kml ? export_kml(list) : export_txt(list);
}

// Parsers for the two formats above; used for round-trip checks and by the
// CLI to re-read its own outputs.
inline WaypointList parse_txt(const std::string& content) {
    WaypointList list;
    std::size_t pos = content.find('\n');
    if (pos == std::string::npos || content.substr(0, pos) != "QGC WPL 110")
        throw IoError("waypoint txt: missing 'QGC WPL 110' header");
    ++pos;
    while (pos < content.size()) {
        std::size_t eol = content.find('\n', pos);
        if (eol == std::string::npos) eol = content.size();
        const std::string line = content.substr(pos, eol - pos);
        pos = eol + 1;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t p = 0;
        while (p <= line.size()) {
            const std::size_t tab = line.find('\t', p);
            fields.push_back(line.substr(p, tab == std::string::npos ? std::string::npos
                                                                     : tab - p));
            if (tab == std::string::npos) break;
            p = tab + 1;
        }
        if (fields.size() != 12) throw IoError("waypoint txt: malformed row");
        try {
            Waypoint wp;
            wp.lat = std::stod(fields[8]);
            wp.lon = std::stod(fields[9]);
            wp.altitude_m = std::stod(fields[10]);
            list.waypoints.push_back(wp);
        } catch (const std::exception&) {
            throw IoError("waypoint txt: non-numeric field");
        }
    }
    return list;
}

inline WaypointList parse_kml(const std::string& content) {
    const std::size_t open = content.find("<coordinates>");
    const std::size_t close = content.find("</coordinates>");
    if (open == std::string::npos || close == std::string::npos || close < open)
        throw IoError("kml: no <coordinates> block");
    const std::string block = content.substr(open + 13, close - open - 13);
    WaypointList list;
    std::size_t pos = 0;
    while (pos < block.size()) {
        while (pos < block.size() && std::isspace(block[pos])) ++pos;
        if (pos >= block.size()) break;
        std::size_t end = pos;
        while (end < block.size() && !std::isspace(block[end])) ++end;
        const std::string triple = block.substr(pos, end - pos);
        pos = end;
        const std::size_t c1 = triple.find(','), c2 = triple.rfind(',');
        if (c1 == std::string::npos || c2 == c1) throw IoError("kml: malformed triple");
        try {
            Waypoint wp;
            wp.lon = std::stod(triple.substr(0, c1));
            wp.lat = std::stod(triple.substr(c1 + 1, c2 - c1 - 1));
            wp.altitude_m = std::stod(triple.substr(c2 + 1));
            list.waypoints.push_back(wp);
        } catch (const std::exception&) {
            throw IoError("kml: non-numeric coordinate");
        }
    }
    if (list.waypoints.empty()) throw IoError("kml: empty coordinate list");
    return list;
}

}  // namespace uavnav::planner

#pragma once

#include "uavnav/planner.hpp"

namespace uavnav::simulator {

// Simulated vehicle state. path_arc_px is the real-valued progress along the
// current route polyline, measured as arc length in pixels. Heading uses the
// image-frame angle convention: direction of travel is (sin a, cos a).
struct UavState {
    planner::Vec2 position_px;
    double path_arc_px = 0.0;
    double velocity_mps = 0.0;  // (0, 15]
    double heading_rad = 0.0;
};

inline constexpr double kVelocityCapMps = 15.0;

inline void validate(const UavState& s) {
    if (!(s.velocity_mps > 0.0) || s.velocity_mps > kVelocityCapMps)
        throw ValidationError("uav state: velocity must be in (0, 15] m/s");
}

}  // namespace uavnav::simulator

#pragma once

// Mini-gantry surrogate: two sills on rails along y, two legs and a top
// girder. Leg A is welded to its sill; leg B sits on a pin about x, so
// sill B rocks like a balance beam. Lengths in metres.

#include "box_mesh.hpp"

namespace feaudit::tools {

inline Mesh mini_gantry_mesh(double h = 0.05) {
    const std::vector<Block> blocks{
        {{0.0, 0.0, 0.0}, {0.2, 1.0, 0.1}, "traveling_system"},
        {{1.4, 0.0, 0.0}, {1.6, 1.0, 0.1}, "traveling_system"},
        {{0.0, 0.4, 0.1}, {0.2, 0.6, 1.0}, "gantry"},
        {{1.4, 0.4, 0.15}, {1.6, 0.6, 1.0}, "gantry"},
        {{0.0, 0.4, 1.0}, {1.6, 0.6, 1.2}, "gantry"},
    };
    const std::vector<NodeSetSpec> sets{
        {"wheel_a1", in_box({0.0, 0.0, 0.0}, {0.2, 0.1, 0.0})},
        {"wheel_a2", in_box({0.0, 0.9, 0.0}, {0.2, 1.0, 0.0})},
        {"wheel_b1", in_box({1.4, 0.0, 0.0}, {1.6, 0.1, 0.0})},
        {"wheel_b2", in_box({1.4, 0.9, 0.0}, {1.6, 1.0, 0.0})},
        {"leg_b_foot", in_box({1.4, 0.4, 0.15}, {1.6, 0.6, 0.15})},
        {"sill_b_seat", in_box({1.4, 0.4, 0.1}, {1.6, 0.6, 0.1})},
        {"slew_flange", in_box({0.6, 0.4, 1.2}, {1.0, 0.6, 1.2})},
        {"girder_side", in_box({0.0, 0.4, 1.0}, {1.6, 0.4, 1.2})},
        {"sill_ends", [](const Vec3& p) {
             return std::abs(p.y()) < 1e-9 && p.z() < 0.1 + 1e-9;
         }},
    };
    return box_mesh(blocks, h, sets);
}

}  // namespace feaudit::tools

#pragma once

// Superstructure statics: resultant wrench at the slew-bearing centre from a
// mass layout and the boom pose.
//
// Conventions: z up, right-handed axes, angles in degrees. Slew psi rotates
// the whole superstructure about +z; luff phi raises the boom tip for
// phi > 0. The wrench is the load the superstructure puts on the
// undercarriage, with moments taken about the slew-bearing centre.

#include "feaudit/core.hpp"
#include "feaudit/loads.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

namespace feaudit {

/// Point fixed on the slewing platform, relative to the slew-axis origin at psi = 0.
struct PlatformPoint {
    Vec3 position = Vec3::Zero();
};

/// Point on the boom: `lever` along the boom axis from the luff pivot
/// (negative for the counterweight side), `offset` vertical height of the pivot.
struct BoomPoint {
    double lever = 0.0;
    double offset = 0.0;
};

using Attachment = std::variant<PlatformPoint, BoomPoint>;

struct MassItem {
    std::string name;
    double mass = 0.0;  // [kg]
    Attachment attachment = PlatformPoint{};
};

/// Extra force (digging, material) given in the slewing frame: x along the
/// boom azimuth, y lateral, z up.
struct PointLoad {
    std::string name;
    Vec3 force = Vec3::Zero();  // [N]
    Attachment attachment = BoomPoint{};
};

struct PoseAngles {
    double psi = 0.0;  // slew [deg]
    double phi = 0.0;  // luff [deg]
};

struct PoseEnvelope {
    double psi_min = -110.0, psi_max = 110.0;
    double phi_min = -9.0, phi_max = 9.0;

    bool contains(const PoseAngles& p) const {
        return p.psi >= psi_min && p.psi <= psi_max && p.phi >= phi_min && p.phi <= phi_max;
    }
};

struct SuperstructureLayout {
    std::vector<MassItem> items;
    std::vector<PointLoad> point_loads;
    Vec3 origin = Vec3::Zero();              // slew-bearing centre
    Vec3 boom_direction = Vec3::UnitX();     // horizontal boom azimuth at psi = 0
    PoseEnvelope envelope;
};

inline double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

/// Position relative to the slew-bearing centre for a given pose.
inline Vec3 attachment_position(const SuperstructureLayout& layout, const Attachment& at, const PoseAngles& pose) {
    const double base = std::atan2(layout.boom_direction.y(), layout.boom_direction.x());
    const double az = base + deg2rad(pose.psi);
    if (const auto* b = std::get_if<BoomPoint>(&at)) {
        const double phi = deg2rad(pose.phi);
        const double horizontal = b->lever * std::cos(phi);
        return {horizontal * std::cos(az), horizontal * std::sin(az), b->offset + b->lever * std::sin(phi)};
    }
    const Vec3& p = std::get<PlatformPoint>(at).position;
    const double c = std::cos(deg2rad(pose.psi)), s = std::sin(deg2rad(pose.psi));
    return {c * p.x() - s * p.y(), s * p.x() + c * p.y(), p.z()};
}

inline InterfaceWrench compute_wrench(const SuperstructureLayout& layout, const PoseAngles& pose,
                                      const Vec3& g = Vec3(0.0, 0.0, -9.81)) {
    if (layout.items.empty() && layout.point_loads.empty())
        throw Error(ErrorCode::EmptyLayout, "superstructure layout has no masses or loads");
    InterfaceWrench w;
    for (const auto& item : layout.items) {
        if (!(item.mass > 0.0) || !std::isfinite(item.mass))
            throw Error(ErrorCode::InvalidModel, "mass item '" + item.name + "' needs a positive mass");
        const Vec3 f = item.mass * g;
        w.force += f;
        w.moment += attachment_position(layout, item.attachment, pose).cross(f);
    }
    const double az = std::atan2(layout.boom_direction.y(), layout.boom_direction.x()) + deg2rad(pose.psi);
    const double c = std::cos(az), s = std::sin(az);
    for (const auto& pl : layout.point_loads) {
        const Vec3 f(c * pl.force.x() - s * pl.force.y(), s * pl.force.x() + c * pl.force.y(), pl.force.z());
        w.force += f;
        w.moment += attachment_position(layout, pl.attachment, pose).cross(f);
    }
    return w;
}

/// Moment of the same wrench about another point.
inline Vec3 moment_about(const InterfaceWrench& w, const Vec3& from, const Vec3& to) {
    return w.moment + (from - to).cross(w.force);
}

struct EnvelopeRow {
    PoseAngles pose;
    InterfaceWrench wrench;
};

struct EnvelopeTable {
    std::vector<EnvelopeRow> rows;  // psi outer, phi inner
    std::size_t governing = 0;      // row with the largest overturning moment |(Mx, My)|
};

inline double overturning_moment(const InterfaceWrench& w) { return std::hypot(w.moment.x(), w.moment.y()); }

inline EnvelopeTable sweep_envelope(const SuperstructureLayout& layout, const std::vector<double>& psi_grid,
                                    const std::vector<double>& phi_grid, const Vec3& g = Vec3(0.0, 0.0, -9.81)) {
    if (psi_grid.empty() || phi_grid.empty()) throw Error(ErrorCode::InvalidModel, "empty pose grid");
    EnvelopeTable t;
    t.rows.reserve(psi_grid.size() * phi_grid.size());
    for (double psi : psi_grid)
        for (double phi : phi_grid) {
            PoseAngles p{psi, phi};
            t.rows.push_back({p, compute_wrench(layout, p, g)});
            if (overturning_moment(t.rows.back().wrench) > overturning_moment(t.rows[t.governing].wrench))
                t.governing = t.rows.size() - 1;
        }
    return t;
}

inline std::string envelope_csv(const EnvelopeTable& t) {
    std::string out = "psi_deg,phi_deg,Fx,Fy,Fz,Mx,My,Mz\n";
    char buf[256];
    for (const auto& r : t.rows) {
        const auto& f = r.wrench.force;
        const auto& m = r.wrench.moment;
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.pose.psi, r.pose.phi,
                      f.x(), f.y(), f.z(), m.x(), m.y(), m.z());
        out += buf;
    }
    return out;
}

}  // namespace feaudit

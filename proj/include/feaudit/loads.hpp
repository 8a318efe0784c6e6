#pragma once

// Load taxonomy (FEM 2.131 main / additional / special loads), global load
// vectors and weighted combinations.

#include "feaudit/constraints.hpp"
#include "feaudit/system.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <string>
#include <variant>
#include <vector>

namespace feaudit {

enum class LoadCategory {
    // main loads
    DeadLoad,
    MaterialLoad,
    Incrustation,
    NormalDigging,
    // additional loads
    WindInService,
    AbnormalDigging,
    SnowIce,
    Friction,
    Skewing,
    // special loads
    WindOutOfService,
    Seismic,
    BufferEffect,
    BlockingOfTravel,
};

enum class LoadGroup { Main, Additional, Special };

/// Load-case class of a combination: I = main, II = main + additional,
/// III = main + special.
enum class CaseClass { I, II, III };

inline constexpr std::array<std::pair<LoadCategory, std::string_view>, 13> load_category_names{{
    {LoadCategory::DeadLoad, "DeadLoad"},
    {LoadCategory::MaterialLoad, "MaterialLoad"},
    {LoadCategory::Incrustation, "Incrustation"},
    {LoadCategory::NormalDigging, "NormalDigging"},
    {LoadCategory::WindInService, "WindInService"},
    {LoadCategory::AbnormalDigging, "AbnormalDigging"},
    {LoadCategory::SnowIce, "SnowIce"},
    {LoadCategory::Friction, "Friction"},
    {LoadCategory::Skewing, "Skewing"},
    {LoadCategory::WindOutOfService, "WindOutOfService"},
    {LoadCategory::Seismic, "Seismic"},
    {LoadCategory::BufferEffect, "BufferEffect"},
    {LoadCategory::BlockingOfTravel, "BlockingOfTravel"},
}};

inline std::string_view to_string(LoadCategory c) {
    for (const auto& [cat, name] : load_category_names)
        if (cat == c) return name;
    return "Unknown";
}

inline std::optional<LoadCategory> parse_load_category(std::string_view s) {
    for (const auto& [cat, name] : load_category_names)
        if (name == s) return cat;
    return std::nullopt;
}

inline LoadGroup group_of(LoadCategory c) {
    if (c <= LoadCategory::NormalDigging) return LoadGroup::Main;
    if (c <= LoadCategory::Skewing) return LoadGroup::Additional;
    return LoadGroup::Special;
}

inline std::string_view to_string(CaseClass c) {
    switch (c) {
    case CaseClass::I: return "I";
    case CaseClass::II: return "II";
    case CaseClass::III: return "III";
    }
    return "?";
}

inline std::optional<CaseClass> parse_case_class(std::string_view s) {
    if (s == "I") return CaseClass::I;
    if (s == "II") return CaseClass::II;
    if (s == "III") return CaseClass::III;
    return std::nullopt;
}

inline bool class_admits(CaseClass cls, LoadGroup g) {
    switch (cls) {
    case CaseClass::I: return g == LoadGroup::Main;
    case CaseClass::II: return g != LoadGroup::Special;
    case CaseClass::III: return g != LoadGroup::Additional;
    }
    return false;
}

struct GravityLoad {
    Vec3 g{0.0, 0.0, -9.81};  // [m/s^2]
};

struct NodalForceLoad {
    std::string target;  // node set
    Vec3 force = Vec3::Zero();
    bool per_node = false;  // false: `force` is the total, split equally over the set
};

struct TractionLoad {
    std::string target;  // node set; boundary facets whose three nodes lie in it are loaded
    Vec3 traction = Vec3::Zero();  // [Pa]
};

struct InterfaceWrench {
    Vec3 force = Vec3::Zero();   // [N]
    Vec3 moment = Vec3::Zero();  // [N m]
};

struct WrenchLoad {
    std::string coupling;
    InterfaceWrench wrench;
};

using LoadConstituent = std::variant<GravityLoad, NodalForceLoad, TractionLoad, WrenchLoad>;

struct LoadCase {
    std::string name;
    LoadCategory category = LoadCategory::DeadLoad;
    std::vector<LoadConstituent> constituents;
};

struct Combination {
    std::string name;
    CaseClass case_class = CaseClass::I;
    std::vector<std::pair<std::string, double>> cases;  // (load case name, weight)
    std::optional<double> permissible;                  // overrides the class allowable [Pa]
};

inline Eigen::VectorXd gravity_vector(const Mesh& mesh, const ElementMaterials& mats, const Vec3& g,
                                      const DofSpace& space) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.size()));
    if (g.isZero(0.0)) return f;
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        const double m = mats.material(e).rho * std::abs(signed_volume(mesh.element_coords(e)));
        const Vec3 share = (m / 4.0) * g;
        for (auto n : mesh.elements[e].nodes) f.segment<3>(static_cast<Eigen::Index>(3 * n)) += share;
    }
    return f;
}

inline Eigen::VectorXd wrench_vector(const ConstraintSet& cs, const DofSpace& space, std::string_view coupling,
                                     const InterfaceWrench& w) {
    auto k = cs.coupling_index(coupling);
    if (!k) throw Error(ErrorCode::UnknownCoupling, "no coupling named '" + std::string(coupling) + "'");
    if (!w.force.allFinite() || !w.moment.allFinite())
        throw Error(ErrorCode::InvalidModel, "wrench on '" + std::string(coupling) + "' is not finite");
    Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.size()));
    for (int c = 0; c < 3; ++c) {
        f[static_cast<Eigen::Index>(space.reference_dof(*k, c))] = w.force[c];
        f[static_cast<Eigen::Index>(space.reference_dof(*k, 3 + c))] = w.moment[c];
    }
    return f;
}

/// Minimum-norm set of slave forces statically equivalent to a wrench about
/// the coupling reference (sum f = F, sum d x f = M).
inline std::vector<Vec3> distribute_wrench(const Mesh& mesh, const RigidCoupling& coupling,
                                           const InterfaceWrench& w) {
    const auto& slaves = mesh.group(coupling.slaves).members;
    const auto n = static_cast<Eigen::Index>(slaves.size());
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(6, 3 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vec3 d = mesh.nodes[slaves[static_cast<std::size_t>(i)]].x - coupling.reference;
        E.block<3, 3>(0, 3 * i).setIdentity();
        Mat3 skew;
        skew << 0, -d.z(), d.y(), d.z(), 0, -d.x(), -d.y(), d.x(), 0;
        E.block<3, 3>(3, 3 * i) = skew;
    }
    Eigen::Matrix<double, 6, 1> rhs;
    rhs << w.force, w.moment;
    const Eigen::VectorXd f = E.completeOrthogonalDecomposition().solve(rhs);
    std::vector<Vec3> out(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = f.segment<3>(3 * i);
    return out;
}

inline Eigen::VectorXd nodal_force_vector(const Mesh& mesh, const DofSpace& space, const NodalForceLoad& load) {
    const auto& g = mesh.group(load.target);
    if (g.kind != GroupKind::NodeSet)
        throw Error(ErrorCode::UnresolvedTarget, "nodal force target '" + load.target + "' is not a node set");
    if (g.members.empty()) throw Error(ErrorCode::UnresolvedTarget, "nodal force target '" + load.target + "' is empty");
    if (!load.force.allFinite()) throw Error(ErrorCode::InvalidModel, "nodal force on '" + load.target + "' is not finite");
    Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.size()));
    const Vec3 each = load.per_node ? load.force : Vec3(load.force / static_cast<double>(g.members.size()));
    for (auto n : g.members) f.segment<3>(static_cast<Eigen::Index>(3 * n)) += each;
    return f;
}

/// Consistent nodal shares (area/3 per vertex) of a uniform traction on the
/// boundary triangles whose vertices all belong to the node set.
inline Eigen::VectorXd traction_vector(const Mesh& mesh, const DofSpace& space, const TractionLoad& load) {
    const auto& g = mesh.group(load.target);
    if (g.kind != GroupKind::NodeSet)
        throw Error(ErrorCode::UnresolvedTarget, "traction target '" + load.target + "' is not a node set");
    std::vector<char> in_set(mesh.nodes.size(), 0);
    for (auto n : g.members) in_set[n] = 1;

    using Face = std::array<std::size_t, 3>;
    std::map<Face, int> count;
    static constexpr std::array<std::array<int, 3>, 4> faces{{{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}}};
    for (const auto& el : mesh.elements)
        for (const auto& fc : faces) {
            Face f{el.nodes[static_cast<std::size_t>(fc[0])], el.nodes[static_cast<std::size_t>(fc[1])],
                   el.nodes[static_cast<std::size_t>(fc[2])]};
            if (!in_set[f[0]] || !in_set[f[1]] || !in_set[f[2]]) continue;
            std::sort(f.begin(), f.end());
            ++count[f];
        }
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.size()));
    std::size_t loaded = 0;
    for (const auto& [f, c] : count) {
        if (c != 1) continue;  // interior face
        const double area = 0.5 * (mesh.nodes[f[1]].x - mesh.nodes[f[0]].x)
                                      .cross(mesh.nodes[f[2]].x - mesh.nodes[f[0]].x)
                                      .norm();
        for (auto n : f) out.segment<3>(static_cast<Eigen::Index>(3 * n)) += (area / 3.0) * load.traction;
        ++loaded;
    }
    if (loaded == 0)
        throw Error(ErrorCode::UnresolvedTarget, "traction target '" + load.target + "' covers no boundary facet");
    return out;
}

inline Eigen::VectorXd load_case_vector(const Mesh& mesh, const ElementMaterials& mats, const ConstraintSet& cs,
                                        const DofSpace& space, const LoadCase& lc) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.size()));
    for (const auto& part : lc.constituents) {
        std::visit(
            [&](const auto& c) {
                using T = std::decay_t<decltype(c)>;
                if constexpr (std::is_same_v<T, GravityLoad>) f += gravity_vector(mesh, mats, c.g, space);
                else if constexpr (std::is_same_v<T, NodalForceLoad>) f += nodal_force_vector(mesh, space, c);
                else if constexpr (std::is_same_v<T, TractionLoad>) f += traction_vector(mesh, space, c);
                else f += wrench_vector(cs, space, c.coupling, c.wrench);
            },
            part);
    }
    return f;
}

/// Exact weighted sum. Each entry is accumulated in ascending order of its
/// terms, so the result does not depend on the order of `terms`.
inline Eigen::VectorXd combine(const std::vector<std::pair<const Eigen::VectorXd*, double>>& terms) {
    if (terms.empty()) throw Error(ErrorCode::MismatchedModel, "nothing to combine");
    const auto n = terms.front().first->size();
    for (const auto& [v, w] : terms) {
        if (v->size() != n) throw Error(ErrorCode::MismatchedModel, "load vectors come from different models");
        if (!std::isfinite(w)) throw Error(ErrorCode::InvalidModel, "non-finite combination weight");
    }
    Eigen::VectorXd out(n);
    std::vector<double> parts(terms.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        for (std::size_t t = 0; t < terms.size(); ++t) parts[t] = terms[t].second * (*terms[t].first)[i];
        std::sort(parts.begin(), parts.end());
        double s = 0.0;
        for (double p : parts) s += p;
        out[i] = s;
    }
    return out;
}

/// Name of the combination with the largest utilization; ties go to the first declared.
inline std::string governing_combination(const std::vector<std::pair<std::string, double>>& utilizations) {
    if (utilizations.empty()) throw Error(ErrorCode::InvalidModel, "no audited combination");
    std::size_t best = 0;
    for (std::size_t i = 1; i < utilizations.size(); ++i)
        if (utilizations[i].second > utilizations[best].second) best = i;
    return utilizations[best].first;
}

}  // namespace feaudit

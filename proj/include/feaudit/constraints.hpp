#pragma once

// Per-axis fixations, rigid couplings and revolute joints, reduced to a
// master-slave transformation u_full = T * u_master + u_prescribed.
//
// Full DOF layout: 3 translations per mesh node, then 6 DOFs (3 translations,
// 3 small rotations) per coupling reference node, then one relative axis
// rotation per revolute joint.

#include "feaudit/core.hpp"
#include "feaudit/mesh.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

#include <optional>
#include <string>
#include <vector>

namespace feaudit {

enum class Axis { X = 0, Y = 1, Z = 2, RX = 3, RY = 4, RZ = 5 };

inline constexpr std::array<std::string_view, 6> axis_names{"x", "y", "z", "rx", "ry", "rz"};

inline std::optional<Axis> parse_axis(std::string_view s) {
    for (std::size_t i = 0; i < axis_names.size(); ++i)
        if (axis_names[i] == s) return static_cast<Axis>(i);
    return std::nullopt;
}

struct DirichletBC {
    std::string target;  // node-set group or coupling name
    std::array<std::optional<double>, 6> fixed{};  // prescribed value per axis [m or rad]

    DirichletBC() = default;
    DirichletBC(std::string t, std::initializer_list<Axis> axes) : target(std::move(t)) {
        for (auto a : axes) fixed[static_cast<std::size_t>(a)] = 0.0;
    }
};

struct RigidCoupling {
    std::string name;
    std::string slaves;  // node-set group
    Vec3 reference = Vec3::Zero();
};

struct RevoluteJoint {
    std::string name;
    std::string side_a;  // coupling names
    std::string side_b;
    Vec3 axis = Vec3::UnitZ();
};

/// Linear spring to ground on a coupling reference DOF, or a torsional
/// spring across a joint's free rotation (target names the joint).
struct Spring {
    std::string name;
    std::string target;
    Axis dof = Axis::RZ;
    double stiffness = 0.0;  // [N/m] or [N m/rad]
};

struct ConstraintSet {
    std::vector<DirichletBC> dirichlet;
    std::vector<RigidCoupling> couplings;
    std::vector<RevoluteJoint> joints;
    std::vector<Spring> springs;

    std::optional<std::size_t> coupling_index(std::string_view name) const {
        for (std::size_t i = 0; i < couplings.size(); ++i)
            if (couplings[i].name == name) return i;
        return std::nullopt;
    }
    std::optional<std::size_t> joint_index(std::string_view name) const {
        for (std::size_t i = 0; i < joints.size(); ++i)
            if (joints[i].name == name) return i;
        return std::nullopt;
    }
};

struct DofSpace {
    std::size_t nodes = 0;
    std::size_t couplings = 0;
    std::size_t joints = 0;

    std::size_t size() const { return 3 * nodes + 6 * couplings + joints; }
    std::size_t node_dof(std::size_t node, int c) const { return 3 * node + static_cast<std::size_t>(c); }
    std::size_t reference_dof(std::size_t coupling, int c) const {
        return 3 * nodes + 6 * coupling + static_cast<std::size_t>(c);
    }
    std::size_t joint_dof(std::size_t joint) const { return 3 * nodes + 6 * couplings + joint; }
    bool is_node_dof(std::size_t d) const { return d < 3 * nodes; }
    bool is_reference_dof(std::size_t d) const { return d >= 3 * nodes && d < 3 * nodes + 6 * couplings; }
    /// Translational component 0..2 of a node or reference DOF, -1 otherwise.
    int translation_axis(std::size_t d) const {
        if (is_node_dof(d)) return static_cast<int>(d % 3);
        if (is_reference_dof(d)) {
            int c = static_cast<int>((d - 3 * nodes) % 6);
            return c < 3 ? c : -1;
        }
        return -1;
    }
};

enum class DofState { Master, Fixed, Dependent, Inactive };

struct FixedDof {
    std::size_t dof = 0;
    std::string target;
    Axis axis = Axis::X;
    double value = 0.0;
};

struct GroundSpring {
    std::size_t dof = 0;
    std::string name;
    double stiffness = 0.0;
    bool grounded = true;  // false for springs across a joint
};

struct Transformation {
    DofSpace space;
    Eigen::SparseMatrix<double> T;        // full x master
    Eigen::SparseMatrix<double> T_fixed;  // full x fixed: generalised directions of the fixed DOFs
    Eigen::VectorXd prescribed;           // full
    std::vector<std::size_t> masters;     // full index of each master column
    std::vector<FixedDof> fixed;          // one entry per T_fixed column
    std::vector<DofState> state;          // per full DOF
    std::vector<GroundSpring> springs;
    std::vector<Vec3> reference_points;   // per coupling
    std::vector<std::vector<std::size_t>> coupling_slaves;  // node indices per coupling

    std::size_t master_count() const { return masters.size(); }
};

inline std::string describe_dof(const Mesh& mesh, const ConstraintSet& cs, const DofSpace& s, std::size_t d) {
    if (s.is_node_dof(d))
        return "node " + std::to_string(mesh.nodes[d / 3].id) + " " + std::string(axis_names[d % 3]);
    if (s.is_reference_dof(d)) {
        auto k = (d - 3 * s.nodes) / 6;
        return "coupling '" + cs.couplings[k].name + "' " + std::string(axis_names[(d - 3 * s.nodes) % 6]);
    }
    return "joint '" + cs.joints[d - 3 * s.nodes - 6 * s.couplings].name + "' rotation";
}

namespace detail {

inline bool approx_equal_point(const Vec3& a, const Vec3& b, double scale) {
    return (a - b).norm() <= 1e-9 * std::max(1.0, scale);
}

}  // namespace detail

inline Transformation build_transformation(const Mesh& mesh, const ConstraintSet& cs) {
    Transformation tr;
    tr.space = {mesh.nodes.size(), cs.couplings.size(), cs.joints.size()};
    const DofSpace& S = tr.space;
    const std::size_t n = S.size();

    std::vector<char> used(mesh.nodes.size(), 0);
    for (const auto& el : mesh.elements)
        for (auto nd : el.nodes) used[nd] = 1;

    tr.state.assign(n, DofState::Master);
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
        if (!used[i])
            for (int c = 0; c < 3; ++c) tr.state[S.node_dof(i, c)] = DofState::Inactive;

    std::vector<std::vector<std::pair<std::size_t, double>>> deps(n);
    std::vector<std::string> dep_owner(n);
    std::vector<double> fixed_value(n, 0.0);
    std::vector<std::string> fixed_owner(n);

    auto node_set = [&](const std::string& name) -> const PhysicalGroup& {
        const auto* g = mesh.find_group(name);
        if (!g || g->kind != GroupKind::NodeSet)
            throw Error(ErrorCode::UnresolvedTarget, "'" + name + "' is not a node set in the mesh");
        return *g;
    };

    double extent = 0.0;
    for (const auto& nd : mesh.nodes) extent = std::max(extent, nd.x.cwiseAbs().maxCoeff());

    for (std::size_t k = 0; k < cs.couplings.size(); ++k) {
        const auto& cp = cs.couplings[k];
        for (std::size_t j = 0; j < k; ++j)
            if (cs.couplings[j].name == cp.name)
                throw Error(ErrorCode::ConflictingConstraints, "duplicate coupling name '" + cp.name + "'");
        if (!cp.reference.allFinite())
            throw Error(ErrorCode::InvalidModel, "coupling '" + cp.name + "' reference is not finite");
        const auto& g = node_set(cp.slaves);
        if (g.members.empty())
            throw Error(ErrorCode::UnresolvedTarget, "coupling '" + cp.name + "' has no slave nodes");
        tr.reference_points.push_back(cp.reference);
        tr.coupling_slaves.push_back(g.members);
        for (auto s : g.members) {
            const Vec3 d = mesh.nodes[s].x - cp.reference;
            for (int c = 0; c < 3; ++c) {
                const auto dof = S.node_dof(s, c);
                if (tr.state[dof] == DofState::Dependent)
                    throw Error(ErrorCode::ConflictingConstraints, "node " + std::to_string(mesh.nodes[s].id) +
                                                                       " is a slave of couplings '" + dep_owner[dof] +
                                                                       "' and '" + cp.name + "'");
                tr.state[dof] = DofState::Dependent;
                dep_owner[dof] = cp.name;
                auto& row = deps[dof];
                row.emplace_back(S.reference_dof(k, c), 1.0);
                // (theta x d)_c
                const int c1 = (c + 1) % 3, c2 = (c + 2) % 3;
                if (d[c2] != 0.0) row.emplace_back(S.reference_dof(k, 3 + c1), d[c2]);
                if (d[c1] != 0.0) row.emplace_back(S.reference_dof(k, 3 + c2), -d[c1]);
            }
        }
    }

    for (std::size_t j = 0; j < cs.joints.size(); ++j) {
        const auto& jt = cs.joints[j];
        auto ka = cs.coupling_index(jt.side_a);
        auto kb = cs.coupling_index(jt.side_b);
        if (!ka || !kb)
            throw Error(ErrorCode::UnresolvedTarget, "joint '" + jt.name + "' names an unknown coupling");
        if (*ka == *kb) throw Error(ErrorCode::ConflictingConstraints, "joint '" + jt.name + "' couples a body to itself");
        if (std::abs(jt.axis.norm() - 1.0) > 1e-12)
            throw Error(ErrorCode::InvalidModel, "joint '" + jt.name + "' axis must be a unit vector");
        if (!detail::approx_equal_point(cs.couplings[*ka].reference, cs.couplings[*kb].reference, extent))
            throw Error(ErrorCode::InvalidModel, "joint '" + jt.name + "' couplings must share a reference point");
        for (int c = 0; c < 6; ++c) {
            const auto dof = S.reference_dof(*kb, c);
            if (tr.state[dof] == DofState::Dependent)
                throw Error(ErrorCode::ConflictingConstraints, "coupling '" + jt.side_b + "' is side b of joints '" +
                                                                   dep_owner[dof] + "' and '" + jt.name + "'");
            tr.state[dof] = DofState::Dependent;
            dep_owner[dof] = jt.name;
            deps[dof].emplace_back(S.reference_dof(*ka, c), 1.0);
            if (c >= 3 && jt.axis[c - 3] != 0.0) deps[dof].emplace_back(S.joint_dof(j), jt.axis[c - 3]);
        }
    }

    for (const auto& bc : cs.dirichlet) {
        std::vector<std::size_t> dofs;
        auto fix = [&](std::size_t dof, Axis a, double value) {
            if (tr.state[dof] == DofState::Dependent)
                throw Error(ErrorCode::ConflictingConstraints, "fixation '" + bc.target + "' acts on " +
                                                                   describe_dof(mesh, cs, S, dof) +
                                                                   ", which is a slave of '" + dep_owner[dof] + "'");
            if (tr.state[dof] == DofState::Fixed) {
                if (fixed_value[dof] != value)
                    throw Error(ErrorCode::ConflictingConstraints, describe_dof(mesh, cs, S, dof) +
                                                                       " is fixed by '" + fixed_owner[dof] +
                                                                       "' and '" + bc.target + "' to different values");
                return;
            }
            if (tr.state[dof] == DofState::Inactive) return;
            tr.state[dof] = DofState::Fixed;
            fixed_value[dof] = value;
            fixed_owner[dof] = bc.target;
            tr.fixed.push_back({dof, bc.target, a, value});
        };
        bool any = false;
        for (auto v : bc.fixed) any = any || v.has_value();
        if (!any) throw Error(ErrorCode::InvalidModel, "fixation '" + bc.target + "' fixes no axis");
        if (auto k = cs.coupling_index(bc.target)) {
            for (int a = 0; a < 6; ++a)
                if (bc.fixed[static_cast<std::size_t>(a)])
                    fix(S.reference_dof(*k, a), static_cast<Axis>(a), *bc.fixed[static_cast<std::size_t>(a)]);
        } else {
            const auto* g = mesh.find_group(bc.target);
            if (!g || g->kind != GroupKind::NodeSet)
                throw Error(ErrorCode::UnresolvedTarget, "fixation target '" + bc.target + "' is neither a coupling nor a node set");
            for (int a = 3; a < 6; ++a)
                if (bc.fixed[static_cast<std::size_t>(a)])
                    throw Error(ErrorCode::InvalidModel, "fixation '" + bc.target + "': rotations need a coupling target");
            for (auto nd : g->members)
                for (int a = 0; a < 3; ++a)
                    if (bc.fixed[static_cast<std::size_t>(a)])
                        fix(S.node_dof(nd, a), static_cast<Axis>(a), *bc.fixed[static_cast<std::size_t>(a)]);
        }
    }

    for (const auto& sp : cs.springs) {
        if (!(sp.stiffness >= 0.0) || !std::isfinite(sp.stiffness))
            throw Error(ErrorCode::InvalidModel, "spring '" + sp.name + "' needs a finite non-negative stiffness");
        GroundSpring gs{0, sp.name, sp.stiffness, true};
        if (auto k = cs.coupling_index(sp.target)) {
            gs.dof = S.reference_dof(*k, static_cast<int>(sp.dof));
        } else if (auto j = cs.joint_index(sp.target)) {
            gs.dof = S.joint_dof(*j);
            gs.grounded = false;
        } else {
            throw Error(ErrorCode::UnresolvedTarget, "spring '" + sp.name + "' target '" + sp.target + "' is unknown");
        }
        if (tr.state[gs.dof] != DofState::Master)
            throw Error(ErrorCode::ConflictingConstraints, "spring '" + sp.name + "' acts on a fixed or slave DOF");
        tr.springs.push_back(gs);
    }

    // Column numbering: masters in DOF order, fixed DOFs in declaration order.
    std::vector<std::ptrdiff_t> column(n, -1);
    for (std::size_t d = 0; d < n; ++d)
        if (tr.state[d] == DofState::Master) {
            column[d] = static_cast<std::ptrdiff_t>(tr.masters.size());
            tr.masters.push_back(d);
        }
    const std::size_t nm = tr.masters.size();
    for (std::size_t i = 0; i < tr.fixed.size(); ++i) column[tr.fixed[i].dof] = static_cast<std::ptrdiff_t>(nm + i);

    // Expand dependent DOFs recursively onto master/fixed columns.
    std::vector<std::vector<std::pair<std::size_t, double>>> expr(n);
    std::vector<char> mark(n, 0);  // 0 = todo, 1 = in progress, 2 = done
    auto expand = [&](auto&& self, std::size_t d) -> const std::vector<std::pair<std::size_t, double>>& {
        if (mark[d] == 2) return expr[d];
        if (mark[d] == 1)
            throw Error(ErrorCode::ConflictingConstraints, "circular constraint chain through " + describe_dof(mesh, cs, S, d));
        mark[d] = 1;
        std::vector<std::pair<std::size_t, double>> out;
        switch (tr.state[d]) {
        case DofState::Master:
        case DofState::Fixed: out.emplace_back(static_cast<std::size_t>(column[d]), 1.0); break;
        case DofState::Inactive: break;
        case DofState::Dependent: {
            std::map<std::size_t, double> acc;
            for (auto [src, coeff] : deps[d])
                for (auto [col, w] : self(self, src)) acc[col] += coeff * w;
            for (auto [col, w] : acc)
                if (w != 0.0) out.emplace_back(col, w);
            break;
        }
        }
        expr[d] = std::move(out);
        mark[d] = 2;
        return expr[d];
    };

    std::vector<Eigen::Triplet<double>> tm, tf;
    tm.reserve(n + 8 * tr.coupling_slaves.size());
    for (std::size_t d = 0; d < n; ++d)
        for (auto [col, w] : expand(expand, d)) {
            if (col < nm)
                tm.emplace_back(static_cast<int>(d), static_cast<int>(col), w);
            else
                tf.emplace_back(static_cast<int>(d), static_cast<int>(col - nm), w);
        }
    tr.T.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(nm));
    tr.T.setFromTriplets(tm.begin(), tm.end());
    tr.T_fixed.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(tr.fixed.size()));
    tr.T_fixed.setFromTriplets(tf.begin(), tf.end());
    Eigen::VectorXd values(static_cast<Eigen::Index>(tr.fixed.size()));
    for (std::size_t i = 0; i < tr.fixed.size(); ++i) values[static_cast<Eigen::Index>(i)] = tr.fixed[i].value;
    tr.prescribed = tr.T_fixed * values;
    return tr;
}

/// The six rigid-body motions in the full DOF space: translations x, y, z,
/// then rotations about x, y, z through `center`, rotations scaled by 1/`length`.
inline std::array<Eigen::VectorXd, 6> rigid_modes(const Mesh& mesh, const Transformation& tr, const Vec3& center,
                                                   double length) {
    const auto& S = tr.space;
    std::array<Eigen::VectorXd, 6> modes;
    for (int k = 0; k < 6; ++k) {
        Eigen::VectorXd r = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(S.size()));
        const Vec3 omega = k >= 3 ? Vec3(Vec3::Unit(k - 3) / length) : Vec3::Zero();
        auto motion = [&](const Vec3& x) -> Vec3 { return k < 3 ? Vec3(Vec3::Unit(k)) : Vec3(omega.cross(x - center)); };
        for (std::size_t i = 0; i < S.nodes; ++i) {
            const Vec3 m = motion(mesh.nodes[i].x);
            for (int c = 0; c < 3; ++c) r[static_cast<Eigen::Index>(S.node_dof(i, c))] = m[c];
        }
        for (std::size_t j = 0; j < S.couplings; ++j) {
            const Vec3 m = motion(tr.reference_points[j]);
            for (int c = 0; c < 3; ++c) {
                r[static_cast<Eigen::Index>(S.reference_dof(j, c))] = m[c];
                r[static_cast<Eigen::Index>(S.reference_dof(j, 3 + c))] = omega[c];
            }
        }
        modes[static_cast<std::size_t>(k)] = std::move(r);
    }
    return modes;
}

struct RigidBodyCheck {
    bool constrained = false;
    std::vector<std::string> free_modes;  // e.g. "translation x", "rotation z"
};

/// Probes the six rigid motions against the fixations and grounded springs.
/// A motion (or combination) that no fixed DOF resists is reported free.
inline RigidBodyCheck check_rigid_body_constrained(const Mesh& mesh, const Transformation& tr) {
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    for (const auto& nd : mesh.nodes) {
        lo = lo.cwiseMin(nd.x);
        hi = hi.cwiseMax(nd.x);
    }
    for (const auto& p : tr.reference_points) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    if (mesh.nodes.empty() && tr.reference_points.empty()) lo = hi = Vec3::Zero();
    const Vec3 center = 0.5 * (lo + hi);
    const double length = std::max((hi - lo).norm(), 1e-30);
    const auto modes = rigid_modes(mesh, tr, center, length);

    std::vector<std::size_t> blocking;
    for (const auto& f : tr.fixed) blocking.push_back(f.dof);
    for (const auto& s : tr.springs)
        if (s.grounded && s.stiffness > 0.0) blocking.push_back(s.dof);

    Eigen::Matrix<double, 6, 6> G = Eigen::Matrix<double, 6, 6>::Zero();
    for (auto d : blocking)
        for (int a = 0; a < 6; ++a)
            for (int b = 0; b < 6; ++b)
                G(a, b) += modes[static_cast<std::size_t>(a)][static_cast<Eigen::Index>(d)] *
                           modes[static_cast<std::size_t>(b)][static_cast<Eigen::Index>(d)];

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> eig(G);
    constexpr double tol = 1e-10;
    std::vector<int> null_cols;
    for (int i = 0; i < 6; ++i)
        if (eig.eigenvalues()[i] <= tol) null_cols.push_back(i);

    RigidBodyCheck out;
    out.constrained = null_cols.empty();
    if (out.constrained) return out;

    Eigen::MatrixXd N(6, static_cast<Eigen::Index>(null_cols.size()));
    for (std::size_t i = 0; i < null_cols.size(); ++i) N.col(static_cast<Eigen::Index>(i)) = eig.eigenvectors().col(null_cols[i]);
    static constexpr std::array<const char*, 6> names{"translation x", "translation y", "translation z",
                                                      "rotation x",    "rotation y",    "rotation z"};
    std::size_t named = 0;
    for (int k = 0; k < 6; ++k) {
        Eigen::Matrix<double, 6, 1> e = Eigen::Matrix<double, 6, 1>::Unit(k);
        if ((e - N * (N.transpose() * e)).norm() < 1e-6) {
            out.free_modes.emplace_back(names[static_cast<std::size_t>(k)]);
            ++named;
        }
    }
    for (std::size_t i = named; i < null_cols.size(); ++i) out.free_modes.emplace_back("combined rigid motion");
    return out;
}

}  // namespace feaudit

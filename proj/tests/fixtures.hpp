#pragma once

#include "box_mesh.hpp"
#include "feaudit/feaudit.hpp"

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

namespace fixtures {

using feaudit::Vec3;

/// n x n x n cells over [0,a]^3.
inline feaudit::Mesh cube(int n, double a = 1.0) {
    using namespace feaudit::tools;
    const double h = a / n;
    return box_mesh({{Vec3::Zero(), Vec3::Constant(a), "solid"}}, h,
                    {{"x0", in_box({0, 0, 0}, {0, a, a})},
                     {"x1", in_box({a, 0, 0}, {a, a, a})},
                     {"y0", in_box({0, 0, 0}, {a, 0, a})},
                     {"z0", in_box({0, 0, 0}, {a, a, 0})},
                     {"z1", in_box({0, 0, a}, {a, a, a})},
                     {"origin", in_box({0, 0, 0}, {0, 0, 0})}});
}

/// Moves every node off the boundary of [0,a]^3 by up to `amp` per axis.
inline void perturb_interior(feaudit::Mesh& m, double amp, std::uint64_t seed, double a = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-amp, amp);
    for (auto& nd : m.nodes) {
        bool interior = true;
        for (int c = 0; c < 3; ++c) interior = interior && nd.x[c] > 1e-9 && nd.x[c] < a - 1e-9;
        if (interior) nd.x += Vec3(d(rng), d(rng), d(rng));
    }
}

/// Cantilever beam [0,L] x [0,b] x [0,b] meshed with nx x nb x nb cells; "root" at x = 0, "tip" at x = L.
inline feaudit::Mesh beam(int nx, int nb, double L = 1.0, double b = 0.1) {
    using namespace feaudit::tools;
    return box_mesh({{Vec3::Zero(), Vec3(L, b, b), "beam"}}, Vec3(L / nx, b / nb, b / nb),
                    {{"root", in_box({0, 0, 0}, {0, b, b})}, {"tip", in_box({L, 0, 0}, {L, b, b})}});
}

inline std::map<std::string, feaudit::Material> steel(const feaudit::Mesh& m) {
    std::map<std::string, feaudit::Material> out;
    for (const auto& g : m.groups)
        if (g.kind == feaudit::GroupKind::Volume) out[g.name] = feaudit::Material{};
    return out;
}

inline std::filesystem::path source_dir() { return FEAUDIT_SOURCE_DIR; }
inline std::filesystem::path demo_model() { return source_dir() / "demo" / "mini_gantry" / "model.json"; }

inline std::filesystem::path temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("feaudit_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

inline Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Vec3 v(n(rng), n(rng), n(rng));
    return v.normalized();
}

inline feaudit::Mat3 random_rotation(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
    return q.normalized().toRotationMatrix();
}

}  // namespace fixtures

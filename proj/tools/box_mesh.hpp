#pragma once

// Structured tetrahedral meshes built from axis-aligned blocks on one shared
// grid. Every active cell is split into six Kuhn tetrahedra around its main
// diagonal, which keeps neighbouring cells conforming.

#include "feaudit/mesh.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <tuple>
#include <vector>

namespace feaudit::tools {

struct Block {
    Vec3 lo;
    Vec3 hi;
    std::string group;
};

struct NodeSetSpec {
    std::string name;
    std::function<bool(const Vec3&)> contains;
};

/// Mesh the union of `blocks` on a grid of cell size `h` anchored at `origin`.
/// A cell belongs to the first block containing its centre.
inline Mesh box_mesh(const std::vector<Block>& blocks, const Vec3& h, const std::vector<NodeSetSpec>& node_sets = {},
                     const Vec3& origin = Vec3::Zero()) {
    using Key = std::tuple<long, long, long>;
    std::map<std::string, int> group_tag;
    for (const auto& b : blocks) group_tag.emplace(b.group, 0);
    int next_tag = 1;
    for (auto& [name, tag] : group_tag) tag = next_tag++;

    auto cell_range = [&](double lo, double hi, int c) {
        return std::pair<long, long>{std::lround((lo - origin[c]) / h[c]), std::lround((hi - origin[c]) / h[c])};
    };

    std::map<Key, int> cells;  // cell -> volume tag
    for (const auto& b : blocks) {
        auto [i0, i1] = cell_range(b.lo.x(), b.hi.x(), 0);
        auto [j0, j1] = cell_range(b.lo.y(), b.hi.y(), 1);
        auto [k0, k1] = cell_range(b.lo.z(), b.hi.z(), 2);
        for (long i = i0; i < i1; ++i)
            for (long j = j0; j < j1; ++j)
                for (long k = k0; k < k1; ++k) cells.emplace(Key{i, j, k}, group_tag.at(b.group));
    }

    Mesh mesh;
    std::map<Key, std::size_t> node_of;
    auto node = [&](long i, long j, long k) {
        auto [it, fresh] = node_of.emplace(Key{i, j, k}, mesh.nodes.size());
        if (fresh) {
            Node n;
            n.id = static_cast<std::int64_t>(mesh.nodes.size() + 1);
            n.x = origin + Vec3(i * h.x(), j * h.y(), k * h.z());
            mesh.nodes.push_back(n);
        }
        return it->second;
    };

    static constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    std::map<int, std::vector<std::size_t>> volume_members;
    for (const auto& [key, tag] : cells) {
        const auto [i, j, k] = key;
        for (const auto& p : perms) {
            long c[3] = {0, 0, 0};
            std::array<std::size_t, 4> v{};
            v[0] = node(i, j, k);
            for (int s = 0; s < 3; ++s) {
                ++c[p[s]];
                v[static_cast<std::size_t>(s) + 1] = node(i + c[0], j + c[1], k + c[2]);
            }
            Tet4Element e;
            e.id = static_cast<std::int64_t>(mesh.elements.size() + 1);
            e.nodes = v;
            e.group = tag;
            const std::array<Vec3, 4> x{mesh.nodes[v[0]].x, mesh.nodes[v[1]].x, mesh.nodes[v[2]].x, mesh.nodes[v[3]].x};
            if (signed_volume(x) < 0.0) std::swap(e.nodes[2], e.nodes[3]);
            volume_members[tag].push_back(mesh.elements.size());
            mesh.elements.push_back(e);
        }
    }

    for (const auto& [name, tag] : group_tag) {
        PhysicalGroup g;
        g.tag = tag;
        g.name = name;
        g.kind = GroupKind::Volume;
        g.members = volume_members[tag];
        mesh.groups.push_back(g);
    }
    for (const auto& spec : node_sets) {
        PhysicalGroup g;
        g.tag = next_tag++;
        g.name = spec.name;
        g.kind = GroupKind::NodeSet;
        for (std::size_t n = 0; n < mesh.nodes.size(); ++n)
            if (spec.contains(mesh.nodes[n].x)) g.members.push_back(n);
        mesh.groups.push_back(g);
    }
    mesh.reindex();
    return mesh;
}

inline Mesh box_mesh(const std::vector<Block>& blocks, double h, const std::vector<NodeSetSpec>& node_sets = {}) {
    return box_mesh(blocks, Vec3(h, h, h), node_sets);
}

/// Predicate for nodes inside a closed box, with a small tolerance.
inline std::function<bool(const Vec3&)> in_box(const Vec3& lo, const Vec3& hi, double tol = 1e-9) {
    return [=](const Vec3& p) {
        return (p.array() >= lo.array() - tol).all() && (p.array() <= hi.array() + tol).all();
    };
}

}  // namespace feaudit::tools

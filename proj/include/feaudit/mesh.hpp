#pragma once

// Tetrahedral mesh container and the Gmsh MSH ASCII 2.2 reader/writer.
//
// Supported subset: $MeshFormat (2.2, ASCII), $PhysicalNames, $Nodes,
// $Elements. Type-4 elements are solids; points, lines, triangles and quads
// (plus their quadratic variants) only contribute node-set membership via
// their physical tag. Any other 3D element type is rejected.

#include "feaudit/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <optional>
#include <limits>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace feaudit {

enum class LengthUnit { Meter, Millimeter };

constexpr double to_meters(LengthUnit unit) { return unit == LengthUnit::Millimeter ? 1e-3 : 1.0; }

struct Node {
    std::int64_t id = 0;
    Vec3 x = Vec3::Zero();  // [m]
};

struct Tet4Element {
    std::int64_t id = 0;
    std::array<std::size_t, 4> nodes{};  // indices into Mesh::nodes
    int group = 0;                       // volume group tag, 0 = untagged
};

enum class GroupKind { Volume, NodeSet };

struct PhysicalGroup {
    int tag = 0;
    std::string name;
    GroupKind kind = GroupKind::Volume;
    std::vector<std::size_t> members;  // element indices (Volume) or node indices (NodeSet), sorted
};

class Mesh {
public:
    std::vector<Node> nodes;
    std::vector<Tet4Element> elements;
    std::vector<PhysicalGroup> groups;

    /// Rebuilds id lookups; call after editing nodes/elements by hand.
    void reindex() {
        node_by_id_.clear();
        element_by_id_.clear();
        for (std::size_t i = 0; i < nodes.size(); ++i) node_by_id_.emplace(nodes[i].id, i);
        for (std::size_t i = 0; i < elements.size(); ++i) element_by_id_.emplace(elements[i].id, i);
    }

    std::optional<std::size_t> node_index(std::int64_t id) const {
        auto it = node_by_id_.find(id);
        if (it == node_by_id_.end()) return std::nullopt;
        return it->second;
    }

    std::optional<std::size_t> element_index(std::int64_t id) const {
        auto it = element_by_id_.find(id);
        if (it == element_by_id_.end()) return std::nullopt;
        return it->second;
    }

    const PhysicalGroup* find_group(std::string_view name) const {
        for (const auto& g : groups)
            if (g.name == name) return &g;
        return nullptr;
    }

    const PhysicalGroup& group(std::string_view name) const {
        if (const auto* g = find_group(name)) return *g;
        throw Error(ErrorCode::UnknownGroup, "no physical group named '" + std::string(name) + "'");
    }

    const PhysicalGroup* volume_group_by_tag(int tag) const {
        for (const auto& g : groups)
            if (g.kind == GroupKind::Volume && g.tag == tag) return &g;
        return nullptr;
    }

    std::array<Vec3, 4> element_coords(std::size_t e) const {
        const auto& el = elements[e];
        return {nodes[el.nodes[0]].x, nodes[el.nodes[1]].x, nodes[el.nodes[2]].x, nodes[el.nodes[3]].x};
    }

    Vec3 centroid(std::size_t e) const {
        auto c = element_coords(e);
        return 0.25 * (c[0] + c[1] + c[2] + c[3]);
    }

private:
    std::unordered_map<std::int64_t, std::size_t> node_by_id_;
    std::unordered_map<std::int64_t, std::size_t> element_by_id_;
};

inline double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
    return (b - a).dot((c - a).cross(d - a)) / 6.0;
}

inline double signed_volume(const std::array<Vec3, 4>& x) { return signed_volume(x[0], x[1], x[2], x[3]); }

namespace detail {

class LineReader {
public:
    explicit LineReader(std::string_view text) : text_(text) {}

    bool next(std::string_view& line) {
        while (pos_ < text_.size()) {
            auto end = text_.find('\n', pos_);
            if (end == std::string_view::npos) end = text_.size();
            line = text_.substr(pos_, end - pos_);
            pos_ = end + 1;
            ++number_;
            while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
                line.remove_suffix(1);
            while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
            if (!line.empty()) return true;
        }
        return false;
    }

    std::size_t line_number() const { return number_; }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t number_ = 0;
};

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

[[noreturn]] inline void malformed(std::size_t line, const std::string& what) {
    throw Error(ErrorCode::MalformedSection, "line " + std::to_string(line) + ": " + what);
}

template <class T>
T parse_number(std::string_view tok, std::size_t line) {
    T value{};
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
        malformed(line, "expected a number, got '" + std::string(tok) + "'");
    return value;
}

// Topological dimension of known Gmsh element types; -1 = unknown.
inline int msh_element_dim(int type) {
    switch (type) {
    case 15: return 0;
    case 1: case 8: case 26: case 27: case 28: return 1;
    case 2: case 3: case 9: case 10: case 16: case 20: case 21: case 22: case 23: case 24: case 25: return 2;
    case 4: case 5: case 6: case 7: case 11: case 12: case 13: case 14: case 17: case 18: case 19: case 29: case 30:
    case 31: case 92: case 93: return 3;
    default: return -1;
    }
}

inline int msh_node_count(int type) {
    switch (type) {
    case 15: return 1;
    case 1: return 2;
    case 2: return 3;
    case 3: return 4;
    case 4: return 4;
    case 8: return 3;
    case 9: return 6;
    case 10: return 9;
    case 16: return 8;
    case 26: return 4;
    case 20: return 9;
    case 21: return 10;
    default: return -1;
    }
}

}  // namespace detail

/// Parses MSH ASCII 2.2. Coordinates are multiplied by `to_meters(unit)`.
inline Mesh parse_mesh(std::string_view text, LengthUnit unit = LengthUnit::Meter) {
    using detail::malformed;
    const double scale = to_meters(unit);
    detail::LineReader reader(text);
    std::string_view line;

    Mesh mesh;
    bool have_format = false, have_nodes = false, have_elements = false;
    std::map<std::pair<int, int>, std::string> names;  // (dim, tag) -> name
    // node-set membership collected from lower-dimensional elements: (dim, tag) -> node ids
    std::map<std::pair<int, int>, std::vector<std::int64_t>> node_sets;
    struct RawTet {
        std::int64_t id;
        std::array<std::int64_t, 4> nodes;
        int tag;
        std::size_t line;
    };
    std::vector<RawTet> raw_tets;

    auto expect_end = [&](std::string_view section) {
        if (!reader.next(line) || line != std::string("$End") + std::string(section))
            malformed(reader.line_number(), "expected $End" + std::string(section));
    };
    auto read_count = [&]() -> std::size_t {
        if (!reader.next(line)) malformed(reader.line_number(), "unexpected end of file");
        auto n = detail::parse_number<long long>(line, reader.line_number());
        if (n < 0) malformed(reader.line_number(), "negative count");
        return static_cast<std::size_t>(n);
    };

    while (reader.next(line)) {
        if (line == "$MeshFormat") {
            if (!reader.next(line)) malformed(reader.line_number(), "missing format line");
            auto tok = detail::split_ws(line);
            if (tok.size() < 3) malformed(reader.line_number(), "format line needs version, file-type, data-size");
            if (tok[0] != "2.2" && tok[0] != "2.0" && tok[0] != "2.1" && tok[0] != "2")
                throw Error(ErrorCode::UnsupportedVersion, "MSH version " + std::string(tok[0]) + " (only 2.2 ASCII)");
            if (tok[1] != "0") throw Error(ErrorCode::UnsupportedVersion, "binary MSH is not supported");
            expect_end("MeshFormat");
            have_format = true;
        } else if (line == "$PhysicalNames") {
            auto n = read_count();
            for (std::size_t i = 0; i < n; ++i) {
                if (!reader.next(line)) malformed(reader.line_number(), "unexpected end of $PhysicalNames");
                auto tok = detail::split_ws(line);
                if (tok.size() < 3) malformed(reader.line_number(), "physical name needs dim, tag, name");
                int dim = detail::parse_number<int>(tok[0], reader.line_number());
                int tag = detail::parse_number<int>(tok[1], reader.line_number());
                auto q0 = line.find('"');
                auto q1 = line.rfind('"');
                if (q0 == std::string_view::npos || q1 == q0) malformed(reader.line_number(), "physical name must be quoted");
                names[{dim, tag}] = std::string(line.substr(q0 + 1, q1 - q0 - 1));
            }
            expect_end("PhysicalNames");
        } else if (line == "$Nodes") {
            if (!have_format) throw Error(ErrorCode::UnsupportedVersion, "missing $MeshFormat before $Nodes");
            auto n = read_count();
            mesh.nodes.reserve(n);
            for (std::size_t i = 0; i < n; ++i) {
                if (!reader.next(line)) malformed(reader.line_number(), "unexpected end of $Nodes");
                auto tok = detail::split_ws(line);
                if (tok.size() != 4) malformed(reader.line_number(), "node line needs id x y z");
                Node node;
                node.id = detail::parse_number<std::int64_t>(tok[0], reader.line_number());
                if (node.id <= 0) malformed(reader.line_number(), "node id must be positive");
                for (int k = 0; k < 3; ++k) {
                    double v = detail::parse_number<double>(tok[static_cast<std::size_t>(k + 1)], reader.line_number());
                    if (!std::isfinite(v)) malformed(reader.line_number(), "non-finite coordinate");
                    node.x[k] = v * scale;
                }
                mesh.nodes.push_back(node);
            }
            expect_end("Nodes");
            have_nodes = true;
        } else if (line == "$Elements") {
            if (!have_format) throw Error(ErrorCode::UnsupportedVersion, "missing $MeshFormat before $Elements");
            auto n = read_count();
            for (std::size_t i = 0; i < n; ++i) {
                if (!reader.next(line)) malformed(reader.line_number(), "unexpected end of $Elements");
                const auto ln = reader.line_number();
                auto tok = detail::split_ws(line);
                if (tok.size() < 3) malformed(ln, "element line too short");
                auto id = detail::parse_number<std::int64_t>(tok[0], ln);
                int type = detail::parse_number<int>(tok[1], ln);
                int ntags = detail::parse_number<int>(tok[2], ln);
                if (ntags < 0 || tok.size() < static_cast<std::size_t>(3 + ntags)) malformed(ln, "bad tag count");
                int phys = ntags > 0 ? detail::parse_number<int>(tok[3], ln) : 0;
                const int dim = detail::msh_element_dim(type);
                if (dim == 3 && type != 4)
                    throw Error(ErrorCode::UnsupportedElementType,
                                "line " + std::to_string(ln) + ": element type " + std::to_string(type) +
                                    " (only 4-node tetrahedra are supported)");
                const int nn = detail::msh_node_count(type);
                if (dim < 0 || nn < 0)
                    throw Error(ErrorCode::UnsupportedElementType,
                                "line " + std::to_string(ln) + ": unknown element type " + std::to_string(type));
                const std::size_t first = static_cast<std::size_t>(3 + ntags);
                if (tok.size() != first + static_cast<std::size_t>(nn)) malformed(ln, "wrong node count for element type");
                if (type == 4) {
                    if (id <= 0) malformed(ln, "element id must be positive");
                    RawTet t{id, {}, phys, ln};
                    for (int k = 0; k < 4; ++k)
                        t.nodes[static_cast<std::size_t>(k)] =
                            detail::parse_number<std::int64_t>(tok[first + static_cast<std::size_t>(k)], ln);
                    raw_tets.push_back(t);
                } else if (phys != 0) {
                    auto& set = node_sets[{dim, phys}];
                    for (std::size_t k = first; k < tok.size(); ++k)
                        set.push_back(detail::parse_number<std::int64_t>(tok[k], ln));
                }
            }
            expect_end("Elements");
            have_elements = true;
        } else if (line.size() > 1 && line.front() == '$' && line.substr(0, 4) != "$End") {
            // Unknown section: skip to its end marker.
            const std::string end = "$End" + std::string(line.substr(1));
            bool closed = false;
            while (reader.next(line))
                if (line == end) {
                    closed = true;
                    break;
                }
            if (!closed) malformed(reader.line_number(), "unterminated section, expected " + end);
        } else {
            malformed(reader.line_number(), "unexpected content '" + std::string(line.substr(0, 40)) + "'");
        }
    }
    if (!have_format) throw Error(ErrorCode::UnsupportedVersion, "missing $MeshFormat");
    if (!have_nodes) malformed(reader.line_number(), "missing $Nodes section");
    if (!have_elements) malformed(reader.line_number(), "missing $Elements section");

    mesh.reindex();
    {
        std::unordered_map<std::int64_t, int> seen;
        for (const auto& nd : mesh.nodes)
            if (++seen[nd.id] > 1) malformed(0, "duplicate node id " + std::to_string(nd.id));
    }

    auto resolve_node = [&](std::int64_t id, std::size_t ln) {
        auto idx = mesh.node_index(id);
        if (!idx)
            throw Error(ErrorCode::DanglingReference,
                        "line " + std::to_string(ln) + ": node id " + std::to_string(id) + " is not defined");
        return *idx;
    };

    mesh.elements.reserve(raw_tets.size());
    for (const auto& t : raw_tets) {
        Tet4Element el;
        el.id = t.id;
        el.group = t.tag;
        for (std::size_t k = 0; k < 4; ++k) el.nodes[k] = resolve_node(t.nodes[k], t.line);
        for (std::size_t a = 0; a < 4; ++a)
            for (std::size_t b = a + 1; b < 4; ++b)
                if (el.nodes[a] == el.nodes[b]) malformed(t.line, "element repeats a node");
        const auto& x = mesh.nodes;
        if (signed_volume(x[el.nodes[0]].x, x[el.nodes[1]].x, x[el.nodes[2]].x, x[el.nodes[3]].x) < 0.0)
            std::swap(el.nodes[2], el.nodes[3]);
        mesh.elements.push_back(el);
    }
    mesh.reindex();
    if (mesh.elements.size() != raw_tets.size()) malformed(0, "internal element count mismatch");
    {
        std::unordered_map<std::int64_t, int> seen;
        for (const auto& el : mesh.elements)
            if (++seen[el.id] > 1) malformed(0, "duplicate element id " + std::to_string(el.id));
    }

    // Volume groups: every tag used by a tet plus every named dim-3 group.
    std::map<int, std::vector<std::size_t>> volume_members;
    for (std::size_t e = 0; e < mesh.elements.size(); ++e)
        if (mesh.elements[e].group != 0) volume_members[mesh.elements[e].group].push_back(e);
    for (const auto& [key, name] : names)
        if (key.first == 3) volume_members[key.second];
    for (auto& [tag, members] : volume_members) {
        auto it = names.find({3, tag});
        mesh.groups.push_back({tag, it != names.end() ? it->second : "volume_" + std::to_string(tag),
                               GroupKind::Volume, std::move(members)});
    }
    for (const auto& [key, name] : names)
        if (key.first < 3) node_sets[key];
    for (auto& [key, ids] : node_sets) {
        std::vector<std::size_t> members;
        members.reserve(ids.size());
        for (auto id : ids) {
            auto idx = mesh.node_index(id);
            if (!idx)
                throw Error(ErrorCode::DanglingReference,
                            "node set tag " + std::to_string(key.second) + " references node " + std::to_string(id));
            members.push_back(*idx);
        }
        std::sort(members.begin(), members.end());
        members.erase(std::unique(members.begin(), members.end()), members.end());
        auto it = names.find(key);
        std::string name = it != names.end() ? it->second : "nodeset_" + std::to_string(key.first) + "_" +
                                                                std::to_string(key.second);
        // Node sets declared at several dimensions under one name merge.
        auto existing = std::find_if(mesh.groups.begin(), mesh.groups.end(), [&](const PhysicalGroup& g) {
            return g.name == name && g.kind == GroupKind::NodeSet;
        });
        if (existing != mesh.groups.end()) {
            existing->members.insert(existing->members.end(), members.begin(), members.end());
            std::sort(existing->members.begin(), existing->members.end());
            existing->members.erase(std::unique(existing->members.begin(), existing->members.end()),
                                    existing->members.end());
        } else {
            mesh.groups.push_back({key.second, std::move(name), GroupKind::NodeSet, std::move(members)});
        }
    }
    for (std::size_t i = 0; i < mesh.groups.size(); ++i)
        for (std::size_t j = i + 1; j < mesh.groups.size(); ++j)
            if (mesh.groups[i].name == mesh.groups[j].name)
                malformed(0, "physical name '" + mesh.groups[i].name + "' is used by a volume and a node set");
    return mesh;
}

/// Writes the mesh back as MSH 2.2 (coordinates in metres, 17 significant
/// digits). Node sets are emitted as tagged point elements.
inline std::string serialize_mesh(const Mesh& mesh) {
    std::string out;
    char buf[160];
    out += "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n";
    // Node sets become dim-0 groups; tags that came from different
    // dimensions may collide there, so duplicates are renumbered.
    std::vector<int> tag(mesh.groups.size());
    {
        std::set<int> used;
        int top = 0;
        for (const auto& g : mesh.groups) top = std::max(top, g.tag);
        for (std::size_t i = 0; i < mesh.groups.size(); ++i) {
            tag[i] = mesh.groups[i].tag;
            if (mesh.groups[i].kind == GroupKind::NodeSet && !used.insert(tag[i]).second) used.insert(tag[i] = ++top);
        }
    }
    out += "$PhysicalNames\n" + std::to_string(mesh.groups.size()) + "\n";
    for (std::size_t i = 0; i < mesh.groups.size(); ++i)
        out += std::to_string(mesh.groups[i].kind == GroupKind::Volume ? 3 : 0) + " " + std::to_string(tag[i]) + " \"" +
               mesh.groups[i].name + "\"\n";
    out += "$EndPhysicalNames\n$Nodes\n" + std::to_string(mesh.nodes.size()) + "\n";
    for (const auto& n : mesh.nodes) {
        std::snprintf(buf, sizeof buf, "%lld %.17g %.17g %.17g\n", static_cast<long long>(n.id), n.x[0], n.x[1],
                      n.x[2]);
        out += buf;
    }
    std::size_t point_count = 0;
    std::int64_t max_id = 0;
    for (const auto& g : mesh.groups)
        if (g.kind == GroupKind::NodeSet) point_count += g.members.size();
    for (const auto& e : mesh.elements) max_id = std::max(max_id, e.id);
    out += "$EndNodes\n$Elements\n" + std::to_string(point_count + mesh.elements.size()) + "\n";
    std::int64_t next_id = max_id + 1;
    for (std::size_t i = 0; i < mesh.groups.size(); ++i) {
        const auto& g = mesh.groups[i];
        if (g.kind != GroupKind::NodeSet) continue;
        for (auto n : g.members) {
            std::snprintf(buf, sizeof buf, "%lld 15 2 %d %d %lld\n", static_cast<long long>(next_id++), tag[i], tag[i],
                          static_cast<long long>(mesh.nodes[n].id));
            out += buf;
        }
    }
    for (const auto& e : mesh.elements) {
        std::snprintf(buf, sizeof buf, "%lld 4 2 %d %d %lld %lld %lld %lld\n", static_cast<long long>(e.id), e.group,
                      e.group, static_cast<long long>(mesh.nodes[e.nodes[0]].id),
                      static_cast<long long>(mesh.nodes[e.nodes[1]].id),
                      static_cast<long long>(mesh.nodes[e.nodes[2]].id),
                      static_cast<long long>(mesh.nodes[e.nodes[3]].id));
        out += buf;
    }
    out += "$EndElements\n";
    return out;
}

struct GroupMembers {
    GroupKind kind = GroupKind::NodeSet;
    std::vector<std::int64_t> ids;  // node ids or element ids, ascending
};

inline GroupMembers resolve_group(const Mesh& mesh, std::string_view name) {
    const auto& g = mesh.group(name);
    GroupMembers out{g.kind, {}};
    out.ids.reserve(g.members.size());
    for (auto m : g.members) out.ids.push_back(g.kind == GroupKind::Volume ? mesh.elements[m].id : mesh.nodes[m].id);
    std::sort(out.ids.begin(), out.ids.end());
    return out;
}

struct QualityReport {
    std::size_t node_count = 0;
    std::size_t element_count = 0;
    std::size_t unused_node_count = 0;
    double min_volume = 0.0;
    double max_volume = 0.0;
    double mean_volume = 0.0;
    double total_volume = 0.0;
    double min_aspect = 0.0;
    double max_aspect = 0.0;
    std::size_t degenerate_count = 0;
    /// Upper edges of the aspect-ratio bins; the last bin is open-ended and
    /// also receives degenerate elements.
    static constexpr std::array<double, 6> aspect_bin_edges{1.5, 2.0, 3.0, 5.0, 10.0, 100.0};
    std::array<std::size_t, 7> aspect_histogram{};
};

/// Longest edge over inradius, normalised so a regular tetrahedron scores 1.
inline double aspect_ratio(const std::array<Vec3, 4>& x) {
    const double vol = std::abs(signed_volume(x));
    double longest = 0.0;
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) longest = std::max(longest, (x[a] - x[b]).norm());
    auto tri_area = [&](int i, int j, int k) { return 0.5 * (x[j] - x[i]).cross(x[k] - x[i]).norm(); };
    const double area = tri_area(0, 1, 2) + tri_area(0, 1, 3) + tri_area(0, 2, 3) + tri_area(1, 2, 3);
    if (vol <= 0.0 || area <= 0.0) return std::numeric_limits<double>::infinity();
    const double inradius = 3.0 * vol / area;
    return longest / (2.0 * std::sqrt(6.0) * inradius);
}

inline QualityReport validate_mesh(const Mesh& mesh, double degeneracy_tolerance = 1e-12) {
    QualityReport r;
    r.node_count = mesh.nodes.size();
    r.element_count = mesh.elements.size();
    std::vector<char> used(mesh.nodes.size(), 0);
    std::vector<double> volumes(mesh.elements.size());
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        for (auto n : mesh.elements[e].nodes) used[n] = 1;
        volumes[e] = signed_volume(mesh.element_coords(e));
        r.total_volume += volumes[e];
    }
    r.unused_node_count = static_cast<std::size_t>(std::count(used.begin(), used.end(), 0));
    if (mesh.elements.empty()) return r;
    r.mean_volume = r.total_volume / static_cast<double>(mesh.elements.size());
    r.min_volume = *std::min_element(volumes.begin(), volumes.end());
    r.max_volume = *std::max_element(volumes.begin(), volumes.end());
    r.min_aspect = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        const bool degenerate = volumes[e] <= degeneracy_tolerance * std::abs(r.mean_volume);
        const double ar = degenerate ? std::numeric_limits<double>::infinity() : aspect_ratio(mesh.element_coords(e));
        if (degenerate) ++r.degenerate_count;
        r.min_aspect = std::min(r.min_aspect, ar);
        r.max_aspect = std::max(r.max_aspect, ar);
        std::size_t bin = 0;
        while (bin < QualityReport::aspect_bin_edges.size() && ar >= QualityReport::aspect_bin_edges[bin]) ++bin;
        ++r.aspect_histogram[bin];
    }
    return r;
}

}  // namespace feaudit

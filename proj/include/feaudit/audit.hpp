#pragma once

// Design-audit verdicts: utilization against permissible stress, deflection
// check, hotspot listing, VTK export and the JSON report.

#include "feaudit/loads.hpp"
#include "feaudit/system.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace feaudit {

inline constexpr const char* toolkit_version = "1.0.0";

struct AuditCriteria {
    std::map<CaseClass, double> permissible{
        {CaseClass::I, 240e6}, {CaseClass::II, 240e6}, {CaseClass::III, 240e6}};
    std::vector<CaseClass> defaulted_classes{CaseClass::I, CaseClass::II, CaseClass::III};
    std::optional<double> deflection_limit;  // [m]; unset = check skipped
    std::vector<std::string> classification;  // e.g. "P3", "E5"

    void validate() const {
        for (const auto& [cls, v] : permissible)
            if (!(v > 0.0) || !std::isfinite(v))
                throw Error(ErrorCode::InvalidModel, "permissible stress must be > 0");
        if (deflection_limit && !(*deflection_limit > 0.0))
            throw Error(ErrorCode::InvalidModel, "deflection limit must be > 0");
    }
};

enum class Verdict { Pass, Fail };

inline std::string_view to_string(Verdict v) { return v == Verdict::Pass ? "PASS" : "FAIL"; }

struct GroupMaximum {
    std::string group;
    double von_mises = 0.0;
    std::int64_t element = 0;
};

struct AuditSummary {
    double permissible = 0.0;
    double max_von_mises = 0.0;
    std::int64_t max_element = 0;
    Vec3 max_centroid = Vec3::Zero();
    std::string max_group;
    double max_deflection = 0.0;
    std::int64_t max_node = 0;
    double utilization = 0.0;
    std::optional<double> deflection_limit;
    bool deflection_ok = true;
    Verdict verdict = Verdict::Pass;
    std::vector<GroupMaximum> groups;
};

inline Verdict decide(double utilization, bool deflection_ok) {
    return utilization <= 1.0 && deflection_ok ? Verdict::Pass : Verdict::Fail;
}

inline std::string group_name(const Mesh& mesh, int tag) {
    const auto* g = mesh.volume_group_by_tag(tag);
    return g ? g->name : std::string();
}

/// Maxima over elements (ties: lowest element id) and nodes (ties: lowest
/// node id), plus per-volume-group maxima.
inline AuditSummary audit(const Mesh& mesh, const SolutionField& sol, double permissible,
                          std::optional<double> deflection_limit) {
    if (!(permissible > 0.0)) throw Error(ErrorCode::InvalidModel, "permissible stress must be > 0");
    AuditSummary s;
    s.permissible = permissible;
    s.deflection_limit = deflection_limit;
    std::optional<std::size_t> best;
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        const double v = sol.von_mises[e];
        if (!best || v > sol.von_mises[*best] ||
            (v == sol.von_mises[*best] && mesh.elements[e].id < mesh.elements[*best].id))
            best = e;
    }
    if (best) {
        s.max_von_mises = sol.von_mises[*best];
        s.max_element = mesh.elements[*best].id;
        s.max_centroid = mesh.centroid(*best);
        s.max_group = group_name(mesh, mesh.elements[*best].group);
    }
    std::optional<std::size_t> far;
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        const double d = sol.displacement[i].norm();
        const double cur = far ? sol.displacement[*far].norm() : -1.0;
        if (!far || d > cur || (d == cur && mesh.nodes[i].id < mesh.nodes[*far].id)) far = i;
    }
    if (far) {
        s.max_deflection = sol.displacement[*far].norm();
        s.max_node = mesh.nodes[*far].id;
    }
    s.utilization = s.max_von_mises / permissible;
    s.deflection_ok = !deflection_limit || s.max_deflection <= *deflection_limit;
    s.verdict = decide(s.utilization, s.deflection_ok);

    for (const auto& g : mesh.groups) {
        if (g.kind != GroupKind::Volume || g.members.empty()) continue;
        GroupMaximum gm{g.name, -1.0, 0};
        for (auto e : g.members) {
            const double v = sol.von_mises[e];
            if (v > gm.von_mises || (v == gm.von_mises && mesh.elements[e].id < gm.element)) {
                gm.von_mises = v;
                gm.element = mesh.elements[e].id;
            }
        }
        s.groups.push_back(gm);
    }
    return s;
}

struct Hotspot {
    std::int64_t element = 0;
    double von_mises = 0.0;
    Vec3 centroid = Vec3::Zero();
    std::string group;
};

/// Top-n elements by von Mises, descending, ties by ascending element id.
inline std::vector<Hotspot> hotspot_table(const Mesh& mesh, const SolutionField& sol, std::size_t n) {
    std::vector<std::size_t> order(mesh.elements.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto before = [&](std::size_t a, std::size_t b) {
        if (sol.von_mises[a] != sol.von_mises[b]) return sol.von_mises[a] > sol.von_mises[b];
        return mesh.elements[a].id < mesh.elements[b].id;
    };
    const std::size_t k = std::min(n, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), before);
    std::vector<Hotspot> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        const auto e = order[i];
        out.push_back({mesh.elements[e].id, sol.von_mises[e], mesh.centroid(e), group_name(mesh, mesh.elements[e].group)});
    }
    return out;
}

/// Volume-weighted average of adjacent element values at each node.
inline std::vector<double> nodal_average(const Mesh& mesh, const std::vector<double>& element_values) {
    std::vector<double> sum(mesh.nodes.size(), 0.0), weight(mesh.nodes.size(), 0.0);
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        const double v = std::abs(signed_volume(mesh.element_coords(e)));
        for (auto n : mesh.elements[e].nodes) {
            sum[n] += v * element_values[e];
            weight[n] += v;
        }
    }
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = weight[i] > 0.0 ? sum[i] / weight[i] : 0.0;
    return sum;
}

/// Legacy ASCII VTK 3.0 unstructured grid. With a solution, points are moved
/// by `scale` times the displacement (display only) and the displacement,
/// nodal-averaged and element von Mises are attached.
inline std::string export_vtk(const Mesh& mesh, const SolutionField* sol, double scale = 1.0,
                              const std::string& title = "feaudit") {
    std::string out;
    out.reserve(mesh.nodes.size() * 80 + mesh.elements.size() * 60);
    char buf[256];
    out += "# vtk DataFile Version 3.0\n" + title + "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out += "POINTS " + std::to_string(mesh.nodes.size()) + " double\n";
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        Vec3 x = mesh.nodes[i].x;
        if (sol) x += scale * sol->displacement[i];
        std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", x[0], x[1], x[2]);
        out += buf;
    }
    out += "CELLS " + std::to_string(mesh.elements.size()) + " " + std::to_string(5 * mesh.elements.size()) + "\n";
    for (const auto& el : mesh.elements) {
        std::snprintf(buf, sizeof buf, "4 %zu %zu %zu %zu\n", el.nodes[0], el.nodes[1], el.nodes[2], el.nodes[3]);
        out += buf;
    }
    out += "CELL_TYPES " + std::to_string(mesh.elements.size()) + "\n";
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) out += "10\n";

    if (sol) {
        out += "POINT_DATA " + std::to_string(mesh.nodes.size()) + "\nVECTORS displacement double\n";
        for (const auto& u : sol->displacement) {
            std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", u[0], u[1], u[2]);
            out += buf;
        }
        out += "SCALARS von_mises_nodal double 1\nLOOKUP_TABLE default\n";
        for (double v : nodal_average(mesh, sol->von_mises)) {
            std::snprintf(buf, sizeof buf, "%.17g\n", v);
            out += buf;
        }
    }
    out += "CELL_DATA " + std::to_string(mesh.elements.size()) + "\n";
    if (sol) {
        out += "SCALARS von_mises double 1\nLOOKUP_TABLE default\n";
        for (double v : sol->von_mises) {
            std::snprintf(buf, sizeof buf, "%.17g\n", v);
            out += buf;
        }
    }
    out += "SCALARS group int 1\nLOOKUP_TABLE default\n";
    for (const auto& el : mesh.elements) out += std::to_string(el.group) + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Report

struct MaterialEcho {
    std::string name;
    std::vector<std::string> groups;
    Material material;
    std::vector<std::string> defaulted;  // fields filled from steel defaults
};

struct CombinationResult {
    Combination combination;
    AuditSummary summary;
    std::vector<Hotspot> hotspots;
    Vec3 applied_total = Vec3::Zero();
    Vec3 reaction_total = Vec3::Zero();
    double relative_residual = 0.0;
    std::string vtk_file;  // relative to the output directory, empty if not written
};

struct InputDigest {
    std::string role;  // "model" or "mesh"
    std::string path;
    std::uint64_t fnv1a64 = 0;
};

struct AuditReport {
    std::string title;
    std::string length_unit = "m";
    std::size_t node_count = 0;
    std::size_t element_count = 0;
    std::string solver;
    std::vector<MaterialEcho> materials;
    AuditCriteria criteria;
    std::vector<std::string> warnings;
    std::vector<CombinationResult> combinations;
    std::vector<InputDigest> inputs;

    std::string governing() const {
        std::vector<std::pair<std::string, double>> u;
        for (const auto& c : combinations) u.emplace_back(c.combination.name, c.summary.utilization);
        return governing_combination(u);
    }

    Verdict verdict() const {
        for (const auto& c : combinations)
            if (c.summary.verdict == Verdict::Fail) return Verdict::Fail;
        return Verdict::Pass;
    }
};

namespace detail {

inline nlohmann::ordered_json vec_json(const Vec3& v) { return nlohmann::ordered_json::array({v.x(), v.y(), v.z()}); }

}  // namespace detail

inline nlohmann::ordered_json report_json(const AuditReport& r) {
    using nlohmann::ordered_json;
    if (r.combinations.empty()) throw Error(ErrorCode::InvalidModel, "report has no audited combination");
    ordered_json j;
    j["schema"] = "feaudit.report/1";
    j["toolkit"] = {{"name", "feaudit"}, {"version", toolkit_version}, {"solver", r.solver}};
    ordered_json inputs = ordered_json::array();
    for (const auto& in : r.inputs) inputs.push_back({{"role", in.role}, {"path", in.path}, {"fnv1a64", hex64(in.fnv1a64)}});
    j["inputs"] = inputs;

    ordered_json model;
    model["title"] = r.title;
    model["length_unit"] = r.length_unit;
    model["nodes"] = r.node_count;
    model["elements"] = r.element_count;
    ordered_json mats = ordered_json::array();
    for (const auto& m : r.materials)
        mats.push_back({{"name", m.name},
                        {"groups", m.groups},
                        {"E", m.material.E},
                        {"nu", m.material.nu},
                        {"rho", m.material.rho},
                        {"yield", m.material.yield},
                        {"defaulted", m.defaulted}});
    model["materials"] = mats;
    j["model"] = model;

    ordered_json crit;
    ordered_json perm;
    for (const auto& [cls, v] : r.criteria.permissible) perm[std::string(to_string(cls))] = v;
    crit["permissible_stress"] = perm;
    ordered_json defaulted = ordered_json::array();
    for (auto c : r.criteria.defaulted_classes) defaulted.push_back(std::string(to_string(c)));
    crit["permissible_defaulted"] = defaulted;
    crit["deflection_limit"] = r.criteria.deflection_limit ? ordered_json(*r.criteria.deflection_limit) : ordered_json();
    crit["classification"] = r.criteria.classification;
    j["criteria"] = crit;
    j["warnings"] = r.warnings;

    ordered_json combos = ordered_json::array();
    for (const auto& c : r.combinations) {
        const auto& s = c.summary;
        ordered_json cj;
        cj["name"] = c.combination.name;
        cj["class"] = std::string(to_string(c.combination.case_class));
        ordered_json cases = ordered_json::array();
        for (const auto& [name, w] : c.combination.cases) cases.push_back({{"case", name}, {"weight", w}});
        cj["cases"] = cases;
        cj["permissible_stress"] = s.permissible;
        cj["max_von_mises"] = {{"value", s.max_von_mises},
                               {"element", s.max_element},
                               {"centroid", detail::vec_json(s.max_centroid)},
                               {"group", s.max_group}};
        cj["utilization"] = s.utilization;
        cj["max_deflection"] = {{"value", s.max_deflection}, {"node", s.max_node}};
        cj["deflection_check"] = !s.deflection_limit ? "skipped" : (s.deflection_ok ? "PASS" : "FAIL");
        cj["verdict"] = std::string(to_string(s.verdict));
        ordered_json groups = ordered_json::array();
        for (const auto& g : s.groups)
            groups.push_back({{"group", g.group}, {"max_von_mises", g.von_mises}, {"element", g.element}});
        cj["groups"] = groups;
        cj["equilibrium"] = {{"applied", detail::vec_json(c.applied_total)},
                             {"reactions", detail::vec_json(c.reaction_total)},
                             {"relative_residual", c.relative_residual}};
        ordered_json hot = ordered_json::array();
        for (const auto& h : c.hotspots)
            hot.push_back({{"element", h.element},
                           {"von_mises", h.von_mises},
                           {"centroid", detail::vec_json(h.centroid)},
                           {"group", h.group}});
        cj["hotspots"] = hot;
        cj["vtk"] = c.vtk_file.empty() ? ordered_json() : ordered_json(c.vtk_file);
        combos.push_back(cj);
    }
    j["combinations"] = combos;
    j["governing_combination"] = r.governing();
    j["verdict"] = std::string(to_string(r.verdict()));
    return j;
}

inline std::string write_report(const AuditReport& r) { return report_json(r).dump(2) + "\n"; }

/// Plain-text rendering of the same report.
inline std::string render_text(const AuditReport& r) {
    std::string out;
    char buf[512];
    out += "Design audit: " + r.title + "\n";
    std::snprintf(buf, sizeof buf, "Model: %zu nodes, %zu TET4 elements, solver %s\n", r.node_count, r.element_count,
                  r.solver.c_str());
    out += buf;
    for (const auto& m : r.materials) {
        std::snprintf(buf, sizeof buf, "Material %s: E=%.4g Pa nu=%.3g rho=%.5g kg/m3 yield=%.4g Pa%s\n", m.name.c_str(),
                      m.material.E, m.material.nu, m.material.rho, m.material.yield,
                      m.defaulted.empty() ? "" : " (defaults used)");
        out += buf;
    }
    for (const auto& w : r.warnings) out += "WARNING: " + w + "\n";
    out += "\n";
    for (const auto& c : r.combinations) {
        const auto& s = c.summary;
        std::snprintf(buf, sizeof buf,
                      "[%s] %-28s class %-3s  max VM %10.4f MPa (element %lld, %s)  allowable %.1f MPa  utilization "
                      "%.4f\n",
                      std::string(to_string(s.verdict)).c_str(), c.combination.name.c_str(),
                      std::string(to_string(c.combination.case_class)).c_str(), s.max_von_mises / 1e6,
                      static_cast<long long>(s.max_element), s.max_group.c_str(), s.permissible / 1e6, s.utilization);
        out += buf;
        if (s.deflection_limit)
            std::snprintf(buf, sizeof buf, "       max deflection %.4f mm at node %lld, limit %.4f mm: %s\n",
                          s.max_deflection * 1e3, static_cast<long long>(s.max_node), *s.deflection_limit * 1e3,
                          s.deflection_ok ? "PASS" : "FAIL");
        else
            std::snprintf(buf, sizeof buf, "       max deflection %.4f mm at node %lld (deflection check skipped)\n",
                          s.max_deflection * 1e3, static_cast<long long>(s.max_node));
        out += buf;
    }
    out += "\nGoverning combination: " + r.governing() + "\nVerdict: " + std::string(to_string(r.verdict())) + "\n";
    return out;
}

}  // namespace feaudit

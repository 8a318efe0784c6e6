#pragma once

// Model file (strict JSON, schema_version 1) and the
// parse -> constrain -> load -> solve -> audit pipeline.

#include "feaudit/audit.hpp"
#include "feaudit/constraints.hpp"
#include "feaudit/loads.hpp"
#include "feaudit/mesh.hpp"
#include "feaudit/reactions.hpp"
#include "feaudit/system.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace feaudit {

struct MaterialSpec {
    std::vector<std::string> groups;
    Material material;
    std::vector<std::string> defaulted;
};

struct OutputOptions {
    double scale = 1.0;  // deformation magnification in VTK output
    bool vtk = true;
    bool text = true;
    std::size_t top = 10;
};

struct ModelFile {
    int schema_version = 1;
    std::string title;
    LengthUnit unit = LengthUnit::Meter;
    std::string mesh_ref;                // as written in the file
    std::filesystem::path mesh_path;     // resolved against the model's directory
    std::vector<MaterialSpec> materials;
    ConstraintSet constraints;
    std::vector<LoadCase> load_cases;
    std::vector<Combination> combinations;
    AuditCriteria criteria;
    std::optional<SuperstructureLayout> superstructure;
    Vec3 gravity{0.0, 0.0, -9.81};
    OutputOptions output;
    SolverKind solver = SolverKind::Direct;
    std::vector<std::string> warnings;

    const LoadCase* load_case(std::string_view name) const {
        for (const auto& lc : load_cases)
            if (lc.name == name) return &lc;
        return nullptr;
    }
};

namespace detail {

using json = nlohmann::json;

[[noreturn]] inline void invalid(const std::string& where, const std::string& what) {
    throw Error(ErrorCode::InvalidModel, where + ": " + what);
}

inline void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
    if (!obj.is_object()) invalid(where, "expected an object");
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || a == key;
        if (!ok) invalid(where, "unknown key '" + key + "'");
    }
}

inline const json& require(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) invalid(where, std::string("missing key '") + key + "'");
    return *it;
}

inline double number(const json& v, const std::string& where) {
    if (!v.is_number()) invalid(where, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) invalid(where, "expected a finite number");
    return d;
}

inline std::string string(const json& v, const std::string& where) {
    if (!v.is_string()) invalid(where, "expected a string");
    return v.get<std::string>();
}

inline Vec3 vec3(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 3) invalid(where, "expected [x, y, z]");
    return {number(v[0], where), number(v[1], where), number(v[2], where)};
}

inline std::vector<std::string> string_list(const json& v, const std::string& where) {
    if (v.is_string()) return {v.get<std::string>()};
    if (!v.is_array()) invalid(where, "expected a string or a list of strings");
    std::vector<std::string> out;
    for (const auto& s : v) out.push_back(string(s, where));
    return out;
}

inline Attachment attachment(const json& j, double len, const std::string& where) {
    const bool has_platform = j.contains("platform");
    const bool has_boom = j.contains("boom");
    if (has_platform == has_boom) invalid(where, "give exactly one of 'platform' or 'boom'");
    if (has_platform) return PlatformPoint{len * vec3(j["platform"], where + ".platform")};
    const auto& b = j["boom"];
    check_keys(b, {"lever", "offset"}, where + ".boom");
    return BoomPoint{len * number(require(b, "lever", where + ".boom"), where + ".boom.lever"),
                     len * (b.contains("offset") ? number(b["offset"], where + ".boom.offset") : 0.0)};
}

inline SuperstructureLayout parse_layout(const json& j, double len) {
    const std::string where = "superstructure";
    check_keys(j, {"origin", "boom_direction", "items", "point_loads", "envelope"}, where);
    SuperstructureLayout L;
    if (j.contains("origin")) L.origin = len * vec3(j["origin"], where + ".origin");
    if (j.contains("boom_direction")) {
        Vec3 d = vec3(j["boom_direction"], where + ".boom_direction");
        d.z() = 0.0;
        if (d.norm() == 0.0) invalid(where, "boom_direction must have a horizontal component");
        L.boom_direction = d.normalized();
    }
    if (j.contains("items")) {
        for (const auto& it : j["items"]) {
            check_keys(it, {"name", "mass", "platform", "boom"}, where + ".items");
            MassItem m;
            m.name = string(require(it, "name", where + ".items"), where + ".items.name");
            m.mass = number(require(it, "mass", where + ".items"), where + ".items.mass");
            if (!(m.mass > 0.0)) invalid(where + ".items." + m.name, "mass must be > 0");
            m.attachment = attachment(it, len, where + ".items." + m.name);
            L.items.push_back(m);
        }
    }
    if (j.contains("point_loads")) {
        for (const auto& it : j["point_loads"]) {
            check_keys(it, {"name", "force", "platform", "boom"}, where + ".point_loads");
            PointLoad p;
            p.name = string(require(it, "name", where + ".point_loads"), where + ".point_loads.name");
            p.force = vec3(require(it, "force", where + ".point_loads"), where + ".point_loads.force");
            p.attachment = attachment(it, len, where + ".point_loads." + p.name);
            L.point_loads.push_back(p);
        }
    }
    if (j.contains("envelope")) {
        const auto& e = j["envelope"];
        check_keys(e, {"psi", "phi"}, where + ".envelope");
        auto range = [&](const char* key, double& lo, double& hi) {
            if (!e.contains(key)) return;
            const auto& r = e[key];
            if (!r.is_array() || r.size() != 2) invalid(where + ".envelope", std::string(key) + " must be [min, max]");
            lo = number(r[0], where + ".envelope");
            hi = number(r[1], where + ".envelope");
        };
        range("psi", L.envelope.psi_min, L.envelope.psi_max);
        range("phi", L.envelope.phi_min, L.envelope.phi_max);
    }
    if (L.items.empty() && L.point_loads.empty()) throw Error(ErrorCode::EmptyLayout, "superstructure has no items");
    return L;
}

}  // namespace detail

inline ModelFile parse_model(std::string_view text, const std::filesystem::path& base_dir = {}) {
    using detail::check_keys;
    using detail::invalid;
    using detail::number;
    using detail::require;
    using detail::string;
    using detail::vec3;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::InvalidModel, std::string("model is not valid JSON: ") + e.what());
    }
    check_keys(j, {"schema_version", "title", "units", "mesh", "materials", "constraints", "load_cases", "combinations",
                   "audit", "superstructure", "gravity", "output", "solver"},
               "model");
    ModelFile m;
    const auto& version = require(j, "schema_version", "model");
    if (!version.is_number_integer() || version.get<int>() != 1)
        throw Error(ErrorCode::UnsupportedVersion, "model schema_version must be 1");
    m.title = j.contains("title") ? string(j["title"], "title") : std::string();

    if (j.contains("units")) {
        check_keys(j["units"], {"length"}, "units");
        const auto u = string(require(j["units"], "length", "units"), "units.length");
        if (u == "m") m.unit = LengthUnit::Meter;
        else if (u == "mm") m.unit = LengthUnit::Millimeter;
        else invalid("units.length", "must be \"m\" or \"mm\"");
    }
    const double len = to_meters(m.unit);

    m.mesh_ref = string(require(j, "mesh", "model"), "mesh");
    m.mesh_path = base_dir / m.mesh_ref;
    if (j.contains("gravity")) m.gravity = vec3(j["gravity"], "gravity");

    for (const auto& mj : require(j, "materials", "model")) {
        check_keys(mj, {"name", "groups", "E", "nu", "rho", "yield"}, "materials");
        MaterialSpec spec;
        spec.material.name = string(require(mj, "name", "materials"), "materials.name");
        spec.groups = detail::string_list(require(mj, "groups", "materials"), "materials.groups");
        auto field = [&](const char* key, double& dst) {
            if (mj.contains(key)) dst = number(mj[key], "materials." + spec.material.name + "." + key);
            else spec.defaulted.emplace_back(key);
        };
        field("E", spec.material.E);
        field("nu", spec.material.nu);
        field("rho", spec.material.rho);
        field("yield", spec.material.yield);
        spec.material.validate();
        if (!spec.defaulted.empty()) {
            std::string list;
            for (const auto& d : spec.defaulted) list += (list.empty() ? "" : ", ") + d;
            m.warnings.push_back("material '" + spec.material.name + "' uses default steel values for " + list);
        }
        m.materials.push_back(spec);
    }
    if (m.materials.empty()) invalid("materials", "at least one material is required");

    if (j.contains("constraints")) {
        const auto& c = j["constraints"];
        check_keys(c, {"dirichlet", "couplings", "joints", "springs"}, "constraints");
        if (c.contains("couplings"))
            for (const auto& cj : c["couplings"]) {
                check_keys(cj, {"name", "slaves", "reference"}, "constraints.couplings");
                RigidCoupling rc;
                rc.name = string(require(cj, "name", "constraints.couplings"), "constraints.couplings.name");
                rc.slaves = string(require(cj, "slaves", "constraints.couplings"), "constraints.couplings.slaves");
                rc.reference = len * vec3(require(cj, "reference", "constraints.couplings"), "couplings.reference");
                m.constraints.couplings.push_back(rc);
            }
        if (c.contains("dirichlet"))
            for (const auto& dj : c["dirichlet"]) {
                check_keys(dj, {"target", "axes", "values"}, "constraints.dirichlet");
                DirichletBC bc;
                bc.target = string(require(dj, "target", "constraints.dirichlet"), "dirichlet.target");
                const auto axes = detail::string_list(require(dj, "axes", "constraints.dirichlet"), "dirichlet.axes");
                if (axes.empty()) invalid("dirichlet." + bc.target, "axes must not be empty");
                for (const auto& a : axes) {
                    auto ax = parse_axis(a);
                    if (!ax) invalid("dirichlet." + bc.target, "unknown axis '" + a + "'");
                    bc.fixed[static_cast<std::size_t>(*ax)] = 0.0;
                }
                if (dj.contains("values")) {
                    check_keys(dj["values"], {"x", "y", "z", "rx", "ry", "rz"}, "dirichlet." + bc.target + ".values");
                    for (const auto& [key, v] : dj["values"].items()) {
                        auto ax = parse_axis(key);
                        auto& slot = bc.fixed[static_cast<std::size_t>(*ax)];
                        if (!slot) invalid("dirichlet." + bc.target, "value given for free axis '" + key + "'");
                        const bool rotation = static_cast<int>(*ax) >= 3;
                        slot = (rotation ? 1.0 : len) * number(v, "dirichlet.values");
                    }
                }
                m.constraints.dirichlet.push_back(bc);
            }
        if (c.contains("joints"))
            for (const auto& jj : c["joints"]) {
                check_keys(jj, {"name", "side_a", "side_b", "axis"}, "constraints.joints");
                RevoluteJoint rj;
                rj.name = string(require(jj, "name", "constraints.joints"), "joints.name");
                rj.side_a = string(require(jj, "side_a", "constraints.joints"), "joints.side_a");
                rj.side_b = string(require(jj, "side_b", "constraints.joints"), "joints.side_b");
                rj.axis = vec3(require(jj, "axis", "constraints.joints"), "joints.axis");
                if (rj.axis.norm() == 0.0) invalid("joints." + rj.name, "axis must be non-zero");
                rj.axis.normalize();
                m.constraints.joints.push_back(rj);
            }
        if (c.contains("springs"))
            for (const auto& sj : c["springs"]) {
                check_keys(sj, {"name", "target", "dof", "stiffness"}, "constraints.springs");
                Spring s;
                s.name = string(require(sj, "name", "constraints.springs"), "springs.name");
                s.target = string(require(sj, "target", "constraints.springs"), "springs.target");
                if (sj.contains("dof")) {
                    auto ax = parse_axis(string(sj["dof"], "springs.dof"));
                    if (!ax) invalid("springs." + s.name, "unknown dof");
                    s.dof = *ax;
                }
                s.stiffness = number(require(sj, "stiffness", "constraints.springs"), "springs.stiffness");
                m.constraints.springs.push_back(s);
            }
    }

    if (j.contains("superstructure")) m.superstructure = detail::parse_layout(j["superstructure"], len);

    std::set<std::string> case_names;
    for (const auto& lj : require(j, "load_cases", "model")) {
        check_keys(lj, {"name", "category", "loads"}, "load_cases");
        LoadCase lc;
        lc.name = string(require(lj, "name", "load_cases"), "load_cases.name");
        if (!case_names.insert(lc.name).second) invalid("load_cases", "duplicate name '" + lc.name + "'");
        const auto cat = string(require(lj, "category", "load_cases"), "load_cases.category");
        auto parsed = parse_load_category(cat);
        if (!parsed) invalid("load_cases." + lc.name, "unknown category '" + cat + "'");
        lc.category = *parsed;
        const std::string where = "load_cases." + lc.name;
        for (const auto& part : require(lj, "loads", where)) {
            const auto type = string(require(part, "type", where), where + ".type");
            if (type == "gravity") {
                check_keys(part, {"type", "g"}, where);
                lc.constituents.emplace_back(GravityLoad{part.contains("g") ? vec3(part["g"], where + ".g") : m.gravity});
            } else if (type == "nodal_force") {
                check_keys(part, {"type", "target", "total", "per_node"}, where);
                NodalForceLoad nf;
                nf.target = string(require(part, "target", where), where + ".target");
                if (part.contains("total") == part.contains("per_node")) invalid(where, "give exactly one of 'total' or 'per_node'");
                nf.per_node = part.contains("per_node");
                nf.force = vec3(nf.per_node ? part["per_node"] : part["total"], where + ".force");
                lc.constituents.emplace_back(nf);
            } else if (type == "traction") {
                check_keys(part, {"type", "target", "traction"}, where);
                lc.constituents.emplace_back(TractionLoad{string(require(part, "target", where), where + ".target"),
                                                          vec3(require(part, "traction", where), where + ".traction")});
            } else if (type == "wrench") {
                check_keys(part, {"type", "coupling", "force", "moment", "scale"}, where);
                WrenchLoad w;
                w.coupling = string(require(part, "coupling", where), where + ".coupling");
                const double s = part.contains("scale") ? number(part["scale"], where + ".scale") : 1.0;
                if (part.contains("force")) w.wrench.force = s * vec3(part["force"], where + ".force");
                if (part.contains("moment")) w.wrench.moment = s * vec3(part["moment"], where + ".moment");
                lc.constituents.emplace_back(w);
            } else if (type == "superstructure") {
                check_keys(part, {"type", "coupling", "psi", "phi", "scale"}, where);
                if (!m.superstructure) throw Error(ErrorCode::EmptyLayout, where + ": model has no superstructure section");
                PoseAngles pose{number(require(part, "psi", where), where + ".psi"),
                                number(require(part, "phi", where), where + ".phi")};
                if (!m.superstructure->envelope.contains(pose))
                    m.warnings.push_back(where + ": pose outside the machine envelope");
                const double s = part.contains("scale") ? number(part["scale"], where + ".scale") : 1.0;
                auto w = compute_wrench(*m.superstructure, pose, m.gravity);
                WrenchLoad wl{string(require(part, "coupling", where), where + ".coupling"), {}};
                wl.wrench.force = s * w.force;
                wl.wrench.moment = s * w.moment;
                lc.constituents.emplace_back(wl);
            } else {
                invalid(where, "unknown load type '" + type + "'");
            }
        }
        m.load_cases.push_back(lc);
    }

    std::set<std::string> combo_names;
    for (const auto& cj : require(j, "combinations", "model")) {
        check_keys(cj, {"name", "class", "cases", "permissible_stress"}, "combinations");
        Combination c;
        c.name = string(require(cj, "name", "combinations"), "combinations.name");
        if (!combo_names.insert(c.name).second) invalid("combinations", "duplicate name '" + c.name + "'");
        const std::string where = "combinations." + c.name;
        auto cls = parse_case_class(string(require(cj, "class", where), where + ".class"));
        if (!cls) invalid(where, "class must be I, II or III");
        c.case_class = *cls;
        for (const auto& term : require(cj, "cases", where)) {
            check_keys(term, {"case", "weight"}, where + ".cases");
            auto name = string(require(term, "case", where), where + ".case");
            const double w = term.contains("weight") ? number(term["weight"], where + ".weight") : 1.0;
            const auto* lc = m.load_case(name);
            if (!lc) invalid(where, "unknown load case '" + name + "'");
            if (!class_admits(c.case_class, group_of(lc->category)))
                invalid(where, "load case '" + name + "' (" + std::string(to_string(lc->category)) +
                                   ") is not admissible in class " + std::string(to_string(c.case_class)));
            c.cases.emplace_back(std::move(name), w);
        }
        if (c.cases.empty()) invalid(where, "combination has no load case");
        if (cj.contains("permissible_stress")) {
            c.permissible = number(cj["permissible_stress"], where + ".permissible_stress");
            if (!(*c.permissible > 0.0)) invalid(where, "permissible_stress must be > 0");
        }
        m.combinations.push_back(c);
    }
    if (m.combinations.empty()) invalid("combinations", "at least one combination is required");

    if (j.contains("audit")) {
        const auto& a = j["audit"];
        check_keys(a, {"permissible_stress", "deflection_limit", "classification"}, "audit");
        if (a.contains("permissible_stress")) {
            check_keys(a["permissible_stress"], {"I", "II", "III"}, "audit.permissible_stress");
            for (const auto& [key, v] : a["permissible_stress"].items()) {
                auto cls = *parse_case_class(key);
                m.criteria.permissible[cls] = number(v, "audit.permissible_stress." + key);
                std::erase(m.criteria.defaulted_classes, cls);
            }
        }
        if (a.contains("deflection_limit") && !a["deflection_limit"].is_null())
            m.criteria.deflection_limit = len * number(a["deflection_limit"], "audit.deflection_limit");
        if (a.contains("classification")) m.criteria.classification = detail::string_list(a["classification"], "audit.classification");
    }
    m.criteria.validate();
    for (auto cls : m.criteria.defaulted_classes) {
        bool used = false;
        for (const auto& c : m.combinations) used = used || (c.case_class == cls && !c.permissible);
        if (used)
            m.warnings.push_back("class " + std::string(to_string(cls)) +
                                 " permissible stress defaulted to 240 MPa (conservative)");
    }
    if (!m.criteria.deflection_limit) m.warnings.push_back("deflection check skipped: no deflection_limit given");

    if (j.contains("output")) {
        const auto& o = j["output"];
        check_keys(o, {"scale", "vtk", "text", "top"}, "output");
        if (o.contains("scale")) m.output.scale = number(o["scale"], "output.scale");
        if (o.contains("vtk")) m.output.vtk = o["vtk"].get<bool>();
        if (o.contains("text")) m.output.text = o["text"].get<bool>();
        if (o.contains("top")) m.output.top = o["top"].get<std::size_t>();
    }
    if (j.contains("solver")) {
        const auto s = string(j["solver"], "solver");
        if (s == "direct") m.solver = SolverKind::Direct;
        else if (s == "cg") m.solver = SolverKind::ConjugateGradient;
        else invalid("solver", "must be \"direct\" or \"cg\"");
    }
    return m;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& p, std::string_view content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + p.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + p.string());
}

/// A parsed and cross-checked model ready for solving.
struct PreparedModel {
    ModelFile model;
    Mesh mesh;
    ElementMaterials materials;
    Transformation transformation;
    RigidBodyCheck rigid;
    QualityReport quality;
    std::string model_text;
    std::string mesh_text;
    std::filesystem::path model_path;
};

inline PreparedModel prepare_model(const std::filesystem::path& model_path) {
    PreparedModel p;
    p.model_path = model_path;
    p.model_text = read_file(model_path);
    p.model = parse_model(p.model_text, model_path.parent_path());
    p.mesh_text = read_file(p.model.mesh_path);
    p.mesh = parse_mesh(p.mesh_text, p.model.unit);
    p.quality = validate_mesh(p.mesh);
    if (p.quality.degenerate_count > 0)
        throw Error(ErrorCode::DegenerateElement,
                    std::to_string(p.quality.degenerate_count) + " degenerate element(s) in the mesh");

    std::map<std::string, Material> by_group;
    for (const auto& spec : p.model.materials)
        for (const auto& g : spec.groups) {
            if (by_group.contains(g)) throw Error(ErrorCode::InvalidModel, "group '" + g + "' has two materials");
            if (!p.mesh.find_group(g)) throw Error(ErrorCode::UnknownGroup, "material group '" + g + "' is not in the mesh");
            by_group[g] = spec.material;
        }
    p.materials = assign_materials(p.mesh, by_group);
    p.transformation = build_transformation(p.mesh, p.model.constraints);
    if (p.quality.unused_node_count > 0)
        p.model.warnings.push_back(std::to_string(p.quality.unused_node_count) +
                                   " mesh node(s) belong to no element and are held fixed");

    // Resolve every load target now so `check` reports them.
    for (const auto& lc : p.model.load_cases)
        (void)load_case_vector(p.mesh, p.materials, p.model.constraints, p.transformation.space, lc);

    p.rigid = check_rigid_body_constrained(p.mesh, p.transformation);
    return p;
}

struct AuditOptions {
    std::filesystem::path out_dir;
    std::optional<double> scale;          // overrides output.scale
    std::optional<SolverKind> solver;     // overrides the model's solver
    std::optional<std::size_t> top;       // overrides output.top
    double load_factor = 1.0;             // multiplies every combination weight
    unsigned threads = 1;
    bool write_files = true;
};

struct AuditRun {
    AuditReport report;
    std::vector<SolutionField> solutions;  // per combination
};

inline std::string file_stem(const std::string& name) {
    std::string out;
    for (char c : name) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
    return out.empty() ? "combination" : out;
}

inline AuditRun run_audit(const PreparedModel& p, const AuditOptions& opt) {
    if (!p.rigid.constrained) {
        std::string modes;
        for (const auto& m : p.rigid.free_modes) modes += (modes.empty() ? "" : ", ") + m;
        throw Error(ErrorCode::NotPositiveDefinite, "structure is not fully supported, rigid mode: " + modes);
    }
    const auto& M = p.model;
    SolverOptions so;
    so.kind = opt.solver.value_or(M.solver);
    so.threads = opt.threads;
    const auto assembly = assemble(p.mesh, p.materials, opt.threads);
    StaticSolver solver(p.mesh, p.materials, p.transformation, assembly, so);

    std::map<std::string, Eigen::VectorXd> case_vectors;
    for (const auto& lc : M.load_cases)
        case_vectors.emplace(lc.name, load_case_vector(p.mesh, p.materials, M.constraints, p.transformation.space, lc));

    AuditRun run;
    auto& r = run.report;
    r.title = M.title;
    r.length_unit = M.unit == LengthUnit::Millimeter ? "mm" : "m";
    r.node_count = p.mesh.nodes.size();
    r.element_count = p.mesh.elements.size();
    r.solver = so.kind == SolverKind::Direct ? direct_backend_name() : "cg";
    r.criteria = M.criteria;
    r.warnings = M.warnings;
    if (opt.load_factor != 1.0) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "all combination weights multiplied by %.17g", opt.load_factor);
        r.warnings.emplace_back(buf);
    }
    for (const auto& spec : M.materials) r.materials.push_back({spec.material.name, spec.groups, spec.material, spec.defaulted});
    r.inputs.push_back({"model", p.model_path.filename().string(), fnv1a64(p.model_text)});
    r.inputs.push_back({"mesh", M.mesh_ref, fnv1a64(p.mesh_text)});

    const double scale = opt.scale.value_or(M.output.scale);
    const std::size_t top = opt.top.value_or(M.output.top);
    if (opt.write_files && !opt.out_dir.empty()) std::filesystem::create_directories(opt.out_dir);

    for (const auto& c : M.combinations) {
        std::vector<std::pair<const Eigen::VectorXd*, double>> terms;
        for (const auto& [name, w] : c.cases) terms.emplace_back(&case_vectors.at(name), w * opt.load_factor);
        const Eigen::VectorXd f = combine(terms);
        SolutionField sol = solver.solve(f);

        CombinationResult cr;
        cr.combination = c;
        const double permissible = c.permissible.value_or(M.criteria.permissible.at(c.case_class));
        cr.summary = audit(p.mesh, sol, permissible, M.criteria.deflection_limit);
        cr.hotspots = hotspot_table(p.mesh, sol, top);
        for (Eigen::Index d = 0; d < f.size(); ++d) {
            const int ax = p.transformation.space.translation_axis(static_cast<std::size_t>(d));
            if (ax >= 0) cr.applied_total[ax] += f[d];
        }
        cr.reaction_total = sol.reaction_total();
        cr.relative_residual = sol.relative_residual;
        const std::string stem = file_stem(c.name);
        if (opt.write_files && !opt.out_dir.empty()) {
            if (M.output.vtk) {
                cr.vtk_file = stem + ".vtk";
                write_file(opt.out_dir / cr.vtk_file, export_vtk(p.mesh, &sol, scale, M.title + " / " + c.name));
            }
        }
        r.combinations.push_back(cr);
        run.solutions.push_back(std::move(sol));
    }

    if (opt.write_files && !opt.out_dir.empty()) {
        const auto full = report_json(r);
        for (const auto& cj : full["combinations"])
            write_file(opt.out_dir / (file_stem(cj["name"].get<std::string>()) + ".summary.json"), cj.dump(2) + "\n");
        write_file(opt.out_dir / "report.json", full.dump(2) + "\n");
        if (M.output.text) write_file(opt.out_dir / "report.txt", render_text(r));
    }
    return run;
}

/// Pose grid: "a,b,c" or "start:step:stop" (stop included within 1e-9·step).
inline std::vector<double> parse_grid(std::string_view text) {
    auto num = [&](std::string_view t) {
        std::string s(t);
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v))
            throw Error(ErrorCode::InvalidModel, "bad grid value '" + s + "'");
        return v;
    };
    std::vector<double> out;
    if (text.empty()) throw Error(ErrorCode::InvalidModel, "empty pose grid");
    if (text.find(':') != std::string_view::npos) {
        const auto a = text.find(':');
        const auto b = text.find(':', a + 1);
        if (b == std::string_view::npos) throw Error(ErrorCode::InvalidModel, "range grid must be start:step:stop");
        const double start = num(text.substr(0, a)), step = num(text.substr(a + 1, b - a - 1)),
                     stop = num(text.substr(b + 1));
        if (!(step > 0.0) || stop < start) throw Error(ErrorCode::InvalidModel, "range grid needs step > 0 and stop >= start");
        const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
        for (std::size_t i = 0; i <= n; ++i) out.push_back(start + static_cast<double>(i) * step);
        return out;
    }
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto next = text.find(',', pos);
        if (next == std::string_view::npos) next = text.size();
        out.push_back(num(text.substr(pos, next - pos)));
        pos = next + 1;
    }
    return out;
}

}  // namespace feaudit

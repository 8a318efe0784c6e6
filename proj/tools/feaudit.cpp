// feaudit: check | audit | reactions | export

#include "feaudit/feaudit.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>

namespace fs = std::filesystem;
using namespace feaudit;

namespace {

unsigned env_threads() {
    const char* v = std::getenv("AUDIT_THREADS");
    if (!v || !*v) return 1;
    char* end = nullptr;
    const long n = std::strtol(v, &end, 10);
    if (*end != '\0' || n < 1) return 1;
    return detail::thread_budget(static_cast<unsigned>(n));
}

std::string rigid_message(const RigidBodyCheck& rc) {
    std::string s;
    for (const auto& m : rc.free_modes) s += "rigid mode: " + m + "\n";
    return s;
}

int cmd_check(const fs::path& model_path) {
    const auto p = prepare_model(model_path);
    std::printf("model: %s\n", p.model.title.c_str());
    std::printf("nodes: %zu  elements: %zu  groups: %zu\n", p.mesh.nodes.size(), p.mesh.elements.size(),
                p.mesh.groups.size());
    std::printf("volume: %.6g m^3  min aspect: %.4g  max aspect: %.4g\n", p.quality.total_volume,
                p.quality.min_aspect, p.quality.max_aspect);
    std::printf("masters: %zu  fixed: %zu\n", p.transformation.master_count(), p.transformation.fixed.size());
    for (const auto& w : p.model.warnings) std::printf("warning: %s\n", w.c_str());
    if (!p.rigid.constrained) {
        std::fputs(rigid_message(p.rigid).c_str(), stderr);
        return 3;
    }
    std::puts("check: OK");
    return 0;
}

int cmd_audit(const fs::path& model_path, const fs::path& out_dir, const AuditOptions& base) {
    const auto p = prepare_model(model_path);
    if (!p.rigid.constrained) {
        std::fputs(rigid_message(p.rigid).c_str(), stderr);
        return 3;
    }
    AuditOptions opt = base;
    opt.out_dir = out_dir;
    opt.threads = env_threads();
    const auto run = run_audit(p, opt);
    std::fputs(render_text(run.report).c_str(), stdout);
    return run.report.verdict() == Verdict::Pass ? 0 : 1;
}

int cmd_reactions(const fs::path& model_path, const std::string& psi, const std::string& phi, const fs::path& out) {
    const auto psi_grid = parse_grid(psi);
    const auto phi_grid = parse_grid(phi);
    const auto model = parse_model(read_file(model_path), model_path.parent_path());
    if (!model.superstructure) throw Error(ErrorCode::EmptyLayout, "model has no superstructure layout");
    const auto table = sweep_envelope(*model.superstructure, psi_grid, phi_grid, model.gravity);
    const auto csv = envelope_csv(table);
    const auto& g = table.rows[table.governing];
    char line[256];
    std::snprintf(line, sizeof line, "governing pose: psi=%.17g deg, phi=%.17g deg, overturning moment=%.17g N m\n",
                  g.pose.psi, g.pose.phi, overturning_moment(g.wrench));
    if (out.empty()) {
        std::fputs(csv.c_str(), stdout);
        std::fputs(line, stderr);
    } else {
        write_file(out, csv);
        std::fputs(line, stdout);
    }
    for (const auto& r : table.rows)
        if (!model.superstructure->envelope.contains(r.pose)) {
            std::fputs("warning: grid leaves the machine envelope\n", stderr);
            break;
        }
    return 0;
}

int cmd_export(const fs::path& input, const fs::path& output, const std::string& unit) {
    Mesh mesh;
    if (input.extension() == ".json") {
        const auto model = parse_model(read_file(input), input.parent_path());
        mesh = parse_mesh(read_file(model.mesh_path), model.unit);
    } else {
        mesh = parse_mesh(read_file(input), unit == "mm" ? LengthUnit::Millimeter : LengthUnit::Meter);
    }
    if (output.extension() == ".vtk") write_file(output, export_vtk(mesh, nullptr, 1.0, input.filename().string()));
    else if (output.extension() == ".msh") write_file(output, serialize_mesh(mesh));
    else throw Error(ErrorCode::InvalidModel, "output must end in .vtk or .msh");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Static FE design audit of tetrahedral solid models"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(toolkit_version));

    std::string model, out_dir, out_file, input, output, unit = "m", psi, phi, solver;
    AuditOptions aopt;
    double scale = 0.0, load_factor = 1.0;
    std::size_t top = 0;

    auto* check = app.add_subcommand("check", "validate mesh, model and supports");
    check->add_option("model", model, "model file")->required();

    auto* audit = app.add_subcommand("audit", "solve every combination and write the audit report");
    audit->add_option("model", model, "model file")->required();
    audit->add_option("out-dir", out_dir, "output directory")->required();
    auto* scale_opt = audit->add_option("--scale", scale, "deformation magnification for VTK output");
    auto* solver_opt = audit->add_option("--solver", solver, "direct or cg")->check(CLI::IsMember({"direct", "cg"}));
    auto* top_opt = audit->add_option("--top", top, "hotspots per combination");
    audit->add_option("--load-factor", load_factor, "multiply every combination weight");

    auto* reactions = app.add_subcommand("reactions", "superstructure wrench envelope over a pose grid");
    reactions->add_option("model", model, "model file")->required();
    reactions->add_option("--psi", psi, "slew grid, a,b,c or start:step:stop [deg]")->required();
    reactions->add_option("--phi", phi, "luff grid, a,b,c or start:step:stop [deg]")->required();
    reactions->add_option("-o,--out", out_file, "CSV output (default stdout)");

    auto* exp = app.add_subcommand("export", "convert a mesh to VTK or canonical MSH");
    exp->add_option("input", input, "mesh (.msh) or model (.json)")->required();
    exp->add_option("output", output, "output .vtk or .msh")->required();
    exp->add_option("--unit", unit, "length unit of a bare mesh")->check(CLI::IsMember({"m", "mm"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*check) return cmd_check(model);
        if (*audit) {
            if (*scale_opt) aopt.scale = scale;
            if (*top_opt) aopt.top = top;
            if (*solver_opt) aopt.solver = solver == "cg" ? SolverKind::ConjugateGradient : SolverKind::Direct;
            aopt.load_factor = load_factor;
            return cmd_audit(model, out_dir, aopt);
        }
        if (*reactions) return cmd_reactions(model, psi, phi, out_file);
        if (*exp) return cmd_export(input, output, unit);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}

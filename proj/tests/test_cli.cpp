#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <fstream>

using namespace feaudit;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

Run cli(const std::string& args, const fs::path& dir) {
    const fs::path out = dir / "stdout.txt", err = dir / "stderr.txt";
    const std::string cmd = std::string("\"") + FEAUDIT_CLI + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                            err.string() + "\"";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_file(out);
    r.err = read_file(err);
    return r;
}

nlohmann::json demo_json() {
    auto j = nlohmann::json::parse(read_file(fixtures::demo_model()));
    j["mesh"] = (fixtures::demo_model().parent_path() / j["mesh"].get<std::string>()).string();
    return j;
}

fs::path write_model(const fs::path& dir, const nlohmann::json& j) {
    const fs::path p = dir / "model.json";
    write_file(p, j.dump(2));
    return p;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST(Cli, DemoAuditPassesAndWritesArtifacts) {
    const auto dir = fixtures::temp_dir("cli_demo");
    const auto r = cli("audit " + q(fixtures::demo_model()) + " " + q(dir / "out"), dir);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("Verdict: PASS"), std::string::npos) << r.out;
    for (const char* f : {"report.json", "report.txt", "I_dead_slew.vtk", "II_with_wind.summary.json",
                          "III_with_buffer.vtk"})
        EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
    const auto j = nlohmann::json::parse(read_file(dir / "out" / "report.json"));
    EXPECT_EQ(j["verdict"], "PASS");
    EXPECT_EQ(j["combinations"].size(), 3u);
}

TEST(Cli, RerunsAreByteIdentical) {
    const auto dir = fixtures::temp_dir("cli_rerun");
    ASSERT_EQ(cli("audit " + q(fixtures::demo_model()) + " " + q(dir / "a"), dir).code, 0);
    ASSERT_EQ(cli("audit " + q(fixtures::demo_model()) + " " + q(dir / "b"), dir).code, 0);
    for (const auto& e : fs::directory_iterator(dir / "a"))
        EXPECT_EQ(read_file(e.path()), read_file(dir / "b" / e.path().filename())) << e.path().filename();
}

TEST(Cli, ScaleChangesOnlyCoordinates) {
    const auto dir = fixtures::temp_dir("cli_scale");
    ASSERT_EQ(cli("audit --scale 1 " + q(fixtures::demo_model()) + " " + q(dir / "s1"), dir).code, 0);
    ASSERT_EQ(cli("audit --scale 69 " + q(fixtures::demo_model()) + " " + q(dir / "s69"), dir).code, 0);
    const std::string a = read_file(dir / "s1" / "I_dead_slew.vtk"), b = read_file(dir / "s69" / "I_dead_slew.vtk");
    EXPECT_NE(a, b);
    EXPECT_EQ(a.substr(a.find("CELLS")), b.substr(b.find("CELLS")));
    EXPECT_EQ(read_file(dir / "s1" / "report.json"), read_file(dir / "s69" / "report.json"));
}

TEST(Cli, FailingVerdictExitsOne) {
    const auto dir = fixtures::temp_dir("cli_fail");
    const auto r = cli("audit --load-factor 100 " + q(fixtures::demo_model()) + " " + q(dir / "out"), dir);
    EXPECT_EQ(r.code, 1) << r.err;
    EXPECT_NE(r.out.find("Verdict: FAIL"), std::string::npos);
}

TEST(Cli, CheckPassesOnDemo) {
    const auto dir = fixtures::temp_dir("cli_check");
    EXPECT_EQ(cli("check " + q(fixtures::demo_model()), dir).code, 0);
}

TEST(Cli, UnknownGroupExitsTwoAndNamesIt) {
    const auto dir = fixtures::temp_dir("cli_group");
    auto j = demo_json();
    j["materials"][0]["groups"].push_back("phantom_group");
    const auto r = cli("audit " + q(write_model(dir, j)) + " " + q(dir / "out"), dir);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("phantom_group"), std::string::npos) << r.err;
}

TEST(Cli, StrictKeysExitTwo) {
    const auto dir = fixtures::temp_dir("cli_keys");
    auto j = demo_json();
    j["constraints"]["dirichlet"][0]["axis"] = "x";
    const auto r = cli("check " + q(write_model(dir, j)), dir);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("axis"), std::string::npos) << r.err;
    EXPECT_EQ(cli("check " + q(dir / "missing.json"), dir).code, 2);
    EXPECT_EQ(cli("audit", dir).code, 2);
}

TEST(Cli, MissingSupportExitsThreeNamingTheMode) {
    const auto dir = fixtures::temp_dir("cli_rigid");
    auto j = demo_json();
    j["constraints"]["dirichlet"][0]["axes"] = {"y", "z"};
    j["constraints"]["dirichlet"][1]["axes"] = {"z"};
    const auto r = cli("audit " + q(write_model(dir, j)) + " " + q(dir / "out"), dir);
    EXPECT_EQ(r.code, 3);
    EXPECT_NE((r.out + r.err).find("translation x"), std::string::npos) << r.out << r.err;
}

TEST(Cli, ReactionsTable) {
    const auto dir = fixtures::temp_dir("cli_reactions");
    const auto r = cli("reactions --psi 0,45,90 --phi 0:9:9 " + q(fixtures::demo_model()) + " -o " + q(dir / "env.csv"),
                       dir);
    ASSERT_EQ(r.code, 0) << r.err;
    std::ifstream in(dir / "env.csv");
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "psi_deg,phi_deg,Fx,Fy,Fz,Mx,My,Mz");
    std::vector<std::string> fz;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
        ASSERT_EQ(cells.size(), 8u);
        fz.push_back(cells[4]);
    }
    ASSERT_EQ(fz.size(), 6u);
    for (const auto& v : fz) EXPECT_NEAR(std::stod(v), std::stod(fz[0]), 1e-9 * std::abs(std::stod(fz[0])));
    EXPECT_EQ(cli("reactions --psi , --phi 0 " + q(fixtures::demo_model()), dir).code, 2);
}

TEST(Cli, ExportMeshRoundTrip) {
    const auto dir = fixtures::temp_dir("cli_export");
    ASSERT_EQ(cli("export " + q(fixtures::demo_model()) + " " + q(dir / "m.msh"), dir).code, 0);
    ASSERT_EQ(cli("export " + q(dir / "m.msh") + " " + q(dir / "m.vtk"), dir).code, 0);
    const Mesh a = parse_mesh(read_file(dir / "m.msh"));
    const Mesh b = parse_mesh(read_file(fixtures::demo_model().parent_path() / "mini_gantry.msh"));
    EXPECT_EQ(a.nodes.size(), b.nodes.size());
    EXPECT_EQ(a.elements.size(), b.elements.size());
    EXPECT_EQ(read_file(dir / "m.vtk").rfind("# vtk DataFile Version 3.0", 0), 0u);
}

TEST(ModelFile, MillimetreUnitsAndDefaults) {
    const auto dir = fixtures::temp_dir("model_mm");
    Mesh m = fixtures::cube(2, 1000.0);
    write_file(dir / "cube.msh", serialize_mesh(m));
    const nlohmann::json j = {
        {"schema_version", 1},
        {"title", "mm cube"},
        {"units", {{"length", "mm"}}},
        {"mesh", "cube.msh"},
        {"materials", {{{"name", "steel"}, {"groups", {"solid"}}}}},
        {"constraints", {{"dirichlet", {{{"target", "z0"}, {"axes", {"x", "y", "z"}}}}}}},
        {"load_cases", {{{"name", "dead"}, {"category", "DeadLoad"}, {"loads", {{{"type", "gravity"}}}}}}},
        {"combinations", {{{"name", "c"}, {"class", "I"}, {"cases", {{{"case", "dead"}}}}}}}};
    write_file(dir / "model.json", j.dump());
    const auto p = prepare_model(dir / "model.json");
    EXPECT_NEAR(p.mesh.nodes.back().x.norm(), std::sqrt(3.0), 1e-12);
    ASSERT_EQ(p.model.materials.size(), 1u);
    EXPECT_FALSE(p.model.materials[0].defaulted.empty());
    EXPECT_EQ(p.model.materials[0].material.E, 210e9);
    bool skipped = false, defaulted = false;
    for (const auto& w : p.model.warnings) {
        skipped = skipped || w.find("deflection check skipped") != std::string::npos;
        defaulted = defaulted || w.find("default") != std::string::npos;
    }
    EXPECT_TRUE(skipped);
    EXPECT_TRUE(defaulted);

    AuditOptions opt;
    opt.write_files = false;
    const auto run = run_audit(p, opt);
    const auto& c = run.report.combinations[0];
    EXPECT_NEAR(c.applied_total.z(), -7850.0 * 9.81, 1e-8 * 7850 * 9.81);
    EXPECT_NEAR(c.reaction_total.z(), 7850.0 * 9.81, 1e-6 * 7850 * 9.81);
    EXPECT_EQ(report_json(run.report)["combinations"][0]["deflection_check"], "skipped");
}

TEST(ModelFile, ClassAdmissionIsEnforced) {
    auto j = demo_json();
    j["combinations"][0]["cases"].push_back({{"case", "buffer"}});  // special load in class I
    try {
        (void)parse_model(j.dump(), fixtures::demo_model().parent_path());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidModel);
    }
}

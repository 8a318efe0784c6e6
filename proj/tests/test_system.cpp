#include "oracle_check.hpp"

#include <gtest/gtest.h>

using namespace feaudit;

namespace {

struct Model {
    Mesh mesh;
    ConstraintSet cs;
};

Eigen::VectorXd zero_load(const Mesh& m, const ConstraintSet& cs) {
    return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(3 * m.nodes.size() + 6 * cs.couplings.size() + cs.joints.size()));
}

/// Two unit blocks stacked with a gap, coupled face to face through a pin about z.
Model pinned_pair() {
    using namespace tools;
    Model md;
    md.mesh = box_mesh({{Vec3(0, 0, 0), Vec3(1, 1, 1), "lower"}, {Vec3(0, 0, 1.5), Vec3(1, 1, 2.5), "upper"}}, 0.5,
                       {{"base", in_box({0, 0, 0}, {1, 1, 0})},
                        {"lower_top", in_box({0, 0, 1}, {1, 1, 1})},
                        {"upper_bottom", in_box({0, 0, 1.5}, {1, 1, 1.5})},
                        {"upper_top", in_box({0, 0, 2.5}, {1, 1, 2.5})}});
    const Vec3 c(0.5, 0.5, 1.25);
    md.cs.couplings = {{"a", "lower_top", c}, {"b", "upper_bottom", c}};
    md.cs.joints = {{"pin", "a", "b", Vec3::UnitZ()}};
    md.cs.dirichlet.emplace_back("base", std::initializer_list<Axis>{Axis::X, Axis::Y, Axis::Z});
    return md;
}

SolutionField solve(const Mesh& m, const ConstraintSet& cs, const Eigen::VectorXd& f, SolverKind kind = SolverKind::Direct) {
    const auto mats = assign_materials(m, fixtures::steel(m));
    const auto as = assemble(m, mats);
    const auto tr = build_transformation(m, cs);
    SolverOptions opt;
    opt.kind = kind;
    const StaticSolver s(m, mats, tr, as, opt);
    return s.solve(f);
}

}  // namespace

TEST(DenseOracle, ClampedCubeWithEndLoad) {
    Mesh m = fixtures::cube(2);
    fixtures::perturb_interior(m, 0.1, 1);
    ConstraintSet cs;
    cs.dirichlet.emplace_back("x0", std::initializer_list<Axis>{Axis::X, Axis::Y, Axis::Z});
    Eigen::VectorXd f = zero_load(m, cs);
    for (auto n : m.group("x1").members) {
        f[static_cast<Eigen::Index>(3 * n)] = 1e5;
        f[static_cast<Eigen::Index>(3 * n + 2)] = -2e4;
    }
    const auto c = oracle::compare(m, cs, f);
    EXPECT_LT(c.stiffness, 1e-12);
    EXPECT_LT(c.constraint, 1e-12);
    EXPECT_LT(c.reduced, 1e-10);
    EXPECT_LT(c.displacement, 1e-10);
    EXPECT_LT(c.reaction, 1e-10);
}

TEST(DenseOracle, CouplingWithPrescribedRotationAndGroundSpring) {
    Mesh m = fixtures::cube(2);
    fixtures::perturb_interior(m, 0.1, 2);
    ConstraintSet cs;
    cs.couplings = {{"base", "z0", Vec3(0.5, 0.5, 0)}, {"head", "z1", Vec3(0.5, 0.5, 1.2)}};
    DirichletBC bc("base", {Axis::X, Axis::Y, Axis::Z, Axis::RX, Axis::RY, Axis::RZ});
    bc.fixed[3] = 1e-4;
    cs.dirichlet.push_back(bc);
    cs.springs.push_back({"k", "head", Axis::X, 5e8});
    Eigen::VectorXd f = zero_load(m, cs);
    const auto head = 3 * m.nodes.size() + 6;
    f[static_cast<Eigen::Index>(head + 1)] = 3e4;   // force y on the head reference
    f[static_cast<Eigen::Index>(head + 5)] = 1e4;   // torque about z
    const auto c = oracle::compare(m, cs, f);
    EXPECT_LT(c.worst(), 1e-10) << c.stiffness << " " << c.constraint << " " << c.reduced << " " << c.displacement
                                << " " << c.reaction;
}

TEST(DenseOracle, RevoluteJointWithTorsionSpring) {
    auto md = pinned_pair();
    md.cs.springs.push_back({"torsion", "pin", Axis::RZ, 1e6});
    Eigen::VectorXd f = zero_load(md.mesh, md.cs);
    for (auto n : md.mesh.group("upper_top").members) {
        const Vec3 r = md.mesh.nodes[n].x - Vec3(0.5, 0.5, 2.5);
        f[static_cast<Eigen::Index>(3 * n)] = -1e3 * r.y() + 200.0;
        f[static_cast<Eigen::Index>(3 * n + 1)] = 1e3 * r.x();
        f[static_cast<Eigen::Index>(3 * n + 2)] = -500.0;
    }
    ASSERT_LE(md.mesh.elements.size(), 100u);
    const auto c = oracle::compare(md.mesh, md.cs, f);
    EXPECT_LT(c.worst(), 1e-10);
}

TEST(Assembly, DeterministicAcrossThreadCounts) {
    const Mesh m = fixtures::cube(5);
    const auto mats = assign_materials(m, fixtures::steel(m));
    const auto a = assemble(m, mats, 1);
    const auto b = assemble(m, mats, 4);
    ASSERT_EQ(a.K.nonZeros(), b.K.nonZeros());
    for (Eigen::Index i = 0; i < a.K.nonZeros(); ++i) ASSERT_EQ(a.K.valuePtr()[i], b.K.valuePtr()[i]);
    EXPECT_NEAR(a.nodal_mass.sum(), 7850.0, 1e-9);
}

TEST(Assembly, MaterialErrors) {
    const Mesh m = fixtures::cube(1);
    try {
        (void)assign_materials(m, {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingMaterial);
    }
    try {
        (void)assign_materials(m, {{"solid", Material{}}, {"ghost", Material{}}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnknownGroup);
    }
}

TEST(Solver, UnsupportedModelIsNotPositiveDefinite) {
    const Mesh m = fixtures::cube(2);
    try {
        (void)solve(m, {}, zero_load(m, {}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotPositiveDefinite);
    }
}

TEST(Solver, FreeJointRotationIsNotPositiveDefinite) {
    const auto md = pinned_pair();
    try {
        (void)solve(md.mesh, md.cs, zero_load(md.mesh, md.cs));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotPositiveDefinite);
    }
}

TEST(Solver, ConjugateGradientAgreesWithDirect) {
    Mesh m = fixtures::cube(4);
    ConstraintSet cs;
    cs.dirichlet.emplace_back("z0", std::initializer_list<Axis>{Axis::X, Axis::Y, Axis::Z});
    Eigen::VectorXd f = zero_load(m, cs);
    for (auto n : m.group("z1").members) f[static_cast<Eigen::Index>(3 * n)] = 1e4;
    const auto d = solve(m, cs, f);
    const auto c = solve(m, cs, f, SolverKind::ConjugateGradient);
    EXPECT_GT(c.iterations, 0u);
    EXPECT_LT((d.u_full - c.u_full).norm(), 1e-7 * d.u_full.norm());
}

TEST(Solver, EquilibriumAndResultants) {
    Mesh m = fixtures::cube(3);
    ConstraintSet cs;
    cs.couplings = {{"top", "z1", Vec3(0.5, 0.5, 1.0)}};
    cs.dirichlet.emplace_back("z0", std::initializer_list<Axis>{Axis::X, Axis::Y, Axis::Z});
    Eigen::VectorXd f = zero_load(m, cs);
    const auto ref = 3 * m.nodes.size();
    const Vector6 w = (Vector6() << 1e3, -2e3, -5e4, 3e3, 1e3, 2e2).finished();
    for (int c = 0; c < 6; ++c) f[static_cast<Eigen::Index>(ref + static_cast<std::size_t>(c))] = w[c];
    const auto sol = solve(m, cs, f);
    const Vec3 total = sol.reaction_total();
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(total[c], -w[c], 1e-8 * w.cwiseAbs().maxCoeff());
    // The coupling hands the full wrench to its slaves.
    EXPECT_LT((sol.coupling_resultants[0].force - w.head<3>()).norm(), 1e-8 * w.norm());
    EXPECT_LT((sol.coupling_resultants[0].moment - w.tail<3>()).norm(), 1e-8 * w.norm());
    EXPECT_LE(sol.relative_residual, 1e-10);
}

TEST(Superpose, LinearCombinationAndMismatch) {
    Mesh m = fixtures::cube(3);
    ConstraintSet cs;
    cs.dirichlet.emplace_back("z0", std::initializer_list<Axis>{Axis::X, Axis::Y, Axis::Z});
    const auto mats = assign_materials(m, fixtures::steel(m));
    const auto as = assemble(m, mats);
    const auto tr = build_transformation(m, cs);
    const StaticSolver s(m, mats, tr, as);
    Eigen::VectorXd f1 = zero_load(m, cs), f2 = f1;
    for (auto n : m.group("z1").members) {
        f1[static_cast<Eigen::Index>(3 * n)] = 1e4;
        f2[static_cast<Eigen::Index>(3 * n + 2)] = -3e4;
    }
    const auto a = s.solve(f1), b = s.solve(f2), ab = s.solve(2.0 * f1 - 0.5 * f2);
    const auto sp = superpose({&a, &b}, {2.0, -0.5});
    EXPECT_LT((sp.u_full - ab.u_full).norm(), 1e-10 * ab.u_full.norm());
    for (std::size_t e = 0; e < m.elements.size(); ++e)
        EXPECT_NEAR(sp.von_mises[e], ab.von_mises[e], 1e-9 * ab.von_mises[e] + 1e-6);

    const Mesh other = fixtures::cube(2);
    const auto m2 = assign_materials(other, fixtures::steel(other));
    const auto tr2 = build_transformation(other, cs);
    const auto as2 = assemble(other, m2);
    const StaticSolver s2(other, m2, tr2, as2);
    const auto c = s2.solve(zero_load(other, cs));
    try {
        (void)superpose({&a, &c}, {1.0, 1.0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MismatchedModel);
    }
}

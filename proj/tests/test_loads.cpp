#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace feaudit;

namespace {

DofSpace space_of(const Mesh& m, const ConstraintSet& cs = {}) {
    return DofSpace{m.nodes.size(), cs.couplings.size(), cs.joints.size()};
}

Vec3 translation_sum(const Eigen::VectorXd& f, std::size_t nodes) {
    Vec3 s = Vec3::Zero();
    for (std::size_t n = 0; n < nodes; ++n) s += f.segment<3>(static_cast<Eigen::Index>(3 * n));
    return s;
}

}  // namespace

TEST(Taxonomy, GroupsAndClassAdmission) {
    EXPECT_EQ(group_of(LoadCategory::DeadLoad), LoadGroup::Main);
    EXPECT_EQ(group_of(LoadCategory::NormalDigging), LoadGroup::Main);
    EXPECT_EQ(group_of(LoadCategory::WindInService), LoadGroup::Additional);
    EXPECT_EQ(group_of(LoadCategory::Skewing), LoadGroup::Additional);
    EXPECT_EQ(group_of(LoadCategory::WindOutOfService), LoadGroup::Special);
    EXPECT_EQ(group_of(LoadCategory::BufferEffect), LoadGroup::Special);

    EXPECT_TRUE(class_admits(CaseClass::I, LoadGroup::Main));
    EXPECT_FALSE(class_admits(CaseClass::I, LoadGroup::Additional));
    EXPECT_FALSE(class_admits(CaseClass::I, LoadGroup::Special));
    EXPECT_TRUE(class_admits(CaseClass::II, LoadGroup::Additional));
    EXPECT_FALSE(class_admits(CaseClass::II, LoadGroup::Special));
    EXPECT_TRUE(class_admits(CaseClass::III, LoadGroup::Special));
    EXPECT_TRUE(class_admits(CaseClass::III, LoadGroup::Main));

    for (const auto& [cat, name] : load_category_names) EXPECT_EQ(parse_load_category(name), cat);
    EXPECT_FALSE(parse_load_category("Hail"));
    EXPECT_EQ(parse_case_class("II"), CaseClass::II);
    EXPECT_FALSE(parse_case_class("IV"));
}

TEST(Gravity, TotalEqualsMassTimesG) {
    Mesh m = fixtures::cube(3, 2.0);
    fixtures::perturb_interior(m, 0.1, 3);
    const auto mats = assign_materials(m, fixtures::steel(m));
    const Vec3 g(0.5, 0.0, -9.81);
    const auto f = gravity_vector(m, mats, g, space_of(m));
    const Vec3 total = translation_sum(f, m.nodes.size());
    EXPECT_LT((total - 7850.0 * 8.0 * g).norm(), 1e-9 * 7850.0 * 8.0 * g.norm());
    EXPECT_TRUE(gravity_vector(m, mats, Vec3::Zero(), space_of(m)).isZero(0.0));
}

TEST(Wrench, GoesToReferenceDofs) {
    const Mesh m = fixtures::cube(2);
    ConstraintSet cs;
    cs.couplings = {{"top", "z1", Vec3(0.5, 0.5, 1.0)}};
    const InterfaceWrench w{Vec3(0, 0, -3748e3), Vec3(5162e3, -5241e3, 0)};
    const auto sp = space_of(m, cs);
    const auto f = wrench_vector(cs, sp, "top", w);
    EXPECT_EQ(f[static_cast<Eigen::Index>(sp.reference_dof(0, 2))], -3748e3);
    EXPECT_EQ(f[static_cast<Eigen::Index>(sp.reference_dof(0, 3))], 5162e3);
    EXPECT_EQ(f[static_cast<Eigen::Index>(sp.reference_dof(0, 4))], -5241e3);
    EXPECT_EQ(f.cwiseAbs().sum(), 3748e3 + 5162e3 + 5241e3);
    try {
        (void)wrench_vector(cs, sp, "bottom", w);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnknownCoupling);
    }
}

TEST(Wrench, DistributionIsStaticallyEquivalent) {
    const Mesh m = fixtures::cube(3);
    const RigidCoupling cp{"top", "z1", Vec3(0.4, 0.6, 1.3)};
    const InterfaceWrench w{Vec3(1e3, -2e3, -3748e3), Vec3(5162e3, -5241e3, 7e3)};
    const auto forces = distribute_wrench(m, cp, w);
    const auto& slaves = m.group("z1").members;
    ASSERT_EQ(forces.size(), slaves.size());
    Vec3 F = Vec3::Zero(), M = Vec3::Zero();
    for (std::size_t i = 0; i < slaves.size(); ++i) {
        F += forces[i];
        M += (m.nodes[slaves[i]].x - cp.reference).cross(forces[i]);
    }
    EXPECT_LT((F - w.force).norm(), 1e-8 * w.force.norm());
    EXPECT_LT((M - w.moment).norm(), 1e-8 * w.moment.norm());
}

TEST(NodalForce, TotalVersusPerNode) {
    const Mesh m = fixtures::cube(2);
    const auto sp = space_of(m);
    const std::size_t count = m.group("x1").members.size();
    NodalForceLoad total{"x1", Vec3(0, 900, 0), false};
    NodalForceLoad each{"x1", Vec3(0, 900, 0), true};
    EXPECT_LT((translation_sum(nodal_force_vector(m, sp, total), m.nodes.size()) - Vec3(0, 900, 0)).norm(), 1e-9);
    EXPECT_LT((translation_sum(nodal_force_vector(m, sp, each), m.nodes.size()) - Vec3(0, 900.0 * count, 0)).norm(),
              1e-9);
    try {
        (void)nodal_force_vector(m, sp, {"solid", Vec3::UnitX(), false});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnresolvedTarget);
    }
}

TEST(Traction, TotalEqualsTractionTimesArea) {
    const Mesh m = fixtures::cube(3, 2.0);
    const auto f = traction_vector(m, space_of(m), {"z1", Vec3(1e3, 0, -5e4)});
    const Vec3 total = translation_sum(f, m.nodes.size());
    EXPECT_LT((total - 4.0 * Vec3(1e3, 0, -5e4)).norm(), 1e-9 * 2e5);
    // Only nodes of the loaded face carry force.
    for (std::size_t n = 0; n < m.nodes.size(); ++n)
        if (m.nodes[n].x.z() < 2.0 - 1e-12) EXPECT_TRUE(f.segment<3>(static_cast<Eigen::Index>(3 * n)).isZero(0.0));
}

TEST(LoadCase, SumsConstituents) {
    const Mesh m = fixtures::cube(2);
    ConstraintSet cs;
    cs.couplings = {{"top", "z1", Vec3(0.5, 0.5, 1.0)}};
    const auto mats = assign_materials(m, fixtures::steel(m));
    const auto sp = space_of(m, cs);
    LoadCase lc{"mixed", LoadCategory::DeadLoad,
                {GravityLoad{}, NodalForceLoad{"x1", Vec3(10, 0, 0), false},
                 WrenchLoad{"top", {Vec3(0, 0, -1), Vec3::Zero()}}}};
    const auto f = load_case_vector(m, mats, cs, sp, lc);
    const Eigen::VectorXd expected = gravity_vector(m, mats, GravityLoad{}.g, sp) +
                                     nodal_force_vector(m, sp, {"x1", Vec3(10, 0, 0), false}) +
                                     wrench_vector(cs, sp, "top", {Vec3(0, 0, -1), Vec3::Zero()});
    EXPECT_LT((f - expected).norm(), 1e-12 * expected.norm());
}

TEST(Combine, IndependentOfTermOrder) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(-1e6, 1e6);
    std::vector<Eigen::VectorXd> v(7, Eigen::VectorXd(50));
    for (auto& x : v)
        for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = d(rng) * std::pow(10.0, static_cast<int>(i % 9) - 4);
    std::vector<std::pair<const Eigen::VectorXd*, double>> terms;
    for (std::size_t i = 0; i < v.size(); ++i) terms.emplace_back(&v[i], 0.3 + 0.7 * static_cast<double>(i));
    const Eigen::VectorXd ref = combine(terms);
    for (int trial = 0; trial < 20; ++trial) {
        std::shuffle(terms.begin(), terms.end(), rng);
        const Eigen::VectorXd c = combine(terms);
        for (Eigen::Index i = 0; i < ref.size(); ++i) ASSERT_EQ(c[i], ref[i]);
    }
    Eigen::VectorXd naive = Eigen::VectorXd::Zero(50);
    for (std::size_t i = 0; i < v.size(); ++i) naive += (0.3 + 0.7 * static_cast<double>(i)) * v[i];
    EXPECT_LT((naive - ref).norm(), 1e-12 * naive.norm());
}

TEST(Combine, RejectsMismatchedVectors) {
    const Eigen::VectorXd a = Eigen::VectorXd::Ones(4), b = Eigen::VectorXd::Ones(5);
    try {
        (void)combine({{&a, 1.0}, {&b, 1.0}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MismatchedModel);
    }
}

TEST(Governing, LargestWinsAndTiesGoToFirstDeclared) {
    EXPECT_EQ(governing_combination({{"a", 0.4}, {"b", 0.9}, {"c", 0.7}}), "b");
    EXPECT_EQ(governing_combination({{"a", 0.5}, {"b", 0.8}, {"c", 0.8}}), "b");
    EXPECT_EQ(governing_combination({{"z", 0.8}, {"a", 0.8}}), "z");
    EXPECT_THROW((void)governing_combination({}), Error);
}

#pragma once

// Global stiffness assembly, constraint reduction and the linear static solve.

#include "feaudit/constraints.hpp"
#include "feaudit/element.hpp"
#include "feaudit/mesh.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#ifdef FEAUDIT_HAVE_CHOLMOD
#include <cholmod.h>
#endif

#include <algorithm>
#include <map>
#include <exception>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace feaudit {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct ElementMaterials {
    std::vector<Material> table;
    std::vector<std::uint32_t> of_element;
    std::vector<Matrix6> elasticity;  // per table entry

    const Material& material(std::size_t e) const { return table[of_element[e]]; }
    const Matrix6& D(std::size_t e) const { return elasticity[of_element[e]]; }
};

/// Maps each element to the material of its volume group.
inline ElementMaterials assign_materials(const Mesh& mesh, const std::map<std::string, Material>& by_group) {
    ElementMaterials out;
    std::map<int, std::uint32_t> slot;  // group tag -> table index
    for (const auto& [name, mat] : by_group) {
        const auto* g = mesh.find_group(name);
        if (!g || g->kind != GroupKind::Volume)
            throw Error(ErrorCode::UnknownGroup, "material assigned to unknown volume group '" + name + "'");
        mat.validate();
        slot[g->tag] = static_cast<std::uint32_t>(out.table.size());
        out.table.push_back(mat);
        out.elasticity.push_back(elasticity_matrix(mat));
    }
    out.of_element.resize(mesh.elements.size());
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        auto it = slot.find(mesh.elements[e].group);
        if (it == slot.end()) {
            const auto* g = mesh.volume_group_by_tag(mesh.elements[e].group);
            throw Error(ErrorCode::MissingMaterial, "element " + std::to_string(mesh.elements[e].id) + " in group '" +
                                                        (g ? g->name : std::string("<untagged>")) +
                                                        "' has no material");
        }
        out.of_element[e] = it->second;
    }
    return out;
}

struct Assembly {
    SparseMatrix K;              // 3N x 3N, full symmetric pattern
    Eigen::VectorXd nodal_mass;  // lumped rho*V/4 per node [kg]
    std::vector<double> volumes; // per element [m^3]
};

namespace detail {

inline unsigned thread_budget(unsigned requested) {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    return requested == 0 ? hw : std::min(requested, hw);
}

}  // namespace detail

/// Assembles K = sum of scattered element stiffnesses. Element matrices are
/// computed in parallel chunks; scattering runs in element order, so the
/// result is bit-identical for any thread count.
inline Assembly assemble(const Mesh& mesh, const ElementMaterials& mats, unsigned threads = 1) {
    const std::size_t N = mesh.nodes.size();
    std::vector<std::vector<std::uint32_t>> nbr(N);
    for (const auto& el : mesh.elements)
        for (auto a : el.nodes)
            for (auto b : el.nodes) nbr[a].push_back(static_cast<std::uint32_t>(b));
    for (std::size_t i = 0; i < N; ++i) {
        nbr[i].push_back(static_cast<std::uint32_t>(i));
        std::sort(nbr[i].begin(), nbr[i].end());
        nbr[i].erase(std::unique(nbr[i].begin(), nbr[i].end()), nbr[i].end());
    }

    const Eigen::Index n = static_cast<Eigen::Index>(3 * N);
    Assembly out;
    out.K.resize(n, n);
    std::size_t nnz = 0;
    for (const auto& row : nbr) nnz += 9 * row.size();
    out.K.resizeNonZeros(static_cast<Eigen::Index>(nnz));
    int* outer = out.K.outerIndexPtr();
    int* inner = out.K.innerIndexPtr();
    double* val = out.K.valuePtr();
    std::size_t pos = 0;
    for (std::size_t i = 0; i < N; ++i)
        for (int c = 0; c < 3; ++c) {
            outer[3 * i + static_cast<std::size_t>(c)] = static_cast<int>(pos);
            for (auto m : nbr[i])
                for (int r = 0; r < 3; ++r) {
                    inner[pos] = static_cast<int>(3 * m + static_cast<std::uint32_t>(r));
                    val[pos] = 0.0;
                    ++pos;
                }
        }
    outer[3 * N] = static_cast<int>(pos);

    out.nodal_mass = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(N));
    out.volumes.resize(mesh.elements.size());

    const std::size_t ne = mesh.elements.size();
    constexpr std::size_t chunk = 2048;
    const unsigned workers = detail::thread_budget(threads);
    std::vector<Matrix12> ke(std::min(chunk, ne));
    std::vector<double> vol(std::min(chunk, ne));
    for (std::size_t begin = 0; begin < ne; begin += chunk) {
        const std::size_t end = std::min(ne, begin + chunk);
        auto work = [&](std::size_t lo, std::size_t hi) {
            for (std::size_t e = lo; e < hi; ++e) {
                const auto x = mesh.element_coords(e);
                vol[e - begin] = shape_gradients(x).volume;
                ke[e - begin] = element_stiffness(x, mats.D(e));
            }
        };
        if (workers <= 1 || end - begin < 64) {
            work(begin, end);
        } else {
            std::vector<std::jthread> pool;
            const std::size_t span = (end - begin + workers - 1) / workers;
            std::exception_ptr failure;
            std::mutex failure_mutex;
            for (unsigned w = 0; w < workers; ++w) {
                const std::size_t lo = begin + w * span, hi = std::min(end, lo + span);
                if (lo >= hi) break;
                pool.emplace_back([&, lo, hi] {
                    try {
                        work(lo, hi);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                });
            }
            pool.clear();
            if (failure) std::rethrow_exception(failure);
        }
        for (std::size_t e = begin; e < end; ++e) {
            const auto& el = mesh.elements[e];
            const auto& Ke = ke[e - begin];
            out.volumes[e] = vol[e - begin];
            const double share = mats.material(e).rho * vol[e - begin] / 4.0;
            for (int b = 0; b < 4; ++b) {
                const auto nb = el.nodes[static_cast<std::size_t>(b)];
                out.nodal_mass[static_cast<Eigen::Index>(nb)] += share;
                const auto& list = nbr[nb];
                for (int a = 0; a < 4; ++a) {
                    const auto na = static_cast<std::uint32_t>(el.nodes[static_cast<std::size_t>(a)]);
                    const auto p = static_cast<std::size_t>(std::lower_bound(list.begin(), list.end(), na) - list.begin());
                    for (int cb = 0; cb < 3; ++cb) {
                        const std::size_t col_start = static_cast<std::size_t>(outer[3 * nb + static_cast<std::size_t>(cb)]);
                        for (int ca = 0; ca < 3; ++ca) val[col_start + 3 * p + static_cast<std::size_t>(ca)] += Ke(3 * a + ca, 3 * b + cb);
                    }
                }
            }
        }
    }
    return out;
}

enum class SolverKind { Direct, ConjugateGradient };

struct SolverOptions {
    SolverKind kind = SolverKind::Direct;
    double tolerance = 1e-10;       // relative residual of the reduced system
    double pivot_tolerance = 1e-10; // smallest admissible pivot of the scaled reduced matrix
    unsigned threads = 1;
};

struct Reaction {
    std::string target;
    Axis axis = Axis::X;
    std::size_t dof = 0;
    double value = 0.0;  // [N] or [N m]
};

struct Wrench {
    Vec3 force = Vec3::Zero();
    Vec3 moment = Vec3::Zero();
};

struct SolutionField {
    std::uint64_t model_signature = 0;
    Eigen::VectorXd u_full;  // full DOF vector
    Eigen::VectorXd load;    // applied full load vector
    std::vector<Vec3> displacement;          // per mesh node [m]
    std::vector<Vector6> reference_motion;   // per coupling (u, theta)
    std::vector<double> joint_rotation;      // per joint [rad]
    std::vector<StressTensor> stress;        // per element [Pa]
    std::vector<double> von_mises;           // per element [Pa]
    std::vector<Reaction> reactions;         // fixed DOFs, then grounded springs
    std::vector<Wrench> coupling_resultants; // load each coupling puts on its slaves, about its reference
    double relative_residual = 0.0;
    std::size_t iterations = 0;

    /// Sum of translational reactions per axis.
    Vec3 reaction_total() const {
        Vec3 s = Vec3::Zero();
        for (const auto& r : reactions)
            if (static_cast<int>(r.axis) < 3) s[static_cast<int>(r.axis)] += r.value;
        return s;
    }
};

namespace detail {

#ifdef FEAUDIT_HAVE_CHOLMOD
class CholmodFactor {
public:
    CholmodFactor() {
        cholmod_start(&common_);
        common_.print = 0;
    }
    CholmodFactor(const CholmodFactor&) = delete;
    CholmodFactor& operator=(const CholmodFactor&) = delete;
    ~CholmodFactor() {
        if (factor_) cholmod_free_factor(&factor_, &common_);
        cholmod_finish(&common_);
    }

    // Returns the column of the first failing pivot, or -1. A supernodal
    // failure is re-checked with the simplicial kernel, which does not go
    // through BLAS; some BLAS builds pick broken kernels on virtual CPUs.
    long factorize(SparseMatrix& A) {
        cholmod_sparse view = as_cholmod(A);
        common_.quick_return_if_not_posdef = 1;
        long bad = run(view);
        if (bad >= 0 && factor_->is_super) {
            cholmod_free_factor(&factor_, &common_);
            common_.supernodal = CHOLMOD_SIMPLICIAL;
            bad = run(view);
            simplicial_retry_ = true;
        }
        return bad;
    }

    bool simplicial_retry() const { return simplicial_retry_; }

    double rcond() { return cholmod_rcond(factor_, &common_); }

    Eigen::VectorXd solve(const Eigen::VectorXd& b) {
        cholmod_dense rhs{};
        rhs.nrow = rhs.d = static_cast<std::size_t>(b.size());
        rhs.ncol = 1;
        rhs.nzmax = rhs.nrow;
        rhs.x = const_cast<double*>(b.data());
        rhs.xtype = CHOLMOD_REAL;
        rhs.dtype = CHOLMOD_DOUBLE;
        cholmod_dense* x = cholmod_solve(CHOLMOD_A, factor_, &rhs, &common_);
        if (!x) throw Error(ErrorCode::NotPositiveDefinite, "CHOLMOD solve failed");
        Eigen::VectorXd out = Eigen::Map<Eigen::VectorXd>(static_cast<double*>(x->x), b.size());
        cholmod_free_dense(&x, &common_);
        return out;
    }

private:
    long run(cholmod_sparse& view) {
        factor_ = cholmod_analyze(&view, &common_);
        if (!factor_) throw Error(ErrorCode::NotPositiveDefinite, "symbolic factorization failed");
        cholmod_factorize(&view, factor_, &common_);
        if (common_.status == CHOLMOD_NOT_POSDEF) return static_cast<long>(factor_->minor);
        if (common_.status < CHOLMOD_OK) throw Error(ErrorCode::NotPositiveDefinite, "CHOLMOD factorization failed");
        return -1;
    }

    static cholmod_sparse as_cholmod(SparseMatrix& A) {
        A.makeCompressed();
        cholmod_sparse s{};
        s.nrow = static_cast<std::size_t>(A.rows());
        s.ncol = static_cast<std::size_t>(A.cols());
        s.nzmax = static_cast<std::size_t>(A.nonZeros());
        s.p = A.outerIndexPtr();
        s.i = A.innerIndexPtr();
        s.x = A.valuePtr();
        s.stype = -1;  // symmetric, lower triangle referenced
        s.itype = CHOLMOD_INT;
        s.xtype = CHOLMOD_REAL;
        s.dtype = CHOLMOD_DOUBLE;
        s.sorted = 1;
        s.packed = 1;
        return s;
    }

    cholmod_common common_{};
    cholmod_factor* factor_ = nullptr;
    bool simplicial_retry_ = false;
};
#endif

}  // namespace detail

inline const char* direct_backend_name() {
#ifdef FEAUDIT_HAVE_CHOLMOD
    return "cholmod";
#else
    return "eigen-ldlt";
#endif
}

/// Reduced linear static problem T^T K T u_m = T^T (f - K u_p), factored once
/// and solved for any number of load vectors.
class StaticSolver {
public:
    StaticSolver(const Mesh& mesh, const ElementMaterials& mats, const Transformation& tr, const Assembly& assembly,
                 SolverOptions opt = {})
        : mesh_(mesh), mats_(mats), tr_(tr), opt_(opt) {
        const auto n = static_cast<Eigen::Index>(tr.space.size());
        K_ = assembly.K;
        K_.conservativeResize(n, n);
        if (!tr.springs.empty()) {
            SparseMatrix ks(n, n);
            std::vector<Eigen::Triplet<double>> t;
            for (const auto& s : tr.springs)
                t.emplace_back(static_cast<int>(s.dof), static_cast<int>(s.dof), s.stiffness);
            ks.setFromTriplets(t.begin(), t.end());
            K_ += ks;
        }
        K_.makeCompressed();
        Kr_ = SparseMatrix(tr.T.transpose() * K_ * tr.T);
        Kr_.makeCompressed();

        const auto nm = Kr_.rows();
        scale_ = Eigen::VectorXd(nm);
        for (Eigen::Index i = 0; i < nm; ++i) {
            const double d = Kr_.coeff(i, i);
            if (!(d > 0.0))
                throw Error(ErrorCode::NotPositiveDefinite,
                            "no stiffness on " + describe(tr.masters[static_cast<std::size_t>(i)]));
            scale_[i] = 1.0 / std::sqrt(d);
        }
        scaled_ = scale_.asDiagonal() * Kr_ * scale_.asDiagonal();
        scaled_.makeCompressed();

        signature_ = hash_combine(hash_combine(hash_combine(0x5eed, tr.space.size()), tr.masters.size()),
                                  mesh.elements.size());
        for (const auto& f : tr.fixed) signature_ = hash_combine(signature_, f.dof);

        if (opt_.kind == SolverKind::Direct) factor();
        else cg_ = std::make_unique<Cg>();
        if (cg_) {
            cg_->setTolerance(1e-2 * opt_.tolerance);
            cg_->setMaxIterations(std::max<Eigen::Index>(1, 20 * nm));
            cg_->compute(scaled_);
        }
    }

    const SparseMatrix& full_stiffness() const { return K_; }
    const SparseMatrix& reduced_stiffness() const { return Kr_; }
    const Transformation& transformation() const { return tr_; }
    std::uint64_t signature() const { return signature_; }

    /// Solves for a full-space load vector.
    SolutionField solve(const Eigen::VectorXd& f) const {
        const auto n = static_cast<Eigen::Index>(tr_.space.size());
        if (f.size() != n) throw Error(ErrorCode::MismatchedModel, "load vector size does not match the model");
        const Eigen::VectorXd rhs = tr_.T.transpose() * (f - K_ * tr_.prescribed);
        Eigen::VectorXd um = Eigen::VectorXd::Zero(rhs.size());
        SolutionField out;
        const double rhs_norm = rhs.norm();
        if (rhs_norm > 0.0) {
            if (cg_) {
                Eigen::VectorXd y = cg_->solve(scale_.cwiseProduct(rhs));
                if (cg_->info() != Eigen::Success)
                    throw Error(ErrorCode::NoConvergence, "conjugate gradient stopped after " +
                                                              std::to_string(cg_->iterations()) + " iterations");
                out.iterations = static_cast<std::size_t>(cg_->iterations());
                um = scale_.cwiseProduct(y);
            } else {
                um = direct_solve(rhs);
                // Iterative refinement against the unscaled reduced matrix.
                for (int pass = 0; pass < 3; ++pass) {
                    Eigen::VectorXd r = rhs - Kr_ * um;
                    if (r.norm() <= 1e-3 * opt_.tolerance * rhs_norm) break;
                    um += direct_solve(r);
                }
            }
            out.relative_residual = (rhs - Kr_ * um).norm() / rhs_norm;
            if (!(out.relative_residual <= opt_.tolerance))
                throw Error(opt_.kind == SolverKind::Direct ? ErrorCode::NotPositiveDefinite : ErrorCode::NoConvergence,
                            "reduced system residual " + std::to_string(out.relative_residual) + " above tolerance");
        }
        out.model_signature = signature_;
        out.u_full = tr_.T * um + tr_.prescribed;
        out.load = f;
        post_process(out);
        return out;
    }

private:
    using Cg = Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>>;

    std::string describe(std::size_t dof) const {
        const auto& S = tr_.space;
        if (S.is_node_dof(dof))
            return "node " + std::to_string(mesh_.nodes[dof / 3].id) + " " + std::string(axis_names[dof % 3]);
        if (S.is_reference_dof(dof))
            return "coupling #" + std::to_string((dof - 3 * S.nodes) / 6) + " " +
                   std::string(axis_names[(dof - 3 * S.nodes) % 6]);
        return "joint #" + std::to_string(dof - 3 * S.nodes - 6 * S.couplings) + " rotation";
    }

    void factor() {
#ifdef FEAUDIT_HAVE_CHOLMOD
        cholmod_ = std::make_unique<detail::CholmodFactor>();
        const long bad = cholmod_->factorize(scaled_);
        if (bad >= 0)
            throw Error(ErrorCode::NotPositiveDefinite,
                        "reduced stiffness is singular (mechanism or missing support); first failing pivot at column " +
                            std::to_string(bad));
        const double rc = cholmod_->rcond();
        if (!(rc * rc >= opt_.pivot_tolerance))
            throw Error(ErrorCode::NotPositiveDefinite,
                        "reduced stiffness is numerically singular (mechanism or missing support)");
#else
        ldlt_ = std::make_unique<Eigen::SimplicialLDLT<SparseMatrix>>(scaled_);
        if (ldlt_->info() != Eigen::Success)
            throw Error(ErrorCode::NotPositiveDefinite, "reduced stiffness factorization failed");
        const double dmin = ldlt_->vectorD().minCoeff();
        const double dmax = ldlt_->vectorD().maxCoeff();
        if (!(dmin >= opt_.pivot_tolerance * dmax))
            throw Error(ErrorCode::NotPositiveDefinite,
                        "reduced stiffness is numerically singular (mechanism or missing support)");
#endif
    }

    Eigen::VectorXd direct_solve(const Eigen::VectorXd& rhs) const {
#ifdef FEAUDIT_HAVE_CHOLMOD
        return scale_.cwiseProduct(cholmod_->solve(scale_.cwiseProduct(rhs)));
#else
        return scale_.cwiseProduct(ldlt_->solve(scale_.cwiseProduct(rhs)));
#endif
    }

    void post_process(SolutionField& out) const {
        const auto& S = tr_.space;
        const auto& u = out.u_full;
        out.displacement.resize(S.nodes);
        for (std::size_t i = 0; i < S.nodes; ++i)
            out.displacement[i] = u.segment<3>(static_cast<Eigen::Index>(3 * i));
        out.reference_motion.resize(S.couplings);
        for (std::size_t k = 0; k < S.couplings; ++k)
            out.reference_motion[k] = u.segment<6>(static_cast<Eigen::Index>(S.reference_dof(k, 0)));
        out.joint_rotation.resize(S.joints);
        for (std::size_t j = 0; j < S.joints; ++j) out.joint_rotation[j] = u[static_cast<Eigen::Index>(S.joint_dof(j))];

        out.stress.resize(mesh_.elements.size());
        out.von_mises.resize(mesh_.elements.size());
        for (std::size_t e = 0; e < mesh_.elements.size(); ++e) {
            Vector12 ue;
            for (int a = 0; a < 4; ++a)
                ue.segment<3>(3 * a) = out.displacement[mesh_.elements[e].nodes[static_cast<std::size_t>(a)]];
            out.stress[e] = recover_stress(mesh_.element_coords(e), mats_.D(e), ue);
            out.von_mises[e] = von_mises(out.stress[e]);
        }

        // Residual of the unconstrained equations: constraint forces acting on each DOF.
        const Eigen::VectorXd residual = K_ * u - out.load;
        const Eigen::VectorXd fixed_forces = tr_.T_fixed.transpose() * residual;
        out.reactions.clear();
        for (std::size_t i = 0; i < tr_.fixed.size(); ++i)
            out.reactions.push_back({tr_.fixed[i].target, tr_.fixed[i].axis, tr_.fixed[i].dof,
                                     fixed_forces[static_cast<Eigen::Index>(i)]});
        for (const auto& s : tr_.springs) {
            if (!s.grounded) continue;
            const auto c = static_cast<int>((s.dof - 3 * S.nodes) % 6);
            out.reactions.push_back(
                {"spring:" + s.name, static_cast<Axis>(c), s.dof, -s.stiffness * u[static_cast<Eigen::Index>(s.dof)]});
        }

        out.coupling_resultants.assign(S.couplings, Wrench{});
        for (std::size_t k = 0; k < S.couplings; ++k) {
            auto& w = out.coupling_resultants[k];
            for (auto s : tr_.coupling_slaves[k]) {
                // Structural residual only: springs never act on mesh nodes.
                const Vec3 r = residual.segment<3>(static_cast<Eigen::Index>(3 * s));
                w.force += r;
                w.moment += (mesh_.nodes[s].x - tr_.reference_points[k]).cross(r);
            }
        }
    }

    const Mesh& mesh_;
    const ElementMaterials& mats_;
    const Transformation& tr_;
    SolverOptions opt_;
    SparseMatrix K_;
    SparseMatrix Kr_;
    SparseMatrix scaled_;
    Eigen::VectorXd scale_;
    std::uint64_t signature_ = 0;
    std::unique_ptr<Cg> cg_;
#ifdef FEAUDIT_HAVE_CHOLMOD
    std::unique_ptr<detail::CholmodFactor> cholmod_;
#else
    std::unique_ptr<Eigen::SimplicialLDLT<SparseMatrix>> ldlt_;
#endif
};

/// Weighted sum of solution fields on one model. Von Mises is recomputed from
/// the combined stress tensors.
inline SolutionField superpose(const std::vector<const SolutionField*>& fields, const std::vector<double>& weights) {
    if (fields.empty() || fields.size() != weights.size())
        throw Error(ErrorCode::MismatchedModel, "superpose needs one weight per field");
    const auto& ref = *fields.front();
    for (const auto* f : fields)
        if (f->model_signature != ref.model_signature || f->u_full.size() != ref.u_full.size() ||
            f->stress.size() != ref.stress.size() || f->reactions.size() != ref.reactions.size())
            throw Error(ErrorCode::MismatchedModel, "fields come from different models");

    SolutionField out;
    out.model_signature = ref.model_signature;
    out.u_full = Eigen::VectorXd::Zero(ref.u_full.size());
    out.load = Eigen::VectorXd::Zero(ref.load.size());
    out.displacement.assign(ref.displacement.size(), Vec3::Zero());
    out.reference_motion.assign(ref.reference_motion.size(), Vector6::Zero());
    out.joint_rotation.assign(ref.joint_rotation.size(), 0.0);
    out.stress.assign(ref.stress.size(), StressTensor::Zero());
    out.reactions = ref.reactions;
    for (auto& r : out.reactions) r.value = 0.0;
    out.coupling_resultants.assign(ref.coupling_resultants.size(), Wrench{});
    for (std::size_t f = 0; f < fields.size(); ++f) {
        const auto& s = *fields[f];
        const double w = weights[f];
        if (!std::isfinite(w)) throw Error(ErrorCode::MismatchedModel, "non-finite superposition weight");
        out.u_full += w * s.u_full;
        out.load += w * s.load;
        for (std::size_t i = 0; i < s.displacement.size(); ++i) out.displacement[i] += w * s.displacement[i];
        for (std::size_t i = 0; i < s.reference_motion.size(); ++i) out.reference_motion[i] += w * s.reference_motion[i];
        for (std::size_t i = 0; i < s.joint_rotation.size(); ++i) out.joint_rotation[i] += w * s.joint_rotation[i];
        for (std::size_t i = 0; i < s.stress.size(); ++i) out.stress[i] += w * s.stress[i];
        for (std::size_t i = 0; i < s.reactions.size(); ++i) out.reactions[i].value += w * s.reactions[i].value;
        for (std::size_t i = 0; i < s.coupling_resultants.size(); ++i) {
            out.coupling_resultants[i].force += w * s.coupling_resultants[i].force;
            out.coupling_resultants[i].moment += w * s.coupling_resultants[i].moment;
        }
        out.relative_residual = std::max(out.relative_residual, s.relative_residual);
    }
    out.von_mises.resize(out.stress.size());
    for (std::size_t i = 0; i < out.stress.size(); ++i) out.von_mises[i] = von_mises(out.stress[i]);
    return out;
}

}  // namespace feaudit

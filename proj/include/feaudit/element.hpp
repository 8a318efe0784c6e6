#pragma once

// Linear-elastic 4-node tetrahedron (constant strain).
//
// Voigt order is (xx, yy, zz, xy, yz, zx) with engineering shear strains.
// Element DOFs are ordered node-major: (u0x, u0y, u0z, u1x, ..., u3z).

#include "feaudit/core.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <string>

namespace feaudit {

using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Vector6 = Eigen::Matrix<double, 6, 1>;
using Matrix12 = Eigen::Matrix<double, 12, 12>;
using Vector12 = Eigen::Matrix<double, 12, 1>;
using StrainDisplacement = Eigen::Matrix<double, 6, 12>;

/// Stress in Voigt order (xx, yy, zz, xy, yz, zx) [Pa].
using StressTensor = Vector6;

struct Material {
    std::string name = "steel";
    double E = 210e9;      // [Pa]
    double nu = 0.3;       // [-]
    double rho = 7850.0;   // [kg/m^3]
    double yield = 355e6;  // [Pa]

    void validate() const {
        if (!(E > 0.0) || !std::isfinite(E)) throw Error(ErrorCode::InvalidMaterial, name + ": E must be > 0");
        if (!(nu >= 0.0 && nu < 0.5)) throw Error(ErrorCode::InvalidMaterial, name + ": nu must be in [0, 0.5)");
        if (!(rho >= 0.0) || !std::isfinite(rho)) throw Error(ErrorCode::InvalidMaterial, name + ": rho must be >= 0");
        if (!(yield > 0.0) || !std::isfinite(yield))
            throw Error(ErrorCode::InvalidMaterial, name + ": yield must be > 0");
    }
};

inline Matrix6 elasticity_matrix(const Material& mat) {
    mat.validate();
    const double lambda = mat.E * mat.nu / ((1.0 + mat.nu) * (1.0 - 2.0 * mat.nu));
    const double mu = mat.E / (2.0 * (1.0 + mat.nu));
    Matrix6 D = Matrix6::Zero();
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) D(i, j) = lambda;
        D(i, i) = lambda + 2.0 * mu;
        D(i + 3, i + 3) = mu;
    }
    return D;
}

struct TetGeometry {
    std::array<Vec3, 4> gradients;  // constant shape-function gradients [1/m]
    double volume = 0.0;            // [m^3], always positive
};

/// Shape-function gradients of the linear tetrahedron. Either vertex
/// orientation is accepted; the volume is returned as a magnitude.
inline TetGeometry shape_gradients(const std::array<Vec3, 4>& x) {
    Mat3 J;
    J.col(0) = x[1] - x[0];
    J.col(1) = x[2] - x[0];
    J.col(2) = x[3] - x[0];
    const double det = J.determinant();
    double longest = 0.0;
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) longest = std::max(longest, (x[a] - x[b]).norm());
    if (!std::isfinite(det) || std::abs(det) <= 1e-12 * longest * longest * longest)
        throw Error(ErrorCode::DegenerateElement, "tetrahedron has (near) zero volume");

    // Rows of J^-1 are the gradients of N1..N3 with respect to x.
    const Mat3 Jinv = J.inverse();
    TetGeometry g;
    g.gradients[1] = Jinv.row(0).transpose();
    g.gradients[2] = Jinv.row(1).transpose();
    g.gradients[3] = Jinv.row(2).transpose();
    g.gradients[0] = -(g.gradients[1] + g.gradients[2] + g.gradients[3]);
    g.volume = std::abs(det) / 6.0;
    return g;
}

inline StrainDisplacement strain_displacement(const TetGeometry& g) {
    StrainDisplacement B = StrainDisplacement::Zero();
    for (int a = 0; a < 4; ++a) {
        const Vec3& d = g.gradients[static_cast<std::size_t>(a)];
        const int c = 3 * a;
        B(0, c) = d.x();
        B(1, c + 1) = d.y();
        B(2, c + 2) = d.z();
        B(3, c) = d.y();
        B(3, c + 1) = d.x();
        B(4, c + 1) = d.z();
        B(4, c + 2) = d.y();
        B(5, c) = d.z();
        B(5, c + 2) = d.x();
    }
    return B;
}

inline Matrix12 element_stiffness(const std::array<Vec3, 4>& x, const Matrix6& D) {
    const auto g = shape_gradients(x);
    const auto B = strain_displacement(g);
    Matrix12 K = g.volume * (B.transpose() * D * B);
    // Symmetrize away round-off from the triple product.
    return 0.5 * (K + K.transpose());
}

inline Matrix12 element_stiffness(const std::array<Vec3, 4>& x, const Material& mat) {
    return element_stiffness(x, elasticity_matrix(mat));
}

inline StressTensor recover_stress(const std::array<Vec3, 4>& x, const Matrix6& D, const Vector12& ue) {
    return D * (strain_displacement(shape_gradients(x)) * ue);
}

inline StressTensor recover_stress(const std::array<Vec3, 4>& x, const Material& mat, const Vector12& ue) {
    return recover_stress(x, elasticity_matrix(mat), ue);
}

inline double von_mises(const StressTensor& s) {
    const double dxy = s[0] - s[1];
    const double dyz = s[1] - s[2];
    const double dzx = s[2] - s[0];
    const double v = 0.5 * (dxy * dxy + dyz * dyz + dzx * dzx) + 3.0 * (s[3] * s[3] + s[4] * s[4] + s[5] * s[5]);
    return std::sqrt(std::max(v, 0.0));
}

}  // namespace feaudit

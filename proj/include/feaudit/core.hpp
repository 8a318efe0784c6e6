#pragma once

// Shared vocabulary: error type, vector aliases, small numeric helpers.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace feaudit {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

enum class ErrorCode {
    UnsupportedVersion,
    MalformedSection,
    UnsupportedElementType,
    DanglingReference,
    UnknownGroup,
    DegenerateElement,
    InvalidMaterial,
    MissingMaterial,
    ConflictingConstraints,
    UnresolvedTarget,
    UnknownCoupling,
    NotPositiveDefinite,
    NoConvergence,
    MismatchedModel,
    EmptyLayout,
    InvalidModel,
    IoFailure,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::MalformedSection: return "MalformedSection";
    case ErrorCode::UnsupportedElementType: return "UnsupportedElementType";
    case ErrorCode::DanglingReference: return "DanglingReference";
    case ErrorCode::UnknownGroup: return "UnknownGroup";
    case ErrorCode::DegenerateElement: return "DegenerateElement";
    case ErrorCode::InvalidMaterial: return "InvalidMaterial";
    case ErrorCode::MissingMaterial: return "MissingMaterial";
    case ErrorCode::ConflictingConstraints: return "ConflictingConstraints";
    case ErrorCode::UnresolvedTarget: return "UnresolvedTarget";
    case ErrorCode::UnknownCoupling: return "UnknownCoupling";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::MismatchedModel: return "MismatchedModel";
    case ErrorCode::EmptyLayout: return "EmptyLayout";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::IoFailure: return "IoFailure";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// FNV-1a, 64 bit. Used for input digests and model signatures.
inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 1469598103934665603ULL) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
    return fnv1a64(std::string_view(reinterpret_cast<const char*>(&v), sizeof v), h);
}

inline std::string hex64(std::uint64_t v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

}  // namespace feaudit

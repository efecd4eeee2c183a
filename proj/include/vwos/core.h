#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <stdexcept>
#include <string>

namespace vwos {

using Scalar = double;
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

inline constexpr Scalar kPi = 3.14159265358979323846;

// Unit direction with the norm invariant checked at construction.
class UnitVec3 {
public:
    explicit UnitVec3(const Vec3& v) : v_(v) {
        if (std::abs(v_.norm() - 1.0) > 1e-12)
            throw std::invalid_argument("UnitVec3: vector is not unit length");
    }

    // Normalizes v; throws on (near-)zero input.
    static UnitVec3 normalized(const Vec3& v) {
        const Scalar n = v.norm();
        if (!(n > 0.0) || !std::isfinite(n))
            throw std::invalid_argument("degenerate direction");
        return UnitVec3(Vec3(v / n), unchecked_tag{});
    }

    const Vec3& vec() const { return v_; }
    Scalar dot(const Vec3& o) const { return v_.dot(o); }
    Scalar x() const { return v_.x(); }
    Scalar y() const { return v_.y(); }
    Scalar z() const { return v_.z(); }
    UnitVec3 operator-() const { return UnitVec3(Vec3(-v_), unchecked_tag{}); }

private:
    struct unchecked_tag {};
    UnitVec3(const Vec3& v, unchecked_tag) : v_(v) {}
    Vec3 v_;
};

// unit vector pointing from x to y
inline UnitVec3 dir(const Vec3& x, const Vec3& y) {
    return UnitVec3::normalized(y - x);
}

// Thrown when thinning encounters a density value above the supplied bound.
// Clamping instead would silently bias acceptance probabilities.
struct MajorantViolation : std::runtime_error {
    MajorantViolation(const Vec3& query, const Vec3& candidate, Scalar density, Scalar bound)
        : std::runtime_error("majorant violated: density " + std::to_string(density) +
                             " > bound " + std::to_string(bound) + " at candidate (" +
                             std::to_string(candidate.x()) + ", " + std::to_string(candidate.y()) +
                             ", " + std::to_string(candidate.z()) + ") for query (" +
                             std::to_string(query.x()) + ", " + std::to_string(query.y()) + ", " +
                             std::to_string(query.z()) + ")"),
          query_point(query), candidate_center(candidate), density_value(density),
          majorant_bound(bound) {}

    Vec3 query_point;
    Vec3 candidate_center;
    Scalar density_value;
    Scalar majorant_bound;
};

} // namespace vwos

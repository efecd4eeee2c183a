#pragma once

#include "vwos/core.h"
#include "vwos/rng.h"

#include <array>
#include <optional>
#include <variant>
#include <vector>

namespace vwos {

struct Sphere {
    Vec3 center;
    Scalar radius = 1.0;
};

struct AxisAlignedBox {
    Vec3 min;
    Vec3 max;
};

struct TriangleSoup {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;
};

using Primitive = std::variant<Sphere, AxisAlignedBox>;

// Deterministic volume boundary: a union of analytic primitives, plus an
// optional triangle soup queried by brute force. Immutable after
// construction; all queries are pure.
class MediumShape {
public:
    explicit MediumShape(std::vector<Primitive> primitives,
                         std::optional<TriangleSoup> soup = std::nullopt);

    const std::vector<Primitive>& primitives() const { return primitives_; }
    const std::optional<TriangleSoup>& soup() const { return soup_; }

    const Vec3& aabb_min() const { return aabb_min_; }
    const Vec3& aabb_max() const { return aabb_max_; }

private:
    std::vector<Primitive> primitives_;
    std::optional<TriangleSoup> soup_;
    Vec3 aabb_min_;
    Vec3 aabb_max_;
};

enum class HitKind { MediumBoundary, StochasticParticle, MemoryParticle, InsideParticle };

struct ClosestHit {
    Vec3 point = Vec3::Zero();
    Scalar distance = 0.0;
    HitKind kind = HitKind::MediumBoundary;
    Vec3 particle_center = Vec3::Zero(); // valid when kind == StochasticParticle
    int memory_index = -1;               // valid when kind == MemoryParticle
};

// Nearest point on the union boundary over all primitives (and triangles when
// present). Ties keep the first primitive in declaration order.
ClosestHit closest_point_on_medium(const MediumShape& shape, const Vec3& x);

// Solid containment in the union.
bool contains(const MediumShape& shape, const Vec3& x);

// Uniform direction on the unit sphere; consumes exactly two uniforms.
UnitVec3 sample_direction(Pcg32& rng);

// Uniform direction on the hemisphere {w : w.axis >= 0}; also two uniforms.
UnitVec3 sample_direction(Pcg32& rng, const UnitVec3& hemisphere_axis);

struct RaySphereHit {
    Scalar t = 0.0;
    Vec3 point = Vec3::Zero();
};

// Smallest root t of |origin + t w - center| = radius with t in (t_min, t_max].
std::optional<RaySphereHit> first_ray_sphere_hit(const Vec3& origin, const UnitVec3& w,
                                                 const Vec3& center, Scalar radius,
                                                 Scalar t_min, Scalar t_max);

// Closest point on a single primitive's surface (used by the union query and
// by tests probing the per-primitive distance bound).
Vec3 closest_point_on_sphere(const Sphere& s, const Vec3& x);
Vec3 closest_point_on_box(const AxisAlignedBox& b, const Vec3& x);
Vec3 closest_point_on_triangle(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& x);

} // namespace vwos

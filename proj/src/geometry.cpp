#include "vwos/geometry.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vwos {

namespace {

void extend_aabb(Vec3& lo, Vec3& hi, const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
}

} // namespace

MediumShape::MediumShape(std::vector<Primitive> primitives, std::optional<TriangleSoup> soup)
    : primitives_(std::move(primitives)), soup_(std::move(soup)) {
    if (primitives_.empty() && (!soup_ || soup_->triangles.empty()))
        throw std::invalid_argument("MediumShape: at least one primitive required");

    aabb_min_ = Vec3::Constant(std::numeric_limits<Scalar>::infinity());
    aabb_max_ = Vec3::Constant(-std::numeric_limits<Scalar>::infinity());
    for (const auto& prim : primitives_) {
        if (const auto* s = std::get_if<Sphere>(&prim)) {
            if (!(s->radius > 0.0))
                throw std::invalid_argument("MediumShape: sphere radius must be positive");
            extend_aabb(aabb_min_, aabb_max_, s->center - Vec3::Constant(s->radius));
            extend_aabb(aabb_min_, aabb_max_, s->center + Vec3::Constant(s->radius));
        } else {
            const auto& b = std::get<AxisAlignedBox>(prim);
            if (!(b.min.x() < b.max.x() && b.min.y() < b.max.y() && b.min.z() < b.max.z()))
                throw std::invalid_argument("MediumShape: box min must be below max");
            extend_aabb(aabb_min_, aabb_max_, b.min);
            extend_aabb(aabb_min_, aabb_max_, b.max);
        }
    }
    if (soup_) {
        for (const auto& tri : soup_->triangles)
            for (int k : tri) {
                if (k < 0 || k >= static_cast<int>(soup_->vertices.size()))
                    throw std::invalid_argument("MediumShape: triangle index out of range");
                extend_aabb(aabb_min_, aabb_max_, soup_->vertices[k]);
            }
    }
}

Vec3 closest_point_on_sphere(const Sphere& s, const Vec3& x) {
    const Vec3 d = x - s.center;
    const Scalar n = d.norm();
    if (n < 1e-300)
        return s.center + Vec3(s.radius, 0.0, 0.0); // query at the center: any surface point
    return s.center + (s.radius / n) * d;
}

Vec3 closest_point_on_box(const AxisAlignedBox& b, const Vec3& x) {
    const Vec3 clamped = x.cwiseMax(b.min).cwiseMin(b.max);
    if ((clamped - x).squaredNorm() > 0.0)
        return clamped; // outside: clamp lands on the surface

    // inside: push to the nearest face
    Scalar best = std::numeric_limits<Scalar>::infinity();
    int axis = 0;
    Scalar target = b.min.x();
    for (int i = 0; i < 3; ++i) {
        const Scalar to_lo = x[i] - b.min[i];
        const Scalar to_hi = b.max[i] - x[i];
        if (to_lo < best) { best = to_lo; axis = i; target = b.min[i]; }
        if (to_hi < best) { best = to_hi; axis = i; target = b.max[i]; }
    }
    Vec3 p = x;
    p[axis] = target;
    return p;
}

// Ericson, Real-Time Collision Detection, 5.1.5
Vec3 closest_point_on_triangle(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& x) {
    const Vec3 ab = b - a, ac = c - a, ax = x - a;
    const Scalar d1 = ab.dot(ax), d2 = ac.dot(ax);
    if (d1 <= 0.0 && d2 <= 0.0) return a;

    const Vec3 bx = x - b;
    const Scalar d3 = ab.dot(bx), d4 = ac.dot(bx);
    if (d3 >= 0.0 && d4 <= d3) return b;

    const Scalar vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;

    const Vec3 cx = x - c;
    const Scalar d5 = ab.dot(cx), d6 = ac.dot(cx);
    if (d6 >= 0.0 && d5 <= d6) return c;

    const Scalar vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;

    const Scalar va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
        return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);

    const Scalar denom = 1.0 / (va + vb + vc);
    return a + (vb * denom) * ab + (vc * denom) * ac;
}

ClosestHit closest_point_on_medium(const MediumShape& shape, const Vec3& x) {
    ClosestHit best;
    best.distance = std::numeric_limits<Scalar>::infinity();
    best.kind = HitKind::MediumBoundary;

    auto consider = [&](const Vec3& p) {
        const Scalar d = (p - x).norm();
        if (d < best.distance) {
            best.distance = d;
            best.point = p;
        }
    };

    for (const auto& prim : shape.primitives()) {
        if (const auto* s = std::get_if<Sphere>(&prim))
            consider(closest_point_on_sphere(*s, x));
        else
            consider(closest_point_on_box(std::get<AxisAlignedBox>(prim), x));
    }
    if (shape.soup()) {
        const auto& soup = *shape.soup();
        for (const auto& tri : soup.triangles)
            consider(closest_point_on_triangle(soup.vertices[tri[0]], soup.vertices[tri[1]],
                                               soup.vertices[tri[2]], x));
    }
    return best;
}

namespace {

bool ray_hits_triangle_px(const Vec3& o, const Vec3& a, const Vec3& b, const Vec3& c) {
    // Moller-Trumbore specialized to direction (1,0,0)
    const Vec3 e1 = b - a, e2 = c - a;
    const Vec3 p(0.0, -e2.z(), e2.y()); // dir x e2
    const Scalar det = e1.dot(p);
    if (std::abs(det) < 1e-14) return false;
    const Scalar inv = 1.0 / det;
    const Vec3 t = o - a;
    const Scalar u = t.dot(p) * inv;
    if (u < 0.0 || u > 1.0) return false;
    const Vec3 q = t.cross(e1);
    const Scalar v = q.x() * inv;
    if (v < 0.0 || u + v > 1.0) return false;
    const Scalar hit_t = e2.dot(q) * inv;
    return hit_t > 0.0;
}

} // namespace

bool contains(const MediumShape& shape, const Vec3& x) {
    for (const auto& prim : shape.primitives()) {
        if (const auto* s = std::get_if<Sphere>(&prim)) {
            if ((x - s->center).norm() <= s->radius) return true;
        } else {
            const auto& b = std::get<AxisAlignedBox>(prim);
            if ((x.array() >= b.min.array()).all() && (x.array() <= b.max.array()).all())
                return true;
        }
    }
    if (shape.soup()) {
        // parity of crossings along +x; adequate for closed desk-scale soups
        const auto& soup = *shape.soup();
        int crossings = 0;
        for (const auto& tri : soup.triangles)
            if (ray_hits_triangle_px(x, soup.vertices[tri[0]], soup.vertices[tri[1]],
                                     soup.vertices[tri[2]]))
                ++crossings;
        if (crossings % 2 == 1) return true;
    }
    return false;
}

UnitVec3 sample_direction(Pcg32& rng) {
    const Scalar z = 1.0 - 2.0 * rng.uniform();
    const Scalar phi = 2.0 * kPi * rng.uniform();
    const Scalar rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    return UnitVec3::normalized(Vec3(rho * std::cos(phi), rho * std::sin(phi), z));
}

UnitVec3 sample_direction(Pcg32& rng, const UnitVec3& hemisphere_axis) {
    UnitVec3 w = sample_direction(rng);
    if (w.dot(hemisphere_axis.vec()) < 0.0) return -w;
    return w;
}

std::optional<RaySphereHit> first_ray_sphere_hit(const Vec3& origin, const UnitVec3& w,
                                                 const Vec3& center, Scalar radius,
                                                 Scalar t_min, Scalar t_max) {
    const Vec3 oc = origin - center;
    const Scalar b = oc.dot(w.vec());
    const Scalar c = oc.squaredNorm() - radius * radius;
    const Scalar disc = b * b - c;
    if (disc < 0.0) return std::nullopt;
    const Scalar sq = std::sqrt(disc);

    // stable quadratic roots, t0 <= t1
    Scalar t0, t1;
    if (b >= 0.0) {
        t0 = -b - sq;
        t1 = c / t0;
        if (t1 < t0) std::swap(t0, t1);
    } else {
        t1 = -b + sq;
        t0 = c / t1;
        if (t1 < t0) std::swap(t0, t1);
    }

    for (Scalar t : {t0, t1})
        if (t > t_min && t <= t_max)
            return RaySphereHit{t, origin + t * w.vec()};
    return std::nullopt;
}

} // namespace vwos

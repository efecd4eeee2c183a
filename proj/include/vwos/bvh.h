#pragma once

#include "vwos/pbm.h"

namespace vwos {

// Bounding-volume tree over a particle configuration's centers. Supports the
// two queries ensemble averaging needs: nearest center and all centers within
// a given center-space radius.
class SphereBvh {
public:
    SphereBvh() = default;
    explicit SphereBvh(const ParticleConfiguration& config);

    bool empty() const { return centers_.empty(); }
    std::size_t size() const { return centers_.size(); }
    Scalar particle_radius() const { return radius_; }
    const Vec3& center(int i) const { return centers_[i]; }

    // index of the nearest center, or -1 when empty
    int nearest_center(const Vec3& x) const;

    // indices of centers with |c - x| <= r (unsorted)
    void centers_within(const Vec3& x, Scalar r, std::vector<int>& out) const;

    // nearest particle surface point; distance may be negative when x is
    // inside a particle
    std::optional<ClosestHit> closest_surface_point(const Vec3& x) const;

private:
    struct Node {
        Vec3 lo = Vec3::Zero();
        Vec3 hi = Vec3::Zero();
        int left = -1;   // internal: child index; leaf: -1
        int right = -1;
        int begin = 0;   // leaf range into order_
        int end = 0;
    };

    int build(int begin, int end);
    Scalar box_distance2(const Node& n, const Vec3& x) const;

    std::vector<Vec3> centers_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    Scalar radius_ = 0.0;
    int root_ = -1;
};

} // namespace vwos

#include "vwos/bvh.h"

#include <algorithm>
#include <limits>

namespace vwos {

namespace {
constexpr int kLeafSize = 8;
}

SphereBvh::SphereBvh(const ParticleConfiguration& config)
    : centers_(config.centers), radius_(config.radius) {
    if (centers_.empty()) return;
    order_.resize(centers_.size());
    for (int i = 0; i < static_cast<int>(order_.size()); ++i) order_[i] = i;
    nodes_.reserve(2 * centers_.size() / kLeafSize + 2);
    root_ = build(0, static_cast<int>(order_.size()));
}

int SphereBvh::build(int begin, int end) {
    Node node;
    node.lo = Vec3::Constant(std::numeric_limits<Scalar>::infinity());
    node.hi = -node.lo;
    for (int i = begin; i < end; ++i) {
        const Vec3& c = centers_[order_[i]];
        node.lo = node.lo.cwiseMin(c);
        node.hi = node.hi.cwiseMax(c);
    }
    node.begin = begin;
    node.end = end;

    const int idx = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    if (end - begin <= kLeafSize) return idx;

    int axis = 0;
    (node.hi - node.lo).maxCoeff(&axis);
    const int mid = (begin + end) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int a, int b) { return centers_[a][axis] < centers_[b][axis]; });

    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[idx].left = left;
    nodes_[idx].right = right;
    return idx;
}

Scalar SphereBvh::box_distance2(const Node& n, const Vec3& x) const {
    const Vec3 d = (n.lo - x).cwiseMax(x - n.hi).cwiseMax(0.0);
    return d.squaredNorm();
}

int SphereBvh::nearest_center(const Vec3& x) const {
    if (centers_.empty()) return -1;

    int best = -1;
    Scalar best_d2 = std::numeric_limits<Scalar>::infinity();
    int stack[64];
    int top = 0;
    stack[top++] = root_;
    while (top > 0) {
        const Node& n = nodes_[stack[--top]];
        if (box_distance2(n, x) >= best_d2) continue;
        if (n.left < 0) {
            for (int i = n.begin; i < n.end; ++i) {
                const Scalar d2 = (centers_[order_[i]] - x).squaredNorm();
                if (d2 < best_d2) { best_d2 = d2; best = order_[i]; }
            }
            continue;
        }
        // visit the nearer child first
        const Scalar dl = box_distance2(nodes_[n.left], x);
        const Scalar dr = box_distance2(nodes_[n.right], x);
        if (dl < dr) {
            stack[top++] = n.right;
            stack[top++] = n.left;
        } else {
            stack[top++] = n.left;
            stack[top++] = n.right;
        }
    }
    return best;
}

void SphereBvh::centers_within(const Vec3& x, Scalar r, std::vector<int>& out) const {
    out.clear();
    if (centers_.empty()) return;
    const Scalar r2 = r * r;
    int stack[64];
    int top = 0;
    stack[top++] = root_;
    while (top > 0) {
        const Node& n = nodes_[stack[--top]];
        if (box_distance2(n, x) > r2) continue;
        if (n.left < 0) {
            for (int i = n.begin; i < n.end; ++i)
                if ((centers_[order_[i]] - x).squaredNorm() <= r2) out.push_back(order_[i]);
            continue;
        }
        stack[top++] = n.left;
        stack[top++] = n.right;
    }
}

std::optional<ClosestHit> SphereBvh::closest_surface_point(const Vec3& x) const {
    const int i = nearest_center(x);
    if (i < 0) return std::nullopt;
    const Vec3& c = centers_[i];
    ClosestHit hit;
    hit.kind = HitKind::MemoryParticle;
    hit.memory_index = i;
    hit.particle_center = c;
    hit.distance = (x - c).norm() - radius_;
    hit.point = c - radius_ * dir(x, c).vec();
    return hit;
}

} // namespace vwos

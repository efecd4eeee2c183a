#include "vwos/walk_memory.h"

#include <cassert>

namespace vwos {

void WalkMemory::add_empty_ball(const Vec3& center, Scalar radius) {
    if (mode_.kind == MemoryMode::Kind::Memoryless) return;
    empty_balls_.push_back({center, radius});
    if (mode_.kind == MemoryMode::Kind::Finite &&
        empty_balls_.size() > static_cast<std::size_t>(mode_.max_empty))
        empty_balls_.erase(empty_balls_.begin());
}

void WalkMemory::add_particle(const Vec3& center) {
    if (mode_.kind == MemoryMode::Kind::Memoryless) return;
    for (const auto& c : particle_centers_)
        if (c == center) return;
    particle_centers_.push_back(center);
    if (mode_.kind == MemoryMode::Kind::Finite &&
        particle_centers_.size() > static_cast<std::size_t>(mode_.max_particles))
        particle_centers_.erase(particle_centers_.begin());
}

void WalkMemory::update(const Vec3& x, const ClosestHit& hit, Scalar s) {
    assert(hit.distance > 0.0);
    add_empty_ball(x, hit.distance);
    if (hit.kind == HitKind::StochasticParticle) {
        // center sits one particle radius past the surface point
        (void)s;
        add_particle(hit.particle_center);
    }
}

bool WalkMemory::is_inside_dilated_empty(const Vec3& x, Scalar s) const {
    for (const auto& b : empty_balls_)
        if ((x - b.center).norm() < b.radius + s) return true;
    return false;
}

std::optional<ClosestHit> WalkMemory::closest_point_on_sampled_particles(const Vec3& x,
                                                                         Scalar s) const {
    if (particle_centers_.empty()) return std::nullopt;

    int best = 0;
    Scalar best_d2 = (x - particle_centers_[0]).squaredNorm();
    for (int i = 1; i < static_cast<int>(particle_centers_.size()); ++i) {
        const Scalar d2 = (x - particle_centers_[i]).squaredNorm();
        if (d2 < best_d2) { best_d2 = d2; best = i; }
    }

    const Vec3& c = particle_centers_[best];
    ClosestHit hit;
    hit.kind = HitKind::MemoryParticle;
    hit.memory_index = best;
    hit.distance = std::sqrt(best_d2) - s;
    hit.point = c - s * dir(x, c).vec();
    return hit;
}

ClosestHit deterministic_closest(const WalkMemory& memory, const MediumShape& medium,
                                 const Vec3& x, Scalar s) {
    ClosestHit hit = closest_point_on_medium(medium, x);
    if (auto pinned = memory.closest_point_on_sampled_particles(x, s))
        if (pinned->distance < hit.distance) hit = *pinned;
    return hit;
}

ClosestHit sample_closest_point_with_memory(const Vec3& x, Scalar majorant_density,
                                            const DensityField& field, Scalar s,
                                            const WalkMemory& memory, const MediumShape& medium,
                                            Pcg32& rng) {
    return sample_closest_point_with_memory(x, majorant_density, field, s, memory,
                                            deterministic_closest(memory, medium, x, s), rng);
}

ClosestHit sample_closest_point_with_memory(const Vec3& x, Scalar majorant_density,
                                            const DensityField& field, Scalar s,
                                            const WalkMemory& memory,
                                            const ClosestHit& deterministic, Pcg32& rng) {
    // inside a pinned ball: immediate boundary contact, nothing to sample
    if (deterministic.distance <= 0.0) return deterministic;

    if (!(majorant_density > 0.0)) return deterministic;

    const ConditionalDensityView view(field, memory.empty_balls(), s);
    const ClosestPointSample sampled =
        sample_closest_point(x, majorant_density, view, s, rng, deterministic.distance);

    switch (sampled.kind) {
    case ClosestPointSample::Kind::BeyondStop:
        return deterministic;
    case ClosestPointSample::Kind::Inside: {
        ClosestHit hit;
        hit.kind = HitKind::InsideParticle;
        hit.point = x;
        hit.distance = 0.0;
        hit.particle_center = sampled.center;
        return hit;
    }
    case ClosestPointSample::Kind::Surface:
        break;
    }

    ClosestHit stochastic;
    stochastic.kind = HitKind::StochasticParticle;
    stochastic.point = sampled.point;
    stochastic.distance = sampled.center_distance - s;
    stochastic.particle_center = sampled.center;
    return stochastic.distance < deterministic.distance ? stochastic : deterministic;
}

} // namespace vwos

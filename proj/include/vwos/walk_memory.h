#pragma once

#include "vwos/pbm.h"

namespace vwos {

struct MemoryMode {
    enum class Kind { Full, Finite, Memoryless };

    Kind kind = Kind::Full;
    int max_empty = 1;     // Finite only
    int max_particles = 1; // Finite only

    static MemoryMode full() { return {Kind::Full, 0, 0}; }
    static MemoryMode memoryless() { return {Kind::Memoryless, 0, 0}; }
    static MemoryMode finite(int max_empty, int max_particles) {
        if (max_empty < 1 || max_particles < 1)
            throw std::invalid_argument("MemoryMode: finite caps must be positive");
        return {Kind::Finite, max_empty, max_particles};
    }

    bool operator==(const MemoryMode&) const = default;
};

// Per-walk record of certified empty balls and pinned particle centers.
// One instance per walk; never shared across threads.
class WalkMemory {
public:
    explicit WalkMemory(MemoryMode mode = MemoryMode::full()) : mode_(mode) {}

    // Record the outcome of one walk step: the ball around x of the hit
    // distance is empty, and a stochastic-particle hit pins its center.
    // Medium-boundary and memory-particle hits add no particle.
    void update(const Vec3& x, const ClosestHit& hit, Scalar s);

    void add_empty_ball(const Vec3& center, Scalar radius);
    void add_particle(const Vec3& center); // skipped when already present

    // true iff some recorded ball dilated by s contains x
    bool is_inside_dilated_empty(const Vec3& x, Scalar s) const;

    // Nearest pinned particle surface; distance may be negative when x sits
    // inside a pinned ball (callers treat that as immediate boundary contact).
    std::optional<ClosestHit> closest_point_on_sampled_particles(const Vec3& x, Scalar s) const;

    std::span<const EmptyBall> empty_balls() const { return empty_balls_; }
    std::span<const Vec3> particle_centers() const { return particle_centers_; }
    std::size_t empty_count() const { return empty_balls_.size(); }
    std::size_t particle_count() const { return particle_centers_.size(); }
    const MemoryMode& mode() const { return mode_; }

private:
    MemoryMode mode_;
    std::vector<EmptyBall> empty_balls_;
    std::vector<Vec3> particle_centers_;
};

// Nearer of the medium boundary and the pinned-particle boundary.
ClosestHit deterministic_closest(const WalkMemory& memory, const MediumShape& medium,
                                 const Vec3& x, Scalar s);

// Conditional closest point sampling: thinning against the density with all
// recorded empty balls masked out, raced against the deterministic boundary
// (medium plus pinned particles). Returns the closer candidate; an inside
// outcome maps to InsideParticle at distance zero. majorant_density must
// bound the base field over B(x, deterministic distance + s).
ClosestHit sample_closest_point_with_memory(const Vec3& x, Scalar majorant_density,
                                            const DensityField& field, Scalar s,
                                            const WalkMemory& memory, const MediumShape& medium,
                                            Pcg32& rng);

// Same, with the deterministic candidate already computed (the per-step
// majorant is usually derived from it).
ClosestHit sample_closest_point_with_memory(const Vec3& x, Scalar majorant_density,
                                            const DensityField& field, Scalar s,
                                            const WalkMemory& memory,
                                            const ClosestHit& deterministic, Pcg32& rng);

} // namespace vwos

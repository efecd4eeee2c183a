#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vwos/stats.h"
#include "vwos/walk_memory.h"

#include <algorithm>
#include <cmath>

using namespace vwos;

namespace {

ClosestHit medium_hit(const Vec3& point, double distance) {
    ClosestHit hit;
    hit.kind = HitKind::MediumBoundary;
    hit.point = point;
    hit.distance = distance;
    return hit;
}

ClosestHit particle_hit(const Vec3& point, double distance, const Vec3& center) {
    ClosestHit hit;
    hit.kind = HitKind::StochasticParticle;
    hit.point = point;
    hit.distance = distance;
    hit.particle_center = center;
    return hit;
}

std::shared_ptr<const MediumShape> ball_medium(double radius) {
    return std::make_shared<const MediumShape>(std::vector<Primitive>{Sphere{Vec3::Zero(), radius}});
}

} // namespace

TEST_CASE("update records empty balls and pins stochastic particles") {
    const double s = 0.1;
    WalkMemory memory;

    memory.update(Vec3::Zero(), medium_hit(Vec3(0, 0, 1), 1.0), s);
    REQUIRE(memory.empty_count() == 1);
    CHECK(memory.empty_balls()[0].center == Vec3::Zero());
    CHECK(memory.empty_balls()[0].radius == 1.0);
    CHECK(memory.particle_count() == 0);

    // surface point (0,0,1) at distance 1: the center sits at (0,0,1.1)
    memory.update(Vec3::Zero(), particle_hit(Vec3(0, 0, 1), 1.0, Vec3(0, 0, 1.1)), s);
    REQUIRE(memory.particle_count() == 1);
    CHECK(memory.particle_centers()[0] == Vec3(0, 0, 1.1));
    CHECK(memory.empty_count() == 2);

    WalkMemory none(MemoryMode::memoryless());
    none.update(Vec3::Zero(), medium_hit(Vec3(0, 0, 1), 1.0), s);
    none.update(Vec3::Zero(), particle_hit(Vec3(0, 0, 1), 1.0, Vec3(0, 0, 1.1)), s);
    CHECK(none.empty_count() == 0);
    CHECK(none.particle_count() == 0);
}

TEST_CASE("dilated containment query") {
    const double s = 0.1;
    WalkMemory memory;
    CHECK_FALSE(memory.is_inside_dilated_empty(Vec3(0, 0, 0.5), s));

    memory.add_empty_ball(Vec3::Zero(), 1.0);
    CHECK(memory.is_inside_dilated_empty(Vec3(0, 0, 1.05), s));
    CHECK_FALSE(memory.is_inside_dilated_empty(Vec3(0, 0, 1.2), s));
}

TEST_CASE("closest point over pinned particles") {
    const double s = 0.5;
    WalkMemory memory;
    CHECK_FALSE(memory.closest_point_on_sampled_particles(Vec3::Zero(), s).has_value());

    memory.add_particle(Vec3(2, 0, 0));
    auto hit = memory.closest_point_on_sampled_particles(Vec3::Zero(), s);
    REQUIRE(hit.has_value());
    CHECK(hit->point.isApprox(Vec3(1.5, 0, 0), 1e-14));
    CHECK(hit->distance == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(hit->kind == HitKind::MemoryParticle);
    CHECK(hit->memory_index == 0);

    memory.add_particle(Vec3(0, 3, 0));
    hit = memory.closest_point_on_sampled_particles(Vec3::Zero(), s);
    REQUIRE(hit.has_value());
    CHECK(hit->memory_index == 0); // the (2,0,0) particle wins: 1.5 vs 2.5
    CHECK(hit->point.isApprox(Vec3(1.5, 0, 0), 1e-14));

    // inside a pinned ball: negative distance signals boundary contact
    const auto inside = memory.closest_point_on_sampled_particles(Vec3(1.8, 0, 0), s);
    REQUIRE(inside.has_value());
    CHECK(inside->distance == doctest::Approx(-0.3).epsilon(1e-12));
}

TEST_CASE("provenance dedup keeps P fixed on re-hits") {
    const double s = 0.2;
    WalkMemory memory;
    memory.add_particle(Vec3(1, 0, 0));
    const std::size_t before = memory.particle_count();
    for (int i = 0; i < 5; ++i) {
        const auto hit = memory.closest_point_on_sampled_particles(Vec3::Zero(), s);
        REQUIRE(hit.has_value());
        memory.update(Vec3::Zero(), *hit, s);
    }
    CHECK(memory.particle_count() == before);
    CHECK(memory.empty_count() == 5);

    memory.add_particle(Vec3(1, 0, 0)); // exact duplicate is skipped
    CHECK(memory.particle_count() == before);
}

TEST_CASE("finite memory evicts oldest first") {
    WalkMemory memory(MemoryMode::finite(2, 1));
    memory.add_empty_ball(Vec3(1, 0, 0), 0.1);
    memory.add_empty_ball(Vec3(2, 0, 0), 0.2);
    memory.add_empty_ball(Vec3(3, 0, 0), 0.3);
    REQUIRE(memory.empty_count() == 2);
    CHECK(memory.empty_balls()[0].center == Vec3(2, 0, 0));
    CHECK(memory.empty_balls()[1].center == Vec3(3, 0, 0));

    memory.add_particle(Vec3(1, 1, 1));
    memory.add_particle(Vec3(2, 2, 2));
    REQUIRE(memory.particle_count() == 1);
    CHECK(memory.particle_centers()[0] == Vec3(2, 2, 2));

    CHECK_THROWS_AS(MemoryMode::finite(0, 1), std::invalid_argument);
}

TEST_CASE("conditional sampling with memory respects every recorded ball") {
    const double lambda = 150.0, s = 0.03;
    auto medium = ball_medium(1.0);
    const DensityField field = DensityField::constant(lambda, medium);

    for (int walk = 0; walk < 1000; ++walk) {
        Pcg32 rng = walk_rng(50, 0, 0, walk);
        WalkMemory memory;
        Vec3 x(0.3 * rng.uniform() - 0.15, 0.3 * rng.uniform() - 0.15, 0.3 * rng.uniform() - 0.15);
        int steps = 0;
        for (; steps < 60; ++steps) {
            const std::vector<EmptyBall> before(memory.empty_balls().begin(),
                                                memory.empty_balls().end());
            const ClosestHit hit =
                sample_closest_point_with_memory(x, lambda, field, s, memory, *medium, rng);
            if (hit.distance < 1e-4) break;

            if (hit.kind == HitKind::StochasticParticle)
                for (const auto& ball : before)
                    CHECK((hit.particle_center - ball.center).norm() >= ball.radius + s);

            memory.update(x, hit, s);
            CHECK(memory.empty_count() == static_cast<std::size_t>(steps + 1));
            CHECK(memory.particle_count() <= static_cast<std::size_t>(steps + 1));
            x += hit.distance * sample_direction(rng).vec();
        }
    }
}

TEST_CASE("with zero density the sampler returns the deterministic candidate") {
    auto medium = ball_medium(1.0);
    const DensityField zero = DensityField::constant(0.0, medium);
    WalkMemory memory;
    Pcg32 rng(8, 8);
    const Vec3 x(0.4, 0, 0);
    const ClosestHit hit =
        sample_closest_point_with_memory(x, 0.0, zero, 0.05, memory, *medium, rng);
    CHECK(hit.kind == HitKind::MediumBoundary);
    CHECK(hit.distance == doctest::Approx(0.6).epsilon(1e-12));

    // inside a pinned ball the deterministic candidate reports contact
    memory.add_particle(Vec3(0.4, 0, 0.02));
    const ClosestHit contact =
        sample_closest_point_with_memory(x, 0.0, zero, 0.05, memory, *medium, rng);
    CHECK(contact.distance <= 0.0);
    CHECK(contact.kind == HitKind::MemoryParticle);
}

TEST_CASE("stochastic candidates win only when closer") {
    const double lambda = 100.0, s = 0.04;
    auto medium = ball_medium(1.0);
    const DensityField field = DensityField::constant(lambda, medium);

    int stochastic_hits = 0;
    for (int i = 0; i < 3000; ++i) {
        Pcg32 rng = walk_rng(60, 1, 0, i);
        WalkMemory memory;
        const Vec3 x(0.2, -0.1, 0.05);
        const ClosestHit det = closest_point_on_medium(*medium, x);
        const ClosestHit hit =
            sample_closest_point_with_memory(x, lambda, field, s, memory, *medium, rng);
        CHECK(hit.distance <= det.distance + 1e-12);
        if (hit.kind == HitKind::StochasticParticle) {
            ++stochastic_hits;
            memory.update(x, hit, s);
            CHECK(memory.empty_count() == 1);
            CHECK(memory.empty_balls()[0].radius == hit.distance);
            CHECK(memory.particle_count() == 1);
        }
    }
    CHECK(stochastic_hits > 0);
}

TEST_CASE("memoryless and full memory agree on the first step") {
    const double lambda = 120.0, s = 0.05;
    auto medium = ball_medium(1.0);
    const DensityField field = DensityField::constant(lambda, medium);

    std::vector<double> full_dist, none_dist;
    for (int i = 0; i < 2000; ++i) {
        const Vec3 x(0.1, 0.05, -0.02);
        Pcg32 r1 = walk_rng(70, 2, 0, i);
        Pcg32 r2 = walk_rng(70, 2, 0, i);
        WalkMemory full(MemoryMode::full());
        WalkMemory none(MemoryMode::memoryless());
        full_dist.push_back(
            sample_closest_point_with_memory(x, lambda, field, s, full, *medium, r1).distance);
        none_dist.push_back(
            sample_closest_point_with_memory(x, lambda, field, s, none, *medium, r2).distance);
    }
    std::sort(full_dist.begin(), full_dist.end());
    std::sort(none_dist.begin(), none_dist.end());
    CHECK(ks_two_sample_statistic(full_dist, none_dist) == 0.0); // equal streams, equal outcomes
}

#include "vwos/solvers.h"

#include "vwos/parallel.h"

#include <cassert>
#include <cmath>

namespace vwos {

// ---------------------------------------------------------------- boundary

BoundaryFunction BoundaryFunction::constant(Scalar value) {
    BoundaryFunction f;
    f.kind_ = Kind::Constant;
    f.value_ = value;
    return f;
}

BoundaryFunction BoundaryFunction::linear(int axis, Scalar scale, Scalar offset) {
    if (axis < 0 || axis > 2) throw std::invalid_argument("BoundaryFunction: axis must be 0..2");
    BoundaryFunction f;
    f.kind_ = Kind::Linear;
    f.axis_ = axis;
    f.scale_ = scale;
    f.offset_ = offset;
    return f;
}

BoundaryFunction BoundaryFunction::cos_product() {
    BoundaryFunction f;
    f.kind_ = Kind::CosProduct;
    return f;
}

BoundaryFunction BoundaryFunction::split_cos() {
    BoundaryFunction f;
    f.kind_ = Kind::SplitCos;
    return f;
}

BoundaryFunction BoundaryFunction::gaussian_shell(Scalar a, Scalar b, BoundaryFunction inner) {
    if (inner.kind_ == Kind::GaussianShell)
        throw std::invalid_argument("BoundaryFunction: shell inner function may not be a shell");
    BoundaryFunction f;
    f.kind_ = Kind::GaussianShell;
    f.shell_a_ = a;
    f.shell_b_ = b;
    f.inner_ = std::make_shared<BoundaryFunction>(std::move(inner));
    return f;
}

Scalar BoundaryFunction::eval(const Vec3& x, const MediumShape& medium) const {
    switch (kind_) {
    case Kind::Constant:
        return value_;
    case Kind::Linear:
        return scale_ * x[axis_] + offset_;
    case Kind::CosProduct: {
        const Scalar f = 2.0 * std::exp(-2.0 * (x.z() - 1.75));
        return 0.5 * (std::cos(f * x.x()) * std::cos(f * x.y()) - 1.75);
    }
    case Kind::SplitCos: {
        const Scalar c = 0.5 * std::cos(10.0 * x.z());
        return x.x() < 0.0 ? c + 0.5 : c - 0.5;
    }
    case Kind::GaussianShell: {
        const ClosestHit hit = closest_point_on_medium(medium, x);
        return -shell_a_ * inner_->eval(hit.point, medium) *
               std::exp(-shell_b_ * hit.distance * hit.distance);
    }
    }
    return 0.0;
}

bool BoundaryFunction::operator==(const BoundaryFunction& o) const {
    if (kind_ != o.kind_) return false;
    switch (kind_) {
    case Kind::Constant: return value_ == o.value_;
    case Kind::Linear: return axis_ == o.axis_ && scale_ == o.scale_ && offset_ == o.offset_;
    case Kind::CosProduct:
    case Kind::SplitCos: return true;
    case Kind::GaussianShell:
        return shell_a_ == o.shell_a_ && shell_b_ == o.shell_b_ && *inner_ == *o.inner_;
    }
    return false;
}

// ----------------------------------------------------------------- helpers

Scalar screened_sphere_weight(Scalar z) {
    if (!(z > 0.0)) return 1.0;
    if (z < 1e-4) {
        const Scalar z2 = z * z;
        return 1.0 - z2 / 6.0 + 7.0 * z2 * z2 / 360.0;
    }
    // 2 z e^{-z} / (1 - e^{-2z}): no overflow; positive until e^{-z} underflows
    const Scalar e = std::exp(-z);
    return 2.0 * z * e / (1.0 - e * e);
}

Scalar silhouette_radius(const Vec3& x, const Vec3& center, Scalar s) {
    const Scalar d = (x - center).norm();
    if (!(d > s)) throw std::invalid_argument("silhouette_radius: point not outside the particle");
    return std::sqrt(d * d - s * s);
}

namespace {

// Boundary data at a terminal hit: medium hits use the boundary point,
// particle hits use the extended data at the walk point itself.
Scalar terminal_value(const Problem& problem, const ClosestHit& hit, const Vec3& walk_point) {
    if (hit.kind == HitKind::MediumBoundary) return problem.g(hit.point);
    return problem.g(walk_point);
}

} // namespace

// --------------------------------------------------------------------- WoS

WalkResult wos_estimate(const Problem& problem, const SphereBvh* config, const Vec3& x0,
                        const SolverConfig& cfg, Pcg32& rng) {
    WalkResult out;
    Vec3 x = x0;
    for (;;) {
        ClosestHit hit = closest_point_on_medium(*problem.medium, x);
        if (config && !config->empty()) {
            const auto particle = config->closest_surface_point(x);
            if (particle && particle->distance < hit.distance) hit = *particle;
        }
        if (hit.distance < cfg.eps) {
            out.value = terminal_value(problem, hit, x);
            break;
        }
        if (out.stats.steps >= cfg.max_steps) {
            out.truncated = true;
            out.value = terminal_value(problem, hit, x);
            break;
        }
        assert(std::abs(laplace_kernel_ratio(hit.distance) - 1.0) <= 1e-12);
        const UnitVec3 w = sample_direction(rng);
        x += hit.distance * w.vec();
        ++out.stats.steps;
    }
    return out;
}

// -------------------------------------------------------------------- VWoS

WalkResult vwos_estimate(const Problem& problem, const Vec3& x0, const SolverConfig& cfg,
                         Pcg32& rng) {
    if (problem.particle_bc != ParticleBc::Dirichlet)
        throw std::invalid_argument("vwos_estimate: requires Dirichlet particle data");

    const DensityField& field = problem.pbm.density;
    const MediumShape& medium = *problem.medium;
    const Scalar s = problem.pbm.particle_radius;

    WalkResult out;
    WalkMemory memory(cfg.memory_mode);
    Vec3 x = x0;
    for (;;) {
        const ClosestHit det = deterministic_closest(memory, medium, x, s);
        const Scalar majorant = field.majorant(x, std::max(det.distance, 0.0) + s);
        const ClosestHit hit =
            sample_closest_point_with_memory(x, majorant, field, s, memory, det, rng);

        if (hit.distance < cfg.eps) {
            out.value = problem.g(x); // extended data at the walk point; covers Inside
            break;
        }
        if (out.stats.steps >= cfg.max_steps) {
            out.truncated = true;
            out.value = terminal_value(problem, hit, x);
            break;
        }

        memory.update(x, hit, s);
        assert(std::abs(laplace_kernel_ratio(hit.distance) - 1.0) <= 1e-12);
        const UnitVec3 w = sample_direction(rng);
        x += hit.distance * w.vec();
        ++out.stats.steps;
    }
    out.stats.empty_count = static_cast<int>(memory.empty_count());
    out.stats.particle_count = static_cast<int>(memory.particle_count());
    return out;
}

// ------------------------------------------------------------- homogenized

WalkResult homogenized_estimate(const Problem& problem, const Vec3& x0, const SolverConfig& cfg,
                                Pcg32& rng) {
    if (!problem.pbm.density.is_constant())
        throw std::invalid_argument("homogenized_estimate: constant density required");
    const Scalar absorption =
        4.0 * kPi * problem.pbm.density.constant_value() * problem.pbm.particle_radius;
    const Scalar root = std::sqrt(absorption);

    WalkResult out;
    Vec3 x = x0;
    Scalar weight = 1.0;
    for (;;) {
        const ClosestHit hit = closest_point_on_medium(*problem.medium, x);
        if (hit.distance < cfg.eps) {
            out.value = weight * problem.g(hit.point);
            break;
        }
        if (out.stats.steps >= cfg.max_steps) {
            out.truncated = true;
            out.value = weight * problem.g(hit.point);
            break;
        }
        weight *= screened_sphere_weight(root * hit.distance);
        const UnitVec3 w = sample_direction(rng);
        x += hit.distance * w.vec();
        ++out.stats.steps;
    }
    return out;
}

// -------------------------------------------------------------- star steps

std::vector<Vec3> collect_star_particles(const Vec3& x, Scalar star_radius,
                                         const ConditionalDensityView& density,
                                         Scalar majorant_density, Scalar s, WalkMemory& memory,
                                         Pcg32& rng, ThinningCursor& cursor,
                                         std::optional<Vec3> first_center) {
    std::vector<Vec3> out;
    const Scalar horizon = star_radius + s;
    if (first_center) {
        assert((*first_center - x).norm() <= horizon + 1e-9 * (1.0 + horizon));
        memory.add_particle(*first_center);
        out.push_back(*first_center);
    }
    if (!(majorant_density > 0.0)) return out;

    const Scalar rate = (4.0 / 3.0) * kPi * majorant_density;
    for (;;) {
        Scalar radius;
        if (cursor.pending_radius) {
            radius = *cursor.pending_radius;
            cursor.pending_radius.reset();
        } else {
            cursor.cubed_radius += sample_exponential(rate, rng);
            radius = std::cbrt(cursor.cubed_radius);
        }
        if (radius > horizon) {
            cursor.pending_radius = radius;
            return out;
        }
        const UnitVec3 w = sample_direction(rng);
        const Vec3 c = x + radius * w.vec();
        const Scalar value = density.eval(c);
        if (value > majorant_density * (1.0 + 1e-9))
            throw MajorantViolation(x, c, value, majorant_density);
        if (value / majorant_density > rng.uniform()) {
            memory.add_particle(c);
            out.push_back(c);
        }
    }
}

namespace {

struct StarStepOutcome {
    Vec3 next = Vec3::Zero();
    int hit_center = -1; // index into the local center list; -1 means sphere
};

// Ray sampling inside the star region: first hit among the bounding sphere
// and the local particle balls. On a particle surface, directions come from
// the outward hemisphere (weight 1 by even reflection of the zero-flux
// solution); a small t_min skips the self-intersection root.
StarStepOutcome star_step(const Vec3& x, Scalar star_radius, std::span<const Vec3> local_centers,
                          Scalar s, bool on_particle, const Vec3& surface_center, Pcg32& rng) {
    StarStepOutcome out;
    for (int attempt = 0; attempt < 16; ++attempt) {
        const UnitVec3 w = on_particle
                               ? sample_direction(rng, UnitVec3::normalized(x - surface_center))
                               : sample_direction(rng);
        const Scalar t_min = on_particle ? 1e-6 * s : 0.0;
        Scalar best_t = star_radius;
        int best = -1;
        for (int i = 0; i < static_cast<int>(local_centers.size()); ++i) {
            if (const auto hit = first_ray_sphere_hit(x, w, local_centers[i], s, t_min, best_t)) {
                best_t = hit->t;
                best = i;
            }
        }
        const Vec3 next = x + best_t * w.vec();
        if (next.allFinite()) {
            out.next = next;
            out.hit_center = best;
            return out;
        }
    }
    // degenerate directions only: fall back to a sphere step
    out.next = x + star_radius * sample_direction(rng).vec();
    out.hit_center = -1;
    return out;
}

} // namespace

// -------------------------------------------------------------------- WoSt

WalkResult wost_estimate(const Problem& problem, const SphereBvh& config, const Vec3& x0,
                         const SolverConfig& cfg, Pcg32& rng) {
    if (problem.particle_bc != ParticleBc::NeumannZero)
        throw std::invalid_argument("wost_estimate: requires zero-Neumann particle data");

    const MediumShape& medium = *problem.medium;
    const Scalar s = config.particle_radius();

    WalkResult out;
    Vec3 x = x0;
    bool on_particle = false;
    Vec3 surface_center = Vec3::Zero();
    std::vector<int> near_ids;
    std::vector<Vec3> local;
    for (;;) {
        const ClosestHit medium_hit = closest_point_on_medium(medium, x);
        if (medium_hit.distance < cfg.eps) {
            out.value = problem.g(medium_hit.point);
            break;
        }
        if (out.stats.steps >= cfg.max_steps) {
            out.truncated = true;
            out.value = problem.g(medium_hit.point);
            break;
        }

        Scalar star = medium_hit.distance;
        const int nearest = config.nearest_center(x);
        if (nearest >= 0) {
            const Scalar dc = (config.center(nearest) - x).norm();
            const Scalar silhouette = dc > s ? std::sqrt(dc * dc - s * s) : 0.0;
            star = std::min(medium_hit.distance, std::max(cfg.clamp_radius, silhouette));
        }

        local.clear();
        if (nearest >= 0) {
            config.centers_within(x, star + s, near_ids);
            for (int i : near_ids) local.push_back(config.center(i));
        }

        const StarStepOutcome step = star_step(x, star, local, s, on_particle, surface_center, rng);
        x = step.next;
        on_particle = step.hit_center >= 0;
        if (on_particle) surface_center = local[step.hit_center];
        ++out.stats.steps;
    }
    return out;
}

// ------------------------------------------------------------------- VWoSt

WalkResult vwost_estimate(const Problem& problem, const Vec3& x0, const SolverConfig& cfg,
                          Pcg32& rng) {
    if (problem.particle_bc != ParticleBc::NeumannZero)
        throw std::invalid_argument("vwost_estimate: requires zero-Neumann particle data");

    const DensityField& field = problem.pbm.density;
    const MediumShape& medium = *problem.medium;
    const Scalar s = problem.pbm.particle_radius;
    const Scalar inf = std::numeric_limits<Scalar>::infinity();

    WalkResult out;
    std::vector<Vec3> local;
    for (;;) { // restarted only when the evaluation point itself is covered
        WalkMemory memory(cfg.memory_mode);
        out.stats = {};
        Vec3 x = x0;
        bool on_particle = false;
        Vec3 surface_center = Vec3::Zero();
        bool restart = false;

        for (;;) {
            const ClosestHit medium_hit = closest_point_on_medium(medium, x);
            const Scalar d_dirichlet = medium_hit.distance;
            if (d_dirichlet < cfg.eps) {
                out.value = problem.g(medium_hit.point);
                break;
            }
            if (out.stats.steps >= cfg.max_steps) {
                out.truncated = true;
                out.value = problem.g(medium_hit.point);
                break;
            }

            const auto pinned = memory.closest_point_on_sampled_particles(x, s);
            const Scalar d_fixed = pinned ? pinned->distance : inf;

            const Scalar majorant = field.majorant(x, d_dirichlet + s);
            const ConditionalDensityView view(field, memory.empty_balls(), s);

            // closest new particle, up to the nearer deterministic obstruction
            const Scalar stop1 =
                std::min(d_dirichlet, d_fixed > 0.0 ? d_fixed : cfg.clamp_radius);
            ThinningCursor cursor;
            std::optional<Vec3> new_center;
            bool covered = false;
            if (majorant > 0.0) {
                const ClosestPointSample sampled =
                    sample_closest_point(x, majorant, view, s, rng, stop1);
                cursor.cubed_radius = sampled.center_distance * sampled.center_distance *
                                      sampled.center_distance;
                if (sampled.kind == ClosestPointSample::Kind::BeyondStop)
                    cursor.pending_radius = sampled.center_distance;
                else
                    new_center = sampled.center;
                covered = sampled.kind == ClosestPointSample::Kind::Inside;
            }

            if (covered && out.stats.steps == 0 && memory.empty_count() == 0) {
                // the evaluation point sits inside a particle of this
                // realization; condition on the uncovered event by redrawing
                restart = true;
                break;
            }

            // the new center, when present, is the overall nearest particle
            // (its surface distance is bounded by stop1 <= d_fixed)
            Scalar star = d_dirichlet;
            std::optional<Vec3> nearest_center;
            if (new_center) nearest_center = new_center;
            else if (pinned) nearest_center = Vec3(memory.particle_centers()[pinned->memory_index]);
            if (nearest_center) {
                const Scalar dc = (*nearest_center - x).norm();
                const Scalar silhouette = dc > s ? std::sqrt(dc * dc - s * s) : 0.0;
                star = std::min(d_dirichlet, std::max(cfg.clamp_radius, silhouette));
            }

            // local geometry: pinned particles in reach plus everything newly
            // collected inside the star ball's dilation
            local.clear();
            for (const Vec3& c : memory.particle_centers())
                if ((c - x).norm() <= star + s) local.push_back(c);
            const std::vector<Vec3> collected = collect_star_particles(
                x, star, view, majorant, s, memory, rng, cursor, new_center);
            local.insert(local.end(), collected.begin(), collected.end());

            memory.add_empty_ball(x, star);

            const StarStepOutcome step =
                star_step(x, star, local, s, on_particle, surface_center, rng);
            x = step.next;
            on_particle = step.hit_center >= 0;
            if (on_particle) surface_center = local[step.hit_center];
            ++out.stats.steps;
        }

        if (!restart) {
            out.stats.empty_count = static_cast<int>(memory.empty_count());
            out.stats.particle_count = static_cast<int>(memory.particle_count());
            return out;
        }
    }
}

// -------------------------------------------------------------- ensembles

namespace {

struct ConfigPointResult {
    bool skip = false;  // Neumann: point covered by this configuration
    Scalar mean = 0.0;
    long long walks = 0;
    long long truncated = 0;
};

template <class ConfigProvider>
EnsembleResult ensemble_average_impl(const Problem& problem, std::span<const Vec3> points, int S,
                                     int walks_per_config, const SolverConfig& cfg, int n_threads,
                                     ConfigProvider&& provider) {
    const std::size_t P = points.size();
    std::vector<std::vector<ConfigPointResult>> partial(S);
    std::vector<long long> particle_counts(S, 0);

    parallel_for(S, n_threads, [&](long long si) {
        const int s_idx = static_cast<int>(si);
        const ParticleConfiguration config = provider(s_idx);
        const SphereBvh bvh(config);
        particle_counts[s_idx] = static_cast<long long>(config.centers.size());

        auto& row = partial[s_idx];
        row.resize(P);
        for (std::size_t p = 0; p < P; ++p) {
            const Vec3& pt = points[p];
            bool covered = false;
            if (!bvh.empty()) {
                const int ni = bvh.nearest_center(pt);
                covered = (bvh.center(ni) - pt).norm() < config.radius;
            }
            if (covered) {
                if (problem.particle_bc == ParticleBc::Dirichlet)
                    row[p].mean = problem.g(pt); // particle data for this draw
                else
                    row[p].skip = true;
                continue;
            }
            RunningStat st;
            long long truncated = 0;
            for (int w = 0; w < walks_per_config; ++w) {
                Pcg32 rng = walk_rng(cfg.seed, p, static_cast<std::uint64_t>(s_idx), w);
                const WalkResult r = problem.particle_bc == ParticleBc::Dirichlet
                                         ? wos_estimate(problem, &bvh, pt, cfg, rng)
                                         : wost_estimate(problem, bvh, pt, cfg, rng);
                st.add(r.value);
                truncated += r.truncated ? 1 : 0;
            }
            row[p].mean = st.mean();
            row[p].walks = walks_per_config;
            row[p].truncated = truncated;
        }
    });

    EnsembleResult out;
    out.estimates.resize(P);
    for (std::size_t p = 0; p < P; ++p) {
        RunningStat config_means;
        long long walks = 0, truncated = 0;
        for (int s_idx = 0; s_idx < S; ++s_idx) { // fixed merge order
            const ConfigPointResult& r = partial[s_idx][p];
            if (r.skip) continue;
            config_means.add(r.mean);
            walks += r.walks;
            truncated += r.truncated;
        }
        Estimate& e = out.estimates[p];
        if (config_means.count() > 0) e.mean = config_means.mean();
        e.variance_of_mean = config_means.variance_of_mean();
        e.n_walks = walks;
        e.truncated_walk_count = truncated;
    }
    for (long long c : particle_counts) out.total_particles_sampled += c;
    return out;
}

} // namespace

EnsembleResult ensemble_average(const Problem& problem, std::span<const Vec3> points, int S,
                                int walks_per_config, const SolverConfig& cfg, int n_threads) {
    if (S < 1) throw std::invalid_argument("ensemble_average: S must be >= 1");
    const Scalar mass = medium_integral(problem.pbm.density).value;
    return ensemble_average_impl(problem, points, S, walks_per_config, cfg, n_threads,
                                 [&](int s_idx) {
                                     Pcg32 rng = config_rng(cfg.seed, s_idx);
                                     return sample_configuration(*problem.medium,
                                                                 problem.pbm.density,
                                                                 problem.pbm.particle_radius, rng,
                                                                 mass);
                                 });
}

EnsembleResult ensemble_average_with(const Problem& problem,
                                     std::span<const ParticleConfiguration> configs,
                                     std::span<const Vec3> points, int walks_per_config,
                                     const SolverConfig& cfg, int n_threads) {
    return ensemble_average_impl(problem, points, static_cast<int>(configs.size()),
                                 walks_per_config, cfg, n_threads,
                                 [&](int s_idx) { return configs[s_idx]; });
}

} // namespace vwos

#pragma once

#include "vwos/bvh.h"
#include "vwos/walk_memory.h"

#include <limits>
#include <memory>

namespace vwos {

enum class ParticleBc { Dirichlet, NeumannZero };

// Closed registry of boundary data builtins, defined over the whole medium.
class BoundaryFunction {
public:
    enum class Kind { Constant, Linear, CosProduct, SplitCos, GaussianShell };

    static BoundaryFunction constant(Scalar value);
    static BoundaryFunction linear(int axis, Scalar scale, Scalar offset = 0.0);
    static BoundaryFunction cos_product();
    static BoundaryFunction split_cos();
    // -a * inner(nearest boundary point) * exp(-b * boundary_distance^2);
    // inner may not itself be a shell.
    static BoundaryFunction gaussian_shell(Scalar a, Scalar b, BoundaryFunction inner);

    Scalar eval(const Vec3& x, const MediumShape& medium) const;

    Kind kind() const { return kind_; }
    Scalar value() const { return value_; }
    int axis() const { return axis_; }
    Scalar scale() const { return scale_; }
    Scalar offset() const { return offset_; }
    Scalar shell_a() const { return shell_a_; }
    Scalar shell_b() const { return shell_b_; }
    const BoundaryFunction& inner() const { return *inner_; }

    bool operator==(const BoundaryFunction& o) const;

private:
    BoundaryFunction() = default;

    Kind kind_ = Kind::Constant;
    Scalar value_ = 0.0;
    int axis_ = 0;
    Scalar scale_ = 1.0;
    Scalar offset_ = 0.0;
    Scalar shell_a_ = 0.0;
    Scalar shell_b_ = 0.0;
    std::shared_ptr<const BoundaryFunction> inner_;
};

struct Problem {
    std::shared_ptr<const MediumShape> medium;
    BoundaryFunction medium_bc = BoundaryFunction::constant(0.0);
    PbmParams pbm;
    ParticleBc particle_bc = ParticleBc::Dirichlet;

    Scalar g(const Vec3& x) const { return medium_bc.eval(x, *medium); }
};

struct SolverConfig {
    Scalar eps = 1e-3;
    int max_steps = 10000;
    int n_walks = 128;
    std::uint64_t seed = 0;
    MemoryMode memory_mode = MemoryMode::full();
    Scalar clamp_radius = 1e-3; // lower clamp on the silhouette term only
};

struct WalkStats {
    int steps = 0;
    int empty_count = 0;    // |E| at walk end
    int particle_count = 0; // |P| at walk end
};

struct WalkResult {
    Scalar value = 0.0;
    bool truncated = false;
    WalkStats stats;
};

// Single-pass mean/variance accumulation (Welford), merged pairwise in a
// fixed order so results never depend on thread count.
class RunningStat {
public:
    void add(Scalar v) {
        ++n_;
        const Scalar delta = v - mean_;
        mean_ += delta / static_cast<Scalar>(n_);
        m2_ += delta * (v - mean_);
    }

    void merge(const RunningStat& o) {
        if (o.n_ == 0) return;
        if (n_ == 0) { *this = o; return; }
        const Scalar delta = o.mean_ - mean_;
        const long long n = n_ + o.n_;
        m2_ += o.m2_ + delta * delta * (static_cast<Scalar>(n_) / n) * static_cast<Scalar>(o.n_);
        mean_ += delta * (static_cast<Scalar>(o.n_) / n);
        n_ = n;
    }

    long long count() const { return n_; }
    Scalar mean() const { return mean_; }
    Scalar sample_variance() const { return n_ > 1 ? m2_ / static_cast<Scalar>(n_ - 1) : 0.0; }
    Scalar variance_of_mean() const {
        return n_ > 1 ? std::max(0.0, m2_) / (static_cast<Scalar>(n_) * static_cast<Scalar>(n_ - 1))
                      : 0.0;
    }

private:
    long long n_ = 0;
    Scalar mean_ = 0.0;
    Scalar m2_ = 0.0;
};

struct Estimate {
    Scalar mean = std::numeric_limits<Scalar>::quiet_NaN();
    Scalar variance_of_mean = 0.0;
    long long n_walks = 0;
    long long truncated_walk_count = 0;
};

// Per-step importance ratio of the sphere kernel against uniform sphere
// sampling; identically one for this equation and asserted as such.
inline Scalar laplace_kernel_ratio(Scalar sphere_radius) {
    const Scalar kernel = 1.0 / (4.0 * kPi * sphere_radius * sphere_radius);
    const Scalar pdf = 1.0 / (4.0 * kPi * sphere_radius * sphere_radius);
    return kernel / pdf;
}

// weight z / sinh(z), stable near zero; in (0, 1] for z >= 0
Scalar screened_sphere_weight(Scalar z);

// distance from x to the visibility silhouette of a particle
Scalar silhouette_radius(const Vec3& x, const Vec3& center, Scalar s);

// One walk against deterministic geometry: the medium boundary plus an
// optional explicit configuration. Terminates inside the eps shell with the
// boundary data at the nearest boundary point (particle hits evaluate the
// extended data at the walk point).
WalkResult wos_estimate(const Problem& problem, const SphereBvh* config, const Vec3& x,
                        const SolverConfig& cfg, Pcg32& rng);

// One volumetric walk with per-step conditional closest point sampling.
WalkResult vwos_estimate(const Problem& problem, const Vec3& x, const SolverConfig& cfg,
                         Pcg32& rng);

// One walk for the screened equation with absorption 4 pi lambda s on the
// particle-free medium (constant density only).
WalkResult homogenized_estimate(const Problem& problem, const Vec3& x, const SolverConfig& cfg,
                                Pcg32& rng);

// One star-stepping walk against an explicit configuration of zero-Neumann
// particles.
WalkResult wost_estimate(const Problem& problem, const SphereBvh& config, const Vec3& x,
                         const SolverConfig& cfg, Pcg32& rng);

// One volumetric star-stepping walk with sampled zero-Neumann particles.
WalkResult vwost_estimate(const Problem& problem, const Vec3& x, const SolverConfig& cfg,
                          Pcg32& rng);

// Resumable thinning position: cubed radius reached, plus a proposed radius
// that has not been screened against a horizon yet.
struct ThinningCursor {
    Scalar cubed_radius = 0.0;
    std::optional<Scalar> pending_radius;
};

// Continues thinning until the first proposal beyond star_radius + s, pinning
// every accepted center into the memory and returning them (first_center, the
// already-accepted closest particle, included). All returned centers satisfy
// |c - x| <= star_radius + s.
std::vector<Vec3> collect_star_particles(const Vec3& x, Scalar star_radius,
                                         const ConditionalDensityView& density,
                                         Scalar majorant_density, Scalar s, WalkMemory& memory,
                                         Pcg32& rng, ThinningCursor& cursor,
                                         std::optional<Vec3> first_center = std::nullopt);

struct EnsembleResult {
    std::vector<Estimate> estimates;        // one per evaluation point
    long long total_particles_sampled = 0;
};

// Mean solution by explicit configuration averaging: draw S configurations
// (shared across all evaluation points), solve each with the walker matching
// the particle boundary condition, and average per-configuration means.
// Dirichlet: covered points contribute the boundary data. NeumannZero:
// covered points skip that configuration.
EnsembleResult ensemble_average(const Problem& problem, std::span<const Vec3> points, int S,
                                int walks_per_config, const SolverConfig& cfg, int n_threads = 1);

// Same, with pinned configurations (testing hook for the S = 1 identity).
EnsembleResult ensemble_average_with(const Problem& problem,
                                     std::span<const ParticleConfiguration> configs,
                                     std::span<const Vec3> points, int walks_per_config,
                                     const SolverConfig& cfg, int n_threads = 1);

} // namespace vwos

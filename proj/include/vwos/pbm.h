#pragma once

#include "vwos/density.h"

#include <optional>
#include <span>

namespace vwos {

struct EmptyBall {
    Vec3 center = Vec3::Zero();
    Scalar radius = 0.0;
};

// Base density with a list of empty balls masked out after dilation by the
// particle radius: zero wherever |x - c_j| <= r_j + s, base value elsewhere.
class ConditionalDensityView {
public:
    ConditionalDensityView(const DensityField& base, std::span<const EmptyBall> excluded, Scalar s)
        : base_(&base), excluded_(excluded), s_(s) {}

    static ConditionalDensityView unconditional(const DensityField& base) {
        return ConditionalDensityView(base, {}, 0.0);
    }

    Scalar eval(const Vec3& x) const {
        for (const auto& b : excluded_)
            if ((x - b.center).norm() <= b.radius + s_) return 0.0;
        return base_->eval(x);
    }

    const DensityField& base() const { return *base_; }
    std::span<const EmptyBall> excluded() const { return excluded_; }
    Scalar dilation() const { return s_; }

private:
    const DensityField* base_;
    std::span<const EmptyBall> excluded_;
    Scalar s_;
};

inline Scalar exponential_from_uniform(Scalar rate, Scalar u) {
    if (!(rate > 0.0)) throw std::invalid_argument("exponential_from_uniform: rate must be > 0");
    return -std::log1p(-u) / rate;
}

inline Scalar sample_exponential(Scalar rate, Pcg32& rng) {
    return exponential_from_uniform(rate, rng.uniform());
}

struct ClosestPointSample {
    enum class Kind { Surface, Inside, BeyondStop };

    Kind kind = Kind::BeyondStop;
    Vec3 point = Vec3::Zero();      // Surface: closest point on the particle boundary
    Vec3 center = Vec3::Zero();     // Surface / Inside: accepted particle center
    Scalar center_distance = 0.0;   // Surface / Inside: |x - center|; BeyondStop: radius at stop
    int candidates = 0;             // thinning candidates proposed
};

// Closest-point sampling by thinning. Candidate radii grow by exponential
// increments of the cubed radius at rate 4/3 pi majorant; each candidate is
// placed uniformly on its sphere and accepted with probability
// density(c) / majorant. Draw order per candidate is fixed: exponential,
// direction, acceptance uniform.
//
// When stop_radius is set and the candidate radius exceeds stop_radius + s
// before acceptance, returns BeyondStop: that exit certifies no center lies
// within B(x, stop_radius + s). start_cubed_radius resumes a previous search
// (valid because the cubed-radius increments are memoryless).
ClosestPointSample sample_closest_point(const Vec3& x, Scalar majorant_density,
                                        const ConditionalDensityView& density, Scalar s,
                                        Pcg32& rng,
                                        std::optional<Scalar> stop_radius = std::nullopt,
                                        Scalar start_cubed_radius = 0.0);

struct ParticleConfiguration {
    std::vector<Vec3> centers;
    Scalar radius = 0.0;
};

struct CenterDistancePdfOptions {
    int ball_samples = 1 << 16;   // quadrature size for the exponent
    int sphere_points = 1 << 14;  // surface quadrature size
    std::uint64_t seed = 0x5eedULL;
    bool force_quadrature = false;
};

// PDF of the shortest distance-to-center at x: exp(-Lambda(x,r)) times the
// density surface integral over the sphere of radius r. Uses the analytic
// form when the field is constant and B(x,r) stays inside the medium.
Scalar pdf_center_distance(const Vec3& x, Scalar r, const DensityField& field,
                           const CenterDistancePdfOptions& opts = {});

// CDF of the contact distance for a constant density, conditioned on the
// query point being uncovered.
Scalar cdf_spherical_contact_hom(Scalar r, Scalar lambda, Scalar s);

// Probability that x lies inside some particle (a center within s).
Scalar coverage_probability(const Vec3& x, const DensityField& field, Scalar s,
                            int ball_samples = 1 << 16, std::uint64_t seed = 0x5eedULL);

long long sample_poisson(Scalar mean, Pcg32& rng);

// Draws an explicit configuration: Poisson count from the total density mass,
// centers by rejection from the medium bounding box. Pass a precomputed mass
// (from medium_integral) to reuse it across draws; negative recomputes.
ParticleConfiguration sample_configuration(const MediumShape& medium, const DensityField& field,
                                           Scalar s, Pcg32& rng, Scalar total_mass = -1.0);

// Expected shortest distance-to-center under a constant density.
Scalar mean_free_ball_radius(Scalar lambda);

} // namespace vwos

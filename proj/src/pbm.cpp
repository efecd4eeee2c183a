#include "vwos/pbm.h"

#include <cmath>

namespace vwos {

ClosestPointSample sample_closest_point(const Vec3& x, Scalar majorant_density,
                                        const ConditionalDensityView& density, Scalar s,
                                        Pcg32& rng, std::optional<Scalar> stop_radius,
                                        Scalar start_cubed_radius) {
    ClosestPointSample out;
    if (stop_radius && !(*stop_radius > 0.0))
        throw std::invalid_argument("sample_closest_point: stop_radius must be > 0");

    if (!(majorant_density > 0.0)) {
        if (!stop_radius)
            throw std::invalid_argument("sample_closest_point: zero majorant without stop radius");
        out.kind = ClosestPointSample::Kind::BeyondStop;
        out.center_distance = *stop_radius + s;
        return out;
    }

    const Scalar rate = (4.0 / 3.0) * kPi * majorant_density;
    Scalar cubed = start_cubed_radius;
    Vec3 center = Vec3::Zero();
    Scalar radius = 0.0;

    for (;;) {
        cubed += sample_exponential(rate, rng);
        radius = std::cbrt(cubed);
        if (stop_radius && radius > *stop_radius + s) {
            out.kind = ClosestPointSample::Kind::BeyondStop;
            out.center_distance = radius;
            return out;
        }
        ++out.candidates;
        const UnitVec3 w = sample_direction(rng);
        center = x + radius * w.vec();
        const Scalar value = density.eval(center);
        if (value > majorant_density * (1.0 + 1e-9))
            throw MajorantViolation(x, center, value, majorant_density);
        const Scalar alpha = value / majorant_density;
        if (alpha > rng.uniform()) break;
    }

    out.center = center;
    out.center_distance = radius;
    const Scalar d = radius - s;
    if (d < 0.0) {
        out.kind = ClosestPointSample::Kind::Inside;
        return out;
    }
    out.kind = ClosestPointSample::Kind::Surface;
    out.point = x + d * dir(x, center).vec();
    return out;
}

namespace {

// golden-angle spiral; near-equal-area point set on the unit sphere
Vec3 fibonacci_sphere_point(int i, int n) {
    const Scalar z = 1.0 - (2.0 * i + 1.0) / n;
    const Scalar phi = static_cast<Scalar>(i) * kPi * (3.0 - std::sqrt(5.0));
    const Scalar rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    return Vec3(rho * std::cos(phi), rho * std::sin(phi), z);
}

Scalar sphere_surface_integral(const DensityField& field, const Vec3& x, Scalar r, int n) {
    Scalar sum = 0.0;
    for (int i = 0; i < n; ++i)
        sum += field.eval(x + r * fibonacci_sphere_point(i, n));
    return (sum / n) * 4.0 * kPi * r * r;
}

} // namespace

Scalar pdf_center_distance(const Vec3& x, Scalar r, const DensityField& field,
                           const CenterDistancePdfOptions& opts) {
    if (!(r >= 0.0)) throw std::invalid_argument("pdf_center_distance: r must be >= 0");
    if (r == 0.0) return 0.0;

    if (!opts.force_quadrature && field.is_constant() && contains(field.medium(), x) &&
        closest_point_on_medium(field.medium(), x).distance > r) {
        const Scalar lambda = field.constant_value();
        return std::exp(-(4.0 / 3.0) * kPi * r * r * r * lambda) * 4.0 * kPi * r * r * lambda;
    }

    const Scalar exponent = ball_integral(field, x, r, opts.ball_samples, opts.seed).value;
    return std::exp(-exponent) * sphere_surface_integral(field, x, r, opts.sphere_points);
}

Scalar cdf_spherical_contact_hom(Scalar r, Scalar lambda, Scalar s) {
    if (!(r >= 0.0) || !(lambda >= 0.0) || !(s > 0.0))
        throw std::invalid_argument("cdf_spherical_contact_hom: need r >= 0, lambda >= 0, s > 0");
    const Scalar shell = (r + s) * (r + s) * (r + s) - s * s * s;
    return 1.0 - std::exp(-(4.0 / 3.0) * kPi * shell * lambda);
}

Scalar coverage_probability(const Vec3& x, const DensityField& field, Scalar s,
                            int ball_samples, std::uint64_t seed) {
    const Scalar mass = ball_integral(field, x, s, ball_samples, seed).value;
    return 1.0 - std::exp(-mass);
}

long long sample_poisson(Scalar mean, Pcg32& rng) {
    if (!(mean >= 0.0)) throw std::invalid_argument("sample_poisson: mean must be >= 0");
    long long total = 0;
    // chunking keeps exp(-chunk) well above the denormal range
    while (mean > 256.0) {
        total += sample_poisson(256.0, rng);
        mean -= 256.0;
    }
    const Scalar limit = std::exp(-mean);
    Scalar prod = rng.uniform();
    long long k = 0;
    while (prod > limit) {
        ++k;
        prod *= rng.uniform();
    }
    return total + k;
}

ParticleConfiguration sample_configuration(const MediumShape& medium, const DensityField& field,
                                           Scalar s, Pcg32& rng, Scalar total_mass) {
    if (total_mass < 0.0) total_mass = medium_integral(field).value;

    ParticleConfiguration config;
    config.radius = s;
    if (total_mass <= 0.0) return config;

    const Vec3 lo = medium.aabb_min();
    const Vec3 ext = medium.aabb_max() - lo;
    const Vec3 mid = lo + 0.5 * ext;
    const Scalar bound = field.majorant(mid, 0.5 * ext.norm());
    if (!(bound > 0.0)) return config;

    const long long n = sample_poisson(total_mass, rng);
    config.centers.reserve(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i) {
        for (;;) {
            const Vec3 c(lo.x() + rng.uniform() * ext.x(), lo.y() + rng.uniform() * ext.y(),
                         lo.z() + rng.uniform() * ext.z());
            const Scalar value = field.eval(c);
            if (value > bound * (1.0 + 1e-9))
                throw MajorantViolation(mid, c, value, bound);
            if (value / bound > rng.uniform()) {
                config.centers.push_back(c);
                break;
            }
        }
    }
    return config;
}

Scalar mean_free_ball_radius(Scalar lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("mean_free_ball_radius: lambda must be > 0");
    return std::tgamma(4.0 / 3.0) * std::pow((4.0 / 3.0) * kPi * lambda, -1.0 / 3.0);
}

} // namespace vwos

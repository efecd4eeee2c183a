#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vwos/pbm.h"
#include "vwos/stats.h"

#include <algorithm>
#include <cmath>

using namespace vwos;

namespace {

// ball holding essentially all of the distance distribution's mass
std::shared_ptr<const MediumShape> big_ball(double lambda) {
    const double radius = std::cbrt(30.0 / ((4.0 / 3.0) * kPi * lambda));
    return std::make_shared<const MediumShape>(std::vector<Primitive>{Sphere{Vec3::Zero(), radius}});
}

} // namespace

TEST_CASE("exponential sampling by inverse cdf") {
    CHECK(exponential_from_uniform(1.0, 0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(exponential_from_uniform(1.0, 0.5) == doctest::Approx(0.6931471805599453).epsilon(1e-14));
    CHECK(exponential_from_uniform(2.0, 0.5) == doctest::Approx(0.34657359027997264).epsilon(1e-14));
    CHECK_THROWS_AS(exponential_from_uniform(0.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(exponential_from_uniform(-1.0, 0.5), std::invalid_argument);

    Pcg32 rng(1, 7);
    const int n = 1000000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += sample_exponential(3.0, rng);
    const double sigma = 1.0 / (3.0 * std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(sum / n - 1.0 / 3.0) < 4.0 * sigma);
}

TEST_CASE("thinning rate and first-increment identities") {
    // at density 3/(4 pi) the cubed-radius rate is one
    const double lambda = 3.0 / (4.0 * kPi);
    CHECK((4.0 / 3.0) * kPi * lambda == doctest::Approx(1.0).epsilon(1e-15));
    // u = 1 - e^{-1} inverts to a unit cubed radius
    CHECK(exponential_from_uniform(1.0, 1.0 - std::exp(-1.0)) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("tight majorant accepts the first candidate") {
    const double lambda = 40.0;
    auto medium = big_ball(lambda);
    const DensityField field = DensityField::constant(lambda, medium);
    const auto view = ConditionalDensityView::unconditional(field);
    for (int i = 0; i < 2000; ++i) {
        Pcg32 rng = walk_rng(3, 0, 0, i);
        const auto sample = sample_closest_point(Vec3::Zero(), lambda, view, 0.05, rng);
        CHECK(sample.candidates == 1);
    }
}

TEST_CASE("surface outcomes sit one radius inside the center") {
    const double lambda = 40.0, s = 0.05;
    auto medium = big_ball(lambda);
    const DensityField field = DensityField::constant(lambda, medium);
    const auto view = ConditionalDensityView::unconditional(field);
    const Vec3 x(0.01, -0.02, 0.005);
    for (int i = 0; i < 10000; ++i) {
        Pcg32 rng = walk_rng(5, 1, 0, i);
        const auto sample = sample_closest_point(x, lambda, view, s, rng);
        if (sample.kind != ClosestPointSample::Kind::Surface) {
            CHECK(sample.kind == ClosestPointSample::Kind::Inside);
            CHECK(sample.center_distance < s);
            continue;
        }
        CHECK(std::abs((sample.point - sample.center).norm() - s) < 1e-9);
        const Vec3 expected =
            x + (sample.center_distance - s) * dir(x, sample.center).vec();
        CHECK((sample.point - expected).norm() < 1e-12);
    }
}

TEST_CASE("homogeneous distance-to-center law") {
    const double lambda = 30.0, s = 0.01;
    auto medium = big_ball(lambda);
    const DensityField field = DensityField::constant(lambda, medium);
    const auto view = ConditionalDensityView::unconditional(field);

    const int n = 100000;
    std::vector<double> dist;
    std::vector<Vec3> dirs;
    dist.reserve(n);
    for (int i = 0; i < n; ++i) {
        Pcg32 rng = walk_rng(11, 2, 0, i);
        const auto sample = sample_closest_point(Vec3::Zero(), lambda, view, s, rng);
        dist.push_back(sample.center_distance);
        dirs.push_back(sample.center.normalized());
    }
    std::sort(dist.begin(), dist.end());
    const auto ks = ks_statistic(dist, [&](double r) {
        return 1.0 - std::exp(-(4.0 / 3.0) * kPi * r * r * r * lambda);
    });
    CHECK(ks.pass);

    CHECK(octant_chi_square(dirs) < kOctantChiSquare99);
}

TEST_CASE("heterogeneous thinning matches the quadrature distance law") {
    const double s = 0.02;
    const std::vector<GaussianTerm> terms{{400.0, Vec3(0.05, -0.03, 0.04), 0.3}};
    auto medium = std::make_shared<const MediumShape>(
        std::vector<Primitive>{Sphere{Vec3::Zero(), 3.0}});
    const DensityField field = DensityField::gaussian_sum(terms, medium);
    const auto view = ConditionalDensityView::unconditional(field);
    const Vec3 probe = Vec3::Zero();

    double r_max = 0.1;
    while (ball_integral(field, probe, r_max, 1 << 14, 99).value < 30.0 && r_max < 2.9)
        r_max *= 1.4;

    const int grid = 400;
    std::vector<double> rs(grid + 1), cdf(grid + 1, 0.0);
    CenterDistancePdfOptions opts;
    opts.sphere_points = 1 << 12;
    double prev = 0.0;
    for (int k = 0; k <= grid; ++k) {
        rs[k] = r_max * k / grid;
        const double p = pdf_center_distance(probe, rs[k], field, opts);
        if (k > 0) cdf[k] = cdf[k - 1] + 0.5 * (prev + p) * (rs[k] - rs[k - 1]);
        prev = p;
    }
    CHECK(cdf[grid] == doctest::Approx(1.0).epsilon(2e-3));

    const double bound = field.majorant(probe, r_max);
    const int n = 100000;
    std::vector<double> dist;
    dist.reserve(n);
    for (int i = 0; i < n; ++i) {
        Pcg32 rng = walk_rng(13, 3, 0, i);
        dist.push_back(sample_closest_point(probe, bound, view, s, rng).center_distance);
    }
    std::sort(dist.begin(), dist.end());
    const auto ks = ks_statistic(dist, [&](double r) {
        if (r <= 0.0) return 0.0;
        if (r >= rs.back()) return 1.0;
        const auto it = std::upper_bound(rs.begin(), rs.end(), r);
        const std::size_t k = static_cast<std::size_t>(it - rs.begin());
        const double t = (r - rs[k - 1]) / (rs[k] - rs[k - 1]);
        return std::min(1.0, cdf[k - 1] + t * (cdf[k] - cdf[k - 1]));
    });
    CHECK(ks.pass);
}

TEST_CASE("conditional density masks dilated exclusions") {
    auto medium = std::make_shared<const MediumShape>(
        std::vector<Primitive>{Sphere{Vec3::Zero(), 5.0}});
    const DensityField field = DensityField::constant(10.0, medium);
    const std::vector<EmptyBall> excluded{{Vec3::Zero(), 0.3}};
    const ConditionalDensityView view(field, excluded, 0.1);

    CHECK(view.eval(Vec3(0, 0, 0.35)) == 0.0);
    CHECK(view.eval(Vec3(0, 0, 0.41)) == 10.0);

    const ConditionalDensityView empty_view(field, {}, 0.1);
    Pcg32 rng(21, 4);
    for (int i = 0; i < 1000; ++i) {
        const Vec3 p(10 * rng.uniform() - 5, 10 * rng.uniform() - 5, 10 * rng.uniform() - 5);
        CHECK(empty_view.eval(p) == field.eval(p));
    }
}

TEST_CASE("conditional sampling never lands in an exclusion") {
    const double lambda = 60.0, s = 0.05;
    auto medium = big_ball(lambda);
    const DensityField field = DensityField::constant(lambda, medium);
    const std::vector<EmptyBall> excluded{{Vec3(0.05, 0, 0), 0.12}, {Vec3(-0.1, 0.08, 0), 0.2}};
    const ConditionalDensityView view(field, excluded, s);

    for (int i = 0; i < 100000; ++i) {
        Pcg32 rng = walk_rng(31, 5, 0, i);
        const auto sample = sample_closest_point(Vec3(0.02, 0.01, 0), lambda, view, s, rng);
        for (const auto& ball : excluded)
            CHECK((sample.center - ball.center).norm() > ball.radius + s);
    }
}

TEST_CASE("beyond-stop certifies an empty search region") {
    const double lambda = 5.0, s = 0.05;
    auto medium = big_ball(lambda);
    const DensityField field = DensityField::constant(lambda, medium);
    const auto view = ConditionalDensityView::unconditional(field);
    int beyond = 0;
    for (int i = 0; i < 5000; ++i) {
        Pcg32 rng = walk_rng(37, 6, 0, i);
        const double stop = 0.05;
        const auto sample = sample_closest_point(Vec3::Zero(), lambda, view, s, rng, stop);
        if (sample.kind == ClosestPointSample::Kind::BeyondStop) {
            ++beyond;
            CHECK(sample.center_distance > stop + s);
        } else {
            CHECK(sample.center_distance <= stop + s);
        }
    }
    CHECK(beyond > 0); // the stop must actually trigger at this density

    // zero majorant without a stop is a caller error
    const DensityField zero = DensityField::constant(0.0, medium);
    const auto zero_view = ConditionalDensityView::unconditional(zero);
    Pcg32 rng(1, 1);
    CHECK_THROWS_AS(sample_closest_point(Vec3::Zero(), 0.0, zero_view, s, rng),
                    std::invalid_argument);
}

TEST_CASE("majorant violation is a hard error with diagnostics") {
    auto medium = big_ball(10.0);
    const DensityField field = DensityField::constant(10.0, medium);
    const auto view = ConditionalDensityView::unconditional(field);
    Pcg32 rng(2, 9);
    try {
        (void)sample_closest_point(Vec3::Zero(), 5.0, view, 0.01, rng);
        FAIL("expected MajorantViolation");
    } catch (const MajorantViolation& e) {
        CHECK(e.density_value == 10.0);
        CHECK(e.majorant_bound == 5.0);
        CHECK(std::string(e.what()).find("majorant violated") != std::string::npos);
    }
}

TEST_CASE("center-distance pdf in the homogeneous case") {
    const double lambda = 3.0 / (4.0 * kPi);
    auto medium = std::make_shared<const MediumShape>(
        std::vector<Primitive>{Sphere{Vec3::Zero(), 50.0}});
    const DensityField field = DensityField::constant(lambda, medium);

    CHECK(pdf_center_distance(Vec3::Zero(), 1.0, field) ==
          doctest::Approx(3.0 * std::exp(-1.0)).epsilon(1e-12));
    CHECK(pdf_center_distance(Vec3::Zero(), 1.0, field) ==
          doctest::Approx(1.103638323514327).epsilon(1e-12));
    CHECK(pdf_center_distance(Vec3::Zero(), 0.0, field) == 0.0);

    // quadrature route agrees with the analytic shortcut
    CenterDistancePdfOptions opts;
    opts.force_quadrature = true;
    CHECK(pdf_center_distance(Vec3::Zero(), 1.0, field, opts) ==
          doctest::Approx(3.0 * std::exp(-1.0)).epsilon(1e-9));

    // normalization over a log-spaced grid
    double integral = 0.0, prev_r = 0.0, prev_p = 0.0;
    for (int k = 0; k <= 2000; ++k) {
        const double r = 4.0 * std::pow(10.0, -3.0 + 3.0 * k / 2000.0);
        const double p = pdf_center_distance(Vec3::Zero(), r, field);
        integral += 0.5 * (p + prev_p) * (r - prev_r);
        prev_r = r;
        prev_p = p;
    }
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("spherical contact cdf") {
    CHECK(cdf_spherical_contact_hom(0.0, 2.0, 0.2) == 0.0);
    CHECK(cdf_spherical_contact_hom(1e4, 2.0, 0.2) == doctest::Approx(1.0).epsilon(1e-12));

    // design point: shell volume times density equal to ln 2
    const double lambda = 2.0, s = 0.2;
    const double shell = std::log(2.0) / ((4.0 / 3.0) * kPi * lambda);
    const double r_star = std::cbrt(s * s * s + shell) - s;
    CHECK(cdf_spherical_contact_hom(r_star, lambda, s) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("coverage probability and the inside fraction") {
    const double s = 0.1;
    const double lambda = std::log(2.0) / ((4.0 / 3.0) * kPi * s * s * s);
    auto medium = big_ball(lambda);
    const DensityField field = DensityField::constant(lambda, medium);
    CHECK(coverage_probability(Vec3::Zero(), field, s) == doctest::Approx(0.5).epsilon(1e-9));

    const DensityField zero = DensityField::constant(0.0, medium);
    CHECK(coverage_probability(Vec3::Zero(), zero, s) == 0.0);

    const auto view = ConditionalDensityView::unconditional(field);
    const int n = 100000;
    int inside = 0;
    for (int i = 0; i < n; ++i) {
        Pcg32 rng = walk_rng(41, 7, 0, i);
        if (sample_closest_point(Vec3::Zero(), lambda, view, s, rng).kind ==
            ClosestPointSample::Kind::Inside)
            ++inside;
    }
    const double p_hat = static_cast<double>(inside) / n;
    const double sigma = std::sqrt(0.25 / n);
    CHECK(std::abs(p_hat - 0.5) <= 3.0 * sigma);
}

TEST_CASE("coverage matches the inside fraction for a gaussian-sum field") {
    const double s = 0.15;
    auto medium = std::make_shared<const MediumShape>(
        std::vector<Primitive>{Sphere{Vec3::Zero(), 3.0}});
    const DensityField field =
        DensityField::gaussian_sum({{25.0, Vec3(0.1, 0, 0), 0.4}, {10.0, Vec3(-0.3, 0.2, 0), 0.6}},
                                   medium);
    const Vec3 probe(0.05, 0.05, 0.0);
    const double p = coverage_probability(probe, field, s, 1 << 16);

    const auto view = ConditionalDensityView::unconditional(field);
    const double bound = field.majorant(probe, 50.0);
    const int n = 100000;
    int inside = 0;
    for (int i = 0; i < n; ++i) {
        Pcg32 rng = walk_rng(43, 8, 0, i);
        if (sample_closest_point(probe, bound, view, s, rng).kind ==
            ClosestPointSample::Kind::Inside)
            ++inside;
    }
    const double p_hat = static_cast<double>(inside) / n;
    const double sigma = std::sqrt(p * (1.0 - p) / n);
    CHECK(std::abs(p_hat - p) <= 3.0 * sigma);
}

TEST_CASE("configuration sampling") {
    auto cube = std::make_shared<const MediumShape>(
        std::vector<Primitive>{AxisAlignedBox{Vec3(0, 0, 0), Vec3(1, 1, 1)}});

    const DensityField zero = DensityField::constant(0.0, cube);
    Pcg32 rng0(5, 5);
    CHECK(sample_configuration(*cube, zero, 0.01, rng0).centers.empty());

    const DensityField field = DensityField::constant(100.0, cube);
    const double mass = medium_integral(field).value;
    double count_sum = 0.0;
    for (int d = 0; d < 1000; ++d) {
        Pcg32 rng = config_rng(77, d);
        const ParticleConfiguration config = sample_configuration(*cube, field, 0.01, rng, mass);
        count_sum += static_cast<double>(config.centers.size());
        if (d < 10)
            for (const Vec3& c : config.centers) CHECK(field.eval(c) > 0.0);
    }
    const double mean_count = count_sum / 1000.0;
    const double sigma = std::sqrt(100.0 / 1000.0);
    CHECK(std::abs(mean_count - 100.0) < 4.0 * sigma);
}

TEST_CASE("poisson sampling moments at a large mean") {
    Pcg32 rng(3, 3);
    const int n = 4000;
    const double mean = 700.0;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double k = static_cast<double>(sample_poisson(mean, rng));
        sum += k;
        sq += k * k;
    }
    const double m = sum / n;
    const double var = sq / n - m * m;
    CHECK(std::abs(m - mean) < 4.0 * std::sqrt(mean / n));
    CHECK(std::abs(var - mean) < 0.1 * mean);
}

TEST_CASE("mean free ball radius reproduces the reference table") {
    const double gamma43 = std::tgamma(4.0 / 3.0);
    CHECK(mean_free_ball_radius(100.0) ==
          doctest::Approx(gamma43 * std::pow((4.0 / 3.0) * kPi * 100.0, -1.0 / 3.0))
              .epsilon(1e-15));

    const struct { double lambda, reference; } rows[] = {
        {1e2, 1.2e-1}, {5e2, 7.0e-2}, {5e3, 3.2e-2}, {1e6, 5.5e-3}, {1e5, 1.2e-2},
    };
    for (const auto& row : rows) {
        const double r = mean_free_ball_radius(row.lambda);
        CHECK(std::abs(r - row.reference) / row.reference < 0.05);
    }
    CHECK_THROWS_AS(mean_free_ball_radius(0.0), std::invalid_argument);
}

#include "vwos/harness.h"
#include "vwos/stats.h"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

namespace vwos {

using nlohmann::json;

namespace {

json check(const std::string& name, bool pass, Scalar statistic, Scalar threshold) {
    json j;
    j["name"] = name;
    j["pass"] = pass;
    j["statistic"] = statistic;
    j["threshold"] = threshold;
    return j;
}

// ball large enough that the distance distribution has negligible mass
// outside it (density mass ~ 30 at the rim)
std::shared_ptr<const MediumShape> big_ball_medium(Scalar lambda, Scalar s) {
    const Scalar radius =
        std::cbrt(30.0 / ((4.0 / 3.0) * kPi * std::max(lambda, 1e-6))) + 4.0 * s;
    return std::make_shared<const MediumShape>(
        std::vector<Primitive>{Sphere{Vec3::Zero(), radius}});
}

json distributions_suite(const SceneSpec& scene) {
    json checks = json::array();
    const Scalar s = scene.particle_radius;
    const Scalar lambda = scene.density_kind == SceneSpec::DensityKind::Constant &&
                                  scene.density_value > 0.0
                              ? scene.density_value
                              : 50.0;
    const int n = 100000;

    // homogeneous distance-to-center law
    {
        auto medium = big_ball_medium(lambda, s);
        const DensityField field = DensityField::constant(lambda, medium);
        const auto view = ConditionalDensityView::unconditional(field);
        std::vector<Scalar> dist;
        std::vector<Vec3> dirs;
        dist.reserve(n);
        for (int i = 0; i < n; ++i) {
            Pcg32 rng = walk_rng(17, 0, 0, i);
            const auto r = sample_closest_point(Vec3::Zero(), lambda, view, s, rng);
            dist.push_back(r.center_distance);
            dirs.push_back(r.center / r.center_distance);
        }
        std::sort(dist.begin(), dist.end());
        const auto ks = ks_statistic(dist, [&](Scalar r) {
            return 1.0 - std::exp(-(4.0 / 3.0) * kPi * r * r * r * lambda);
        });
        checks.push_back(check("distance_to_center_ks", ks.pass, ks.statistic, ks.threshold));

        const Scalar chi2 = octant_chi_square(dirs);
        checks.push_back(
            check("direction_octant_chi_square", chi2 < kOctantChiSquare99, chi2,
                  kOctantChiSquare99));

        // spherical contact: condition on the uncovered event
        std::vector<Scalar> contact;
        for (Scalar r : dist)
            if (r >= s) contact.push_back(r - s);
        const auto ks2 = ks_statistic(contact,
                                      [&](Scalar r) { return cdf_spherical_contact_hom(r, lambda, s); });
        checks.push_back(check("spherical_contact_ks", ks2.pass, ks2.statistic, ks2.threshold));
    }

    // heterogeneous law against quadrature of the distance PDF
    {
        std::vector<GaussianTerm> terms =
            scene.density_kind == SceneSpec::DensityKind::GaussianSum && !scene.terms.empty()
                ? scene.terms
                : std::vector<GaussianTerm>{{400.0, Vec3(0.05, -0.03, 0.04), 0.3}};
        Scalar peak = 0.0;
        for (const auto& t : terms) peak += t.amplitude;
        auto medium = big_ball_medium(peak, s);
        const DensityField field = DensityField::gaussian_sum(terms, medium);
        const auto view = ConditionalDensityView::unconditional(field);
        const Vec3 probe = Vec3::Zero();

        // find a radius capturing essentially all mass
        Scalar r_max = s;
        for (;;) {
            const Scalar mass = ball_integral(field, probe, r_max, 1 << 14, 99).value;
            if (mass > 30.0 || r_max > 1e3) break;
            r_max *= 1.5;
        }

        const int grid = 400;
        std::vector<Scalar> rs(grid + 1), cdf(grid + 1, 0.0);
        CenterDistancePdfOptions opts;
        opts.ball_samples = 1 << 16;
        opts.sphere_points = 1 << 12;
        Scalar prev_pdf = 0.0;
        for (int k = 0; k <= grid; ++k) {
            rs[k] = r_max * k / grid;
            const Scalar p = pdf_center_distance(probe, rs[k], field, opts);
            if (k > 0) cdf[k] = cdf[k - 1] + 0.5 * (prev_pdf + p) * (rs[k] - rs[k - 1]);
            prev_pdf = p;
        }

        const Scalar bound = field.majorant(probe, r_max);
        std::vector<Scalar> dist;
        dist.reserve(n);
        for (int i = 0; i < n; ++i) {
            Pcg32 rng = walk_rng(29, 1, 0, i);
            dist.push_back(sample_closest_point(probe, bound, view, s, rng).center_distance);
        }
        std::sort(dist.begin(), dist.end());
        const auto ks = ks_statistic(dist, [&](Scalar r) {
            if (r <= 0.0) return 0.0;
            if (r >= rs.back()) return 1.0;
            const auto it = std::upper_bound(rs.begin(), rs.end(), r);
            const std::size_t k = static_cast<std::size_t>(it - rs.begin());
            const Scalar t = (r - rs[k - 1]) / (rs[k] - rs[k - 1]);
            return std::min(1.0, cdf[k - 1] + t * (cdf[k] - cdf[k - 1]));
        });
        checks.push_back(
            check("heterogeneous_distance_ks", ks.pass, ks.statistic, ks.threshold));
    }

    // coverage at three design points, including p = 0.5
    {
        const Scalar targets[3] = {0.1, std::log(2.0), 2.0};
        for (int t = 0; t < 3; ++t) {
            const Scalar lam = targets[t] / ((4.0 / 3.0) * kPi * s * s * s);
            auto medium = big_ball_medium(lam, s);
            const DensityField field = DensityField::constant(lam, medium);
            const auto view = ConditionalDensityView::unconditional(field);
            const Scalar p = coverage_probability(Vec3::Zero(), field, s, 1 << 14, 7 + t);
            long long inside = 0;
            const int m = 100000;
            for (int i = 0; i < m; ++i) {
                Pcg32 rng = walk_rng(31 + t, 2, 0, i);
                if (sample_closest_point(Vec3::Zero(), lam, view, s, rng).kind ==
                    ClosestPointSample::Kind::Inside)
                    ++inside;
            }
            const Scalar phat = static_cast<Scalar>(inside) / m;
            const Scalar sigma = std::sqrt(std::max(p * (1.0 - p) / m, 1e-30));
            checks.push_back(check("coverage_p" + std::to_string(t), std::abs(phat - p) <= 3 * sigma,
                                   std::abs(phat - p), 3 * sigma));
        }
    }
    return checks;
}

json solvers_suite(const SceneSpec& scene, const std::string& scene_dir) {
    json checks = json::array();
    (void)scene_dir;

    auto medium = std::make_shared<const MediumShape>(
        std::vector<Primitive>{Sphere{Vec3::Zero(), 1.0}});
    Problem base;
    base.medium = medium;
    base.medium_bc = BoundaryFunction::linear(0, 0.5, 0.5);
    base.pbm.density = DensityField::constant(0.0, medium);
    base.pbm.particle_radius = scene.particle_radius;

    SolverConfig cfg;
    cfg.eps = std::min(scene.solver.eps, scene.particle_radius / 10.0);
    cfg.max_steps = scene.solver.max_steps;
    cfg.seed = 123;

    const Vec3 probe(0.2, -0.1, 0.3);
    const int n = 4000;

    // zero-density volumetric walker matches plain WoS in distribution
    {
        Problem dirichlet = base;
        dirichlet.particle_bc = ParticleBc::Dirichlet;
        std::vector<Scalar> a, b;
        for (int i = 0; i < n; ++i) {
            Pcg32 r1 = walk_rng(cfg.seed, 0, 0, i);
            a.push_back(vwos_estimate(dirichlet, probe, cfg, r1).value);
            Pcg32 r2 = walk_rng(cfg.seed, 1, 0, i);
            b.push_back(wos_estimate(dirichlet, nullptr, probe, cfg, r2).value);
        }
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        const Scalar d = ks_two_sample_statistic(a, b);
        const Scalar threshold = 1.628 * std::sqrt(2.0 / n);
        checks.push_back(check("vwos_zero_density_ks", d < threshold, d, threshold));
    }

    // zero-density star walker is bit-identical to plain WoS
    {
        Problem neumann = base;
        neumann.particle_bc = ParticleBc::NeumannZero;
        Problem dirichlet = base;
        dirichlet.particle_bc = ParticleBc::Dirichlet;
        long long mismatches = 0;
        for (int i = 0; i < 500; ++i) {
            Pcg32 r1 = walk_rng(cfg.seed, 2, 0, i);
            Pcg32 r2 = walk_rng(cfg.seed, 2, 0, i);
            const Scalar v1 = vwost_estimate(neumann, probe, cfg, r1).value;
            const Scalar v2 = wos_estimate(dirichlet, nullptr, probe, cfg, r2).value;
            if (v1 != v2) ++mismatches;
        }
        checks.push_back(check("vwost_zero_density_exact", mismatches == 0,
                               static_cast<Scalar>(mismatches), 0.0));
    }

    // constant data passes through both volumetric walkers exactly
    {
        Problem dirichlet = base;
        dirichlet.medium_bc = BoundaryFunction::constant(0.7);
        dirichlet.pbm.density = DensityField::constant(80.0, medium);
        dirichlet.particle_bc = ParticleBc::Dirichlet;
        Problem neumann = dirichlet;
        neumann.particle_bc = ParticleBc::NeumannZero;
        Scalar max_err = 0.0;
        for (int i = 0; i < 200; ++i) {
            Pcg32 r1 = walk_rng(cfg.seed, 3, 0, i);
            max_err = std::max(max_err,
                               std::abs(vwos_estimate(dirichlet, probe, cfg, r1).value - 0.7));
            Pcg32 r2 = walk_rng(cfg.seed, 4, 0, i);
            max_err = std::max(max_err,
                               std::abs(vwost_estimate(neumann, probe, cfg, r2).value - 0.7));
        }
        checks.push_back(check("constant_data_exact", max_err == 0.0, max_err, 0.0));
    }

    // screened step weight stays in (0, 1] up to the underflow edge
    {
        bool ok = true;
        Scalar worst = 1.0;
        for (int i = 0; i <= 1000; ++i) {
            const Scalar z = std::pow(10.0, -6.0 + 8.8 * i / 1000.0);
            const Scalar w = screened_sphere_weight(z);
            ok = ok && w > 0.0 && w <= 1.0;
            worst = std::min(worst, w);
        }
        checks.push_back(check("screened_weight_bounds", ok, worst, 1.0));
    }

    // the per-step kernel ratio is one
    {
        Pcg32 rng(1, 2);
        Scalar worst = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const Scalar radius = std::pow(10.0, -5.0 + 8.0 * rng.uniform());
            worst = std::max(worst, std::abs(laplace_kernel_ratio(radius) - 1.0));
        }
        checks.push_back(check("laplace_kernel_ratio_unit", worst <= 1e-12, worst, 1e-12));
    }
    return checks;
}

json memory_suite(const SceneSpec& scene) {
    json checks = json::array();
    const Scalar s = scene.particle_radius;

    auto medium = std::make_shared<const MediumShape>(
        std::vector<Primitive>{Sphere{Vec3::Zero(), 1.0}});
    const Scalar lambda = 120.0;
    const DensityField field = DensityField::constant(lambda, medium);

    // conditioning: no accepted center may fall inside a dilated empty ball
    {
        bool sound = true;
        bool full_e_matches = true;
        bool p_bounded = true;
        for (int walk = 0; walk < 1000 && sound; ++walk) {
            Pcg32 rng = walk_rng(99, 5, 0, walk);
            WalkMemory memory(MemoryMode::full());
            Vec3 x(0.1 * rng.uniform(), 0.1 * rng.uniform(), 0.1 * rng.uniform());
            for (int step = 0; step < 40; ++step) {
                const std::vector<EmptyBall> before(memory.empty_balls().begin(),
                                                    memory.empty_balls().end());
                const ClosestHit hit =
                    sample_closest_point_with_memory(x, lambda, field, s, memory, *medium, rng);
                if (hit.distance < 1e-4) break;
                if (hit.kind == HitKind::StochasticParticle)
                    for (const auto& ball : before)
                        if ((hit.particle_center - ball.center).norm() < ball.radius + s - 1e-12)
                            sound = false;
                memory.update(x, hit, s);
                if (memory.empty_count() != static_cast<std::size_t>(step + 1))
                    full_e_matches = false;
                if (memory.particle_count() > static_cast<std::size_t>(step + 1))
                    p_bounded = false;
                x += hit.distance * sample_direction(rng).vec();
            }
        }
        checks.push_back(check("conditioning_soundness", sound, sound ? 0.0 : 1.0, 0.0));
        checks.push_back(check("full_memory_empty_equals_steps", full_e_matches,
                               full_e_matches ? 0.0 : 1.0, 0.0));
        checks.push_back(check("particles_at_most_steps", p_bounded, p_bounded ? 0.0 : 1.0, 0.0));
    }

    // provenance dedup: repeated memory-particle hits never grow P
    {
        WalkMemory memory(MemoryMode::full());
        memory.add_particle(Vec3(0.5, 0.0, 0.0));
        const std::size_t before = memory.particle_count();
        for (int i = 0; i < 10; ++i) {
            const auto hit = memory.closest_point_on_sampled_particles(Vec3::Zero(), s);
            memory.update(Vec3::Zero(), *hit, s);
        }
        checks.push_back(check("memory_particle_dedup", memory.particle_count() == before,
                               static_cast<Scalar>(memory.particle_count() - before), 0.0));
    }

    // memoryless first step matches full-memory first step on equal streams
    {
        bool equal = true;
        for (int i = 0; i < 500 && equal; ++i) {
            Pcg32 r1 = walk_rng(7, 6, 0, i);
            Pcg32 r2 = walk_rng(7, 6, 0, i);
            WalkMemory full(MemoryMode::full());
            WalkMemory none(MemoryMode::memoryless());
            const Vec3 x(0.05, -0.02, 0.01);
            const ClosestHit a =
                sample_closest_point_with_memory(x, lambda, field, s, full, *medium, r1);
            const ClosestHit b =
                sample_closest_point_with_memory(x, lambda, field, s, none, *medium, r2);
            equal = a.distance == b.distance && a.kind == b.kind;
        }
        checks.push_back(check("memoryless_first_step_identical", equal, equal ? 0.0 : 1.0, 0.0));
    }
    return checks;
}

} // namespace

json validate(const SceneSpec& scene, const std::string& scene_dir, const std::string& suite) {
    json out;
    out["suite"] = suite;
    json checks;
    if (suite == "distributions") checks = distributions_suite(scene);
    else if (suite == "solvers") checks = solvers_suite(scene, scene_dir);
    else if (suite == "memory") checks = memory_suite(scene);
    else throw std::invalid_argument("validate: suite must be distributions|solvers|memory");

    bool all = true;
    for (const auto& c : checks) all = all && c.at("pass").get<bool>();
    out["checks"] = checks;
    out["pass"] = all;
    return out;
}

} // namespace vwos

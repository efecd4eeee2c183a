#include "vwos/harness.h"

#include "vwos/parallel.h"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace vwos {

using nlohmann::json;

EvalPlane parse_plane(const std::string& text) {
    EvalPlane plane;
    std::array<Scalar, 9> v{};
    int nu = 0, nv = 0;
    const int got = std::sscanf(text.c_str(), "%lf,%lf,%lf;%lf,%lf,%lf;%lf,%lf,%lf;%d,%d", &v[0],
                                &v[1], &v[2], &v[3], &v[4], &v[5], &v[6], &v[7], &v[8], &nu, &nv);
    if (got != 11)
        throw std::invalid_argument("plane: expected ox,oy,oz;ux,uy,uz;vx,vy,vz;nu,nv");
    plane.origin = Vec3(v[0], v[1], v[2]);
    plane.u_axis = Vec3(v[3], v[4], v[5]);
    plane.v_axis = Vec3(v[6], v[7], v[8]);
    plane.nu = nu;
    plane.nv = nv;
    if (plane.nu < 1 || plane.nv < 1) throw std::invalid_argument("plane: resolution must be >= 1");
    if (plane.u_axis.cross(plane.v_axis).norm() == 0.0)
        throw std::invalid_argument("plane: axes must not be parallel");
    return plane;
}

Method parse_method(const std::string& name) {
    if (name == "wos") return Method::Wos;
    if (name == "vwos") return Method::Vwos;
    if (name == "wost") return Method::Wost;
    if (name == "vwost") return Method::Vwost;
    if (name == "ea") return Method::Ea;
    if (name == "homogenized") return Method::Homogenized;
    throw std::invalid_argument("method: expected wos|vwos|wost|vwost|ea|homogenized");
}

std::string method_name(Method method) {
    switch (method) {
    case Method::Wos: return "wos";
    case Method::Vwos: return "vwos";
    case Method::Wost: return "wost";
    case Method::Vwost: return "vwost";
    case Method::Ea: return "ea";
    case Method::Homogenized: return "homogenized";
    }
    return "";
}

namespace {

struct PointAccumulator {
    RunningStat value;
    Scalar steps_sum = 0.0;
    Scalar empty_sum = 0.0;
    Scalar particle_sum = 0.0;
    long long truncated = 0;
    std::map<int, long long> wl_hist, e_hist, p_hist;
};

void merge_hist(std::map<int, long long>& into, const std::map<int, long long>& from) {
    for (const auto& [k, v] : from) into[k] += v;
}

} // namespace

json RunReport::config_echo() const {
    json j;
    j["method"] = method;
    j["eps"] = cfg.eps;
    j["max_steps"] = cfg.max_steps;
    j["n_walks"] = cfg.n_walks;
    j["seed"] = cfg.seed;
    j["memory"] = format_memory_mode(cfg.memory_mode);
    j["clamp_radius"] = cfg.clamp_radius;
    char plane_str[256];
    std::snprintf(plane_str, sizeof(plane_str),
                  "%.17g,%.17g,%.17g;%.17g,%.17g,%.17g;%.17g,%.17g,%.17g;%d,%d", plane.origin.x(),
                  plane.origin.y(), plane.origin.z(), plane.u_axis.x(), plane.u_axis.y(),
                  plane.u_axis.z(), plane.v_axis.x(), plane.v_axis.y(), plane.v_axis.z(), plane.nu,
                  plane.nv);
    j["plane"] = plane_str;
    if (!scene_json.empty()) j["scene"] = json::parse(scene_json);
    return j;
}

RunReport run(const SceneSpec& scene, const std::string& scene_dir, const EvalPlane& plane,
              const RunOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();

    Problem problem = build_problem(scene, scene_dir);
    const SolverConfig cfg = scene.solver;

    // method wos/wost: same walker as the volumetric method matching the
    // scene's particle condition, with the density forced to zero
    const bool zero_density = options.method == Method::Wos || options.method == Method::Wost;
    if (zero_density) problem.pbm.density = DensityField::constant(0.0, problem.medium);

    if (options.method == Method::Wost && problem.particle_bc != ParticleBc::NeumannZero)
        throw std::invalid_argument("method wost requires neumann_zero particles");
    if (options.method == Method::Vwos && problem.particle_bc != ParticleBc::Dirichlet)
        throw std::invalid_argument("method vwos requires dirichlet particles");
    if (options.method == Method::Vwost && problem.particle_bc != ParticleBc::NeumannZero)
        throw std::invalid_argument("method vwost requires neumann_zero particles");
    if (options.method == Method::Homogenized && !problem.pbm.density.is_constant())
        throw std::invalid_argument("method homogenized requires a constant density");

    RunReport report;
    report.method = method_name(options.method);
    report.plane = plane;
    report.cfg = cfg;
    report.scene_json = serialize_scene(scene).dump();

    const long long total = static_cast<long long>(plane.nu) * plane.nv;
    report.points.resize(total);
    std::vector<long long> in_domain_ids;
    for (int j = 0; j < plane.nv; ++j)
        for (int i = 0; i < plane.nu; ++i) {
            const long long id = static_cast<long long>(j) * plane.nu + i;
            PointReport& p = report.points[id];
            p.i = i;
            p.j = j;
            p.x = plane.point(i, j);
            p.in_domain = contains(*problem.medium, p.x);
            if (p.in_domain) in_domain_ids.push_back(id);
        }
    report.in_domain_count = static_cast<long long>(in_domain_ids.size());

    if (options.method == Method::Ea) {
        std::vector<Vec3> pts;
        pts.reserve(in_domain_ids.size());
        for (long long id : in_domain_ids) pts.push_back(report.points[id].x);
        const EnsembleResult ea = ensemble_average(problem, pts, options.ea_configs,
                                                   options.ea_walks_per_config, cfg,
                                                   options.threads);
        for (std::size_t k = 0; k < in_domain_ids.size(); ++k) {
            PointReport& p = report.points[in_domain_ids[k]];
            p.estimate = ea.estimates[k];
            report.truncated_total += ea.estimates[k].truncated_walk_count;
        }
    } else {
        const bool dirichlet = problem.particle_bc == ParticleBc::Dirichlet;
        std::vector<PointAccumulator> acc(in_domain_ids.size());
        parallel_for(static_cast<long long>(in_domain_ids.size()), options.threads,
                     [&](long long k) {
                         const long long id = in_domain_ids[k];
                         const Vec3 x = report.points[id].x;
                         PointAccumulator& a = acc[k];
                         for (int w = 0; w < cfg.n_walks; ++w) {
                             Pcg32 rng = walk_rng(cfg.seed, static_cast<std::uint64_t>(id), 0,
                                                  static_cast<std::uint64_t>(w));
                             WalkResult r;
                             switch (options.method) {
                             case Method::Homogenized:
                                 r = homogenized_estimate(problem, x, cfg, rng);
                                 break;
                             case Method::Vwos:
                                 r = vwos_estimate(problem, x, cfg, rng);
                                 break;
                             case Method::Vwost:
                                 r = vwost_estimate(problem, x, cfg, rng);
                                 break;
                             default: // wos / wost on the zero-density problem
                                 r = dirichlet ? vwos_estimate(problem, x, cfg, rng)
                                               : vwost_estimate(problem, x, cfg, rng);
                                 break;
                             }
                             a.value.add(r.value);
                             a.steps_sum += r.stats.steps;
                             a.empty_sum += r.stats.empty_count;
                             a.particle_sum += r.stats.particle_count;
                             a.truncated += r.truncated ? 1 : 0;
                             ++a.wl_hist[r.stats.steps];
                             ++a.e_hist[r.stats.empty_count];
                             ++a.p_hist[r.stats.particle_count];
                         }
                     });

        for (std::size_t k = 0; k < in_domain_ids.size(); ++k) { // fixed merge order
            const PointAccumulator& a = acc[k];
            PointReport& p = report.points[in_domain_ids[k]];
            p.estimate.mean = a.value.mean();
            p.estimate.variance_of_mean = a.value.variance_of_mean();
            p.estimate.n_walks = a.value.count();
            p.estimate.truncated_walk_count = a.truncated;
            p.mean_walk_length = a.steps_sum / cfg.n_walks;
            p.mean_empty = a.empty_sum / cfg.n_walks;
            p.mean_particles = a.particle_sum / cfg.n_walks;
            report.truncated_total += a.truncated;
            merge_hist(report.walk_length_hist, a.wl_hist);
            merge_hist(report.empty_hist, a.e_hist);
            merge_hist(report.particle_hist, a.p_hist);
        }
    }

    report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

void write_csv(const std::string& path, const RunReport& report) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_csv: cannot open " + path);
    out << "i,j,x,y,z,mean,variance_of_mean,n_walks,mean_walk_length,mean_E,mean_P,truncated\n";
    char line[512];
    for (const PointReport& p : report.points) {
        if (!p.in_domain) continue;
        std::snprintf(line, sizeof(line),
                      "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%lld,%.17g,%.17g,%.17g,%lld\n", p.i,
                      p.j, p.x.x(), p.x.y(), p.x.z(), p.estimate.mean,
                      p.estimate.variance_of_mean, p.estimate.n_walks, p.mean_walk_length,
                      p.mean_empty, p.mean_particles, p.estimate.truncated_walk_count);
        out << line;
    }
}

void write_pfm(const std::string& path, const RunReport& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_pfm: cannot open " + path);
    out << "Pf\n" << report.plane.nu << " " << report.plane.nv << "\n-1.0\n";
    // row j = 0 first; negative scale marks little-endian
    for (int j = 0; j < report.plane.nv; ++j)
        for (int i = 0; i < report.plane.nu; ++i) {
            const PointReport& p = report.points[static_cast<std::size_t>(j) * report.plane.nu + i];
            const float v = p.in_domain ? static_cast<float>(p.estimate.mean) : 0.0f;
            std::uint32_t bits;
            std::memcpy(&bits, &v, 4);
            const unsigned char bytes[4] = {
                static_cast<unsigned char>(bits & 0xff),
                static_cast<unsigned char>((bits >> 8) & 0xff),
                static_cast<unsigned char>((bits >> 16) & 0xff),
                static_cast<unsigned char>((bits >> 24) & 0xff),
            };
            out.write(reinterpret_cast<const char*>(bytes), 4);
        }
}

void write_ppm(const std::string& path, const RunReport& report, Scalar g_min, Scalar g_max) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_ppm: cannot open " + path);
    out << "P6\n" << report.plane.nu << " " << report.plane.nv << "\n255\n";
    const Scalar range = g_max > g_min ? g_max - g_min : 1.0;
    for (int j = report.plane.nv - 1; j >= 0; --j)
        for (int i = 0; i < report.plane.nu; ++i) {
            const PointReport& p = report.points[static_cast<std::size_t>(j) * report.plane.nu + i];
            unsigned char byte = 0;
            if (p.in_domain) {
                const Scalar t = std::clamp((p.estimate.mean - g_min) / range, 0.0, 1.0);
                byte = static_cast<unsigned char>(std::lround(t * 255.0));
            }
            const unsigned char rgb[3] = {byte, byte, byte};
            out.write(reinterpret_cast<const char*>(rgb), 3);
        }
}

void write_report_json(const std::string& path, const RunReport& report) {
    json j;
    j["config"] = report.config_echo();
    j["in_domain_points"] = report.in_domain_count;
    j["truncated_total"] = report.truncated_total;
    j["wall_clock_seconds"] = report.wall_clock_seconds;
    auto hist_json = [](const std::map<int, long long>& h) {
        json a = json::array();
        for (const auto& [k, v] : h) a.push_back(json::array({k, v}));
        return a;
    };
    j["histograms"]["walk_length"] = hist_json(report.walk_length_hist);
    j["histograms"]["empty_balls"] = hist_json(report.empty_hist);
    j["histograms"]["sampled_particles"] = hist_json(report.particle_hist);

    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_report_json: cannot open " + path);
    out << j.dump(2) << "\n";
}

RunReport read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_csv: cannot open " + path);
    RunReport report;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_csv: empty file " + path);
    int max_i = 0, max_j = 0;
    while (std::getline(in, line)) {
        PointReport p;
        p.in_domain = true;
        long long n_walks = 0, truncated = 0;
        if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf,%lf,%lf,%lf,%lld,%lf,%lf,%lf,%lld", &p.i,
                        &p.j, &p.x.x(), &p.x.y(), &p.x.z(), &p.estimate.mean,
                        &p.estimate.variance_of_mean, &n_walks, &p.mean_walk_length,
                        &p.mean_empty, &p.mean_particles, &truncated) != 12)
            throw std::runtime_error("read_csv: malformed row in " + path);
        p.estimate.n_walks = n_walks;
        p.estimate.truncated_walk_count = truncated;
        max_i = std::max(max_i, p.i);
        max_j = std::max(max_j, p.j);
        report.points.push_back(p);
    }
    report.plane.nu = max_i + 1;
    report.plane.nv = max_j + 1;
    report.in_domain_count = static_cast<long long>(report.points.size());
    return report;
}

CompareMetrics compare(const RunReport& a, const RunReport& b) {
    if (a.points.size() != b.points.size())
        throw std::invalid_argument("compare: reports have different point counts");

    CompareMetrics m;
    Scalar sq_sum = 0.0;
    for (std::size_t k = 0; k < a.points.size(); ++k) {
        const PointReport& pa = a.points[k];
        const PointReport& pb = b.points[k];
        if (pa.i != pb.i || pa.j != pb.j)
            throw std::invalid_argument("compare: grid indexing mismatch");
        if (pa.in_domain != pb.in_domain)
            throw std::invalid_argument("compare: domain mask mismatch");
        if (!pa.in_domain) continue;
        if ((pa.x - pb.x).norm() != 0.0)
            throw std::invalid_argument("compare: grid coordinates mismatch");

        const Scalar d = std::abs(pa.estimate.mean - pb.estimate.mean);
        m.mae += d;
        sq_sum += d * d;
        m.max_abs = std::max(m.max_abs, d);
        const Scalar sigma =
            std::sqrt(pa.estimate.variance_of_mean + pb.estimate.variance_of_mean);
        if (d > 3.0 * sigma) ++m.z_exceed_count;
        ++m.points_compared;
    }
    if (m.points_compared > 0) {
        m.mae /= static_cast<Scalar>(m.points_compared);
        m.rmse = std::sqrt(sq_sum / static_cast<Scalar>(m.points_compared));
    }
    return m;
}

} // namespace vwos

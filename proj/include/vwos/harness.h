#pragma once

#include "vwos/scene.h"

#include <nlohmann/json_fwd.hpp>

#include <map>

namespace vwos {

// Slice-plane evaluation grid. Grid point (i, j) sits at
// origin + i/(nu-1) * u_axis + j/(nv-1) * v_axis; points outside the medium
// are marked and skipped.
struct EvalPlane {
    Vec3 origin = Vec3::Zero();
    Vec3 u_axis = Vec3::UnitX();
    Vec3 v_axis = Vec3::UnitY();
    int nu = 2;
    int nv = 2;

    Vec3 point(int i, int j) const {
        const Scalar fu = nu > 1 ? static_cast<Scalar>(i) / (nu - 1) : 0.0;
        const Scalar fv = nv > 1 ? static_cast<Scalar>(j) / (nv - 1) : 0.0;
        return origin + fu * u_axis + fv * v_axis;
    }

    bool operator==(const EvalPlane& o) const {
        return origin == o.origin && u_axis == o.u_axis && v_axis == o.v_axis && nu == o.nu &&
               nv == o.nv;
    }
};

// "ox,oy,oz;ux,uy,uz;vx,vy,vz;nu,nv"
EvalPlane parse_plane(const std::string& text);

enum class Method { Wos, Vwos, Wost, Vwost, Ea, Homogenized };

Method parse_method(const std::string& name);
std::string method_name(Method method);

struct PointReport {
    int i = 0;
    int j = 0;
    Vec3 x = Vec3::Zero();
    bool in_domain = false;
    Estimate estimate;
    Scalar mean_walk_length = 0.0;
    Scalar mean_empty = 0.0;
    Scalar mean_particles = 0.0;
};

struct RunReport {
    std::string method;
    EvalPlane plane;
    std::vector<PointReport> points; // row-major, j outer
    std::map<int, long long> walk_length_hist;
    std::map<int, long long> empty_hist;
    std::map<int, long long> particle_hist;
    long long in_domain_count = 0;
    long long truncated_total = 0;
    double wall_clock_seconds = 0.0;
    nlohmann::json config_echo() const;
    std::string scene_json; // canonical scene echoed into the report
    SolverConfig cfg;
};

struct RunOptions {
    Method method = Method::Vwos;
    int threads = 1;
    int ea_configs = 64;          // Ea only
    int ea_walks_per_config = 64; // Ea only
};

// Evaluates every in-domain grid point. Walk methods run cfg.n_walks walks
// per point on streams keyed by (seed, point, walk); method wos/wost run the
// volumetric walker matching the scene's particle condition with the density
// forced to zero, so a zero-density scene takes the identical code path.
RunReport run(const SceneSpec& scene, const std::string& scene_dir, const EvalPlane& plane,
              const RunOptions& options);

void write_csv(const std::string& path, const RunReport& report);
void write_pfm(const std::string& path, const RunReport& report);
void write_ppm(const std::string& path, const RunReport& report, Scalar g_min, Scalar g_max);
void write_report_json(const std::string& path, const RunReport& report);

// Minimal grid reloaded from a solution CSV (mean/variance per point).
RunReport read_csv(const std::string& path);

struct CompareMetrics {
    Scalar mae = 0.0;
    Scalar rmse = 0.0;
    Scalar max_abs = 0.0;
    long long z_exceed_count = 0; // |mean_a - mean_b| > 3 sqrt(var_a + var_b)
    long long points_compared = 0;
};

// Elementwise error metrics over shared in-domain points; throws on shape
// mismatch.
CompareMetrics compare(const RunReport& a, const RunReport& b);

// Pinned-seed validation suites with machine-readable verdicts.
// suite is one of: distributions | solvers | memory.
nlohmann::json validate(const SceneSpec& scene, const std::string& scene_dir,
                        const std::string& suite);

} // namespace vwos

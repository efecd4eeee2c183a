#include "vwos/harness.h"
#include "vwos/stats.h"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonFlags {
    std::string scene_path;
    std::string method = "vwos";
    std::string plane = "0,0,0;1,0,0;0,1,0;16,16";
    std::string out_dir = "out";
    std::string memory;
    int walks = -1;
    double eps = -1.0;
    long long seed = -1;
    int threads = 1;
    int ea_configs = 64;
    int ea_walks = 64;
};

void apply_overrides(vwos::SceneSpec& scene, const CommonFlags& flags) {
    if (flags.walks > 0) scene.solver.n_walks = flags.walks;
    if (flags.eps > 0.0) scene.solver.eps = flags.eps;
    if (flags.seed >= 0) scene.solver.seed = static_cast<std::uint64_t>(flags.seed);
    if (!flags.memory.empty()) scene.solver.memory_mode = vwos::parse_memory_mode(flags.memory);
    vwos::validate_scene(scene);
}

int run_solve(const CommonFlags& flags) {
    vwos::SceneSpec scene = vwos::load_scene(flags.scene_path);
    apply_overrides(scene, flags);
    const std::string scene_dir = fs::path(flags.scene_path).parent_path().string();

    vwos::RunOptions options;
    options.method = vwos::parse_method(flags.method);
    options.threads = flags.threads;
    options.ea_configs = flags.ea_configs;
    options.ea_walks_per_config = flags.ea_walks;

    const vwos::EvalPlane plane = vwos::parse_plane(flags.plane);
    const vwos::RunReport report = vwos::run(scene, scene_dir, plane, options);

    // tone-map range: boundary data over the in-domain grid points
    const vwos::Problem problem = vwos::build_problem(scene, scene_dir);
    double g_min = std::numeric_limits<double>::infinity();
    double g_max = -g_min;
    for (const auto& p : report.points) {
        if (!p.in_domain) continue;
        const double g = problem.g(p.x);
        g_min = std::min(g_min, g);
        g_max = std::max(g_max, g);
    }
    if (!std::isfinite(g_min)) { g_min = 0.0; g_max = 1.0; }

    fs::create_directories(flags.out_dir);
    const fs::path out(flags.out_dir);
    vwos::write_csv((out / "solution.csv").string(), report);
    vwos::write_pfm((out / "solution.pfm").string(), report);
    vwos::write_ppm((out / "preview.ppm").string(), report, g_min, g_max);
    vwos::write_report_json((out / "report.json").string(), report);

    std::cout << "method " << report.method << ": " << report.in_domain_count
              << " in-domain points, " << report.truncated_total << " truncated walks, "
              << report.wall_clock_seconds << " s\n";
    std::cout << "wrote " << (out / "solution.csv").string() << "\n";
    return 0;
}

int run_compare(const std::string& a_path, const std::string& b_path) {
    const vwos::RunReport a = vwos::read_csv(a_path);
    const vwos::RunReport b = vwos::read_csv(b_path);
    const vwos::CompareMetrics m = vwos::compare(a, b);
    json j;
    j["mae"] = m.mae;
    j["rmse"] = m.rmse;
    j["max_abs"] = m.max_abs;
    j["z_exceed_count"] = m.z_exceed_count;
    j["points_compared"] = m.points_compared;
    std::cout << j.dump(2) << "\n";
    return 0;
}

int run_validate(const CommonFlags& flags, const std::string& suite, const std::string& out_path) {
    vwos::SceneSpec scene = vwos::load_scene(flags.scene_path);
    apply_overrides(scene, flags);
    const std::string scene_dir = fs::path(flags.scene_path).parent_path().string();
    const json verdicts = vwos::validate(scene, scene_dir, suite);
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        out << verdicts.dump(2) << "\n";
    }
    std::cout << verdicts.dump(2) << "\n";
    return verdicts.at("pass").get<bool>() ? 0 : 1;
}

int run_stats(const CommonFlags& flags) {
    vwos::SceneSpec scene = vwos::load_scene(flags.scene_path);
    apply_overrides(scene, flags);
    const std::string scene_dir = fs::path(flags.scene_path).parent_path().string();

    vwos::RunOptions options;
    options.method = vwos::parse_method(flags.method);
    options.threads = flags.threads;
    const vwos::EvalPlane plane = vwos::parse_plane(flags.plane);
    const vwos::RunReport report = vwos::run(scene, scene_dir, plane, options);

    auto hist_json = [](const std::map<int, long long>& h) {
        json a = json::array();
        for (const auto& [k, v] : h) a.push_back(json::array({k, v}));
        return a;
    };
    auto hist_median = [](const std::map<int, long long>& h) {
        long long total = 0;
        for (const auto& [k, v] : h) total += v;
        long long seen = 0;
        for (const auto& [k, v] : h) {
            seen += v;
            if (2 * seen >= total) return k;
        }
        return 0;
    };

    json j;
    j["method"] = report.method;
    j["walks"] = scene.solver.n_walks;
    j["in_domain_points"] = report.in_domain_count;
    j["truncated_total"] = report.truncated_total;
    j["median_walk_length"] = hist_median(report.walk_length_hist);
    j["median_empty_balls"] = hist_median(report.empty_hist);
    j["median_sampled_particles"] = hist_median(report.particle_hist);
    j["histograms"]["walk_length"] = hist_json(report.walk_length_hist);
    j["histograms"]["empty_balls"] = hist_json(report.empty_hist);
    j["histograms"]["sampled_particles"] = hist_json(report.particle_hist);
    std::cout << j.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo estimation of mean Laplace solutions in media perforated by random"
                 " spherical particles"};
    app.require_subcommand(1);

    CommonFlags flags;

    auto add_common = [&](CLI::App* cmd, bool need_scene) {
        auto* scene_opt = cmd->add_option("--scene", flags.scene_path, "scene JSON file");
        if (need_scene) scene_opt->required();
        cmd->add_option("--walks", flags.walks, "walks per evaluation point");
        cmd->add_option("--eps", flags.eps, "epsilon shell width");
        cmd->add_option("--seed", flags.seed, "random seed");
        cmd->add_option("--memory", flags.memory, "full | finite:KE,KP | memoryless");
        cmd->add_option("--threads", flags.threads, "worker threads");
    };

    CLI::App* solve = app.add_subcommand("solve", "evaluate the mean solution on a slice plane");
    add_common(solve, true);
    solve->add_option("--method", flags.method, "wos|vwos|wost|vwost|ea|homogenized");
    solve->add_option("--plane", flags.plane, "ox,oy,oz;ux,uy,uz;vx,vy,vz;nu,nv");
    solve->add_option("--out", flags.out_dir, "output directory");
    solve->add_option("--ea-configs", flags.ea_configs, "configurations for method ea");
    solve->add_option("--ea-walks", flags.ea_walks, "walks per configuration for method ea");

    std::string compare_a, compare_b;
    CLI::App* compare = app.add_subcommand("compare", "error metrics between two solution CSVs");
    compare->add_option("a", compare_a, "first solution.csv")->required();
    compare->add_option("b", compare_b, "second solution.csv")->required();

    std::string suite = "distributions", validate_out;
    CLI::App* validate = app.add_subcommand("validate", "run a statistical validation suite");
    add_common(validate, true);
    validate->add_option("--suite", suite, "distributions | solvers | memory");
    validate->add_option("--out", validate_out, "write verdicts JSON here as well");

    CLI::App* stats = app.add_subcommand("stats", "walk length and memory size statistics");
    add_common(stats, true);
    stats->add_option("--method", flags.method, "wos|vwos|wost|vwost|homogenized");
    stats->add_option("--plane", flags.plane, "ox,oy,oz;ux,uy,uz;vx,vy,vz;nu,nv");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return run_solve(flags);
        if (compare->parsed()) return run_compare(compare_a, compare_b);
        if (validate->parsed()) return run_validate(flags, suite, validate_out);
        if (stats->parsed()) return run_stats(flags);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

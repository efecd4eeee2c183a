#include "vwos/scene.h"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>

namespace vwos {

using nlohmann::json;

namespace {

bool vec_eq(const Vec3& a, const Vec3& b) {
    return a.x() == b.x() && a.y() == b.y() && a.z() == b.z();
}

json vec_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3) throw std::invalid_argument("scene: expected [x, y, z]");
    return Vec3(j[0].get<Scalar>(), j[1].get<Scalar>(), j[2].get<Scalar>());
}

json bc_to_json(const BoundaryFunction& f) {
    json j;
    switch (f.kind()) {
    case BoundaryFunction::Kind::Constant:
        j["type"] = "constant";
        j["value"] = f.value();
        break;
    case BoundaryFunction::Kind::Linear:
        j["type"] = "linear";
        j["axis"] = f.axis();
        j["scale"] = f.scale();
        j["offset"] = f.offset();
        break;
    case BoundaryFunction::Kind::CosProduct:
        j["type"] = "cos_product";
        break;
    case BoundaryFunction::Kind::SplitCos:
        j["type"] = "split_cos";
        break;
    case BoundaryFunction::Kind::GaussianShell:
        j["type"] = "gaussian_shell";
        j["a"] = f.shell_a();
        j["b"] = f.shell_b();
        j["inner"] = bc_to_json(f.inner());
        break;
    }
    return j;
}

BoundaryFunction bc_from_json(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "constant") return BoundaryFunction::constant(j.at("value").get<Scalar>());
    if (type == "linear")
        return BoundaryFunction::linear(j.at("axis").get<int>(), j.at("scale").get<Scalar>(),
                                        j.value("offset", 0.0));
    if (type == "cos_product") return BoundaryFunction::cos_product();
    if (type == "split_cos") return BoundaryFunction::split_cos();
    if (type == "gaussian_shell")
        return BoundaryFunction::gaussian_shell(j.at("a").get<Scalar>(), j.at("b").get<Scalar>(),
                                                bc_from_json(j.at("inner")));
    throw std::invalid_argument("scene: unknown boundary function '" + type + "'");
}

} // namespace

bool SceneSpec::operator==(const SceneSpec& o) const {
    if (primitives.size() != o.primitives.size()) return false;
    for (std::size_t i = 0; i < primitives.size(); ++i) {
        if (primitives[i].index() != o.primitives[i].index()) return false;
        if (const auto* s = std::get_if<Sphere>(&primitives[i])) {
            const auto& t = std::get<Sphere>(o.primitives[i]);
            if (!vec_eq(s->center, t.center) || s->radius != t.radius) return false;
        } else {
            const auto& a = std::get<AxisAlignedBox>(primitives[i]);
            const auto& b = std::get<AxisAlignedBox>(o.primitives[i]);
            if (!vec_eq(a.min, b.min) || !vec_eq(a.max, b.max)) return false;
        }
    }
    if (mesh.has_value() != o.mesh.has_value()) return false;
    if (mesh) {
        if (mesh->vertices.size() != o.mesh->vertices.size() ||
            mesh->triangles != o.mesh->triangles)
            return false;
        for (std::size_t i = 0; i < mesh->vertices.size(); ++i)
            if (!vec_eq(mesh->vertices[i], o.mesh->vertices[i])) return false;
    }
    if (density_kind != o.density_kind || density_value != o.density_value ||
        grid_path != o.grid_path || terms.size() != o.terms.size())
        return false;
    for (std::size_t i = 0; i < terms.size(); ++i)
        if (terms[i].amplitude != o.terms[i].amplitude || terms[i].width != o.terms[i].width ||
            !vec_eq(terms[i].center, o.terms[i].center))
            return false;
    return particle_radius == o.particle_radius && medium_bc == o.medium_bc &&
           particle_bc == o.particle_bc && solver.eps == o.solver.eps &&
           solver.max_steps == o.solver.max_steps && solver.n_walks == o.solver.n_walks &&
           solver.seed == o.solver.seed && solver.memory_mode == o.solver.memory_mode &&
           solver.clamp_radius == o.solver.clamp_radius;
}

MemoryMode parse_memory_mode(const std::string& text) {
    if (text == "full") return MemoryMode::full();
    if (text == "memoryless") return MemoryMode::memoryless();
    if (text.rfind("finite:", 0) == 0) {
        const std::string rest = text.substr(7);
        const auto comma = rest.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("memory mode: expected finite:KE,KP");
        return MemoryMode::finite(std::stoi(rest.substr(0, comma)),
                                  std::stoi(rest.substr(comma + 1)));
    }
    throw std::invalid_argument("memory mode: expected full | finite:KE,KP | memoryless");
}

std::string format_memory_mode(const MemoryMode& mode) {
    switch (mode.kind) {
    case MemoryMode::Kind::Full: return "full";
    case MemoryMode::Kind::Memoryless: return "memoryless";
    case MemoryMode::Kind::Finite:
        return "finite:" + std::to_string(mode.max_empty) + "," +
               std::to_string(mode.max_particles);
    }
    return "full";
}

json serialize_scene(const SceneSpec& scene) {
    json j;

    json prims = json::array();
    for (const auto& prim : scene.primitives) {
        json p;
        if (const auto* s = std::get_if<Sphere>(&prim)) {
            p["type"] = "sphere";
            p["center"] = vec_to_json(s->center);
            p["radius"] = s->radius;
        } else {
            const auto& b = std::get<AxisAlignedBox>(prim);
            p["type"] = "box";
            p["min"] = vec_to_json(b.min);
            p["max"] = vec_to_json(b.max);
        }
        prims.push_back(p);
    }
    j["medium"]["primitives"] = prims;
    if (scene.mesh) {
        json verts = json::array(), tris = json::array();
        for (const auto& v : scene.mesh->vertices) verts.push_back(vec_to_json(v));
        for (const auto& t : scene.mesh->triangles) tris.push_back(json::array({t[0], t[1], t[2]}));
        j["medium"]["mesh"]["vertices"] = verts;
        j["medium"]["mesh"]["triangles"] = tris;
    }

    switch (scene.density_kind) {
    case SceneSpec::DensityKind::Constant:
        j["density"]["type"] = "constant";
        j["density"]["value"] = scene.density_value;
        break;
    case SceneSpec::DensityKind::GaussianSum: {
        j["density"]["type"] = "gaussian_sum";
        json terms = json::array();
        for (const auto& t : scene.terms) {
            json term;
            term["amplitude"] = t.amplitude;
            term["center"] = vec_to_json(t.center);
            term["width"] = t.width;
            terms.push_back(term);
        }
        j["density"]["terms"] = terms;
        break;
    }
    case SceneSpec::DensityKind::Grid:
        j["density"]["type"] = "grid";
        j["density"]["path"] = scene.grid_path;
        break;
    }

    j["particle_radius"] = scene.particle_radius;
    j["medium_bc"] = bc_to_json(scene.medium_bc);
    j["particle_bc"] = scene.particle_bc == ParticleBc::Dirichlet ? "dirichlet" : "neumann_zero";

    j["solver"]["eps"] = scene.solver.eps;
    j["solver"]["max_steps"] = scene.solver.max_steps;
    j["solver"]["n_walks"] = scene.solver.n_walks;
    j["solver"]["seed"] = scene.solver.seed;
    j["solver"]["memory"] = format_memory_mode(scene.solver.memory_mode);
    j["solver"]["clamp_radius"] = scene.solver.clamp_radius;
    return j;
}

SceneSpec parse_scene(const json& j) {
    SceneSpec scene;

    const json& medium = j.at("medium");
    for (const auto& p : medium.at("primitives")) {
        const std::string type = p.at("type").get<std::string>();
        if (type == "sphere")
            scene.primitives.push_back(
                Sphere{vec_from_json(p.at("center")), p.at("radius").get<Scalar>()});
        else if (type == "box")
            scene.primitives.push_back(
                AxisAlignedBox{vec_from_json(p.at("min")), vec_from_json(p.at("max"))});
        else
            throw std::invalid_argument("scene: unknown primitive '" + type + "'");
    }
    if (medium.contains("mesh")) {
        TriangleSoup soup;
        for (const auto& v : medium.at("mesh").at("vertices"))
            soup.vertices.push_back(vec_from_json(v));
        for (const auto& t : medium.at("mesh").at("triangles"))
            soup.triangles.push_back({t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>()});
        scene.mesh = std::move(soup);
    }

    const json& density = j.at("density");
    const std::string dtype = density.at("type").get<std::string>();
    if (dtype == "constant") {
        scene.density_kind = SceneSpec::DensityKind::Constant;
        scene.density_value = density.at("value").get<Scalar>();
    } else if (dtype == "gaussian_sum") {
        scene.density_kind = SceneSpec::DensityKind::GaussianSum;
        for (const auto& t : density.at("terms"))
            scene.terms.push_back(GaussianTerm{t.at("amplitude").get<Scalar>(),
                                               vec_from_json(t.at("center")),
                                               t.at("width").get<Scalar>()});
    } else if (dtype == "grid") {
        scene.density_kind = SceneSpec::DensityKind::Grid;
        scene.grid_path = density.at("path").get<std::string>();
    } else {
        throw std::invalid_argument("scene: unknown density '" + dtype + "'");
    }

    scene.particle_radius = j.at("particle_radius").get<Scalar>();
    scene.medium_bc = bc_from_json(j.at("medium_bc"));
    const std::string bc = j.at("particle_bc").get<std::string>();
    if (bc == "dirichlet") scene.particle_bc = ParticleBc::Dirichlet;
    else if (bc == "neumann_zero") scene.particle_bc = ParticleBc::NeumannZero;
    else throw std::invalid_argument("scene: unknown particle_bc '" + bc + "'");

    const json& solver = j.at("solver");
    scene.solver.eps = solver.at("eps").get<Scalar>();
    scene.solver.max_steps = solver.at("max_steps").get<int>();
    scene.solver.n_walks = solver.at("n_walks").get<int>();
    scene.solver.seed = solver.at("seed").get<std::uint64_t>();
    scene.solver.memory_mode = parse_memory_mode(solver.at("memory").get<std::string>());
    scene.solver.clamp_radius = solver.value("clamp_radius", scene.solver.eps);
    return scene;
}

void validate_scene(const SceneSpec& scene) {
    if (!(scene.particle_radius > 0.0))
        throw std::invalid_argument("scene: particle_radius must be > 0");
    if (!(scene.solver.eps > 0.0)) throw std::invalid_argument("scene: eps must be > 0");
    if (scene.solver.eps > scene.particle_radius / 10.0)
        throw std::invalid_argument("scene: eps must be at most particle_radius / 10");
    if (scene.solver.max_steps < 1) throw std::invalid_argument("scene: max_steps must be >= 1");
    if (scene.solver.n_walks < 1) throw std::invalid_argument("scene: n_walks must be >= 1");
    if (!(scene.solver.clamp_radius > 0.0))
        throw std::invalid_argument("scene: clamp_radius must be > 0");
    if (scene.density_kind == SceneSpec::DensityKind::Constant && scene.density_value < 0.0)
        throw std::invalid_argument("scene: density must be >= 0");
    // shape invariants checked by construction
    MediumShape shape(scene.primitives, scene.mesh);
    (void)shape;
}

SceneSpec load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_scene: cannot open " + path);
    json j;
    in >> j;
    SceneSpec scene = parse_scene(j);
    validate_scene(scene);
    return scene;
}

void save_scene(const std::string& path, const SceneSpec& scene) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_scene: cannot open " + path);
    out << serialize_scene(scene).dump(2) << "\n";
}

Problem build_problem(const SceneSpec& scene, const std::string& base_dir) {
    validate_scene(scene);
    auto medium = std::make_shared<const MediumShape>(scene.primitives, scene.mesh);

    Problem problem;
    problem.medium = medium;
    problem.medium_bc = scene.medium_bc;
    problem.particle_bc = scene.particle_bc;
    problem.pbm.particle_radius = scene.particle_radius;

    switch (scene.density_kind) {
    case SceneSpec::DensityKind::Constant:
        problem.pbm.density = DensityField::constant(scene.density_value, medium);
        break;
    case SceneSpec::DensityKind::GaussianSum:
        problem.pbm.density = DensityField::gaussian_sum(scene.terms, medium);
        break;
    case SceneSpec::DensityKind::Grid: {
        std::filesystem::path p(scene.grid_path);
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        problem.pbm.density = DensityField::grid(load_vgrid(p.string()), medium);
        break;
    }
    }
    return problem;
}

} // namespace vwos

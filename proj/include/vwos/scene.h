#pragma once

#include "vwos/solvers.h"

#include <nlohmann/json_fwd.hpp>

#include <string>

namespace vwos {

// Declarative scene description: medium shape, density, particle parameters,
// boundary data, and solver defaults. Serializes to a canonical JSON form
// with parse(serialize(scene)) == scene.
struct SceneSpec {
    enum class DensityKind { Constant, GaussianSum, Grid };

    std::vector<Primitive> primitives;
    std::optional<TriangleSoup> mesh;

    DensityKind density_kind = DensityKind::Constant;
    Scalar density_value = 0.0;          // Constant
    std::vector<GaussianTerm> terms;     // GaussianSum
    std::string grid_path;               // Grid, relative to the scene file

    Scalar particle_radius = 0.1;
    BoundaryFunction medium_bc = BoundaryFunction::constant(0.0);
    ParticleBc particle_bc = ParticleBc::Dirichlet;
    SolverConfig solver;

    bool operator==(const SceneSpec& o) const;
};

MemoryMode parse_memory_mode(const std::string& text); // full | finite:KE,KP | memoryless
std::string format_memory_mode(const MemoryMode& mode);

nlohmann::json serialize_scene(const SceneSpec& scene);
SceneSpec parse_scene(const nlohmann::json& j);

// Parse plus validation (rejects eps > particle_radius / 10, bad shapes, ...).
SceneSpec load_scene(const std::string& path);
void save_scene(const std::string& path, const SceneSpec& scene);
void validate_scene(const SceneSpec& scene);

// Instantiates runtime geometry and density; grid paths resolve against
// base_dir.
Problem build_problem(const SceneSpec& scene, const std::string& base_dir = ".");

} // namespace vwos

#pragma once

#include "vwos/geometry.h"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace vwos {

struct GaussianTerm {
    Scalar amplitude = 0.0; // >= 0
    Vec3 center = Vec3::Zero();
    Scalar width = 1.0;     // > 0
};

struct TrilinearGrid {
    int nx = 0, ny = 0, nz = 0;
    Vec3 bmin = Vec3::Zero();
    Vec3 bmax = Vec3::Ones();
    std::vector<float> values; // x-fastest, then y, then z; clamped >= 0 on load
};

// Particle-center density over the medium. Evaluates to zero outside the
// medium mask, so radial searches terminate correctly near the boundary.
class DensityField {
public:
    enum class Kind { Constant, GaussianSum, Grid };

    // zero density with no mask; placeholder until a real field is assigned
    DensityField() = default;

    static DensityField constant(Scalar value, std::shared_ptr<const MediumShape> medium);
    static DensityField gaussian_sum(std::vector<GaussianTerm> terms,
                                     std::shared_ptr<const MediumShape> medium);
    static DensityField grid(TrilinearGrid grid, std::shared_ptr<const MediumShape> medium);

    Kind kind() const { return kind_; }
    bool is_constant() const { return kind_ == Kind::Constant; }
    Scalar constant_value() const { return constant_; }
    const std::vector<GaussianTerm>& terms() const { return terms_; }
    const TrilinearGrid& grid_data() const { return grid_; }

    const MediumShape& medium() const { return *medium_; }
    std::shared_ptr<const MediumShape> medium_ptr() const { return medium_; }

    // density at x, masked to zero outside the medium
    Scalar eval(const Vec3& x) const;

    // unmasked variant value (the mask only ever lowers it)
    Scalar eval_unmasked(const Vec3& x) const;

    // upper bound on the density over the ball B(x, r_max)
    Scalar majorant(const Vec3& x, Scalar r_max) const;

private:
    Kind kind_ = Kind::Constant;
    Scalar constant_ = 0.0;
    std::vector<GaussianTerm> terms_;
    TrilinearGrid grid_;
    Scalar grid_max_ = 0.0;
    std::shared_ptr<const MediumShape> medium_;
};

struct PbmParams {
    DensityField density;
    Scalar particle_radius = 0.0; // s > 0
};

struct QuadratureResult {
    Scalar value = 0.0;
    Scalar std_error = 0.0;
};

// Stratified Monte Carlo estimate of the density integral over B(x, r).
// Validation oracle only; samplers never call this.
QuadratureResult ball_integral(const DensityField& field, const Vec3& x, Scalar r,
                               int n_samples = 1 << 16, std::uint64_t seed = 0x5eedULL);

// Same quadrature over the medium's bounding box (masked): total expected
// particle count up to the density normalization.
QuadratureResult medium_integral(const DensityField& field, int n_samples = 1 << 20,
                                 std::uint64_t seed = 0x5eedULL);

TrilinearGrid load_vgrid(const std::string& path);
void save_vgrid(const std::string& path, const TrilinearGrid& grid);

} // namespace vwos

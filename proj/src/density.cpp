#include "vwos/density.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace vwos {

DensityField DensityField::constant(Scalar value, std::shared_ptr<const MediumShape> medium) {
    if (!(value >= 0.0)) throw std::invalid_argument("DensityField: constant value must be >= 0");
    if (!medium) throw std::invalid_argument("DensityField: medium mask required");
    DensityField f;
    f.kind_ = Kind::Constant;
    f.constant_ = value;
    f.medium_ = std::move(medium);
    return f;
}

DensityField DensityField::gaussian_sum(std::vector<GaussianTerm> terms,
                                        std::shared_ptr<const MediumShape> medium) {
    if (!medium) throw std::invalid_argument("DensityField: medium mask required");
    for (const auto& t : terms)
        if (!(t.amplitude >= 0.0) || !(t.width > 0.0))
            throw std::invalid_argument("DensityField: gaussian term needs amplitude >= 0, width > 0");
    DensityField f;
    f.kind_ = Kind::GaussianSum;
    f.terms_ = std::move(terms);
    f.medium_ = std::move(medium);
    return f;
}

DensityField DensityField::grid(TrilinearGrid grid, std::shared_ptr<const MediumShape> medium) {
    if (!medium) throw std::invalid_argument("DensityField: medium mask required");
    if (grid.nx < 2 || grid.ny < 2 || grid.nz < 2)
        throw std::invalid_argument("DensityField: grid needs at least 2 nodes per axis");
    if (static_cast<std::size_t>(grid.nx) * grid.ny * grid.nz != grid.values.size())
        throw std::invalid_argument("DensityField: grid value count mismatch");
    if (!((grid.bmin.array() < grid.bmax.array()).all()))
        throw std::invalid_argument("DensityField: grid box min must be below max");
    DensityField f;
    f.kind_ = Kind::Grid;
    for (float& v : grid.values) v = std::max(v, 0.0f);
    f.grid_max_ = 0.0;
    for (float v : grid.values) f.grid_max_ = std::max(f.grid_max_, static_cast<Scalar>(v));
    f.grid_ = std::move(grid);
    f.medium_ = std::move(medium);
    return f;
}

Scalar DensityField::eval_unmasked(const Vec3& x) const {
    switch (kind_) {
    case Kind::Constant:
        return constant_;
    case Kind::GaussianSum: {
        Scalar sum = 0.0;
        for (const auto& t : terms_) {
            const Scalar d2 = (x - t.center).squaredNorm();
            sum += t.amplitude * std::exp(-d2 / (t.width * t.width));
        }
        return sum;
    }
    case Kind::Grid: {
        const auto& g = grid_;
        const Vec3 ext = g.bmax - g.bmin;
        const Vec3 rel = (x - g.bmin).cwiseQuotient(ext);
        if ((rel.array() < 0.0).any() || (rel.array() > 1.0).any()) return 0.0;
        const Scalar fx = rel.x() * (g.nx - 1);
        const Scalar fy = rel.y() * (g.ny - 1);
        const Scalar fz = rel.z() * (g.nz - 1);
        const int i = std::min(static_cast<int>(fx), g.nx - 2);
        const int j = std::min(static_cast<int>(fy), g.ny - 2);
        const int k = std::min(static_cast<int>(fz), g.nz - 2);
        const Scalar tx = fx - i, ty = fy - j, tz = fz - k;
        auto at = [&](int a, int b, int c) -> Scalar {
            return g.values[(static_cast<std::size_t>(c) * g.ny + b) * g.nx + a];
        };
        const Scalar c00 = at(i, j, k) * (1 - tx) + at(i + 1, j, k) * tx;
        const Scalar c10 = at(i, j + 1, k) * (1 - tx) + at(i + 1, j + 1, k) * tx;
        const Scalar c01 = at(i, j, k + 1) * (1 - tx) + at(i + 1, j, k + 1) * tx;
        const Scalar c11 = at(i, j + 1, k + 1) * (1 - tx) + at(i + 1, j + 1, k + 1) * tx;
        const Scalar c0 = c00 * (1 - ty) + c10 * ty;
        const Scalar c1 = c01 * (1 - ty) + c11 * ty;
        return c0 * (1 - tz) + c1 * tz;
    }
    }
    return 0.0;
}

Scalar DensityField::eval(const Vec3& x) const {
    if (!medium_ || !contains(*medium_, x)) return 0.0;
    return eval_unmasked(x);
}

Scalar DensityField::majorant(const Vec3& x, Scalar r_max) const {
    switch (kind_) {
    case Kind::Constant:
        return constant_;
    case Kind::GaussianSum: {
        // each term bounded at its closest approach to the ball
        Scalar sum = 0.0;
        for (const auto& t : terms_) {
            const Scalar gap = std::max(0.0, (x - t.center).norm() - r_max);
            sum += t.amplitude * std::exp(-(gap * gap) / (t.width * t.width));
        }
        return sum;
    }
    case Kind::Grid:
        return grid_max_; // interpolation cannot exceed the node maximum
    }
    return 0.0;
}

namespace {

// jittered grid over the unit cube mapped to the integration domain
template <class MapFn, class EvalFn>
QuadratureResult stratified_quadrature(int n_samples, std::uint64_t seed, Scalar volume,
                                       MapFn&& map, EvalFn&& f) {
    const int m = std::max(1, static_cast<int>(std::lround(std::cbrt(static_cast<double>(n_samples)))));
    const Scalar inv_m = 1.0 / m;
    Pcg32 rng(splitmix64(seed), splitmix64(seed ^ 0xba11ULL));

    long long n = 0;
    Scalar mean = 0.0, m2 = 0.0;
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c) {
                const Scalar u1 = (a + rng.uniform()) * inv_m;
                const Scalar u2 = (b + rng.uniform()) * inv_m;
                const Scalar u3 = (c + rng.uniform()) * inv_m;
                const Scalar v = f(map(u1, u2, u3));
                ++n;
                const Scalar delta = v - mean;
                mean += delta / static_cast<Scalar>(n);
                m2 += delta * (v - mean);
            }

    QuadratureResult out;
    out.value = mean * volume;
    if (n > 1) {
        const Scalar var_mean = m2 / (static_cast<Scalar>(n) * static_cast<Scalar>(n - 1));
        out.std_error = std::sqrt(std::max(0.0, var_mean)) * volume;
    }
    return out;
}

} // namespace

QuadratureResult ball_integral(const DensityField& field, const Vec3& x, Scalar r,
                               int n_samples, std::uint64_t seed) {
    if (!(r >= 0.0)) throw std::invalid_argument("ball_integral: r must be >= 0");
    if (r == 0.0) return {};
    const Scalar volume = (4.0 / 3.0) * kPi * r * r * r;
    auto map = [&](Scalar u1, Scalar u2, Scalar u3) {
        const Scalar rho = r * std::cbrt(u1);
        const Scalar z = 1.0 - 2.0 * u2;
        const Scalar phi = 2.0 * kPi * u3;
        const Scalar s = std::sqrt(std::max(0.0, 1.0 - z * z));
        return Vec3(x.x() + rho * s * std::cos(phi), x.y() + rho * s * std::sin(phi),
                    x.z() + rho * z);
    };
    return stratified_quadrature(n_samples, seed, volume,
                                 map, [&](const Vec3& p) { return field.eval(p); });
}

QuadratureResult medium_integral(const DensityField& field, int n_samples, std::uint64_t seed) {
    const MediumShape& medium = field.medium();
    const Vec3 lo = medium.aabb_min();
    const Vec3 ext = medium.aabb_max() - lo;
    const Scalar volume = ext.prod();
    auto map = [&](Scalar u1, Scalar u2, Scalar u3) {
        return Vec3(lo.x() + u1 * ext.x(), lo.y() + u2 * ext.y(), lo.z() + u3 * ext.z());
    };
    return stratified_quadrature(n_samples, seed, volume,
                                 map, [&](const Vec3& p) { return field.eval(p); });
}

TrilinearGrid load_vgrid(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_vgrid: cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_vgrid: missing header");
    std::istringstream hdr(line);
    std::string magic;
    TrilinearGrid g;
    hdr >> magic >> g.nx >> g.ny >> g.nz >> g.bmin.x() >> g.bmin.y() >> g.bmin.z() >>
        g.bmax.x() >> g.bmax.y() >> g.bmax.z();
    if (!hdr || magic != "VGRID") throw std::runtime_error("load_vgrid: bad header in " + path);
    if (g.nx < 2 || g.ny < 2 || g.nz < 2)
        throw std::runtime_error("load_vgrid: grid needs at least 2 nodes per axis");

    const std::size_t count = static_cast<std::size_t>(g.nx) * g.ny * g.nz;
    std::vector<unsigned char> raw(count * 4);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
        throw std::runtime_error("load_vgrid: truncated data in " + path);

    g.values.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint32_t bits = static_cast<std::uint32_t>(raw[4 * i]) |
                                   (static_cast<std::uint32_t>(raw[4 * i + 1]) << 8) |
                                   (static_cast<std::uint32_t>(raw[4 * i + 2]) << 16) |
                                   (static_cast<std::uint32_t>(raw[4 * i + 3]) << 24);
        float v;
        std::memcpy(&v, &bits, 4);
        g.values[i] = std::max(v, 0.0f);
    }
    return g;
}

void save_vgrid(const std::string& path, const TrilinearGrid& grid) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_vgrid: cannot open " + path);

    char header[256];
    std::snprintf(header, sizeof(header), "VGRID %d %d %d %.17g %.17g %.17g %.17g %.17g %.17g\n",
                  grid.nx, grid.ny, grid.nz, grid.bmin.x(), grid.bmin.y(), grid.bmin.z(),
                  grid.bmax.x(), grid.bmax.y(), grid.bmax.z());
    out << header;

    for (float v : grid.values) {
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
    if (!out) throw std::runtime_error("save_vgrid: write failed for " + path);
}

} // namespace vwos

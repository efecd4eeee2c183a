#include "vwos/stats.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vwos {

namespace {

Scalar ks_coefficient(Scalar alpha) {
    if (alpha == 0.01) return 1.628;
    if (alpha == 0.05) return 1.358;
    if (alpha == 0.10) return 1.224;
    // generic asymptotic inverse
    return std::sqrt(-0.5 * std::log(alpha / 2.0));
}

} // namespace

KsResult ks_statistic(std::span<const Scalar> sorted_samples,
                      const std::function<Scalar(Scalar)>& cdf, Scalar alpha) {
    const std::size_t n = sorted_samples.size();
    if (n < 100) throw std::invalid_argument("ks_statistic: need at least 100 samples");
    for (std::size_t i = 1; i < n; ++i)
        if (sorted_samples[i] < sorted_samples[i - 1])
            throw std::invalid_argument("ks_statistic: samples must be sorted");

    Scalar d = 0.0;
    const Scalar inv_n = 1.0 / static_cast<Scalar>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Scalar f = cdf(sorted_samples[i]);
        d = std::max(d, (static_cast<Scalar>(i) + 1.0) * inv_n - f);
        d = std::max(d, f - static_cast<Scalar>(i) * inv_n);
    }

    KsResult out;
    out.statistic = d;
    out.threshold = ks_coefficient(alpha) / std::sqrt(static_cast<Scalar>(n));
    out.pass = d < out.threshold;
    return out;
}

Scalar ks_two_sample_statistic(std::span<const Scalar> a, std::span<const Scalar> b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("ks_two_sample_statistic: empty sample set");
    for (std::size_t i = 1; i < a.size(); ++i)
        if (a[i] < a[i - 1]) throw std::invalid_argument("ks_two_sample_statistic: a not sorted");
    for (std::size_t i = 1; i < b.size(); ++i)
        if (b[i] < b[i - 1]) throw std::invalid_argument("ks_two_sample_statistic: b not sorted");

    Scalar d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const Scalar v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i; // step over ties on both sides
        while (j < b.size() && b[j] == v) ++j;
        const Scalar fa = static_cast<Scalar>(i) / a.size();
        const Scalar fb = static_cast<Scalar>(j) / b.size();
        d = std::max(d, std::abs(fa - fb));
    }
    return d;
}

Scalar octant_chi_square(std::span<const Vec3> directions) {
    long long counts[8] = {};
    for (const Vec3& w : directions) {
        const int bin = (w.x() >= 0 ? 1 : 0) | (w.y() >= 0 ? 2 : 0) | (w.z() >= 0 ? 4 : 0);
        ++counts[bin];
    }
    const Scalar expected = static_cast<Scalar>(directions.size()) / 8.0;
    Scalar chi2 = 0.0;
    for (long long c : counts) {
        const Scalar d = static_cast<Scalar>(c) - expected;
        chi2 += d * d / expected;
    }
    return chi2;
}

Scalar median(std::vector<Scalar> values) {
    if (values.empty()) throw std::invalid_argument("median: empty input");
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    Scalar hi = values[mid];
    if (values.size() % 2 == 1) return hi;
    std::nth_element(values.begin(), values.begin() + mid - 1, values.begin() + mid);
    return 0.5 * (values[mid - 1] + hi);
}

} // namespace vwos

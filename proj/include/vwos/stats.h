#pragma once

#include "vwos/core.h"

#include <functional>
#include <span>
#include <vector>

namespace vwos {

struct KsResult {
    Scalar statistic = 0.0;
    Scalar threshold = 0.0;
    bool pass = false;
};

// One-sample Kolmogorov-Smirnov test of sorted samples against a CDF.
// Asymptotic threshold c(alpha)/sqrt(n) with c(0.01) = 1.628.
KsResult ks_statistic(std::span<const Scalar> sorted_samples,
                      const std::function<Scalar(Scalar)>& cdf, Scalar alpha = 0.01);

// Two-sample KS distance between sorted sample sets.
Scalar ks_two_sample_statistic(std::span<const Scalar> a_sorted, std::span<const Scalar> b_sorted);

// Chi-square statistic of direction counts over the eight octants.
Scalar octant_chi_square(std::span<const Vec3> directions);

// 99th-percentile chi-square critical value for 7 degrees of freedom.
inline constexpr Scalar kOctantChiSquare99 = 18.475;

Scalar median(std::vector<Scalar> values);

} // namespace vwos

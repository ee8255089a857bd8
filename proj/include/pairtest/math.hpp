#pragma once

#include <span>

namespace pairtest {

// Standard normal distribution helpers.
double normal_cdf(double x);
double normal_sf(double x);  // upper tail, 1 - cdf
// Inverse CDF for u in (0,1). Accurate to ~1 ulp after refinement.
double normal_quantile(double u);
// Two-sided tail probability P(|Z| >= |z|) for Z ~ N(0,1).
double two_sided_p(double z);

// Mean and unbiased (n-1) sample variance. Both accumulate over a sorted
// copy of the input so the result does not depend on element order.
// mean() requires a non-empty range; sample_variance() returns 0 for n < 2.
double mean(std::span<const double> xs);
double sample_variance(std::span<const double> xs);

}  // namespace pairtest

#pragma once

namespace bearing {

/// Standard normal CDF.
double normal_cdf(double z);

/// Standard normal quantile (inverse CDF), refined to machine precision.
/// p must be in (0, 1).
double normal_quantile(double p);

} // namespace bearing

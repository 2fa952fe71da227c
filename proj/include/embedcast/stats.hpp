#pragma once

#include <optional>
#include <span>
#include <vector>

namespace embedcast {

double mean(std::span<const double> x);

/// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
double sample_sd(std::span<const double> x);

/// Pearson correlation; nullopt when either side has zero variance or the
/// lengths differ. The result is clamped to [-1, 1].
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

/// Type-7 (linear interpolation) sample quantile, p in [0, 1].
double quantile(std::vector<double> x, double p);

} // namespace embedcast

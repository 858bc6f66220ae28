#pragma once

// Serial reference implementations kept for testing and benchmarking. These
// stay deliberately naive and independent of the library kernels they check.

#include <span>

#include "xmorph/gbt.hpp"
#include "xmorph/shap.hpp"

namespace xmorph::reference {

/// Plain O(n^2) SampEn template count, single-threaded.
double sample_entropy_naive(std::span<const double> series, int m, double r_frac,
                            bool* clamped = nullptr);

/// Plain O(n^2) ApEn, single-threaded.
double approximate_entropy_naive(std::span<const double> series, int m, double r_frac);

/// All-pairs minimum distance between tumor-boundary and brain-boundary
/// pixels.
double min_boundary_distance_naive(const BinaryMask& tumor, const BinaryMask& brain);

/// Exact Shapley values over all 2^d coalitions with the cover-proportion
/// conditional expectation used by tree_shap. Requires d <= 12.
Attribution brute_force_shapley(const BoostedEnsemble& model, std::span<const double> x);

} // namespace xmorph::reference

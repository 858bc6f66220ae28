#pragma once

#include <span>

#include "xmorph/contour.hpp"

namespace xmorph {

/// Box-counting dimension of the rasterized closed contour. Box sizes run
/// over powers of two from 2 up to min(W,H)/4 of the raster bounding box
/// (falling back to 8 for degenerate thin rasters); the estimate is the
/// least-squares slope of log N(eps) against log(1/eps). Throws when fewer
/// than 3 scales are usable.
double box_counting_fd(const Contour& contour);

/// Standard ApEn: Phi^m(r) - Phi^{m+1}(r), Chebyshev distance, self-matches
/// included. r is a fraction of the series' population std, resolved at call.
/// A constant series scores 0.
double approximate_entropy(std::span<const double> series, int m = 2, double r_frac = 0.2);

/// SampEn = -ln(A/B) with self-matches excluded, both counts over templates
/// that admit an (m+1)-extension. When A or B is zero the value is clamped to
/// ln of the compared pair count and *clamped is set.
double sample_entropy(std::span<const double> series, int m = 2, double r_frac = 0.2,
                      bool* clamped = nullptr);

/// Ordinal-pattern entropy normalized by log(order!), ties ranked by index.
double permutation_entropy(std::span<const double> series, int order = 3, int delay = 1);

struct LyapunovParams {
    int embed_dim = 3;
    int delay = 1;
    int theiler = 8;
    int max_steps = 12;
    int fit_begin = 1;
    int fit_end = 8;
};

/// Rosenstein estimator of the largest Lyapunov exponent: per-point nearest
/// neighbor outside the Theiler window, mean log divergence curve, slope over
/// the fit window. Throws when no valid neighbor pairs exist.
double largest_lyapunov(std::span<const double> series, const LyapunovParams& p = {});

} // namespace xmorph

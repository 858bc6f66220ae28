#pragma once

#include <span>
#include <vector>

#include "xmorph/contour.hpp"

namespace xmorph {

/// Shannon entropy (natural log) of the signal histogram over the circular
/// window centered at each point, with `bins` equal-width bins spanning that
/// window's min-max. A window with zero range scores 0.
std::vector<double> local_entropy(std::span<const double> signal, int window = 15,
                                  int bins = 8);

/// w_i = (0.1 + lambda * E_hat_i) / mean_j(0.1 + lambda * E_hat_j), where
/// E_hat is the min-max rescale of the entropies (all zero when the entropy
/// is constant). Weights average to 1 by construction.
std::vector<double> information_weights(std::span<const double> entropy, double lambda);

/// S_iw_i = S_i * w_i / mean_j(S_j * w_j); mean 1 by construction.
std::vector<double> weighted_signal(std::span<const double> signal,
                                    std::span<const double> weights);

struct IwbnIndices {
    double mean_local_entropy = 0; // average of E_i
    double weight_range = 0;       // max(w) - min(w)
    double enhancement_factor = 1; // sigma(S_iw) / sigma(S_std); 1 on constant input
};

IwbnIndices iwbn_indices(std::span<const double> entropy, std::span<const double> weights,
                         std::span<const double> s_std, std::span<const double> s_iw);

struct IwbnProfile {
    std::vector<double> local_entropy;
    std::vector<double> weights;
    std::vector<double> weighted; // S_iw
    IwbnIndices indices;
    double lambda = 0;
};

IwbnProfile compute_iwbn(const RadialSignal& signal, double lambda, int window = 15,
                         int bins = 8);

} // namespace xmorph

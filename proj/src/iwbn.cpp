#include "xmorph/iwbn.hpp"

#include <algorithm>
#include <cmath>

#include "xmorph/error.hpp"

namespace xmorph {

std::vector<double> local_entropy(std::span<const double> signal, int window, int bins) {
    const int n = static_cast<int>(signal.size());
    if (window < 3 || window % 2 == 0)
        throw PreconditionError("local_entropy: window must be odd and >= 3");
    if (window > n / 2) throw PreconditionError("local_entropy: window must be <= N/2");
    if (bins < 2) throw PreconditionError("local_entropy: bins must be >= 2");

    const int half = window / 2;
    std::vector<double> entropy(n, 0.0);
    std::vector<int> hist(bins);
    std::vector<double> win(window);

    for (int i = 0; i < n; ++i) {
        for (int k = -half; k <= half; ++k)
            win[k + half] = signal[((i + k) % n + n) % n];
        const auto [lo_it, hi_it] = std::minmax_element(win.begin(), win.end());
        const double lo = *lo_it, range = *hi_it - *lo_it;
        if (range <= 0) continue; // flat window scores 0

        std::fill(hist.begin(), hist.end(), 0);
        for (double v : win) {
            int b = static_cast<int>((v - lo) / range * bins);
            if (b >= bins) b = bins - 1;
            ++hist[b];
        }
        double e = 0;
        for (int c : hist)
            if (c > 0) {
                const double p = static_cast<double>(c) / window;
                e -= p * std::log(p);
            }
        entropy[i] = e;
    }
    return entropy;
}

std::vector<double> information_weights(std::span<const double> entropy, double lambda) {
    if (lambda < 0) throw PreconditionError("information_weights: lambda must be >= 0");
    const std::size_t n = entropy.size();
    if (n == 0) throw PreconditionError("information_weights: empty entropy");

    const auto [lo_it, hi_it] = std::minmax_element(entropy.begin(), entropy.end());
    const double lo = *lo_it, range = *hi_it - *lo_it;

    // degenerate entropy or lambda = 0 makes every numerator equal, so the
    // normalized weights are exactly 1
    if (range <= 0 || lambda == 0) return std::vector<double>(n, 1.0);

    std::vector<double> w(n);
    double sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = 0.1 + lambda * (entropy[i] - lo) / range;
        sum += w[i];
    }
    const double mean = sum / n;
    for (auto& v : w) v /= mean;
    return w;
}

std::vector<double> weighted_signal(std::span<const double> signal,
                                    std::span<const double> weights) {
    if (signal.size() != weights.size())
        throw PreconditionError("weighted_signal: length mismatch");
    const std::size_t n = signal.size();
    // unit weights reduce the normalization to the identity (the signal is
    // mean-1 by construction), so return it unchanged
    if (std::all_of(weights.begin(), weights.end(), [](double w) { return w == 1.0; }))
        return {signal.begin(), signal.end()};
    std::vector<double> out(n);
    double sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = signal[i] * weights[i];
        sum += out[i];
    }
    const double mean = sum / n;
    if (mean <= 0) throw PreconditionError("weighted_signal: non-positive product mean");
    for (auto& v : out) v /= mean;
    return out;
}

namespace {

double pop_std(std::span<const double> v) {
    double mean = 0;
    for (double x : v) mean += x;
    mean /= v.size();
    double var = 0;
    for (double x : v) var += (x - mean) * (x - mean);
    return std::sqrt(var / v.size());
}

} // namespace

IwbnIndices iwbn_indices(std::span<const double> entropy, std::span<const double> weights,
                         std::span<const double> s_std, std::span<const double> s_iw) {
    if (entropy.size() != weights.size() || s_std.size() != s_iw.size() ||
        entropy.size() != s_std.size())
        throw PreconditionError("iwbn_indices: length mismatch");

    IwbnIndices idx;
    double esum = 0;
    for (double e : entropy) esum += e;
    idx.mean_local_entropy = esum / entropy.size();

    const auto [wlo, whi] = std::minmax_element(weights.begin(), weights.end());
    idx.weight_range = *whi - *wlo;

    const double sigma_std = pop_std(s_std);
    idx.enhancement_factor = sigma_std > 0 ? pop_std(s_iw) / sigma_std : 1.0;
    return idx;
}

IwbnProfile compute_iwbn(const RadialSignal& signal, double lambda, int window, int bins) {
    IwbnProfile p;
    p.lambda = lambda;
    p.local_entropy = local_entropy(signal.values, window, bins);
    p.weights = information_weights(p.local_entropy, lambda);
    p.weighted = weighted_signal(signal.values, p.weights);
    p.indices = iwbn_indices(p.local_entropy, p.weights, signal.values, p.weighted);
    return p;
}

} // namespace xmorph

#include "reference.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "xmorph/error.hpp"
#include "xmorph/morphology.hpp"

namespace xmorph::reference {

namespace {

double pop_std(std::span<const double> v) {
    double mean = 0;
    for (double x : v) mean += x;
    mean /= v.size();
    double var = 0;
    for (double x : v) var += (x - mean) * (x - mean);
    return std::sqrt(var / v.size());
}

bool cheb_match(std::span<const double> s, int i, int j, int m, double r) {
    for (int k = 0; k < m; ++k)
        if (std::abs(s[i + k] - s[j + k]) > r) return false;
    return true;
}

} // namespace

double sample_entropy_naive(std::span<const double> series, int m, double r_frac,
                            bool* clamped) {
    const int n = static_cast<int>(series.size());
    if (clamped) *clamped = false;
    const double r = r_frac * pop_std(series);
    const int nt = n - m;
    long long a = 0, b = 0;
    for (int i = 0; i < nt - 1; ++i)
        for (int j = i + 1; j < nt; ++j) {
            if (!cheb_match(series, i, j, m, r)) continue;
            ++b;
            if (std::abs(series[i + m] - series[j + m]) <= r) ++a;
        }
    if (a == 0 || b == 0) {
        if (clamped) *clamped = true;
        return std::log(static_cast<double>(static_cast<long long>(nt) * (nt - 1) / 2));
    }
    return -std::log(static_cast<double>(a) / static_cast<double>(b));
}

double approximate_entropy_naive(std::span<const double> series, int m, double r_frac) {
    const int n = static_cast<int>(series.size());
    const double r = r_frac * pop_std(series);
    auto phi = [&](int mm) {
        const int nt = n - mm + 1;
        double sum = 0;
        for (int i = 0; i < nt; ++i) {
            long long count = 0;
            for (int j = 0; j < nt; ++j) count += cheb_match(series, i, j, mm, r);
            sum += std::log(static_cast<double>(count) / nt);
        }
        return sum / nt;
    };
    return phi(m) - phi(m + 1);
}

double min_boundary_distance_naive(const BinaryMask& tumor, const BinaryMask& brain) {
    const auto tb = boundary_pixels4(tumor);
    const auto bb = boundary_pixels4(brain);
    if (tb.empty() || bb.empty())
        throw PreconditionError("min_boundary_distance_naive: empty boundary");
    double best = 1e300;
    for (const auto& p : tb)
        for (const auto& q : bb) {
            const double dx = p.x - q.x, dy = p.y - q.y;
            best = std::min(best, dx * dx + dy * dy);
        }
    return std::sqrt(best);
}

namespace {

// E[tree(x) | x_S] with absent features marginalized by cover proportions
double expvalue(const RegTree& tree, std::span<const double> x,
                const std::vector<bool>& in_coalition, int node) {
    const TreeNode& nd = tree.nodes[node];
    if (nd.is_leaf()) return nd.leaf_value;
    if (in_coalition[nd.feature]) {
        const int next = x[nd.feature] < nd.threshold ? nd.left : nd.right;
        return expvalue(tree, x, in_coalition, next);
    }
    const double wl = tree.nodes[nd.left].cover / nd.cover;
    const double wr = tree.nodes[nd.right].cover / nd.cover;
    return wl * expvalue(tree, x, in_coalition, nd.left) +
           wr * expvalue(tree, x, in_coalition, nd.right);
}

} // namespace

Attribution brute_force_shapley(const BoostedEnsemble& model, std::span<const double> x) {
    const int d = static_cast<int>(model.n_features());
    if (d > 12) throw PreconditionError("brute_force_shapley: feature count > 12");
    const std::size_t C = model.n_classes();

    std::vector<double> factorial(d + 1, 1.0);
    for (int i = 1; i <= d; ++i) factorial[i] = factorial[i - 1] * i;

    Attribution attr;
    attr.phi0 = model.base_score;
    attr.phi.assign(d, std::vector<double>(C, 0.0));

    const double eta = model.params.learning_rate;
    std::vector<bool> coalition(d, false);
    for (std::size_t t = 0; t < model.trees.size(); ++t) {
        const std::size_t c = t % C;
        const RegTree& tree = model.trees[t];
        attr.phi0[c] += eta * tree.expected_value();

        // v(S) for every coalition, indexed by bitmask
        const int n_sets = 1 << d;
        std::vector<double> v(n_sets);
        for (int mask = 0; mask < n_sets; ++mask) {
            for (int f = 0; f < d; ++f) coalition[f] = (mask >> f) & 1;
            v[mask] = expvalue(tree, x, coalition, 0);
        }

        for (int f = 0; f < d; ++f) {
            double phi = 0;
            for (int mask = 0; mask < n_sets; ++mask) {
                if ((mask >> f) & 1) continue;
                const int s = __builtin_popcount(static_cast<unsigned>(mask));
                const double weight =
                    factorial[s] * factorial[d - s - 1] / factorial[d];
                phi += weight * (v[mask | (1 << f)] - v[mask]);
            }
            attr.phi[f][c] += eta * phi;
        }
    }

    const auto probs = model.predict_proba(x);
    attr.predicted_class =
        static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
    attr.confidence = probs[attr.predicted_class];
    return attr;
}

} // namespace xmorph::reference

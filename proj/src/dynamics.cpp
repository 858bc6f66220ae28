#include "xmorph/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <unordered_set>
#include <vector>

#include "xmorph/error.hpp"

namespace xmorph {

namespace {

double pop_std(std::span<const double> v) {
    double mean = 0;
    for (double x : v) mean += x;
    mean /= v.size();
    double var = 0;
    for (double x : v) var += (x - mean) * (x - mean);
    return std::sqrt(var / v.size());
}

void bresenham(int x0, int y0, int x1, int y1, std::vector<std::uint64_t>& out, int width) {
    int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    for (;;) {
        out.push_back(static_cast<std::uint64_t>(y0) * width + x0);
        if (x0 == x1 && y0 == y1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

} // namespace

double box_counting_fd(const Contour& contour) {
    const auto& pts = contour.points;
    if (pts.size() < 8) throw PreconditionError("box_counting_fd: need >= 8 points");

    std::vector<int> xs(pts.size()), ys(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        xs[i] = static_cast<int>(std::lround(pts[i].x));
        ys[i] = static_cast<int>(std::lround(pts[i].y));
    }
    const auto [xlo, xhi] = std::minmax_element(xs.begin(), xs.end());
    const auto [ylo, yhi] = std::minmax_element(ys.begin(), ys.end());
    const int W = *xhi - *xlo + 1;
    const int H = *yhi - *ylo + 1;

    std::vector<std::uint64_t> occupied;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const std::size_t j = (i + 1) % pts.size();
        bresenham(xs[i] - *xlo, ys[i] - *ylo, xs[j] - *xlo, ys[j] - *ylo, occupied, W);
    }
    std::sort(occupied.begin(), occupied.end());
    occupied.erase(std::unique(occupied.begin(), occupied.end()), occupied.end());

    // Thin rasters keep at least the {2,4,8} ladder; see README for the rule.
    const int cap = std::max(std::min(W, H) / 4, 8);
    std::vector<double> log_inv_eps, log_count;
    for (int eps = 2; eps <= cap; eps *= 2) {
        std::unordered_set<std::uint64_t> boxes;
        for (std::uint64_t cell : occupied) {
            const std::uint64_t bx = (cell % W) / eps;
            const std::uint64_t by = (cell / W) / eps;
            boxes.insert(by * ((W / eps) + 1) + bx);
        }
        log_inv_eps.push_back(std::log(1.0 / eps));
        log_count.push_back(std::log(static_cast<double>(boxes.size())));
    }
    if (log_inv_eps.size() < 3)
        throw PreconditionError("box_counting_fd: fewer than 3 usable scales");

    const std::size_t n = log_inv_eps.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += log_inv_eps[i];
        my += log_count[i];
    }
    mx /= n;
    my /= n;
    double num = 0, den = 0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (log_inv_eps[i] - mx) * (log_count[i] - my);
        den += (log_inv_eps[i] - mx) * (log_inv_eps[i] - mx);
    }
    return num / den;
}

namespace {

// count of j with Chebyshev distance between m-windows at i and j within r;
// includes the self match
long long apen_matches(std::span<const double> s, int n_templates, int m, int i, double r) {
    long long count = 0;
    for (int j = 0; j < n_templates; ++j) {
        bool match = true;
        for (int k = 0; k < m && match; ++k)
            if (std::abs(s[i + k] - s[j + k]) > r) match = false;
        count += match;
    }
    return count;
}

double apen_phi(std::span<const double> s, int m, double r) {
    const int n_templates = static_cast<int>(s.size()) - m + 1;
    std::vector<long long> counts(n_templates);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n_templates; ++i) counts[i] = apen_matches(s, n_templates, m, i, r);
    double phi = 0;
    for (int i = 0; i < n_templates; ++i)
        phi += std::log(static_cast<double>(counts[i]) / n_templates);
    return phi / n_templates;
}

} // namespace

double approximate_entropy(std::span<const double> series, int m, double r_frac) {
    const int n = static_cast<int>(series.size());
    if (m < 1) throw PreconditionError("approximate_entropy: m must be >= 1");
    if (n < 3 * m) throw PreconditionError("approximate_entropy: series too short");
    if (r_frac <= 0) throw PreconditionError("approximate_entropy: r must be > 0");

    const double r = r_frac * pop_std(series);
    return apen_phi(series, m, r) - apen_phi(series, m + 1, r);
}

double sample_entropy(std::span<const double> series, int m, double r_frac, bool* clamped) {
    const int n = static_cast<int>(series.size());
    if (m < 1) throw PreconditionError("sample_entropy: m must be >= 1");
    if (n < 3 * m || n < m + 2) throw PreconditionError("sample_entropy: series too short");
    if (r_frac <= 0) throw PreconditionError("sample_entropy: r must be > 0");
    if (clamped) *clamped = false;

    const double r = r_frac * pop_std(series);
    // templates restricted to those with an (m+1)-length extension
    const int nt = n - m;
    long long a = 0, b = 0;
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : a, b)
    for (int i = 0; i < nt - 1; ++i) {
        for (int j = i + 1; j < nt; ++j) {
            bool match_m = true;
            for (int k = 0; k < m && match_m; ++k)
                if (std::abs(series[i + k] - series[j + k]) > r) match_m = false;
            if (!match_m) continue;
            ++b;
            if (std::abs(series[i + m] - series[j + m]) <= r) ++a;
        }
    }
    const long long pairs = static_cast<long long>(nt) * (nt - 1) / 2;
    if (a == 0 || b == 0) {
        if (clamped) *clamped = true;
        return std::log(static_cast<double>(pairs));
    }
    return -std::log(static_cast<double>(a) / static_cast<double>(b));
}

double permutation_entropy(std::span<const double> series, int order, int delay) {
    const int n = static_cast<int>(series.size());
    if (order < 2 || order > 8) throw PreconditionError("permutation_entropy: order in [2,8]");
    if (delay < 1) throw PreconditionError("permutation_entropy: delay must be >= 1");
    if (n < order * delay + 1)
        throw PreconditionError("permutation_entropy: series too short");

    int n_patterns = 1;
    for (int k = 2; k <= order; ++k) n_patterns *= k;
    std::vector<long long> counts(n_patterns, 0);

    const int windows = n - (order - 1) * delay;
    std::vector<int> rank(order);
    for (int i = 0; i < windows; ++i) {
        std::iota(rank.begin(), rank.end(), 0);
        // stable: equal values rank by index order
        std::stable_sort(rank.begin(), rank.end(), [&](int p, int q) {
            return series[i + p * delay] < series[i + q * delay];
        });
        // Lehmer code of the rank permutation
        int code = 0;
        for (int p = 0; p < order; ++p) {
            int smaller = 0;
            for (int q = p + 1; q < order; ++q)
                if (rank[q] < rank[p]) ++smaller;
            code = code * (order - p) + smaller;
        }
        ++counts[code];
    }

    double h = 0;
    for (long long c : counts)
        if (c > 0) {
            const double p = static_cast<double>(c) / windows;
            h -= p * std::log(p);
        }
    return h / std::log(static_cast<double>(n_patterns));
}

double largest_lyapunov(std::span<const double> series, const LyapunovParams& p) {
    const int n = static_cast<int>(series.size());
    if (n < 64) throw PreconditionError("largest_lyapunov: need >= 64 samples");
    const int m = p.embed_dim, tau = p.delay;
    const int M = n - (m - 1) * tau;
    if (M < 2 * p.theiler + 4) throw PreconditionError("largest_lyapunov: series too short");

    auto dist = [&](int i, int j) {
        double d2 = 0;
        for (int k = 0; k < m; ++k) {
            const double d = series[i + k * tau] - series[j + k * tau];
            d2 += d * d;
        }
        return std::sqrt(d2);
    };

    std::vector<int> neighbor(M, -1);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < M; ++i) {
        double best = 0;
        int best_j = -1;
        for (int j = 0; j < M; ++j) {
            if (std::abs(i - j) <= p.theiler) continue;
            const double d = dist(i, j);
            if (d > 0 && (best_j < 0 || d < best)) {
                best = d;
                best_j = j;
            }
        }
        neighbor[i] = best_j;
    }

    std::vector<double> mean_log(p.max_steps + 1, 0.0);
    std::vector<int> valid(p.max_steps + 1, 0);
    for (int k = 0; k <= p.max_steps; ++k) {
        double sum = 0;
        int cnt = 0;
        for (int i = 0; i < M; ++i) {
            const int j = neighbor[i];
            if (j < 0 || i + k >= M || j + k >= M) continue;
            const double d = dist(i + k, j + k);
            if (d > 0) {
                sum += std::log(d);
                ++cnt;
            }
        }
        mean_log[k] = cnt > 0 ? sum / cnt : 0.0;
        valid[k] = cnt;
    }

    int hi = std::min(p.fit_end, p.max_steps);
    while (hi > p.fit_begin && valid[hi] == 0) --hi;
    if (valid[p.fit_begin] == 0 || hi - p.fit_begin < 1)
        throw PreconditionError("largest_lyapunov: no valid neighbor pairs");

    double mx = 0, my = 0;
    const int cnt = hi - p.fit_begin + 1;
    for (int k = p.fit_begin; k <= hi; ++k) {
        mx += k;
        my += mean_log[k];
    }
    mx /= cnt;
    my /= cnt;
    double num = 0, den = 0;
    for (int k = p.fit_begin; k <= hi; ++k) {
        num += (k - mx) * (mean_log[k] - my);
        den += (k - mx) * (k - mx);
    }
    return num / den;
}

} // namespace xmorph

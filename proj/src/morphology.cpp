#include "xmorph/morphology.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "xmorph/error.hpp"

namespace xmorph {

Bbox bounding_box(const BinaryMask& mask) {
    Bbox b{mask.width, mask.height, -1, -1};
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask.at(x, y)) {
                b.min_x = std::min(b.min_x, x);
                b.min_y = std::min(b.min_y, y);
                b.max_x = std::max(b.max_x, x);
                b.max_y = std::max(b.max_y, y);
            }
    return b;
}

std::vector<int> label_components8(const BinaryMask& mask, int& n_labels) {
    const int W = mask.width, H = mask.height;
    std::vector<int> labels(static_cast<std::size_t>(W) * H, 0);
    std::vector<int> stack;
    n_labels = 0;
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            const std::size_t idx = static_cast<std::size_t>(y) * W + x;
            if (!mask.bits[idx] || labels[idx]) continue;
            const int lab = ++n_labels;
            labels[idx] = lab;
            stack.assign(1, static_cast<int>(idx));
            while (!stack.empty()) {
                const int cur = stack.back();
                stack.pop_back();
                const int cy = cur / W, cx = cur % W;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (!dx && !dy) continue;
                        const int nx = cx + dx, ny = cy + dy;
                        if (nx < 0 || nx >= W || ny < 0 || ny >= H) continue;
                        const std::size_t nidx = static_cast<std::size_t>(ny) * W + nx;
                        if (mask.bits[nidx] && !labels[nidx]) {
                            labels[nidx] = lab;
                            stack.push_back(static_cast<int>(nidx));
                        }
                    }
            }
        }
    }
    return labels;
}

BinaryMask largest_component8(const BinaryMask& mask) {
    int n = 0;
    const auto labels = label_components8(mask, n);
    if (n == 0) throw NoTumorError("mask has no foreground pixels");
    // Labels are assigned in row-major seed order, so the first label with the
    // maximal count is also the tie winner (smallest topmost-then-leftmost
    // pixel in row-major order).
    std::vector<std::size_t> counts(static_cast<std::size_t>(n) + 1, 0);
    for (int lab : labels)
        if (lab) ++counts[static_cast<std::size_t>(lab)];
    int best = 1;
    for (int lab = 2; lab <= n; ++lab)
        if (counts[static_cast<std::size_t>(lab)] > counts[static_cast<std::size_t>(best)])
            best = lab;
    BinaryMask out = BinaryMask::create(mask.width, mask.height);
    for (std::size_t i = 0; i < labels.size(); ++i) out.bits[i] = labels[i] == best;
    return out;
}

BinaryMask erode3x3(const BinaryMask& mask) {
    const int W = mask.width, H = mask.height;
    BinaryMask out = BinaryMask::create(W, H);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            if (!mask.at(x, y)) continue;
            bool keep = true;
            for (int dy = -1; dy <= 1 && keep; ++dy)
                for (int dx = -1; dx <= 1 && keep; ++dx) {
                    const int nx = x + dx, ny = y + dy;
                    if (nx < 0 || nx >= W || ny < 0 || ny >= H || !mask.at(nx, ny))
                        keep = false;
                }
            if (keep) out.set(x, y, true);
        }
    return out;
}

BinaryMask fill_holes(const BinaryMask& mask) {
    const int W = mask.width, H = mask.height;
    std::vector<std::uint8_t> outside(static_cast<std::size_t>(W) * H, 0);
    std::vector<int> stack;
    auto push = [&](int x, int y) {
        const std::size_t idx = static_cast<std::size_t>(y) * W + x;
        if (!mask.bits[idx] && !outside[idx]) {
            outside[idx] = 1;
            stack.push_back(static_cast<int>(idx));
        }
    };
    for (int x = 0; x < W; ++x) {
        push(x, 0);
        push(x, H - 1);
    }
    for (int y = 0; y < H; ++y) {
        push(0, y);
        push(W - 1, y);
    }
    while (!stack.empty()) {
        const int cur = stack.back();
        stack.pop_back();
        const int cy = cur / W, cx = cur % W;
        if (cx > 0) push(cx - 1, cy);
        if (cx < W - 1) push(cx + 1, cy);
        if (cy > 0) push(cx, cy - 1);
        if (cy < H - 1) push(cx, cy + 1);
    }
    BinaryMask out = BinaryMask::create(W, H);
    for (std::size_t i = 0; i < out.bits.size(); ++i)
        out.bits[i] = mask.bits[i] || !outside[i];
    return out;
}

BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b) {
    if (!a.same_shape(b)) throw PreconditionError("mask_union: shape mismatch");
    BinaryMask out = a;
    for (std::size_t i = 0; i < out.bits.size(); ++i) out.bits[i] = a.bits[i] || b.bits[i];
    return out;
}

BinaryMask mask_minus(const BinaryMask& a, const BinaryMask& b) {
    if (!a.same_shape(b)) throw PreconditionError("mask_minus: shape mismatch");
    BinaryMask out = a;
    for (std::size_t i = 0; i < out.bits.size(); ++i) out.bits[i] = a.bits[i] && !b.bits[i];
    return out;
}

int otsu_threshold(const GrayImage& img) {
    std::array<long long, 256> hist{};
    for (auto p : img.pixels) ++hist[p];
    const long long total = static_cast<long long>(img.pixels.size());

    long long sum_all = 0;
    for (int v = 0; v < 256; ++v) sum_all += static_cast<long long>(v) * hist[v];

    long long w0 = 0, sum0 = 0;
    double best_var = -1.0;
    int best_t = -1;
    for (int t = 0; t < 255; ++t) {
        w0 += hist[t];
        if (w0 == 0) continue;
        const long long w1 = total - w0;
        if (w1 == 0) break;
        sum0 += static_cast<long long>(t) * hist[t];
        const double mu0 = static_cast<double>(sum0) / w0;
        const double mu1 = static_cast<double>(sum_all - sum0) / w1;
        const double between = static_cast<double>(w0) * w1 * (mu0 - mu1) * (mu0 - mu1);
        if (between > best_var) {
            best_var = between;
            best_t = t;
        }
    }
    return best_var > 0.0 ? best_t : -1;
}

std::vector<PixelCoord> boundary_pixels4(const BinaryMask& mask) {
    std::vector<PixelCoord> out;
    const int W = mask.width, H = mask.height;
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            if (!mask.at(x, y)) continue;
            const bool edge = x == 0 || x == W - 1 || y == 0 || y == H - 1 ||
                              !mask.at(x - 1, y) || !mask.at(x + 1, y) ||
                              !mask.at(x, y - 1) || !mask.at(x, y + 1);
            if (edge) out.push_back({x, y});
        }
    return out;
}

namespace {

// Values above any reachable squared distance stand in for +infinity; keeping
// them finite sidesteps inf-inf in the envelope intersections.
constexpr double kEdtFar = 1e12;

// 1-D lower envelope of parabolas (Felzenszwalb & Huttenlocher).
void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
            std::vector<double>& z) {
    const int n = static_cast<int>(f.size());
    int k = 0;
    v[0] = 0;
    z[0] = -std::numeric_limits<double>::infinity();
    z[1] = std::numeric_limits<double>::infinity();
    for (int q = 1; q < n; ++q) {
        double s = ((f[q] + q * (double)q) - (f[v[k]] + v[k] * (double)v[k])) /
                   (2.0 * q - 2.0 * v[k]);
        while (s <= z[k]) {
            --k;
            s = ((f[q] + q * (double)q) - (f[v[k]] + v[k] * (double)v[k])) /
                (2.0 * q - 2.0 * v[k]);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = std::numeric_limits<double>::infinity();
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        d[q] = (q - v[k]) * (double)(q - v[k]) + f[v[k]];
    }
}

} // namespace

std::vector<double> edt_squared(int width, int height, const std::vector<PixelCoord>& sites) {
    std::vector<double> grid(static_cast<std::size_t>(width) * height, kEdtFar);
    for (const auto& s : sites) grid[static_cast<std::size_t>(s.y) * width + s.x] = 0.0;

    std::vector<double> col(height), dcol(height);
    std::vector<int> v(std::max(width, height) + 1);
    std::vector<double> z(std::max(width, height) + 2);
    for (int x = 0; x < width; ++x) {
        for (int y = 0; y < height; ++y) col[y] = grid[static_cast<std::size_t>(y) * width + x];
        edt_1d(col, dcol, v, z);
        for (int y = 0; y < height; ++y) grid[static_cast<std::size_t>(y) * width + x] = dcol[y];
    }
    std::vector<double> row(width), drow(width);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) row[x] = grid[static_cast<std::size_t>(y) * width + x];
        edt_1d(row, drow, v, z);
        for (int x = 0; x < width; ++x) grid[static_cast<std::size_t>(y) * width + x] = drow[x];
    }
    return grid;
}

} // namespace xmorph

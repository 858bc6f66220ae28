#include "xmorph/contour.hpp"

#include <algorithm>
#include <cmath>

#include "xmorph/error.hpp"
#include "xmorph/morphology.hpp"

namespace xmorph {

double signed_area(const Contour& c) {
    const auto& p = c.points;
    double a = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto& u = p[i];
        const auto& v = p[(i + 1) % p.size()];
        a += u.x * v.y - v.x * u.y;
    }
    return a / 2.0;
}

double perimeter(const Contour& c) {
    const auto& p = c.points;
    double len = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto& u = p[i];
        const auto& v = p[(i + 1) % p.size()];
        len += std::hypot(v.x - u.x, v.y - u.y);
    }
    return len;
}

Point mask_centroid(const BinaryMask& mask) {
    long long sx = 0, sy = 0, n = 0;
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask.at(x, y)) {
                sx += x;
                sy += y;
                ++n;
            }
    if (n == 0) throw NoTumorError("centroid of empty mask");
    return {static_cast<double>(sx) / n, static_cast<double>(sy) / n};
}

namespace {

// Moore neighborhood in clockwise screen order starting north.
constexpr int kDx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
constexpr int kDy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};

int direction_index(int dx, int dy) {
    for (int i = 0; i < 8; ++i)
        if (kDx[i] == dx && kDy[i] == dy) return i;
    throw PreconditionError("not a neighbor offset");
}

} // namespace

Contour extract_largest_contour(const BinaryMask& mask) {
    const BinaryMask comp = largest_component8(mask);
    const std::size_t n_pixels = comp.count();
    if (n_pixels < 3)
        throw DegenerateContourError("largest component has only " +
                                     std::to_string(n_pixels) + " pixels");

    // topmost-then-leftmost pixel; its north and west neighbors are background
    int sx = -1, sy = -1;
    for (int y = 0; y < comp.height && sx < 0; ++y)
        for (int x = 0; x < comp.width; ++x)
            if (comp.at(x, y)) {
                sx = x;
                sy = y;
                break;
            }

    auto fg = [&](int x, int y) { return comp.in_bounds(x, y) && comp.at(x, y); };

    Contour contour;
    contour.points.push_back({static_cast<double>(sx), static_cast<double>(sy)});

    int cx = sx, cy = sy;
    int bx = sx - 1, by = sy; // backtrack starts at the west background pixel
    int first_nx = -2, first_ny = -2;
    bool closed = false;
    const std::size_t hard_cap = comp.bits.size() * 4 + 16;

    while (!closed) {
        const int start = direction_index(bx - cx, by - cy);
        int nx = -1, ny = -1;
        for (int k = 1; k <= 8; ++k) {
            const int dir = (start + k) % 8;
            const int tx = cx + kDx[dir], ty = cy + kDy[dir];
            if (fg(tx, ty)) {
                nx = tx;
                ny = ty;
                break;
            }
            bx = tx; // last background cell examined becomes the new backtrack
            by = ty;
        }
        if (nx < 0) throw DegenerateContourError("isolated pixel during trace");

        if (first_nx == -2) {
            first_nx = nx;
            first_ny = ny;
        } else if (cx == sx && cy == sy && nx == first_nx && ny == first_ny) {
            // re-entered the start with the same exit: loop complete
            contour.points.pop_back();
            closed = true;
            break;
        }
        contour.points.push_back({static_cast<double>(nx), static_cast<double>(ny)});
        cx = nx;
        cy = ny;
        if (contour.points.size() > hard_cap)
            throw DegenerateContourError("contour trace did not close");
    }

    if (contour.points.size() < 3)
        throw DegenerateContourError("traced boundary has fewer than 3 points");

    if (signed_area(contour) < 0) {
        // keep the start point, reverse the rest
        std::reverse(contour.points.begin() + 1, contour.points.end());
    }
    return contour;
}

Contour resample_closed(const Contour& contour, int n) {
    if (n < 8) throw PreconditionError("resample_closed: n must be >= 8");
    const auto& pts = contour.points;
    if (pts.size() < 3) throw PreconditionError("resample_closed: need >= 3 points");

    const std::size_t m = pts.size();
    std::vector<double> cum(m + 1, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const auto& u = pts[i];
        const auto& v = pts[(i + 1) % m];
        cum[i + 1] = cum[i] + std::hypot(v.x - u.x, v.y - u.y);
    }
    const double total = cum[m];
    if (total <= 0) throw PreconditionError("resample_closed: zero perimeter");

    Contour out;
    out.points.resize(n);
    std::size_t seg = 0;
    for (int i = 0; i < n; ++i) {
        const double target = total * i / n;
        while (seg + 1 < m && cum[seg + 1] <= target) ++seg;
        const double seg_len = cum[seg + 1] - cum[seg];
        const double a = seg_len > 0 ? (target - cum[seg]) / seg_len : 0.0;
        const auto& u = pts[seg];
        const auto& v = pts[(seg + 1) % m];
        out.points[i] = {u.x + a * (v.x - u.x), u.y + a * (v.y - u.y)};
    }
    return out;
}

RadialSignal to_radial_signal(const Contour& contour, std::optional<Point> centroid) {
    const auto& pts = contour.points;
    if (pts.size() < 3) throw PreconditionError("to_radial_signal: need >= 3 points");

    Point c;
    if (centroid) {
        c = *centroid;
    } else {
        double sx = 0, sy = 0;
        for (const auto& p : pts) {
            sx += p.x;
            sy += p.y;
        }
        c = {sx / pts.size(), sy / pts.size()};
    }

    RadialSignal sig;
    sig.centroid = c;
    sig.values.resize(pts.size());
    double sum = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        sig.values[i] = std::hypot(pts[i].x - c.x, pts[i].y - c.y);
        sum += sig.values[i];
    }
    const double mean = sum / pts.size();
    if (mean <= 0) throw PreconditionError("to_radial_signal: zero mean radius");
    sig.mean_radius = mean;
    for (auto& v : sig.values) {
        v /= mean;
        if (v <= 0) throw PreconditionError("to_radial_signal: boundary point at centroid");
    }
    return sig;
}

double population_std(const std::vector<double>& v) {
    if (v.empty()) return 0;
    double mean = 0;
    for (double x : v) mean += x;
    mean /= v.size();
    double var = 0;
    for (double x : v) var += (x - mean) * (x - mean);
    return std::sqrt(var / v.size());
}

GeometricFeatures geometric_features(const RadialSignal& signal, const BinaryMask& mask) {
    GeometricFeatures g;
    g.irregularity = population_std(signal.values);
    const auto& s = signal.values;
    double rough = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
        rough += std::abs(s[(i + 1) % s.size()] - s[i]);
    g.roughness = rough;
    g.area = static_cast<double>(mask.count());
    g.mean_radius = signal.mean_radius;
    return g;
}

} // namespace xmorph

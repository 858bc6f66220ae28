#include "xmorph/clinical.hpp"

#include <algorithm>
#include <cmath>

#include "xmorph/error.hpp"

namespace xmorph {

BrainRegion estimate_brain_region(const GrayImage& image, const BinaryMask& tumor) {
    if (image.width != tumor.width || image.height != tumor.height)
        throw PreconditionError("estimate_brain_region: image/tumor dimension mismatch");

    const int t = otsu_threshold(image);
    BinaryMask fg = BinaryMask::create(image.width, image.height);
    bool any = false;
    if (t >= 0) {
        for (std::size_t i = 0; i < image.pixels.size(); ++i) {
            fg.bits[i] = image.pixels[i] > t;
            any = any || fg.bits[i];
        }
    }
    if (!any) throw PreconditionError("estimate_brain_region: empty foreground");

    BrainRegion region;
    region.mask = fill_holes(mask_union(largest_component8(fg), tumor));
    region.bbox = bounding_box(region.mask);
    region.midline_x = (region.bbox.min_x + region.bbox.max_x) / 2.0;
    return region;
}

double ring_enhancement_index(const GrayImage& image, const BinaryMask& tumor, double eps,
                              double core_frac, bool* degenerate) {
    if (image.width != tumor.width || image.height != tumor.height)
        throw PreconditionError("ring_enhancement_index: dimension mismatch");
    if (degenerate) *degenerate = false;

    const std::size_t area = tumor.count();
    if (area == 0) throw NoTumorError("ring_enhancement_index: empty tumor");

    const double r_eq = std::sqrt(static_cast<double>(area) / M_PI);
    int k = std::max(1, static_cast<int>(std::lround(core_frac * r_eq)));

    BinaryMask core;
    for (; k >= 1; --k) {
        core = tumor;
        for (int it = 0; it < k; ++it) core = erode3x3(core);
        if (core.count() > 0) break;
    }
    if (k < 1 || core.count() == 0) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }

    double core_sum = 0, ring_sum = 0;
    long long core_n = 0, ring_n = 0;
    for (int y = 0; y < tumor.height; ++y)
        for (int x = 0; x < tumor.width; ++x) {
            if (!tumor.at(x, y)) continue;
            if (core.at(x, y)) {
                core_sum += image.at(x, y);
                ++core_n;
            } else {
                ring_sum += image.at(x, y);
                ++ring_n;
            }
        }
    if (ring_n == 0) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    const double mu_core = core_sum / core_n;
    const double mu_ring = ring_sum / ring_n;
    return (mu_ring - mu_core) / (mu_core + eps);
}

SkullDistance skull_distance(const BinaryMask& tumor, const BrainRegion& brain,
                             double contact_px) {
    if (!tumor.same_shape(brain.mask))
        throw PreconditionError("skull_distance: dimension mismatch");
    const auto tumor_boundary = boundary_pixels4(tumor);
    if (tumor_boundary.empty()) throw NoTumorError("skull_distance: empty tumor");
    const auto brain_boundary = boundary_pixels4(brain.mask);
    if (brain_boundary.empty()) throw PreconditionError("skull_distance: empty brain mask");

    const auto dt = edt_squared(tumor.width, tumor.height, brain_boundary);

    SkullDistance out;
    double best = std::numeric_limits<double>::infinity();
    long long touching = 0;
    const double contact_sq = contact_px * contact_px;
    for (const auto& p : tumor_boundary) {
        const double d2 = dt[static_cast<std::size_t>(p.y) * tumor.width + p.x];
        best = std::min(best, d2);
        if (d2 <= contact_sq) ++touching;
    }
    out.d_skull = std::sqrt(best);
    out.contact_ratio = static_cast<double>(touching) / tumor_boundary.size();
    return out;
}

std::optional<double> midline_shift(const BinaryMask& tumor, const BrainRegion& brain,
                                    Orientation orientation) {
    if (orientation != Orientation::axial) return std::nullopt;
    if (!tumor.same_shape(brain.mask))
        throw PreconditionError("midline_shift: dimension mismatch");

    // parenchyma = brain minus tumor; integer sums keep the centroid exact
    long long sx = 0, n = 0;
    for (int y = 0; y < brain.mask.height; ++y)
        for (int x = 0; x < brain.mask.width; ++x)
            if (brain.mask.at(x, y) && !tumor.at(x, y)) {
                sx += x;
                ++n;
            }
    if (n == 0) throw PreconditionError("midline_shift: brain minus tumor is empty");

    const double x_falx = static_cast<double>(sx) / n;
    const double width = brain.bbox.width();
    if (width <= 0) throw PreconditionError("midline_shift: empty brain bounding box");
    return std::abs(brain.midline_x - x_falx) / width * 100.0;
}

} // namespace xmorph

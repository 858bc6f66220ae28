#pragma once

#include <optional>

#include "xmorph/image.hpp"
#include "xmorph/io.hpp"
#include "xmorph/morphology.hpp"

namespace xmorph {

struct BrainRegion {
    BinaryMask mask;
    Bbox bbox;
    double midline_x = 0; // horizontal center of the brain bounding box
};

/// Otsu foreground -> largest component -> union with the tumor -> hole fill.
/// Throws on an empty foreground.
BrainRegion estimate_brain_region(const GrayImage& image, const BinaryMask& tumor);

/// REI = (mu_ring - mu_core) / (mu_core + eps). The core is the tumor eroded
/// k times (3x3), k = max(1, round(core_frac * equivalent radius)), reduced
/// until non-empty; degenerate tumors score 0 with the flag set.
double ring_enhancement_index(const GrayImage& image, const BinaryMask& tumor,
                              double eps = 1e-6, double core_frac = 0.3,
                              bool* degenerate = nullptr);

struct SkullDistance {
    double d_skull = 0;      // min distance from tumor boundary to brain boundary
    double contact_ratio = 0; // fraction of tumor boundary within contact_px
};

SkullDistance skull_distance(const BinaryMask& tumor, const BrainRegion& brain,
                             double contact_px = 2.0);

/// MLS percent, or nullopt for non-axial orientations. x_falx is the column
/// centroid of brain-minus-tumor; the result is normalized by the brain
/// bounding-box width.
std::optional<double> midline_shift(const BinaryMask& tumor, const BrainRegion& brain,
                                    Orientation orientation);

} // namespace xmorph

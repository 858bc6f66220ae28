#pragma once

#include <vector>

#include "xmorph/image.hpp"

namespace xmorph {

struct PixelCoord {
    int x = 0;
    int y = 0;
};

struct Bbox {
    int min_x = 0, min_y = 0, max_x = -1, max_y = -1;
    int width() const { return max_x - min_x + 1; }
    int height() const { return max_y - min_y + 1; }
    bool empty() const { return max_x < min_x; }
};

Bbox bounding_box(const BinaryMask& mask);

/// 8-connected component labels, 0 = background, 1..n = components in
/// discovery (row-major seed) order. Returns label count via n_labels.
std::vector<int> label_components8(const BinaryMask& mask, int& n_labels);

/// Largest 8-connected component; ties resolved toward the component whose
/// topmost-then-leftmost pixel comes first in row-major order.
BinaryMask largest_component8(const BinaryMask& mask);

/// Binary erosion with the full 3x3 structuring element; pixels outside the
/// grid count as background.
BinaryMask erode3x3(const BinaryMask& mask);

/// Fills background regions not reachable from the border (4-connectivity).
BinaryMask fill_holes(const BinaryMask& mask);

BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_minus(const BinaryMask& a, const BinaryMask& b);

/// Otsu's threshold over the intensity histogram. Foreground is intensity >
/// threshold. Returns -1 when the histogram has no spread.
int otsu_threshold(const GrayImage& img);

/// Mask pixels with at least one 4-neighbor outside the mask (or off-grid).
std::vector<PixelCoord> boundary_pixels4(const BinaryMask& mask);

/// Exact squared Euclidean distance transform (Felzenszwalb-Huttenlocher) to
/// the given site set, evaluated over a w x h grid.
std::vector<double> edt_squared(int width, int height, const std::vector<PixelCoord>& sites);

} // namespace xmorph

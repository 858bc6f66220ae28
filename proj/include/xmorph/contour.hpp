#pragma once

#include <optional>
#include <vector>

#include "xmorph/image.hpp"

namespace xmorph {

struct Point {
    double x = 0;
    double y = 0;
};

/// Closed boundary polyline. Counter-clockwise means positive signed area
/// under the shoelace formula with (x, y) read as Cartesian axes.
struct Contour {
    std::vector<Point> points;
};

double signed_area(const Contour& c);
double perimeter(const Contour& c);

/// Pixel centroid of the mask from exact integer sums.
Point mask_centroid(const BinaryMask& mask);

/// Moore-neighbor trace of the largest 8-connected component. Start point is
/// the component's topmost-then-leftmost pixel; output is counter-clockwise.
/// Throws NoTumorError on an empty mask and DegenerateContourError when the
/// largest component has fewer than 3 pixels.
Contour extract_largest_contour(const BinaryMask& mask);

/// n points at equal arc-length spacing along the closed polyline; point 0
/// coincides with the input start point. Requires n >= 8.
Contour resample_closed(const Contour& contour, int n);

struct RadialSignal {
    std::vector<double> values; // S_std, mean 1
    Point centroid;
    double mean_radius = 0;
};

/// Mean-normalized centroid-to-boundary distances. The centroid defaults to
/// the contour point mean; pass the mask pixel centroid when available.
RadialSignal to_radial_signal(const Contour& contour,
                              std::optional<Point> centroid = std::nullopt);

struct GeometricFeatures {
    double irregularity = 0; // population std of S_std
    double roughness = 0;    // closed-loop sum of |successive differences|
    double area = 0;         // true-pixel count
    double mean_radius = 0;
};

GeometricFeatures geometric_features(const RadialSignal& signal, const BinaryMask& mask);

/// Population standard deviation.
double population_std(const std::vector<double>& v);

} // namespace xmorph

#include <doctest.h>

#include <cmath>

#include "reference.hpp"
#include "test_util.hpp"
#include "xmorph/clinical.hpp"
#include "xmorph/error.hpp"
#include "xmorph/rng.hpp"
#include "xmorph/synth.hpp"

using namespace xmorph;
using testutil::disk_mask;

namespace {

GrayImage paint(const BinaryMask& region, std::uint8_t value, GrayImage img) {
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            if (region.at(x, y)) img.set(x, y, value);
    return img;
}

struct Flipped {
    GrayImage image;
    BinaryMask tumor;
};

Flipped mirror(const GrayImage& img, const BinaryMask& tumor) {
    Flipped out{GrayImage::create(img.width, img.height), BinaryMask::create(img.width, img.height)};
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            out.image.set(img.width - 1 - x, y, img.at(x, y));
            out.tumor.set(img.width - 1 - x, y, tumor.at(x, y));
        }
    return out;
}

} // namespace

TEST_SUITE("clinical") {

TEST_CASE("brain region from a bright disk on black background") {
    const int W = 161;
    const auto brain_disk = disk_mask(W, W, 80, 80, 70);
    const auto tumor = disk_mask(W, W, 60, 80, 12);
    const GrayImage img = paint(brain_disk, 120, GrayImage::create(W, W, 0));

    const BrainRegion region = estimate_brain_region(img, tumor);
    CHECK(region.mask.count() == brain_disk.count());
    CHECK(region.midline_x == doctest::Approx(80.0));

    // a dark tumor is still folded in by the union rule
    auto dark_img = img;
    for (int y = 0; y < W; ++y)
        for (int x = 0; x < W; ++x)
            if (tumor.at(x, y)) dark_img.set(x, y, 3);
    const BrainRegion dark_region = estimate_brain_region(dark_img, tumor);
    for (int y = 0; y < W; ++y)
        for (int x = 0; x < W; ++x)
            if (tumor.at(x, y)) CHECK(dark_region.mask.at(x, y));

    const GrayImage black = GrayImage::create(32, 32, 0);
    CHECK_THROWS_AS(estimate_brain_region(black, BinaryMask::create(32, 32)),
                    PreconditionError);
}

TEST_CASE("REI: uniform tumor scores zero, painted rim matches the ratio") {
    const int W = 121;
    const auto tumor = disk_mask(W, W, 60, 60, 25);

    const GrayImage uniform = paint(tumor, 150, GrayImage::create(W, W, 40));
    CHECK(ring_enhancement_index(uniform, tumor) == doctest::Approx(0.0).epsilon(1e-9));

    // ring-enhanced phantom painted with the same core construction
    ShapeSpec spec;
    spec.kind = ShapeKind::ellipse;
    spec.axis_ratio = 1.0;
    spec.size = 25;
    spec.seed = 3;
    spec.profile.kind = IntensityProfile::Kind::ring_enhanced;
    spec.profile.core_val = 100;
    spec.profile.rim_val = 147;
    const Phantom ph = generate(spec);
    CHECK(ring_enhancement_index(ph.image, ph.tumor) ==
          doctest::Approx(0.47).epsilon(0.043)); // 0.47 +/- 0.02

    // single-pixel tumor is degenerate
    BinaryMask speck = BinaryMask::create(31, 31);
    speck.set(15, 15, true);
    bool degenerate = false;
    const GrayImage small = GrayImage::create(31, 31, 90);
    CHECK(ring_enhancement_index(small, speck, 1e-6, 0.3, &degenerate) == 0.0);
    CHECK(degenerate);
}

TEST_CASE("skull distance: concentric disks and touching tumors") {
    const int W = 161;
    const auto brain_disk = disk_mask(W, W, 80, 80, 60);
    const GrayImage img = paint(brain_disk, 120, GrayImage::create(W, W, 0));

    SUBCASE("deep lesion: d = R - rho within 1.5 px") {
        const auto tumor = disk_mask(W, W, 80, 80, 10);
        const BrainRegion region = estimate_brain_region(img, tumor);
        const auto sd = skull_distance(tumor, region);
        CHECK(sd.d_skull == doctest::Approx(50.0).epsilon(0.03)); // +/- 1.5 px
        CHECK(sd.contact_ratio == 0.0);
    }
    SUBCASE("touching lesion: zero distance, positive contact") {
        const auto tumor = disk_mask(W, W, 130, 80, 12); // reaches x = 142 > brain edge 140
        const BrainRegion region = estimate_brain_region(img, tumor);
        const auto sd = skull_distance(tumor, region);
        CHECK(sd.d_skull == 0.0);
        CHECK(sd.contact_ratio > 0.0);
        CHECK(sd.contact_ratio <= 1.0);
    }
}

TEST_CASE("exact EDT equals the naive all-pairs minimum on small fixtures") {
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const int W = 48 + static_cast<int>(rng.below(17));
        const double br = 14 + rng.uniform() * 6;
        const auto brain_disk = disk_mask(W, W, W / 2.0, W / 2.0, br + 4);
        const auto tumor =
            disk_mask(W, W, W / 2.0 + rng.uniform(-3, 3), W / 2.0 + rng.uniform(-3, 3),
                      3 + rng.uniform() * 3);
        const GrayImage img = paint(brain_disk, 100, GrayImage::create(W, W, 0));
        const BrainRegion region = estimate_brain_region(img, tumor);
        const auto sd = skull_distance(tumor, region);
        const double naive =
            reference::min_boundary_distance_naive(tumor, region.mask);
        CHECK(sd.d_skull == doctest::Approx(naive).epsilon(1e-9));
    }
}

TEST_CASE("midline shift: symmetry, displacement and the orientation gate") {
    const int W = 201;
    const auto brain_disk = disk_mask(W, W, 100, 100, 80);
    const GrayImage img = paint(brain_disk, 110, GrayImage::create(W, W, 0));

    SUBCASE("symmetric phantom stays under 0.5 percent") {
        const auto tumor = disk_mask(W, W, 100, 100, 15);
        const BrainRegion region = estimate_brain_region(img, tumor);
        const auto mls = midline_shift(tumor, region, Orientation::axial);
        REQUIRE(mls.has_value());
        CHECK(*mls <= 0.5);
    }
    SUBCASE("lateral tumor displaces the parenchyma centroid by the fixture value") {
        const auto tumor = disk_mask(W, W, 140, 100, 20);
        const BrainRegion region = estimate_brain_region(img, tumor);
        const auto mls = midline_shift(tumor, region, Orientation::axial);
        REQUIRE(mls.has_value());

        // closed-form centroid of (brain minus tumor) from integer sums
        long long sx = 0, n = 0;
        for (int y = 0; y < W; ++y)
            for (int x = 0; x < W; ++x)
                if (region.mask.at(x, y) && !tumor.at(x, y)) {
                    sx += x;
                    ++n;
                }
        const double expected =
            std::abs(region.midline_x - static_cast<double>(sx) / n) /
            region.bbox.width() * 100.0;
        CHECK(*mls == doctest::Approx(expected).epsilon(1e-12));
        CHECK(*mls > 1.0); // the fixture produces a visible shift
    }
    SUBCASE("sagittal sample yields no value") {
        const auto tumor = disk_mask(W, W, 140, 100, 20);
        const BrainRegion region = estimate_brain_region(img, tumor);
        CHECK_FALSE(midline_shift(tumor, region, Orientation::sagittal).has_value());
        CHECK_FALSE(midline_shift(tumor, region, Orientation::coronal).has_value());
    }
}

TEST_CASE("mirror symmetry of REI, skull distance and MLS") {
    ShapeSpec spec;
    spec.kind = ShapeKind::chaotic_star;
    spec.size = 22;
    spec.seed = 17;
    spec.profile.kind = IntensityProfile::Kind::ring_enhanced;
    spec.profile.core_val = 90;
    spec.profile.rim_val = 140;
    spec.profile.offset = 0;
    const Phantom ph = generate(spec);
    const Flipped fl = mirror(ph.image, ph.tumor);

    const BrainRegion r1 = estimate_brain_region(ph.image, ph.tumor);
    const BrainRegion r2 = estimate_brain_region(fl.image, fl.tumor);

    CHECK(ring_enhancement_index(ph.image, ph.tumor) ==
          doctest::Approx(ring_enhancement_index(fl.image, fl.tumor)).epsilon(1e-9));

    const auto sd1 = skull_distance(ph.tumor, r1);
    const auto sd2 = skull_distance(fl.tumor, r2);
    CHECK(sd1.d_skull == doctest::Approx(sd2.d_skull).epsilon(1e-9));
    CHECK(sd1.contact_ratio == doctest::Approx(sd2.contact_ratio).epsilon(1e-9));

    const auto m1 = midline_shift(ph.tumor, r1, Orientation::axial);
    const auto m2 = midline_shift(fl.tumor, r2, Orientation::axial);
    REQUIRE(m1.has_value());
    REQUIRE(m2.has_value());
    CHECK(*m1 == doctest::Approx(*m2).epsilon(1e-9));
}

TEST_CASE("shifted-brain phantom produces a visible midline shift") {
    ShapeSpec centered;
    centered.kind = ShapeKind::ellipse;
    centered.axis_ratio = 1.0;
    centered.size = 22;
    centered.seed = 8;
    ShapeSpec shifted = centered;
    shifted.profile.kind = IntensityProfile::Kind::shifted_brain;
    shifted.profile.offset = 25;

    auto mls_of = [](const Phantom& ph) {
        const BrainRegion region = estimate_brain_region(ph.image, ph.tumor);
        return midline_shift(ph.tumor, region, Orientation::axial).value();
    };
    const double base = mls_of(generate(centered));
    const double moved = mls_of(generate(shifted));
    CHECK(base <= 0.5);
    CHECK(moved > base + 1.0);
}

TEST_CASE("REI determinism") {
    ShapeSpec spec;
    spec.kind = ShapeKind::lobulated;
    spec.size = 20;
    spec.seed = 5;
    spec.profile.kind = IntensityProfile::Kind::ring_enhanced;
    spec.profile.core_val = 80;
    spec.profile.rim_val = 130;
    const Phantom ph = generate(spec);
    const double a = ring_enhancement_index(ph.image, ph.tumor);
    const double b = ring_enhancement_index(ph.image, ph.tumor);
    CHECK(a == b); // bit-identical
}

} // TEST_SUITE

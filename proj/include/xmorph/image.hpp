#pragma once

#include <cstdint>
#include <vector>

#include "xmorph/error.hpp"

namespace xmorph {

/// 8-bit grayscale raster, row-major.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    static GrayImage create(int w, int h, std::uint8_t fill = 0) {
        if (w < 1 || h < 1) throw PreconditionError("image dimensions must be >= 1");
        GrayImage img;
        img.width = w;
        img.height = h;
        img.pixels.assign(static_cast<std::size_t>(w) * h, fill);
        return img;
    }

    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

    std::uint8_t at(int x, int y) const {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }
    void set(int x, int y, std::uint8_t v) {
        pixels[static_cast<std::size_t>(y) * width + x] = v;
    }
};

/// Row-major boolean raster; value 1 marks region membership.
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;

    static BinaryMask create(int w, int h, bool fill = false) {
        if (w < 1 || h < 1) throw PreconditionError("mask dimensions must be >= 1");
        BinaryMask m;
        m.width = w;
        m.height = h;
        m.bits.assign(static_cast<std::size_t>(w) * h, fill ? 1 : 0);
        return m;
    }

    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

    bool at(int x, int y) const {
        return bits[static_cast<std::size_t>(y) * width + x] != 0;
    }
    void set(int x, int y, bool v) {
        bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0;
    }

    std::size_t count() const {
        std::size_t n = 0;
        for (auto b : bits) n += b != 0;
        return n;
    }

    bool same_shape(const BinaryMask& o) const { return width == o.width && height == o.height; }
};

} // namespace xmorph

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bseg {

// Row-major grayscale raster. Values are real so that intensity rescaling
// keeps fractional levels; file I/O rounds to 8-bit on save.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    GrayImage() = default;
    GrayImage(int w, int h, double fill = 0.0)
        : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

    double& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
    double at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
    size_t size() const { return data.size(); }
};

// Row-major binary raster, 1 = foreground.
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> data;

    BinaryMask() = default;
    BinaryMask(int w, int h, bool fill = false)
        : width(w), height(h), data(static_cast<size_t>(w) * h, fill ? 1 : 0) {}

    uint8_t& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
    uint8_t at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
    size_t size() const { return data.size(); }
    size_t count() const;
};

// Image with its segmentation label.
struct LabeledImage {
    GrayImage image;
    BinaryMask mask;
};

// PGM I/O. P2 and P5 accepted on load, maxval must be <= 255; parse errors
// name the byte offset. Masks are stored as P5 with values {0, 255}.
GrayImage load_pgm(const std::string& path);
void save_pgm(const GrayImage& img, const std::string& path);
BinaryMask load_mask_pgm(const std::string& path);
void save_mask_pgm(const BinaryMask& mask, const std::string& path);

// Linear rescale to span [0, 255]; a constant image maps to all zeros.
GrayImage rescale_intensity(const GrayImage& img);

// Bilinear for intensities, nearest-neighbor for masks.
GrayImage resize(const GrayImage& img, int w, int h);
BinaryMask resize(const BinaryMask& mask, int w, int h);

GrayImage flip_horizontal(const GrayImage& img);
BinaryMask flip_horizontal(const BinaryMask& mask);

}  // namespace bseg

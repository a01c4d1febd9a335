#pragma once

#include <string>
#include <vector>

#include "core/raster.hpp"

namespace bseg {

struct Pixel {
    int x = 0;
    int y = 0;
    friend bool operator==(const Pixel&, const Pixel&) = default;
    friend auto operator<=>(const Pixel&, const Pixel&) = default;
};

// Boundary pixel set of a mask: foreground pixels with a 4-neighbor that is
// background or outside the image.
struct Contour {
    std::vector<Pixel> points;
};

// Normalized boundary distance map: value = exp(-lambda * D) where D is the
// minimum Euclidean distance to the contour. Boundary pixels carry exactly 1.
struct DistanceMap {
    int width = 0;
    int height = 0;
    double lambda = 1.0;
    std::vector<double> data;

    DistanceMap() = default;
    DistanceMap(int w, int h, double lam)
        : width(w), height(h), lambda(lam), data(static_cast<size_t>(w) * h, 0.0) {}

    double& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
    double at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
    size_t size() const { return data.size(); }
};

Contour boundary_of_mask(const BinaryMask& mask);

// Exact minimum Euclidean distance from p to the contour, by exhaustive scan.
// This is the reference the fast encoder is checked against.
double min_boundary_distance(const Pixel& p, const Contour& c);

// Fast path: exact squared Euclidean distance transform (two-pass lower
// envelope of parabolas), seeded on the contour pixels. Squared distances on
// the integer grid are integers, so the result is bit-identical to the
// exhaustive scan.
DistanceMap encode_distance_map(const Contour& c, int w, int h, double lambda);

// Pixel is boundary iff value >= exp(-lambda), i.e. implied distance <= 1.
BinaryMask decode_boundary(const DistanceMap& pred);

// Exact squared-distance transform used by the encoder; exposed for reuse by
// the synthetic generator.
std::vector<double> squared_edt(const std::vector<Pixel>& seeds, int w, int h);

// DMAP raster: 16-byte header (magic "DMAP", u32 width, u32 height, u32
// reserved), then lambda and the pixels as little-endian 64-bit floats.
void save_dmap(const DistanceMap& map, const std::string& path);
DistanceMap load_dmap(const std::string& path);

// Heatmap visualization: round(255 * d) as a P5 PGM.
void save_heatmap_pgm(const DistanceMap& map, const std::string& path);

}  // namespace bseg

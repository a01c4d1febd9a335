#pragma once

#include <array>
#include <vector>

#include "core/distance_map.hpp"
#include "core/raster.hpp"

namespace bseg {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

struct Ellipse {
    Vec2 center;
    double semi_major = 0.0;
    double semi_minor = 0.0;
    double angle = 0.0;  // major axis vs x-axis, in [0, pi)
};

// Axis endpoints in fixed order: +major, -major, +minor, -minor.
using LandmarkQuad = std::array<Vec2, 4>;

// Solved thin-plate spline mapping source-frame points to target-frame
// points: f(p) = affine(p) + sum_i kernel_weights[i] * U(|p - source_i|),
// U(r) = r^2 ln r.
struct TpsWarp {
    LandmarkQuad source_landmarks;
    std::array<std::array<double, 2>, 4> kernel_weights;  // per landmark, (x, y)
    std::array<std::array<double, 2>, 3> affine;          // rows: 1, x, y

    Vec2 operator()(const Vec2& p) const;
};

// Direct least-squares conic fit with the ellipse constraint 4AC - B^2 = 1
// (Fitzgibbon), via the stable split-matrix formulation.
Ellipse fit_ellipse(const std::vector<Pixel>& points);

LandmarkQuad ellipse_vertices(const Ellipse& e);

// Solves the bordered 7x7 system; exact at landmarks, reproduces affine maps.
TpsWarp solve_tps(const LandmarkQuad& source, const LandmarkQuad& target);

// Backward warp with nearest-neighbor sampling; out-of-bounds reads are
// 0 / background. The warp must map fixed-frame points to moving-frame ones.
LabeledImage apply_tps(const TpsWarp& warp, const LabeledImage& moving, int out_w, int out_h);

// Registration-based augmentation: per ordered pair (M, F), M != F, the
// warped pair and its horizontal flip, after the n originals.
// Output count is exactly 2n(n-1) + n.
std::vector<LabeledImage> augment_dataset(const std::vector<LabeledImage>& train);

}  // namespace bseg

#pragma once

#include <cstdint>
#include <vector>

#include "core/raster.hpp"

namespace bseg {

// Parameters of the speckled-ellipse generator. Shapes are ellipses with a
// low-frequency radial perturbation, so they stay star-convex about their
// center and ellipse-fittable.
struct ShapeParams {
    int image_size = 64;
    double center_jitter = 4.0;       // pixels
    double axes_min = 10.0;           // pixels, >= 4
    double axes_max = 20.0;           // pixels
    double rotation_range = 3.14159;  // radians, rotation drawn from [0, range)
    double perturb_amp = 0.04;        // per-harmonic amplitude cap, total < 0.3
    double gradient_strength = 30.0;  // intensity units across the shape
    double speckle_sigma = 0.25;      // multiplicative speckle strength
    double background_texture = 20.0; // intensity units
    uint64_t seed = 7;
};

// Deterministic in (params.seed, index).
LabeledImage gen_shape(const ShapeParams& params, uint64_t index);

std::vector<LabeledImage> gen_dataset(size_t n, const ShapeParams& params);

}  // namespace bseg

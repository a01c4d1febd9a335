#include "core/synth.hpp"

#include <algorithm>
#include <cmath>

#include "core/distance_map.hpp"
#include "core/errors.hpp"
#include "core/rng.hpp"

namespace bseg {

namespace {

constexpr double kTau = 6.283185307179586476925286766559;

struct ShapeGeom {
    double cx, cy;       // center
    double a, b;         // semi-axes, a >= b
    double theta;        // rotation
    double amp[3];       // harmonic amplitudes, k = 2..4
    double phase[3];     // harmonic phases
};

// inside iff the normalized elliptic radius is below the perturbed ring
bool inside(const ShapeGeom& g, double px, double py) {
    const double c = std::cos(g.theta), s = std::sin(g.theta);
    const double dx = px - g.cx, dy = py - g.cy;
    const double u = (c * dx + s * dy) / g.a;
    const double v = (-s * dx + c * dy) / g.b;
    const double rho = std::sqrt(u * u + v * v);
    const double phi = std::atan2(v, u);
    double ring = 1.0;
    for (int k = 0; k < 3; ++k) ring += g.amp[k] * std::cos((k + 2) * phi + g.phase[k]);
    return rho <= ring;
}

}  // namespace

LabeledImage gen_shape(const ShapeParams& p, uint64_t index) {
    if (p.axes_min < 4.0) throw DataError("gen_shape: semi-axes must be >= 4 pixels");
    if (!(p.perturb_amp * 3.0 < 0.3))
        throw DataError("gen_shape: total perturbation amplitude must stay below 0.3");
    const int n = p.image_size;
    // one independent stream per sample
    Pcg32 rng(p.seed, 0x5e1ec7ed ^ (index * 2 + 1));

    ShapeGeom g;
    g.cx = n / 2.0 + rng.uniform(-p.center_jitter, p.center_jitter);
    g.cy = n / 2.0 + rng.uniform(-p.center_jitter, p.center_jitter);
    g.a = rng.uniform(p.axes_min, p.axes_max);
    g.b = rng.uniform(p.axes_min, p.axes_max);
    if (g.a < g.b) std::swap(g.a, g.b);
    g.theta = rng.uniform(0.0, p.rotation_range);
    for (int k = 0; k < 3; ++k) {
        g.amp[k] = rng.uniform(0.0, p.perturb_amp);
        g.phase[k] = rng.uniform(0.0, kTau);
    }

    LabeledImage out{GrayImage(n, n), BinaryMask(n, n)};
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) out.mask.at(x, y) = inside(g, x, y) ? 1 : 0;

    // distance to the shape boundary drives the bright capsule band
    const Contour contour = boundary_of_mask(out.mask);
    const std::vector<double> d2 = squared_edt(contour.points, n, n);

    // background texture: two low-frequency waves with random orientation
    const double bg_ang1 = rng.uniform(0.0, kTau), bg_ang2 = rng.uniform(0.0, kTau);
    const double bg_freq1 = rng.uniform(1.0, 3.0), bg_freq2 = rng.uniform(2.0, 5.0);
    const double grad_ang = rng.uniform(0.0, kTau);
    const double gx = std::cos(grad_ang), gy = std::sin(grad_ang);

    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            const double dist = std::sqrt(d2[static_cast<size_t>(y) * n + x]);
            double v;
            if (out.mask.at(x, y)) {
                // heterogeneous interior: base + linear gradient
                v = 110.0 + p.gradient_strength * ((x - g.cx) * gx + (y - g.cy) * gy) / n * 2.0;
            } else {
                v = 55.0 +
                    p.background_texture *
                        (std::sin(kTau * bg_freq1 * (x * std::cos(bg_ang1) + y * std::sin(bg_ang1)) / n) +
                         std::sin(kTau * bg_freq2 * (x * std::cos(bg_ang2) + y * std::sin(bg_ang2)) / n)) /
                        2.0;
            }
            // bright capsule ridge on both sides of the boundary
            v += 95.0 * std::exp(-dist * dist / 4.5);
            // multiplicative speckle; the raw scale is designed for [0, 255],
            // so clamping (not min-max rescaling) keeps the interior mean
            // independent of the speckle draw
            v *= 1.0 + p.speckle_sigma * rng.uniform(-1.0, 1.0);
            out.image.at(x, y) = std::clamp(v, 0.0, 255.0);
        }
    }
    // quantize to 8-bit levels so saved and in-memory corpora match exactly
    for (double& v : out.image.data) v = static_cast<double>(std::lround(v));
    return out;
}

std::vector<LabeledImage> gen_dataset(size_t n, const ShapeParams& params) {
    if (n < 1) throw DataError("gen_dataset: n must be >= 1");
    std::vector<LabeledImage> out;
    out.reserve(n);
    for (size_t i = 0; i < n; ++i) out.push_back(gen_shape(params, i));
    return out;
}

}  // namespace bseg

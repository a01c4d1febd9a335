#include <cmath>

#include "core/distance_map.hpp"
#include "core/synth.hpp"
#include "core/tps_augment.hpp"
#include "doctest.h"

using namespace bseg;

namespace {

// 4-connected component count of the foreground
int components4(const BinaryMask& m) {
    std::vector<int> label(m.size(), -1);
    int next = 0;
    std::vector<size_t> stack;
    for (size_t s = 0; s < m.size(); ++s) {
        if (!m.data[s] || label[s] != -1) continue;
        stack.assign(1, s);
        label[s] = next;
        while (!stack.empty()) {
            const size_t i = stack.back();
            stack.pop_back();
            const int x = static_cast<int>(i % m.width), y = static_cast<int>(i / m.width);
            const int nb[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
            for (const auto& d : nb) {
                const int nx = x + d[0], ny = y + d[1];
                if (nx < 0 || nx >= m.width || ny < 0 || ny >= m.height) continue;
                const size_t j = static_cast<size_t>(ny) * m.width + nx;
                if (m.data[j] && label[j] == -1) {
                    label[j] = next;
                    stack.push_back(j);
                }
            }
        }
        ++next;
    }
    return next;
}

bool has_holes(const BinaryMask& m) {
    // flood the background from the border (4-connectivity); leftover
    // background pixels are holes
    std::vector<uint8_t> seen(m.size(), 0);
    std::vector<size_t> stack;
    auto push = [&](int x, int y) {
        if (x < 0 || x >= m.width || y < 0 || y >= m.height) return;
        const size_t i = static_cast<size_t>(y) * m.width + x;
        if (seen[i] || m.data[i]) return;
        seen[i] = 1;
        stack.push_back(i);
    };
    for (int x = 0; x < m.width; ++x) {
        push(x, 0);
        push(x, m.height - 1);
    }
    for (int y = 0; y < m.height; ++y) {
        push(0, y);
        push(m.width - 1, y);
    }
    while (!stack.empty()) {
        const size_t i = stack.back();
        stack.pop_back();
        const int x = static_cast<int>(i % m.width), y = static_cast<int>(i / m.width);
        push(x - 1, y);
        push(x + 1, y);
        push(x, y - 1);
        push(x, y + 1);
    }
    for (size_t i = 0; i < m.size(); ++i)
        if (!m.data[i] && !seen[i]) return true;
    return false;
}

}  // namespace

TEST_CASE("gen_shape is deterministic in (seed, index)") {
    ShapeParams params;
    params.seed = 99;
    const LabeledImage a = gen_shape(params, 17);
    const LabeledImage b = gen_shape(params, 17);
    CHECK(a.image.data == b.image.data);
    CHECK(a.mask.data == b.mask.data);
    const LabeledImage c = gen_shape(params, 18);
    CHECK(a.image.data != c.image.data);
}

TEST_CASE("noiseless unperturbed shape is an exact ellipse") {
    ShapeParams params;
    params.seed = 12;
    params.perturb_amp = 0.0;
    params.speckle_sigma = 0.0;
    const LabeledImage item = gen_shape(params, 0);
    const Ellipse e = fit_ellipse(boundary_of_mask(item.mask).points);
    // recover the axes within 2%
    CHECK(e.semi_major >= params.axes_min * 0.95);
    CHECK(e.semi_major <= params.axes_max * 1.05);
    // every mask pixel is consistent with the fitted ellipse +-1.5 px
    const double c = std::cos(e.angle), s = std::sin(e.angle);
    for (int y = 0; y < item.mask.height; ++y)
        for (int x = 0; x < item.mask.width; ++x) {
            const double dx = x - e.center.x, dy = y - e.center.y;
            const double u = (c * dx + s * dy) / (e.semi_major + 1.5);
            const double v = (-s * dx + c * dy) / (e.semi_minor + 1.5);
            if (u * u + v * v <= 1.0) continue;  // inside the enlarged ellipse
            CHECK(!item.mask.at(x, y));
        }
}

TEST_CASE("default corpus: single component, no holes, sane area") {
    ShapeParams params;
    params.seed = 2025;
    int checked = 0;
    for (uint64_t idx = 0; idx < 40; ++idx) {
        const LabeledImage item = gen_shape(params, idx);
        const double frac =
            static_cast<double>(item.mask.count()) / static_cast<double>(item.mask.size());
        CHECK(frac >= 0.05);
        CHECK(frac <= 0.60);
        CHECK(components4(item.mask) == 1);
        CHECK(!has_holes(item.mask));
        ++checked;
    }
    CHECK(checked == 40);
}

TEST_CASE("every default mask fits an ellipse") {
    ShapeParams params;
    params.seed = 31337;
    for (uint64_t idx = 0; idx < 25; ++idx) {
        const LabeledImage item = gen_shape(params, idx);
        CHECK_NOTHROW(fit_ellipse(boundary_of_mask(item.mask).points));
    }
}

TEST_CASE("speckle preserves mean interior brightness within 5%") {
    ShapeParams noisy;
    noisy.seed = 7171;
    ShapeParams clean = noisy;
    clean.speckle_sigma = 0.0;
    for (uint64_t idx = 0; idx < 6; ++idx) {
        const LabeledImage a = gen_shape(noisy, idx);
        const LabeledImage b = gen_shape(clean, idx);
        REQUIRE(a.mask.data == b.mask.data);  // geometry ignores the speckle draws
        double ma = 0, mb = 0;
        size_t n = 0;
        for (size_t i = 0; i < a.mask.size(); ++i)
            if (a.mask.data[i]) {
                ma += a.image.data[i];
                mb += b.image.data[i];
                ++n;
            }
        REQUIRE(n > 0);
        CHECK(std::abs(ma / n - mb / n) / (mb / n) <= 0.05);
    }
}

TEST_CASE("gen_dataset count and reproducibility") {
    ShapeParams params;
    params.seed = 8;
    const std::vector<LabeledImage> data = gen_dataset(12, params);
    CHECK(data.size() == 12);
    const std::vector<LabeledImage> again = gen_dataset(12, params);
    for (size_t i = 0; i < data.size(); ++i) CHECK(data[i].image.data == again[i].image.data);
}

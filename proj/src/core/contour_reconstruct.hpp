#pragma once

#include <vector>

#include "core/distance_map.hpp"
#include "core/raster.hpp"

namespace bseg {

// Spanning tree over pixel nodes; edge weights are Euclidean distances.
struct SpanningTree {
    struct Edge {
        int a = 0;
        int b = 0;
        double weight = 0.0;
    };
    std::vector<Pixel> nodes;
    std::vector<Edge> edges;

    double total_weight() const;
};

// Ordered pixel path with consecutive points distinct.
struct PixelPath {
    std::vector<Pixel> points;
    double weight = 0.0;
};

// Zhang-Suen morphological thinning to 1-pixel-wide curves.
BinaryMask skeletonize(const BinaryMask& bin);

// 3x3 binary closing (dilate, then erode); applied before thinning in the
// reconstruction pipeline.
BinaryMask close3x3(const BinaryMask& bin);

// Largest 8-connected component of a mask (first in scan order on ties).
BinaryMask largest_component(const BinaryMask& bin);

// Minimum spanning tree of the complete Euclidean graph on the points.
// Ties between equal-weight edges break on lexicographic endpoint order.
SpanningTree mst_kruskal(const std::vector<Pixel>& points);

// Maximum-weight simple path in the tree (weighted diameter), found with two
// farthest-node traversals.
PixelPath tree_max_path(const SpanningTree& tree);

// Rasterize the closed polygon through the path points (Bresenham, plus the
// closing segment) and fill its interior by flood-filling the exterior.
BinaryMask close_and_fill(const PixelPath& path, int w, int h);

// Full post-processing chain: decode -> close -> skeletonize -> largest
// component -> MST -> max path -> close_and_fill.
BinaryMask reconstruct_mask(const DistanceMap& pred);

}  // namespace bseg

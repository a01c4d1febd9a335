#include "core/contour_reconstruct.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <queue>

#include "core/errors.hpp"

namespace bseg {

double SpanningTree::total_weight() const {
    double w = 0.0;
    for (const Edge& e : edges) w += e.weight;
    return w;
}

namespace {

// neighbors P2..P9 clockwise from north, as (dx, dy)
constexpr std::array<std::array<int, 2>, 8> kRing = {
    {{0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}}};

inline bool px(const BinaryMask& m, int x, int y) {
    return x >= 0 && x < m.width && y >= 0 && y < m.height && m.at(x, y);
}

}  // namespace

namespace {

// Zhang-Suen deletability of (x, y) in the given subiteration.
bool thinnable(const BinaryMask& img, int x, int y, int pass) {
    std::array<int, 8> n;
    for (int i = 0; i < 8; ++i) n[i] = px(img, x + kRing[i][0], y + kRing[i][1]) ? 1 : 0;
    const int b = std::accumulate(n.begin(), n.end(), 0);
    if (b < 2 || b > 6) return false;
    int a = 0;
    for (int i = 0; i < 8; ++i)
        if (n[i] == 0 && n[(i + 1) % 8] == 1) ++a;
    if (a != 1) return false;
    // n[0]=N, n[2]=E, n[4]=S, n[6]=W
    if (pass == 0) return n[0] * n[2] * n[4] == 0 && n[2] * n[4] * n[6] == 0;
    return n[0] * n[2] * n[6] == 0 && n[0] * n[4] * n[6] == 0;
}

}  // namespace

BinaryMask skeletonize(const BinaryMask& bin) {
    BinaryMask img = bin;
    std::vector<std::pair<int, int>> kill;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int pass = 0; pass < 2; ++pass) {
            kill.clear();
            for (int y = 0; y < img.height; ++y)
                for (int x = 0; x < img.width; ++x)
                    if (img.at(x, y) && thinnable(img, x, y, pass)) kill.push_back({x, y});
            // Re-verify against the live image before each deletion; the pure
            // parallel update can annihilate 2x2 components.
            for (const auto& [x, y] : kill) {
                if (thinnable(img, x, y, pass)) {
                    img.at(x, y) = 0;
                    changed = true;
                }
            }
        }
    }
    return img;
}

BinaryMask close3x3(const BinaryMask& bin) {
    BinaryMask dil(bin.width, bin.height);
    for (int y = 0; y < bin.height; ++y)
        for (int x = 0; x < bin.width; ++x) {
            bool v = bin.at(x, y);
            for (int i = 0; i < 8 && !v; ++i) v = px(bin, x + kRing[i][0], y + kRing[i][1]);
            dil.at(x, y) = v ? 1 : 0;
        }
    BinaryMask out(bin.width, bin.height);
    for (int y = 0; y < bin.height; ++y)
        for (int x = 0; x < bin.width; ++x) {
            // erode; out-of-bounds counts as foreground so closing stays
            // extensive at the border
            bool v = dil.at(x, y);
            for (int i = 0; i < 8 && v; ++i) {
                const int nx = x + kRing[i][0], ny = y + kRing[i][1];
                if (nx >= 0 && nx < dil.width && ny >= 0 && ny < dil.height)
                    v = dil.at(nx, ny);
            }
            out.at(x, y) = v ? 1 : 0;
        }
    return out;
}

BinaryMask largest_component(const BinaryMask& bin) {
    BinaryMask out(bin.width, bin.height);
    std::vector<int> label(bin.size(), -1);
    int best_label = -1;
    size_t best_size = 0;
    int next = 0;
    std::vector<size_t> stack;
    for (size_t start = 0; start < bin.size(); ++start) {
        if (!bin.data[start] || label[start] != -1) continue;
        size_t count = 0;
        stack.assign(1, start);
        label[start] = next;
        while (!stack.empty()) {
            const size_t i = stack.back();
            stack.pop_back();
            ++count;
            const int x = static_cast<int>(i % bin.width);
            const int y = static_cast<int>(i / bin.width);
            for (const auto& d : kRing) {
                const int nx = x + d[0], ny = y + d[1];
                if (nx < 0 || nx >= bin.width || ny < 0 || ny >= bin.height) continue;
                const size_t j = static_cast<size_t>(ny) * bin.width + nx;
                if (bin.data[j] && label[j] == -1) {
                    label[j] = next;
                    stack.push_back(j);
                }
            }
        }
        if (count > best_size) {
            best_size = count;
            best_label = next;
        }
        ++next;
    }
    if (best_label >= 0)
        for (size_t i = 0; i < bin.size(); ++i) out.data[i] = label[i] == best_label ? 1 : 0;
    return out;
}

SpanningTree mst_kruskal(const std::vector<Pixel>& points) {
    if (points.empty()) throw DataError("mst_kruskal: empty point set");
    SpanningTree tree;
    tree.nodes = points;
    const int n = static_cast<int>(points.size());
    if (n == 1) return tree;

    struct E {
        double w;
        int a, b;
    };
    std::vector<E> edges;
    edges.reserve(static_cast<size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double dx = points[i].x - points[j].x;
            const double dy = points[i].y - points[j].y;
            edges.push_back({std::sqrt(dx * dx + dy * dy), i, j});
        }
    std::sort(edges.begin(), edges.end(), [&](const E& l, const E& r) {
        if (l.w != r.w) return l.w < r.w;
        if (points[l.a] != points[r.a]) return points[l.a] < points[r.a];
        return points[l.b] < points[r.b];
    });

    // union-find with path halving and union by size
    std::vector<int> parent(n), size(n, 1);
    std::iota(parent.begin(), parent.end(), 0);
    auto root = [&](int i) {
        while (parent[i] != i) {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        return i;
    };

    tree.edges.reserve(n - 1);
    for (const E& e : edges) {
        int ra = root(e.a), rb = root(e.b);
        if (ra == rb) continue;
        if (size[ra] < size[rb]) std::swap(ra, rb);
        parent[rb] = ra;
        size[ra] += size[rb];
        tree.edges.push_back({e.a, e.b, e.w});
        if (static_cast<int>(tree.edges.size()) == n - 1) break;
    }
    return tree;
}

namespace {

// farthest node from src by cumulative edge weight; smallest index on ties
struct Farthest {
    int node;
    double dist;
    std::vector<int> parent;
};

Farthest farthest_from(const SpanningTree& t, int src) {
    const int n = static_cast<int>(t.nodes.size());
    std::vector<std::vector<std::pair<int, double>>> adj(n);
    for (const auto& e : t.edges) {
        adj[e.a].push_back({e.b, e.weight});
        adj[e.b].push_back({e.a, e.weight});
    }
    std::vector<double> dist(n, -1.0);
    std::vector<int> parent(n, -1);
    std::vector<int> stack{src};
    dist[src] = 0.0;
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (const auto& [v, w] : adj[u]) {
            if (dist[v] < 0.0) {
                dist[v] = dist[u] + w;
                parent[v] = u;
                stack.push_back(v);
            }
        }
    }
    int best = src;
    for (int i = 0; i < n; ++i)
        if (dist[i] > dist[best]) best = i;
    return {best, dist[best], std::move(parent)};
}

}  // namespace

PixelPath tree_max_path(const SpanningTree& tree) {
    if (tree.nodes.empty()) throw DataError("tree_max_path: empty tree");
    PixelPath path;
    if (tree.nodes.size() == 1) {
        path.points.push_back(tree.nodes[0]);
        return path;
    }
    const Farthest a = farthest_from(tree, 0);
    const Farthest b = farthest_from(tree, a.node);
    path.weight = b.dist;
    for (int v = b.node; v != -1; v = b.parent[v]) path.points.push_back(tree.nodes[v]);
    return path;
}

namespace {

void draw_segment(BinaryMask& img, Pixel p0, Pixel p1) {
    // Bresenham over all octants
    const int dx = std::abs(p1.x - p0.x), sx = p0.x < p1.x ? 1 : -1;
    const int dy = -std::abs(p1.y - p0.y), sy = p0.y < p1.y ? 1 : -1;
    int err = dx + dy;
    int x = p0.x, y = p0.y;
    while (true) {
        if (x >= 0 && x < img.width && y >= 0 && y < img.height) img.at(x, y) = 1;
        if (x == p1.x && y == p1.y) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y += sy;
        }
    }
}

}  // namespace

BinaryMask close_and_fill(const PixelPath& path, int w, int h) {
    if (path.points.size() < 3)
        throw DataError("close_and_fill: need at least 3 path points to enclose an area");
    BinaryMask curve(w, h);
    for (size_t i = 0; i + 1 < path.points.size(); ++i)
        draw_segment(curve, path.points[i], path.points[i + 1]);
    draw_segment(curve, path.points.back(), path.points.front());

    // flood-fill the exterior from the border with 4-connectivity; the
    // 8-connected Bresenham curve is tight against it
    std::vector<uint8_t> outside(curve.size(), 0);
    std::vector<size_t> stack;
    auto push = [&](int x, int y) {
        if (x < 0 || x >= w || y < 0 || y >= h) return;
        const size_t i = static_cast<size_t>(y) * w + x;
        if (outside[i] || curve.data[i]) return;
        outside[i] = 1;
        stack.push_back(i);
    };
    for (int x = 0; x < w; ++x) {
        push(x, 0);
        push(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        push(0, y);
        push(w - 1, y);
    }
    while (!stack.empty()) {
        const size_t i = stack.back();
        stack.pop_back();
        const int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
        push(x - 1, y);
        push(x + 1, y);
        push(x, y - 1);
        push(x, y + 1);
    }

    BinaryMask out(w, h);
    for (size_t i = 0; i < out.size(); ++i) out.data[i] = outside[i] ? 0 : 1;
    return out;
}

BinaryMask reconstruct_mask(const DistanceMap& pred) {
    const BinaryMask boundary = decode_boundary(pred);
    if (boundary.count() == 0) throw NumericError("reconstruct_mask: no boundary detected");
    const BinaryMask skeleton = skeletonize(close3x3(boundary));
    const BinaryMask component = largest_component(skeleton);
    std::vector<Pixel> points;
    points.reserve(component.count());
    for (int y = 0; y < component.height; ++y)
        for (int x = 0; x < component.width; ++x)
            if (component.at(x, y)) points.push_back({x, y});
    if (points.empty()) throw NumericError("reconstruct_mask: no boundary detected");
    const SpanningTree tree = mst_kruskal(points);
    const PixelPath path = tree_max_path(tree);
    if (path.points.size() < 3)
        throw NumericError("reconstruct_mask: boundary too small to enclose an area");
    return close_and_fill(path, pred.width, pred.height);
}

}  // namespace bseg

#include "core/distance_map.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "core/errors.hpp"

namespace bseg {

Contour boundary_of_mask(const BinaryMask& mask) {
    Contour c;
    bool any = false;
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (!mask.at(x, y)) continue;
            any = true;
            const bool edge = x == 0 || x == mask.width - 1 || y == 0 || y == mask.height - 1 ||
                              !mask.at(x - 1, y) || !mask.at(x + 1, y) || !mask.at(x, y - 1) ||
                              !mask.at(x, y + 1);
            if (edge) c.points.push_back({x, y});
        }
    }
    if (!any) throw DataError("boundary_of_mask: mask has no foreground pixels");
    return c;
}

double min_boundary_distance(const Pixel& p, const Contour& c) {
    if (c.points.empty()) throw DataError("min_boundary_distance: empty contour");
    long long best = std::numeric_limits<long long>::max();
    for (const Pixel& b : c.points) {
        const long long dx = p.x - b.x;
        const long long dy = p.y - b.y;
        const long long d2 = dx * dx + dy * dy;
        if (d2 < best) best = d2;
    }
    return std::sqrt(static_cast<double>(best));
}

namespace {

// Large finite sentinel; squared pixel distances stay far below it, so
// sentinel parabolas never win against a real one.
constexpr double kFar = 1e20;

// 1-D squared distance transform, lower envelope of parabolas.
void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
            std::vector<double>& z, int n) {
    int k = 0;
    v[0] = 0;
    z[0] = -kFar;
    z[1] = kFar;
    for (int q = 1; q < n; ++q) {
        double s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) /
                   (2.0 * q - 2.0 * v[k]);
        while (s <= z[k]) {
            --k;
            s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) /
                (2.0 * q - 2.0 * v[k]);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kFar;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const double dq = q - v[k];
        d[q] = dq * dq + f[v[k]];
    }
}

}  // namespace

std::vector<double> squared_edt(const std::vector<Pixel>& seeds, int w, int h) {
    std::vector<double> grid(static_cast<size_t>(w) * h, kFar);
    for (const Pixel& p : seeds) {
        if (p.x < 0 || p.x >= w || p.y < 0 || p.y >= h)
            throw DataError("squared_edt: seed outside image bounds");
        grid[static_cast<size_t>(p.y) * w + p.x] = 0.0;
    }

    const int n = std::max(w, h);
    std::vector<double> f(n), d(n), z(n + 1);
    std::vector<int> v(n);

    // columns, then rows
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) f[y] = grid[static_cast<size_t>(y) * w + x];
        edt_1d(f, d, v, z, h);
        for (int y = 0; y < h; ++y) grid[static_cast<size_t>(y) * w + x] = d[y];
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) f[x] = grid[static_cast<size_t>(y) * w + x];
        edt_1d(f, d, v, z, w);
        for (int x = 0; x < w; ++x) grid[static_cast<size_t>(y) * w + x] = d[x];
    }
    return grid;
}

DistanceMap encode_distance_map(const Contour& c, int w, int h, double lambda) {
    if (!(lambda > 0.0)) throw DataError("encode_distance_map: lambda must be > 0");
    if (c.points.empty()) throw DataError("encode_distance_map: empty contour");
    DistanceMap map(w, h, lambda);
    const std::vector<double> d2 = squared_edt(c.points, w, h);
    for (size_t i = 0; i < map.size(); ++i) map.data[i] = std::exp(-lambda * std::sqrt(d2[i]));
    return map;
}

BinaryMask decode_boundary(const DistanceMap& pred) {
    if (!(pred.lambda > 0.0)) throw DataError("decode_boundary: lambda must be > 0");
    const double threshold = std::exp(-pred.lambda);
    BinaryMask out(pred.width, pred.height);
    for (size_t i = 0; i < pred.size(); ++i) out.data[i] = pred.data[i] >= threshold ? 1 : 0;
    return out;
}

namespace {

void put_u32(std::string& s, uint32_t v) {
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& s, double v) {
    const uint64_t bits = std::bit_cast<uint64_t>(v);
    for (int i = 0; i < 8; ++i) s.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

uint32_t get_u32(const unsigned char* p) {
    return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 | uint32_t(p[3]) << 24;
}

double get_f64(const unsigned char* p) {
    uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= uint64_t(p[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

}  // namespace

void save_dmap(const DistanceMap& map, const std::string& path) {
    std::string out;
    out.reserve(16 + 8 + map.size() * 8);
    out += "DMAP";
    put_u32(out, static_cast<uint32_t>(map.width));
    put_u32(out, static_cast<uint32_t>(map.height));
    put_u32(out, 0);
    put_f64(out, map.lambda);
    for (double v : map.data) put_f64(out, v);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError(path + ": cannot open for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw DataError(path + ": write failed");
}

DistanceMap load_dmap(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError(path + ": cannot open file");
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (bytes.size() < 24 || std::memcmp(bytes.data(), "DMAP", 4) != 0)
        throw DataError(path + ": not a DMAP raster (bad magic at byte 0)");
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const uint32_t w = get_u32(p + 4);
    const uint32_t h = get_u32(p + 8);
    if (w == 0 || h == 0 || w > (1u << 20) || h > (1u << 20))
        throw DataError(path + ": implausible DMAP dimensions");
    const size_t need = 24 + static_cast<size_t>(w) * h * 8;
    if (bytes.size() != need)
        throw DataError(path + ": truncated DMAP payload (have " +
                        std::to_string(bytes.size()) + " bytes, need " + std::to_string(need) + ")");
    DistanceMap map(static_cast<int>(w), static_cast<int>(h), get_f64(p + 16));
    for (size_t i = 0; i < map.size(); ++i) map.data[i] = get_f64(p + 24 + i * 8);
    return map;
}

void save_heatmap_pgm(const DistanceMap& map, const std::string& path) {
    GrayImage img(map.width, map.height);
    for (size_t i = 0; i < map.size(); ++i) {
        const double v = std::clamp(map.data[i], 0.0, 1.0);
        img.data[i] = static_cast<double>(std::lround(255.0 * v));
    }
    save_pgm(img, path);
}

}  // namespace bseg

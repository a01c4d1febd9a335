#include "core/raster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "core/errors.hpp"

namespace bseg {

size_t BinaryMask::count() const {
    return static_cast<size_t>(std::count(data.begin(), data.end(), uint8_t(1)));
}

namespace {

struct PgmReader {
    std::string bytes;
    size_t pos = 0;
    std::string path;

    [[noreturn]] void fail(const std::string& what) const {
        throw DataError(path + ": " + what + " at byte " + std::to_string(pos));
    }

    int peek() const { return pos < bytes.size() ? static_cast<unsigned char>(bytes[pos]) : -1; }

    void skip_space_and_comments() {
        while (pos < bytes.size()) {
            unsigned char c = bytes[pos];
            if (c == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(c)) {
                ++pos;
            } else {
                break;
            }
        }
    }

    int read_uint(const char* name) {
        skip_space_and_comments();
        if (pos >= bytes.size() || !std::isdigit(static_cast<unsigned char>(bytes[pos])))
            fail(std::string("expected ") + name);
        long v = 0;
        while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
            v = v * 10 + (bytes[pos] - '0');
            if (v > 1 << 30) fail(std::string(name) + " out of range");
            ++pos;
        }
        return static_cast<int>(v);
    }
};

GrayImage parse_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(path + ": cannot open file");
    PgmReader r;
    r.path = path;
    r.bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());

    if (r.bytes.size() < 2) r.fail("empty or truncated PGM header");
    bool ascii;
    if (r.bytes[0] == 'P' && r.bytes[1] == '2') {
        ascii = true;
    } else if (r.bytes[0] == 'P' && r.bytes[1] == '5') {
        ascii = false;
    } else {
        r.fail("not a P2/P5 PGM magic");
    }
    r.pos = 2;

    const int w = r.read_uint("width");
    const int h = r.read_uint("height");
    const int maxval = r.read_uint("maxval");
    if (w < 1 || h < 1) r.fail("non-positive dimensions");
    if (maxval < 1 || maxval > 255) r.fail("maxval > 255 unsupported");

    GrayImage img(w, h);
    if (ascii) {
        for (size_t i = 0; i < img.size(); ++i) {
            int v = r.read_uint("pixel");
            if (v > maxval) r.fail("pixel exceeds maxval");
            img.data[i] = v;
        }
    } else {
        // single whitespace byte separates header from payload
        if (r.pos >= r.bytes.size() || !std::isspace(static_cast<unsigned char>(r.bytes[r.pos])))
            r.fail("missing header terminator");
        ++r.pos;
        if (r.bytes.size() - r.pos < img.size()) {
            r.pos = r.bytes.size();
            r.fail("truncated pixel payload");
        }
        for (size_t i = 0; i < img.size(); ++i)
            img.data[i] = static_cast<unsigned char>(r.bytes[r.pos + i]);
    }
    return img;
}

}  // namespace

GrayImage load_pgm(const std::string& path) { return parse_pgm(path); }

void save_pgm(const GrayImage& img, const std::string& path) {
    if (img.width < 1 || img.height < 1)
        throw DataError("save_pgm: empty image rejected");
    std::string payload;
    payload.reserve(img.size());
    for (double v : img.data) {
        if (!(v >= 0.0 && v <= 255.0))
            throw DataError("save_pgm: pixel value " + std::to_string(v) + " outside [0,255]");
        payload.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v))));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(path + ": cannot open for writing");
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) throw DataError(path + ": write failed");
}

BinaryMask load_mask_pgm(const std::string& path) {
    GrayImage img = parse_pgm(path);
    BinaryMask mask(img.width, img.height);
    for (size_t i = 0; i < img.size(); ++i) mask.data[i] = img.data[i] >= 128.0 ? 1 : 0;
    return mask;
}

void save_mask_pgm(const BinaryMask& mask, const std::string& path) {
    GrayImage img(mask.width, mask.height);
    for (size_t i = 0; i < mask.size(); ++i) img.data[i] = mask.data[i] ? 255.0 : 0.0;
    save_pgm(img, path);
}

GrayImage rescale_intensity(const GrayImage& img) {
    GrayImage out(img.width, img.height);
    if (img.data.empty()) return out;
    const auto [mn_it, mx_it] = std::minmax_element(img.data.begin(), img.data.end());
    const double mn = *mn_it, mx = *mx_it;
    if (mx == mn) return out;  // constant image maps to all zeros
    const double scale = 255.0 / (mx - mn);
    for (size_t i = 0; i < img.size(); ++i) out.data[i] = (img.data[i] - mn) * scale;
    return out;
}

GrayImage resize(const GrayImage& img, int w, int h) {
    if (w < 1 || h < 1) throw DataError("resize: target dimensions must be >= 1");
    if (w == img.width && h == img.height) return img;
    GrayImage out(w, h);
    const double sx = static_cast<double>(img.width) / w;
    const double sy = static_cast<double>(img.height) / h;
    for (int y = 0; y < h; ++y) {
        // map output pixel centers into source coordinates
        double fy = (y + 0.5) * sy - 0.5;
        fy = std::clamp(fy, 0.0, static_cast<double>(img.height - 1));
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, img.height - 1);
        const double wy = fy - y0;
        for (int x = 0; x < w; ++x) {
            double fx = (x + 0.5) * sx - 0.5;
            fx = std::clamp(fx, 0.0, static_cast<double>(img.width - 1));
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, img.width - 1);
            const double wx = fx - x0;
            const double top = img.at(x0, y0) * (1 - wx) + img.at(x1, y0) * wx;
            const double bot = img.at(x0, y1) * (1 - wx) + img.at(x1, y1) * wx;
            out.at(x, y) = top * (1 - wy) + bot * wy;
        }
    }
    return out;
}

BinaryMask resize(const BinaryMask& mask, int w, int h) {
    if (w < 1 || h < 1) throw DataError("resize: target dimensions must be >= 1");
    if (w == mask.width && h == mask.height) return mask;
    BinaryMask out(w, h);
    const double sx = static_cast<double>(mask.width) / w;
    const double sy = static_cast<double>(mask.height) / h;
    for (int y = 0; y < h; ++y) {
        int syi = static_cast<int>((y + 0.5) * sy);
        syi = std::clamp(syi, 0, mask.height - 1);
        for (int x = 0; x < w; ++x) {
            int sxi = static_cast<int>((x + 0.5) * sx);
            sxi = std::clamp(sxi, 0, mask.width - 1);
            out.at(x, y) = mask.at(sxi, syi);
        }
    }
    return out;
}

GrayImage flip_horizontal(const GrayImage& img) {
    GrayImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) out.at(x, y) = img.at(img.width - 1 - x, y);
    return out;
}

BinaryMask flip_horizontal(const BinaryMask& mask) {
    BinaryMask out(mask.width, mask.height);
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x) out.at(x, y) = mask.at(mask.width - 1 - x, y);
    return out;
}

}  // namespace bseg

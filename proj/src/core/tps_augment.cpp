#include "core/tps_augment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/errors.hpp"

namespace bseg {

namespace {

double tps_kernel(double r) { return r > 0.0 ? r * r * std::log(r) : 0.0; }

double dist(const Vec2& a, const Vec2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Gaussian elimination with partial pivoting; a is n x n, rhs is n x m,
// both row-major. Throws on a numerically singular system.
void solve_linear(std::vector<double>& a, std::vector<double>& rhs, int n, int m,
                  const char* what) {
    double scale = 0.0;
    for (double v : a) scale = std::max(scale, std::abs(v));
    const double tol = std::max(scale, 1.0) * 1e-12;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
        if (std::abs(a[piv * n + col]) < tol) throw NumericError(what);
        if (piv != col) {
            for (int c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
            for (int c = 0; c < m; ++c) std::swap(rhs[col * m + c], rhs[piv * m + c]);
        }
        const double inv = 1.0 / a[col * n + col];
        for (int r = col + 1; r < n; ++r) {
            const double f = a[r * n + col] * inv;
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
            for (int c = 0; c < m; ++c) rhs[r * m + c] -= f * rhs[col * m + c];
        }
    }
    for (int col = n - 1; col >= 0; --col) {
        const double inv = 1.0 / a[col * n + col];
        for (int c = 0; c < m; ++c) {
            double v = rhs[col * m + c];
            for (int k = col + 1; k < n; ++k) v -= a[col * n + k] * rhs[k * m + c];
            rhs[col * m + c] = v * inv;
        }
    }
}

// Real roots of x^3 + px^2 + qx + r, appended to out.
void cubic_roots(double p, double q, double r, std::vector<double>& out) {
    // depressed form t^3 + at + b with x = t - p/3
    const double a = q - p * p / 3.0;
    const double b = 2.0 * p * p * p / 27.0 - p * q / 3.0 + r;
    const double disc = b * b / 4.0 + a * a * a / 27.0;
    const double shift = -p / 3.0;
    if (disc > 0.0) {
        const double s = std::sqrt(disc);
        const double u = std::cbrt(-b / 2.0 + s);
        const double v = std::cbrt(-b / 2.0 - s);
        out.push_back(u + v + shift);
    } else {
        // three real roots
        const double m = 2.0 * std::sqrt(std::max(-a / 3.0, 0.0));
        const double arg = m == 0.0 ? 0.0 : std::clamp(3.0 * b / (a * m), -1.0, 1.0);
        const double phi = std::acos(arg) / 3.0;
        for (int k = 0; k < 3; ++k)
            out.push_back(m * std::cos(phi - 2.0 * M_PI * k / 3.0) + shift);
    }
}

}  // namespace

Vec2 TpsWarp::operator()(const Vec2& p) const {
    Vec2 out{affine[0][0] + affine[1][0] * p.x + affine[2][0] * p.y,
             affine[0][1] + affine[1][1] * p.x + affine[2][1] * p.y};
    for (int i = 0; i < 4; ++i) {
        const double u = tps_kernel(dist(p, source_landmarks[i]));
        out.x += kernel_weights[i][0] * u;
        out.y += kernel_weights[i][1] * u;
    }
    return out;
}

Ellipse fit_ellipse(const std::vector<Pixel>& points) {
    if (points.size() < 6) throw NumericError("fit_ellipse: need at least 6 points");

    // center and scale for conditioning
    double cx = 0.0, cy = 0.0;
    for (const Pixel& p : points) {
        cx += p.x;
        cy += p.y;
    }
    cx /= points.size();
    cy /= points.size();
    double s = 0.0;
    for (const Pixel& p : points) s += std::abs(p.x - cx) + std::abs(p.y - cy);
    s /= 2.0 * points.size();
    if (s <= 0.0) throw NumericError("fit_ellipse: degenerate point scatter");

    // split scatter matrices: D1 = [x^2 xy y^2], D2 = [x y 1]
    double s1[3][3] = {}, s2[3][3] = {}, s3[3][3] = {};
    for (const Pixel& p : points) {
        const double x = (p.x - cx) / s, y = (p.y - cy) / s;
        const double d1[3] = {x * x, x * y, y * y};
        const double d2[3] = {x, y, 1.0};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                s1[i][j] += d1[i] * d1[j];
                s2[i][j] += d1[i] * d2[j];
                s3[i][j] += d2[i] * d2[j];
            }
    }

    // T = -S3^-1 S2^T
    std::vector<double> s3m(9), rhs(9);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            s3m[i * 3 + j] = s3[i][j];
            rhs[i * 3 + j] = -s2[j][i];
        }
    solve_linear(s3m, rhs, 3, 3, "fit_ellipse: rank-deficient point scatter");
    double t[3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) t[i][j] = rhs[i * 3 + j];

    // M = C1^-1 (S1 + S2 T); C1^-1 = [[0 0 .5], [0 -1 0], [.5 0 0]]
    double m0[3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double v = s1[i][j];
            for (int k = 0; k < 3; ++k) v += s2[i][k] * t[k][j];
            m0[i][j] = v;
        }
    double m[3][3];
    for (int j = 0; j < 3; ++j) {
        m[0][j] = m0[2][j] / 2.0;
        m[1][j] = -m0[1][j];
        m[2][j] = m0[0][j] / 2.0;
    }

    // eigenvector of m with 4ac - b^2 > 0
    const double tr = m[0][0] + m[1][1] + m[2][2];
    const double sum_minors = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] -
                              m[0][2] * m[2][0] + m[1][1] * m[2][2] - m[1][2] * m[2][1];
    const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                       m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                       m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    std::vector<double> eigenvalues;
    cubic_roots(-tr, sum_minors, -det, eigenvalues);

    double a1[3] = {0, 0, 0};
    bool found = false;
    double best_cond = 0.0;
    for (double lam : eigenvalues) {
        // null space of (m - lam I) from cross products of its rows
        double r0[3] = {m[0][0] - lam, m[0][1], m[0][2]};
        double r1[3] = {m[1][0], m[1][1] - lam, m[1][2]};
        double r2[3] = {m[2][0], m[2][1], m[2][2] - lam};
        double c01[3] = {r0[1] * r1[2] - r0[2] * r1[1], r0[2] * r1[0] - r0[0] * r1[2],
                         r0[0] * r1[1] - r0[1] * r1[0]};
        double c02[3] = {r0[1] * r2[2] - r0[2] * r2[1], r0[2] * r2[0] - r0[0] * r2[2],
                         r0[0] * r2[1] - r0[1] * r2[0]};
        double c12[3] = {r1[1] * r2[2] - r1[2] * r2[1], r1[2] * r2[0] - r1[0] * r2[2],
                         r1[0] * r2[1] - r1[1] * r2[0]};
        double* v = c01;
        auto norm2 = [](const double* w) { return w[0] * w[0] + w[1] * w[1] + w[2] * w[2]; };
        if (norm2(c02) > norm2(v)) v = c02;
        if (norm2(c12) > norm2(v)) v = c12;
        if (norm2(v) == 0.0) continue;
        const double cond = 4.0 * v[0] * v[2] - v[1] * v[1];
        if (cond > 0.0 && (!found || cond / norm2(v) > best_cond)) {
            found = true;
            best_cond = cond / norm2(v);
            std::copy(v, v + 3, a1);
        }
    }
    if (!found) throw NumericError("fit_ellipse: no ellipse solution (degenerate data)");

    double a2[3];
    for (int i = 0; i < 3; ++i)
        a2[i] = t[i][0] * a1[0] + t[i][1] * a1[1] + t[i][2] * a1[2];

    // conic in normalized frame
    double A = a1[0], B = a1[1], C = a1[2], D = a2[0], E = a2[1], F = a2[2];
    // undo normalization x = (X - cx)/s, y = (Y - cy)/s
    const double A2 = A / (s * s), B2 = B / (s * s), C2 = C / (s * s);
    const double D2 = D / s - (2.0 * A * cx + B * cy) / (s * s);
    const double E2 = E / s - (B * cx + 2.0 * C * cy) / (s * s);
    const double F2 = F + (A * cx * cx + B * cx * cy + C * cy * cy) / (s * s) -
                      (D * cx + E * cy) / s;
    A = A2, B = B2, C = C2, D = D2, E = E2, F = F2;

    // center from the zero-gradient system
    const double det_q = 4.0 * A * C - B * B;
    if (det_q <= 0.0) throw NumericError("fit_ellipse: fit is not an ellipse");
    Ellipse e;
    e.center.x = (B * E - 2.0 * C * D) / det_q;
    e.center.y = (B * D - 2.0 * A * E) / det_q;
    double fc = A * e.center.x * e.center.x + B * e.center.x * e.center.y +
                C * e.center.y * e.center.y + D * e.center.x + E * e.center.y + F;
    if (fc > 0.0) {
        A = -A, B = -B, C = -C, fc = -fc;
    }
    if (fc >= 0.0) throw NumericError("fit_ellipse: degenerate (zero-area) ellipse");

    // principal axes from the symmetric quadratic form [[A, B/2], [B/2, C]]
    const double half = (A + C) / 2.0;
    const double d = std::sqrt((A - C) * (A - C) / 4.0 + B * B / 4.0);
    const double lam_small = half - d, lam_big = half + d;
    if (lam_small <= 0.0) throw NumericError("fit_ellipse: fit is not an ellipse");
    e.semi_major = std::sqrt(-fc / lam_small);
    e.semi_minor = std::sqrt(-fc / lam_big);

    if (e.semi_major / e.semi_minor - 1.0 <= 1e-3) {
        e.angle = 0.0;  // near-circular: orientation is ill-defined
    } else {
        // eigenvector for the small eigenvalue = major axis direction
        const double mat_scale = std::abs(A) + std::abs(B) + std::abs(C);
        double vx = B / 2.0, vy = lam_small - A;
        if (std::abs(vx) + std::abs(vy) <= 1e-12 * mat_scale) {
            vx = lam_small - C;
            vy = B / 2.0;
        }
        if (std::abs(vx) + std::abs(vy) <= 1e-12 * mat_scale) {
            e.angle = 0.0;
        } else {
            double ang = std::atan2(vy, vx);
            if (ang < 0.0) ang += M_PI;
            if (ang >= M_PI) ang -= M_PI;
            e.angle = ang;
        }
    }
    return e;
}

LandmarkQuad ellipse_vertices(const Ellipse& e) {
    const double c = std::cos(e.angle), s = std::sin(e.angle);
    return LandmarkQuad{
        Vec2{e.center.x + e.semi_major * c, e.center.y + e.semi_major * s},
        Vec2{e.center.x - e.semi_major * c, e.center.y - e.semi_major * s},
        Vec2{e.center.x - e.semi_minor * s, e.center.y + e.semi_minor * c},
        Vec2{e.center.x + e.semi_minor * s, e.center.y - e.semi_minor * c},
    };
}

TpsWarp solve_tps(const LandmarkQuad& source, const LandmarkQuad& target) {
    constexpr int n = 7;
    std::vector<double> l(n * n, 0.0), rhs(n * 2, 0.0);
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) l[i * n + j] = tps_kernel(dist(source[i], source[j]));
        l[i * n + 4] = 1.0;
        l[i * n + 5] = source[i].x;
        l[i * n + 6] = source[i].y;
        l[(4) * n + i] = 1.0;
        l[(5) * n + i] = source[i].x;
        l[(6) * n + i] = source[i].y;
        rhs[i * 2 + 0] = target[i].x;
        rhs[i * 2 + 1] = target[i].y;
    }
    solve_linear(l, rhs, n, 2, "solve_tps: collinear landmarks (singular system)");

    TpsWarp warp;
    warp.source_landmarks = source;
    for (int i = 0; i < 4; ++i) {
        warp.kernel_weights[i][0] = rhs[i * 2 + 0];
        warp.kernel_weights[i][1] = rhs[i * 2 + 1];
    }
    for (int i = 0; i < 3; ++i) {
        warp.affine[i][0] = rhs[(4 + i) * 2 + 0];
        warp.affine[i][1] = rhs[(4 + i) * 2 + 1];
    }
    return warp;
}

LabeledImage apply_tps(const TpsWarp& warp, const LabeledImage& moving, int out_w, int out_h) {
    LabeledImage out{GrayImage(out_w, out_h), BinaryMask(out_w, out_h)};
    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            const Vec2 src = warp({static_cast<double>(x), static_cast<double>(y)});
            const long xi = std::lround(src.x);
            const long yi = std::lround(src.y);
            if (xi < 0 || xi >= moving.image.width || yi < 0 || yi >= moving.image.height)
                continue;  // 0 / background
            out.image.at(x, y) = moving.image.at(static_cast<int>(xi), static_cast<int>(yi));
            out.mask.at(x, y) = moving.mask.at(static_cast<int>(xi), static_cast<int>(yi));
        }
    }
    return out;
}

namespace {

// Per axis, pick the endpoint orientation minimizing squared displacement.
LandmarkQuad match_orientation(const LandmarkQuad& fixed, const LandmarkQuad& moving) {
    LandmarkQuad matched = moving;
    for (int axis = 0; axis < 2; ++axis) {
        const int i = 2 * axis, j = 2 * axis + 1;
        const double keep = dist(fixed[i], moving[i]) * dist(fixed[i], moving[i]) +
                            dist(fixed[j], moving[j]) * dist(fixed[j], moving[j]);
        const double swap = dist(fixed[i], moving[j]) * dist(fixed[i], moving[j]) +
                            dist(fixed[j], moving[i]) * dist(fixed[j], moving[i]);
        if (swap < keep) std::swap(matched[i], matched[j]);
    }
    return matched;
}

}  // namespace

std::vector<LabeledImage> augment_dataset(const std::vector<LabeledImage>& train) {
    const size_t n = train.size();
    std::vector<LandmarkQuad> quads(n);
    for (size_t i = 0; i < n; ++i) {
        try {
            const Contour c = boundary_of_mask(train[i].mask);
            quads[i] = ellipse_vertices(fit_ellipse(c.points));
        } catch (const std::exception& e) {
            throw NumericError("augment_dataset: item " + std::to_string(i) + ": " + e.what());
        }
    }

    std::vector<LabeledImage> out;
    out.reserve(2 * n * (n - 1) + n);
    for (const LabeledImage& item : train) out.push_back(item);
    for (size_t m = 0; m < n; ++m) {
        for (size_t f = 0; f < n; ++f) {
            if (m == f) continue;
            const LandmarkQuad target = match_orientation(quads[f], quads[m]);
            const TpsWarp warp = solve_tps(quads[f], target);
            LabeledImage warped =
                apply_tps(warp, train[m], train[f].image.width, train[f].image.height);
            out.push_back(warped);
            out.push_back({flip_horizontal(warped.image), flip_horizontal(warped.mask)});
        }
    }
    return out;
}

}  // namespace bseg

#include "core/nets.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "core/errors.hpp"

namespace bseg {

namespace {

void check_conv_shapes(const Tensor& x, const Tensor& w, const Tensor& b, bool transposed) {
    if (x.shape.size() != 3 || w.shape.size() != 4 || b.shape.size() != 1)
        throw DataError("conv: rank mismatch");
    if (w.dim(2) != w.dim(3) || w.dim(2) % 2 == 0)
        throw DataError("conv: filter must be square with odd size");
    if (x.dim(0) != w.dim(1))
        throw DataError("conv: input channels " + std::to_string(x.dim(0)) +
                        " do not match filter channels " + std::to_string(w.dim(1)));
    if (b.dim(0) != w.dim(0)) throw DataError("conv: bias size does not match output channels");
    (void)transposed;
}

// The pre-activation clamp keeps the regression head out of deep saturation:
// beyond +-8 the sigmoid derivative underflows toward zero and a collapsed
// (all-background) prediction could never recover the boundary ridge.
inline double sigmoid_clamped(double z) {
    z = std::clamp(z, -8.0, 8.0);
    return 1.0 / (1.0 + std::exp(-z));
}

// Row kernels. Vector forms only pay off on long rows; the 1/8-resolution
// layers run 8-wide rows where scalar loops win. Each form fixes one
// summation order, so results are reproducible run to run.
constexpr int kVecMin = 16;

inline void axpy(double* y, const double* x, double w, int n) {
    if (n >= kVecMin) {
#pragma omp simd
        for (int i = 0; i < n; ++i) y[i] += w * x[i];
    } else {
        for (int i = 0; i < n; ++i) y[i] += w * x[i];
    }
}

// y[2i] += w * x[i]; strided stores do not vectorize profitably
inline void axpy_scatter2(double* y, const double* x, double w, int n) {
    for (int i = 0; i < n; ++i) y[2 * i] += w * x[i];
}

inline double dot(const double* a, const double* b, int n) {
    double acc = 0.0;
    if (n >= kVecMin) {
#pragma omp simd reduction(+ : acc)
        for (int i = 0; i < n; ++i) acc += a[i] * b[i];
    } else {
        for (int i = 0; i < n; ++i) acc += a[i] * b[i];
    }
    return acc;
}

// sum of a[i] * b[2i]
inline double dot_gather2(const double* a, const double* b, int n) {
    double acc = 0.0;
    if (n >= kVecMin) {
#pragma omp simd reduction(+ : acc)
        for (int i = 0; i < n; ++i) acc += a[i] * b[2 * i];
    } else {
        for (int i = 0; i < n; ++i) acc += a[i] * b[2 * i];
    }
    return acc;
}

}  // namespace

// K > 0 fixes the filter size at compile time so the tap loops unroll.
template <int K>
Tensor conv_forward_t(const Tensor& x, const Tensor& w, const Tensor& b, int stride) {
    check_conv_shapes(x, w, b, false);
    if (stride != 1 && stride != 2) throw DataError("conv: stride must be 1 or 2");
    const int ic = x.dim(0), h = x.dim(1), wd = x.dim(2);
    const int oc = w.dim(0), k = K > 0 ? K : w.dim(2), p = (k - 1) / 2;
    if (stride == 2 && (h % 2 || wd % 2)) throw DataError("conv: stride-2 needs even dims");
    const int oh = h / stride, ow = wd / stride;

    Tensor y{oc, oh, ow};
    // stencil form: all taps of one kernel row fused per output element, the
    // interior vectorized over ox with shifted loads
    const int ox_lo = std::min(ow, (p + stride - 1) / stride);
    const int ox_hi = std::min(ow - 1, (wd - k + p) / stride);
    for (int o = 0; o < oc; ++o) {
        double* yb = y.ptr() + static_cast<size_t>(o) * oh * ow;
        const double bias = b.data[o];
        for (int i = 0; i < oh * ow; ++i) yb[i] = bias;
        for (int c = 0; c < ic; ++c) {
            const double* xb = x.ptr() + static_cast<size_t>(c) * h * wd;
            const double* wb = w.ptr() + (static_cast<size_t>(o) * ic + c) * k * k;
            for (int ky = 0; ky < k; ++ky) {
                const double* wk = wb + static_cast<size_t>(ky) * k;
                for (int oy = 0; oy < oh; ++oy) {
                    const int iy = stride * oy + ky - p;
                    if (iy < 0 || iy >= h) continue;
                    const double* xr = xb + static_cast<size_t>(iy) * wd;
                    double* yr = yb + static_cast<size_t>(oy) * ow;
                    auto edge = [&](int ox) {
                        const int base = stride * ox - p;
                        double acc = 0.0;
                        for (int t = 0; t < k; ++t) {
                            const int ix = base + t;
                            if (ix >= 0 && ix < wd) acc += wk[t] * xr[ix];
                        }
                        yr[ox] += acc;
                    };
                    for (int ox = 0; ox < ox_lo; ++ox) edge(ox);
                    if (stride == 1) {
                        const double* xs = xr - p;
#pragma omp simd
                        for (int ox = ox_lo; ox <= ox_hi; ++ox) {
                            double acc = 0.0;
                            for (int t = 0; t < k; ++t) acc += wk[t] * xs[ox + t];
                            yr[ox] += acc;
                        }
                    } else {
                        const double* xs = xr - p;
#pragma omp simd
                        for (int ox = ox_lo; ox <= ox_hi; ++ox) {
                            double acc = 0.0;
                            for (int t = 0; t < k; ++t) acc += wk[t] * xs[2 * ox + t];
                            yr[ox] += acc;
                        }
                    }
                    for (int ox = std::max(ox_lo, ox_hi + 1); ox < ow; ++ox) edge(ox);
                }
            }
        }
    }
    return y;
}

Tensor conv_forward(const Tensor& x, const Tensor& w, const Tensor& b, int stride) {
    switch (w.shape.size() == 4 ? w.dim(2) : 0) {
        case 1:
            return conv_forward_t<1>(x, w, b, stride);
        case 3:
            return conv_forward_t<3>(x, w, b, stride);
        case 5:
            return conv_forward_t<5>(x, w, b, stride);
        default:
            return conv_forward_t<0>(x, w, b, stride);
    }
}

template <int K>
void conv_backward_t(const Tensor& x, const Tensor& w, int stride, const Tensor& dy, Tensor* dx,
                     Tensor* dw, Tensor* db) {
    const int ic = x.dim(0), h = x.dim(1), wd = x.dim(2);
    const int oc = w.dim(0), k = K > 0 ? K : w.dim(2), p = (k - 1) / 2;
    const int oh = dy.dim(1), ow = dy.dim(2);

    if (db) {
        for (int o = 0; o < oc; ++o) {
            const double* dyb = dy.ptr() + static_cast<size_t>(o) * oh * ow;
            double acc = 0.0;
            for (int i = 0; i < oh * ow; ++i) acc += dyb[i];
            db->data[o] += acc;
        }
    }
    for (int o = 0; o < oc; ++o) {
        const double* dyb = dy.ptr() + static_cast<size_t>(o) * oh * ow;
        for (int c = 0; c < ic; ++c) {
            const double* xb = x.ptr() + static_cast<size_t>(c) * h * wd;
            double* dxb = dx ? dx->ptr() + static_cast<size_t>(c) * h * wd : nullptr;
            const double* wb = w.ptr() + (static_cast<size_t>(o) * ic + c) * k * k;
            double* dwb = dw ? dw->ptr() + (static_cast<size_t>(o) * ic + c) * k * k : nullptr;
            if (ow < kVecMin) {
                // short rows: fuse all taps per output element
                for (int ky = 0; ky < k; ++ky) {
                    const double* wk = wb + static_cast<size_t>(ky) * k;
                    double* dwk = dwb ? dwb + static_cast<size_t>(ky) * k : nullptr;
                    for (int oy = 0; oy < oh; ++oy) {
                        const int iy = stride * oy + ky - p;
                        if (iy < 0 || iy >= h) continue;
                        const double* dyr = dyb + static_cast<size_t>(oy) * ow;
                        const double* xr = xb + static_cast<size_t>(iy) * wd;
                        double* dxr = dxb ? dxb + static_cast<size_t>(iy) * wd : nullptr;
                        for (int ox = 0; ox < ow; ++ox) {
                            const double g = dyr[ox];
                            const int base = stride * ox - p;
                            if (base >= 0 && base + k <= wd) {
                                if (dwk) {
                                    const double* xp = xr + base;
                                    for (int t = 0; t < k; ++t) dwk[t] += g * xp[t];
                                }
                                if (dxr) {
                                    double* dxp = dxr + base;
                                    for (int t = 0; t < k; ++t) dxp[t] += wk[t] * g;
                                }
                            } else {
                                for (int t = 0; t < k; ++t) {
                                    const int ix = base + t;
                                    if (ix < 0 || ix >= wd) continue;
                                    if (dwk) dwk[t] += g * xr[ix];
                                    if (dxr) dxr[ix] += wk[t] * g;
                                }
                            }
                        }
                    }
                }
            } else {
                for (int ky = 0; ky < k; ++ky) {
                    for (int kx = 0; kx < k; ++kx) {
                        const double wv = wb[ky * k + kx];
                        double wacc = 0.0;
                        for (int oy = 0; oy < oh; ++oy) {
                            const int iy = stride * oy + ky - p;
                            if (iy < 0 || iy >= h) continue;
                            const double* dyr = dyb + static_cast<size_t>(oy) * ow;
                            const double* xr = xb + static_cast<size_t>(iy) * wd + kx - p;
                            double* dxr =
                                dxb ? dxb + static_cast<size_t>(iy) * wd + kx - p : nullptr;
                            int ox0 = 0, ox1 = ow - 1;
                            while (ox0 <= ox1 && stride * ox0 + kx - p < 0) ++ox0;
                            while (ox1 >= ox0 && stride * ox1 + kx - p >= wd) --ox1;
                            const int n = ox1 - ox0 + 1;
                            if (n <= 0) continue;
                            if (dwb) {
                                if (stride == 1)
                                    wacc += dot(dyr + ox0, xr + ox0, n);
                                else
                                    wacc += dot_gather2(dyr + ox0, xr + 2 * ox0, n);
                            }
                            if (dxr && wv != 0.0) {
                                if (stride == 1)
                                    axpy(dxr + ox0, dyr + ox0, wv, n);
                                else
                                    axpy_scatter2(dxr + 2 * ox0, dyr + ox0, wv, n);
                            }
                        }
                        if (dwb) dwb[ky * k + kx] += wacc;
                    }
                }
            }
        }
    }
}

void conv_backward(const Tensor& x, const Tensor& w, int stride, const Tensor& dy, Tensor* dx,
                   Tensor* dw, Tensor* db) {
    switch (w.shape.size() == 4 ? w.dim(2) : 0) {
        case 1:
            return conv_backward_t<1>(x, w, stride, dy, dx, dw, db);
        case 3:
            return conv_backward_t<3>(x, w, stride, dy, dx, dw, db);
        case 5:
            return conv_backward_t<5>(x, w, stride, dy, dx, dw, db);
        default:
            return conv_backward_t<0>(x, w, stride, dy, dx, dw, db);
    }
}

template <int K>
Tensor deconv_forward_t(const Tensor& x, const Tensor& w, const Tensor& b) {
    check_conv_shapes(x, w, b, true);
    const int ic = x.dim(0), h = x.dim(1), wd = x.dim(2);
    const int oc = w.dim(0), k = K > 0 ? K : w.dim(2);
    const int oh = 2 * h, ow = 2 * wd;
    // output index = 2 * input index + tap - 1 covers [0, 2n) exactly for k=5
    const int pad = (k - 3) / 2;

    Tensor y{oc, oh, ow};
    for (int o = 0; o < oc; ++o) {
        double* yb = y.ptr() + static_cast<size_t>(o) * oh * ow;
        const double bias = b.data[o];
        for (int i = 0; i < oh * ow; ++i) yb[i] = bias;
        for (int c = 0; c < ic; ++c) {
            const double* xb = x.ptr() + static_cast<size_t>(c) * h * wd;
            const double* wb = w.ptr() + (static_cast<size_t>(o) * ic + c) * k * k;
            for (int ky = 0; ky < k; ++ky) {
                const double* wk = wb + static_cast<size_t>(ky) * k;
                for (int iy = 0; iy < h; ++iy) {
                    const int oy = 2 * iy + ky - pad;
                    if (oy < 0 || oy >= oh) continue;
                    const double* xr = xb + static_cast<size_t>(iy) * wd;
                    double* yrow = yb + static_cast<size_t>(oy) * ow;
                    // all taps of one kernel row per input element; skipping
                    // exact zeros (rectified inputs) changes nothing
                    for (int ix = 0; ix < wd; ++ix) {
                        const double xv = xr[ix];
                        if (xv == 0.0) continue;
                        const int base = 2 * ix - pad;
                        if (base >= 0 && base + k <= ow) {
                            double* yp = yrow + base;
                            for (int t = 0; t < k; ++t) yp[t] += wk[t] * xv;
                        } else {
                            for (int t = 0; t < k; ++t) {
                                const int ox = base + t;
                                if (ox >= 0 && ox < ow) yrow[ox] += wk[t] * xv;
                            }
                        }
                    }
                }
            }
        }
    }
    return y;
}

Tensor deconv_forward_linear(const Tensor& x, const Tensor& w, const Tensor& b) {
    switch (w.shape.size() == 4 ? w.dim(2) : 0) {
        case 3:
            return deconv_forward_t<3>(x, w, b);
        case 5:
            return deconv_forward_t<5>(x, w, b);
        default:
            return deconv_forward_t<0>(x, w, b);
    }
}

template <int K>
void deconv_backward_t(const Tensor& x, const Tensor& w, const Tensor& dy, Tensor* dx,
                       Tensor* dw, Tensor* db) {
    const int ic = x.dim(0), h = x.dim(1), wd = x.dim(2);
    const int oc = w.dim(0), k = K > 0 ? K : w.dim(2);
    const int oh = dy.dim(1), ow = dy.dim(2);
    const int pad = (k - 3) / 2;

    if (db) {
        for (int o = 0; o < oc; ++o) {
            const double* dyb = dy.ptr() + static_cast<size_t>(o) * oh * ow;
            double acc = 0.0;
            for (int i = 0; i < oh * ow; ++i) acc += dyb[i];
            db->data[o] += acc;
        }
    }
    for (int o = 0; o < oc; ++o) {
        const double* dyb = dy.ptr() + static_cast<size_t>(o) * oh * ow;
        for (int c = 0; c < ic; ++c) {
            const double* xb = x.ptr() + static_cast<size_t>(c) * h * wd;
            double* dxb = dx ? dx->ptr() + static_cast<size_t>(c) * h * wd : nullptr;
            const double* wb = w.ptr() + (static_cast<size_t>(o) * ic + c) * k * k;
            double* dwb = dw ? dw->ptr() + (static_cast<size_t>(o) * ic + c) * k * k : nullptr;
            // fuse all taps of one kernel row per input element: the dy patch
            // is read once for both the weight and the input gradients
            for (int ky = 0; ky < k; ++ky) {
                const double* wk = wb + static_cast<size_t>(ky) * k;
                double* dwk = dwb ? dwb + static_cast<size_t>(ky) * k : nullptr;
                for (int iy = 0; iy < h; ++iy) {
                    const int oy = 2 * iy + ky - pad;
                    if (oy < 0 || oy >= oh) continue;
                    const double* dyrow = dyb + static_cast<size_t>(oy) * ow;
                    const double* xr = xb + static_cast<size_t>(iy) * wd;
                    double* dxr = dxb ? dxb + static_cast<size_t>(iy) * wd : nullptr;
                    for (int ix = 0; ix < wd; ++ix) {
                        const double xv = xr[ix];
                        const int base = 2 * ix - pad;
                        double acc = 0.0;
                        if (base >= 0 && base + k <= ow) {
                            const double* dyp = dyrow + base;
                            if (dwk)
                                for (int t = 0; t < k; ++t) dwk[t] += xv * dyp[t];
                            if (dxr)
                                for (int t = 0; t < k; ++t) acc += wk[t] * dyp[t];
                        } else {
                            for (int t = 0; t < k; ++t) {
                                const int ox = base + t;
                                if (ox < 0 || ox >= ow) continue;
                                if (dwk) dwk[t] += xv * dyrow[ox];
                                if (dxr) acc += wk[t] * dyrow[ox];
                            }
                        }
                        if (dxr) dxr[ix] += acc;
                    }
                }
            }
        }
    }
}

void deconv_backward(const Tensor& x, const Tensor& w, const Tensor& dy, Tensor* dx, Tensor* dw,
                     Tensor* db) {
    switch (w.shape.size() == 4 ? w.dim(2) : 0) {
        case 3:
            return deconv_backward_t<3>(x, w, dy, dx, dw, db);
        case 5:
            return deconv_backward_t<5>(x, w, dy, dx, dw, db);
        default:
            return deconv_backward_t<0>(x, w, dy, dx, dw, db);
    }
}

Tensor deconv_forward(const Tensor& x, const Tensor& w, const Tensor& b) {
    Tensor y = deconv_forward_linear(x, w, b);
    for (double& v : y.data) v = std::max(0.0, v);
    return y;
}

Tensor softmax2(const Tensor& logits) {
    if (logits.shape.size() != 3 || logits.dim(0) != 2)
        throw DataError("softmax2: expected a (2, h, w) tensor");
    const int n = logits.dim(1) * logits.dim(2);
    Tensor probs = Tensor::zeros_like(logits);
    const double* z0 = logits.ptr();
    const double* z1 = logits.ptr() + n;
    double* p0 = probs.ptr();
    double* p1 = probs.ptr() + n;
    for (int i = 0; i < n; ++i) {
        const double m = std::max(z0[i], z1[i]);
        const double e0 = std::exp(z0[i] - m);
        const double e1 = std::exp(z1[i] - m);
        const double inv = 1.0 / (e0 + e1);
        p0[i] = e0 * inv;
        p1[i] = e1 * inv;
    }
    return probs;
}

// ---------------------------------------------------------------------------
// network containers

size_t NetParams::param_count() const {
    size_t n = 0;
    for (const ConvParams& l : layers) n += l.w.size() + l.b.size();
    return n;
}

void NetParams::accumulate(const NetParams& g) {
    for (size_t i = 0; i < layers.size(); ++i) {
        for (size_t j = 0; j < layers[i].w.size(); ++j) layers[i].w.data[j] += g.layers[i].w.data[j];
        for (size_t j = 0; j < layers[i].b.size(); ++j) layers[i].b.data[j] += g.layers[i].b.data[j];
    }
}

void NetParams::scale(double f) {
    for (ConvParams& l : layers) {
        for (double& v : l.w.data) v *= f;
        for (double& v : l.b.data) v *= f;
    }
}

namespace {

NetParams alloc_params(const NetDef& def) {
    NetParams p;
    p.layers.reserve(def.layers.size());
    for (const LayerSpec& l : def.layers) {
        ConvParams cp;
        cp.w = Tensor{l.out_ch, l.in_ch, l.filter, l.filter};
        cp.b = Tensor{l.out_ch};
        p.layers.push_back(std::move(cp));
    }
    return p;
}

}  // namespace

Tensor net_forward(const NetDef& def, const NetParams& params, const Tensor& x, NetCache* cache) {
    if (cache) {
        cache->input = x;
        cache->pre.clear();
        cache->post.clear();
    }
    Tensor cur = x;
    for (size_t i = 0; i < def.layers.size(); ++i) {
        const LayerSpec& l = def.layers[i];
        const ConvParams& cp = params.layers[i];
        Tensor pre = l.transposed ? deconv_forward_linear(cur, cp.w, cp.b)
                                  : conv_forward(cur, cp.w, cp.b, l.stride);
        Tensor post = pre;
        switch (l.act) {
            case Activation::None:
                break;
            case Activation::Relu:
                for (double& v : post.data) v = std::max(0.0, v);
                break;
            case Activation::Sigmoid:
                for (double& v : post.data) v = sigmoid_clamped(v);
                break;
        }
        if (cache) {
            cache->pre.push_back(std::move(pre));
            cache->post.push_back(post);
        }
        cur = std::move(post);
    }
    return cur;
}

Tensor net_backward(const NetDef& def, const NetParams& params, const NetCache& cache,
                    const Tensor& dy, NetParams* grads) {
    Tensor cur = dy;
    for (int i = static_cast<int>(def.layers.size()) - 1; i >= 0; --i) {
        const LayerSpec& l = def.layers[static_cast<size_t>(i)];
        const ConvParams& cp = params.layers[static_cast<size_t>(i)];
        const Tensor& pre = cache.pre[static_cast<size_t>(i)];
        // activation backward
        switch (l.act) {
            case Activation::None:
                break;
            case Activation::Relu:
                for (size_t j = 0; j < cur.size(); ++j)
                    if (pre.data[j] <= 0.0) cur.data[j] = 0.0;
                break;
            case Activation::Sigmoid:
                for (size_t j = 0; j < cur.size(); ++j) {
                    const double s = sigmoid_clamped(pre.data[j]);
                    cur.data[j] *= s * (1.0 - s);
                }
                break;
        }
        const Tensor& x = i == 0 ? cache.input : cache.post[static_cast<size_t>(i) - 1];
        Tensor dx = Tensor::zeros_like(x);
        Tensor* dw = grads ? &grads->layers[static_cast<size_t>(i)].w : nullptr;
        Tensor* db = grads ? &grads->layers[static_cast<size_t>(i)].b : nullptr;
        if (l.transposed)
            deconv_backward(x, cp.w, cur, &dx, dw, db);
        else
            conv_backward(x, cp.w, l.stride, cur, &dx, dw, db);
        cur = std::move(dx);
    }
    return cur;
}

BoundaryWidths boundary_widths_from(int deconv_width) {
    if (deconv_width < 12 || deconv_width % 12 != 0)
        throw DataError("deconv width must be a positive multiple of 12");
    BoundaryWidths w;
    w.proj = deconv_width;
    w.dec1 = deconv_width / 2;
    w.dec2 = deconv_width / 4;
    w.enc1 = std::max(2, deconv_width / 6);
    w.enc2 = deconv_width / 3;
    w.enc3 = 2 * deconv_width / 3;
    return w;
}

NetDef boundary_net_def(const BoundaryWidths& w) {
    NetDef def;
    def.layers = {
        {1, w.enc1, 5, 2, false, Activation::Relu},
        {w.enc1, w.enc2, 5, 2, false, Activation::Relu},
        {w.enc2, w.enc3, 5, 2, false, Activation::Relu},
        {w.enc3, w.proj, 3, 1, false, Activation::Relu},
        {w.proj, w.proj, 3, 1, false, Activation::Relu},
        {w.proj, w.dec1, 5, 2, true, Activation::Relu},
        {w.dec1, w.dec2, 5, 2, true, Activation::Relu},
        {w.dec2, 1, 5, 2, true, Activation::Sigmoid},
    };
    return def;
}

NetDef pixel_net_def(int hidden_width) {
    NetDef def;
    def.layers = {
        {3, hidden_width, 3, 1, false, Activation::Relu},
        {hidden_width, hidden_width, 3, 1, false, Activation::Relu},
        {hidden_width, hidden_width, 3, 1, false, Activation::Relu},
        {hidden_width, 2, 1, 1, false, Activation::None},
    };
    return def;
}

Model make_model(const BoundaryWidths& widths, int px_width, double lambda) {
    Model m;
    m.widths = widths;
    m.px_width = px_width;
    m.lambda = lambda;
    m.boundary = alloc_params(m.boundary_def());
    m.pixel = alloc_params(m.pixel_def());
    return m;
}

// ---------------------------------------------------------------------------
// model I/O

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

void append_layer_table(std::string& out, const NetDef& def) {
    put_u32(out, static_cast<uint32_t>(def.layers.size()));
    for (const LayerSpec& l : def.layers) {
        put_u32(out, static_cast<uint32_t>(l.in_ch));
        put_u32(out, static_cast<uint32_t>(l.out_ch));
        put_u32(out, static_cast<uint32_t>(l.filter));
        put_u32(out, static_cast<uint32_t>(l.stride));
        put_u32(out, l.transposed ? 1 : 0);
        put_u32(out, static_cast<uint32_t>(l.act));
    }
}

}  // namespace

void save_model(const Model& m, const std::string& path) {
    std::string out;
    out += "BNET";
    put_u32(out, 1);  // version
    put_f64(out, m.lambda);
    put_u32(out, static_cast<uint32_t>(m.widths.proj));
    put_u32(out, static_cast<uint32_t>(m.px_width));
    append_layer_table(out, m.boundary_def());
    append_layer_table(out, m.pixel_def());
    for (const NetParams* net : {&m.boundary, &m.pixel})
        for (const ConvParams& l : net->layers) {
            for (double v : l.w.data) put_f64(out, v);
            for (double v : l.b.data) put_f64(out, v);
        }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError(path + ": cannot open for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw DataError(path + ": write failed");
}

Model load_model(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError(path + ": cannot open file");
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (bytes.size() < 24 || std::memcmp(bytes.data(), "BNET", 4) != 0)
        throw DataError(path + ": not a BNET model (bad magic at byte 0)");
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    size_t pos = 4;
    auto need = [&](size_t n) {
        if (pos + n > bytes.size()) throw DataError(path + ": truncated model file");
    };
    need(4);
    const uint32_t version = get_u32(p + pos);
    pos += 4;
    if (version != 1) throw DataError(path + ": unsupported BNET version");
    need(8);
    const double lambda = get_f64(p + pos);
    pos += 8;
    need(8);
    const uint32_t deconv_width = get_u32(p + pos);
    const uint32_t px_width = get_u32(p + pos + 4);
    pos += 8;

    Model m = make_model(boundary_widths_from(static_cast<int>(deconv_width)),
                         static_cast<int>(px_width), lambda);

    auto read_table = [&](const NetDef& expect) {
        need(4);
        const uint32_t count = get_u32(p + pos);
        pos += 4;
        if (count != expect.layers.size()) throw DataError(path + ": layer table mismatch");
        for (const LayerSpec& l : expect.layers) {
            need(24);
            const uint32_t vals[6] = {get_u32(p + pos),      get_u32(p + pos + 4),
                                      get_u32(p + pos + 8),  get_u32(p + pos + 12),
                                      get_u32(p + pos + 16), get_u32(p + pos + 20)};
            pos += 24;
            if (vals[0] != static_cast<uint32_t>(l.in_ch) ||
                vals[1] != static_cast<uint32_t>(l.out_ch) ||
                vals[2] != static_cast<uint32_t>(l.filter) ||
                vals[3] != static_cast<uint32_t>(l.stride) || vals[4] != (l.transposed ? 1u : 0u) ||
                vals[5] != static_cast<uint32_t>(l.act))
                throw DataError(path + ": layer table mismatch");
        }
    };
    read_table(m.boundary_def());
    read_table(m.pixel_def());

    for (NetParams* net : {&m.boundary, &m.pixel})
        for (ConvParams& l : net->layers) {
            for (double& v : l.w.data) {
                need(8);
                v = get_f64(p + pos);
                pos += 8;
            }
            for (double& v : l.b.data) {
                need(8);
                v = get_f64(p + pos);
                pos += 8;
            }
        }
    if (pos != bytes.size()) throw DataError(path + ": trailing bytes after parameters");
    return m;
}

// ---------------------------------------------------------------------------
// inference

Tensor image_to_tensor(const GrayImage& img) {
    Tensor t{1, img.height, img.width};
    for (size_t i = 0; i < img.size(); ++i) t.data[i] = img.data[i] / 255.0;
    return t;
}

DistanceMap boundary_net_forward(const Model& m, const GrayImage& img) {
    if (img.width % 8 || img.height % 8)
        throw DataError("boundary net: input dims must be divisible by 8");
    const Tensor x = image_to_tensor(img);
    const Tensor y = net_forward(m.boundary_def(), m.boundary, x, nullptr);
    DistanceMap pred(img.width, img.height, m.lambda);
    pred.data = y.data;
    return pred;
}

Tensor replicate3(const DistanceMap& pred) {
    Tensor t{3, pred.height, pred.width};
    const size_t n = pred.size();
    for (int c = 0; c < 3; ++c)
        std::copy(pred.data.begin(), pred.data.end(), t.data.begin() + c * n);
    return t;
}

Tensor pixel_net_forward(const Model& m, const DistanceMap& pred) {
    // The three input channels replicate the same map, so the first layer is
    // equivalent to a one-channel convolution with channel-summed weights.
    const NetDef full_def = m.pixel_def();
    const LayerSpec& first = full_def.layers[0];
    Tensor w1{first.out_ch, 1, first.filter, first.filter};
    const size_t kk = static_cast<size_t>(first.filter) * first.filter;
    for (int o = 0; o < first.out_ch; ++o)
        for (int c = 0; c < first.in_ch; ++c)
            for (size_t j = 0; j < kk; ++j)
                w1.data[o * kk + j] += m.pixel.layers[0].w.data[(o * first.in_ch + c) * kk + j];

    Tensor x{1, pred.height, pred.width};
    x.data = pred.data;
    Tensor cur = conv_forward(x, w1, m.pixel.layers[0].b, 1);
    for (double& v : cur.data) v = std::max(0.0, v);

    NetDef rest;
    rest.layers.assign(full_def.layers.begin() + 1, full_def.layers.end());
    NetParams rest_params;
    rest_params.layers.assign(m.pixel.layers.begin() + 1, m.pixel.layers.end());
    const Tensor logits = net_forward(rest, rest_params, cur, nullptr);
    return softmax2(logits);
}

BinaryMask argmax_mask(const Tensor& probs) {
    const int h = probs.dim(1), w = probs.dim(2);
    const int n = h * w;
    BinaryMask mask(w, h);
    const double* p0 = probs.ptr();
    const double* p1 = probs.ptr() + n;
    for (int i = 0; i < n; ++i) mask.data[static_cast<size_t>(i)] = p1[i] > p0[i] ? 1 : 0;
    return mask;
}

// ---------------------------------------------------------------------------
// losses

double loss_distance(const DistanceMap& pred, const DistanceMap& target) {
    if (pred.width != target.width || pred.height != target.height)
        throw DataError("loss_distance: dimension mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        const double d = pred.data[i] - target.data[i];
        acc += d * d;
    }
    return acc;
}

double loss_crossentropy(const Tensor& probs, const BinaryMask& mask) {
    if (probs.dim(1) != mask.height || probs.dim(2) != mask.width)
        throw DataError("loss_crossentropy: dimension mismatch");
    const int n = mask.width * mask.height;
    const double* p0 = probs.ptr();
    const double* p1 = probs.ptr() + n;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double pt = mask.data[static_cast<size_t>(i)] ? p1[i] : p0[i];
        acc -= std::log(std::max(pt, 1e-12));
    }
    return acc / n;
}

double loss_multi(double ld, double ls, int tau, const TrainConfig& cfg) {
    if (tau < 0 || tau > cfg.steps) throw DataError("loss_multi: tau outside [0, N]");
    const double frac = static_cast<double>(tau) / cfg.steps;
    return (1.0 - frac) * ld + frac * cfg.gamma * ls;
}

// ---------------------------------------------------------------------------
// optimization

AdamState make_adam_state(const std::vector<const Tensor*>& params) {
    AdamState st;
    st.m.reserve(params.size());
    st.v.reserve(params.size());
    for (const Tensor* p : params) {
        st.m.push_back(Tensor::zeros_like(*p));
        st.v.push_back(Tensor::zeros_like(*p));
    }
    return st;
}

void adam_step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads,
               AdamState& state, double lr) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw DataError("adam_step: parameter/gradient count mismatch");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        const Tensor& g = *grads[i];
        if (!p.same_shape(g)) throw DataError("adam_step: gradient shape mismatch");
        Tensor& m = state.m[i];
        Tensor& v = state.v[i];
        for (size_t j = 0; j < p.size(); ++j) {
            const double gj = g.data[j];
            m.data[j] = state.beta1 * m.data[j] + (1.0 - state.beta1) * gj;
            v.data[j] = state.beta2 * v.data[j] + (1.0 - state.beta2) * gj * gj;
            const double mhat = m.data[j] / bc1;
            const double vhat = v.data[j] / bc2;
            p.data[j] -= lr * mhat / (std::sqrt(vhat) + state.eps);
        }
    }
}

void init_params_normal(NetParams& p, Pcg32& rng, double stddev) {
    for (ConvParams& l : p.layers) {
        for (double& v : l.w.data) v = stddev * rng.normal();
        l.b.fill(0.0);
    }
}

void init_params_xavier(NetParams& p, Pcg32& rng) {
    for (ConvParams& l : p.layers) {
        const int fan_in = l.w.dim(1) * l.w.dim(2) * l.w.dim(3);
        const int fan_out = l.w.dim(0) * l.w.dim(2) * l.w.dim(3);
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        for (double& v : l.w.data) v = rng.uniform(-limit, limit);
        l.b.fill(0.0);
    }
}

}  // namespace bseg

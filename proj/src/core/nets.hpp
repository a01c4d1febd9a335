#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/distance_map.hpp"
#include "core/raster.hpp"
#include "core/rng.hpp"
#include "core/tensor.hpp"

namespace bseg {

// ---------------------------------------------------------------------------
// layers

enum class Activation { None, Relu, Sigmoid };

struct LayerSpec {
    int in_ch = 0;
    int out_ch = 0;
    int filter = 3;       // odd
    int stride = 1;       // 1 or 2
    bool transposed = false;  // stride-2 transposed convolution, doubles dims
    Activation act = Activation::None;
};

struct ConvParams {
    Tensor w;  // (out_ch, in_ch, k, k)
    Tensor b;  // (out_ch)
};

// Cross-correlation with zero same-padding. Stride 1 preserves spatial dims,
// stride 2 halves them (even inputs).
Tensor conv_forward(const Tensor& x, const Tensor& w, const Tensor& b, int stride);

void conv_backward(const Tensor& x, const Tensor& w, int stride, const Tensor& dy, Tensor* dx,
                   Tensor* dw, Tensor* db);

// Stride-2 transposed convolution; output dims are exactly double the input
// dims. No activation applied.
Tensor deconv_forward_linear(const Tensor& x, const Tensor& w, const Tensor& b);

void deconv_backward(const Tensor& x, const Tensor& w, const Tensor& dy, Tensor* dx, Tensor* dw,
                     Tensor* db);

// Transposed convolution followed by the rectifier, matching the upsampling
// layer definition used by the regression decoder.
Tensor deconv_forward(const Tensor& x, const Tensor& w, const Tensor& b);

// Per-pixel 2-way softmax over a (2, h, w) logit tensor.
Tensor softmax2(const Tensor& logits);

// ---------------------------------------------------------------------------
// networks

struct NetDef {
    std::vector<LayerSpec> layers;
};

struct NetParams {
    std::vector<ConvParams> layers;

    size_t param_count() const;
    void accumulate(const NetParams& g);  // elementwise +=
    void scale(double f);
};

struct NetCache {
    Tensor input;
    std::vector<Tensor> pre;   // pre-activation per layer
    std::vector<Tensor> post;  // post-activation per layer
};

Tensor net_forward(const NetDef& def, const NetParams& params, const Tensor& x, NetCache* cache);

// dy is the gradient at the network output; returns the gradient at the
// input and accumulates parameter gradients into grads (shaped like params).
Tensor net_backward(const NetDef& def, const NetParams& params, const NetCache& cache,
                    const Tensor& dy, NetParams* grads);

// Boundary regression widths: three stride-2 encoder blocks, a two-layer
// projection, and three doubling transposed-conv layers ending in one channel.
struct BoundaryWidths {
    int enc1 = 8;
    int enc2 = 16;
    int enc3 = 32;
    int proj = 48;  // input width of the first transposed conv
    int dec1 = 24;
    int dec2 = 12;
};

BoundaryWidths boundary_widths_from(int deconv_width);
NetDef boundary_net_def(const BoundaryWidths& w);
NetDef pixel_net_def(int hidden_width);

// ---------------------------------------------------------------------------
// model

struct Model {
    BoundaryWidths widths;
    int px_width = 3;
    double lambda = 1.0;
    NetParams boundary;
    NetParams pixel;

    NetDef boundary_def() const { return boundary_net_def(widths); }
    NetDef pixel_def() const { return pixel_net_def(px_width); }
};

Model make_model(const BoundaryWidths& widths, int px_width, double lambda);

// Intensities scaled by 1/255 into a (1, h, w) tensor.
Tensor image_to_tensor(const GrayImage& img);
// Distance map copied into each of 3 channels.
Tensor replicate3(const DistanceMap& pred);

// BNET container: magic, version, lambda, layer table, then raw LE doubles.
void save_model(const Model& m, const std::string& path);
Model load_model(const std::string& path);

// Image intensities are scaled by 1/255 at the network entry. Input dims must
// be divisible by 8.
DistanceMap boundary_net_forward(const Model& m, const GrayImage& img);

// Replicates the predicted map into 3 channels, runs the classification
// stack, and returns per-pixel class probabilities (2, h, w).
Tensor pixel_net_forward(const Model& m, const DistanceMap& pred);

BinaryMask argmax_mask(const Tensor& probs);

// ---------------------------------------------------------------------------
// losses

// Sum over pixels of the squared prediction error.
double loss_distance(const DistanceMap& pred, const DistanceMap& target);

// Mean over pixels of -ln(probability of the true class); probabilities are
// clamped at 1e-12.
double loss_crossentropy(const Tensor& probs, const BinaryMask& mask);

struct TrainConfig {
    int steps = 3000;  // N; updates run at tau = 0..N inclusive
    double gamma = 1.0;
    double lambda = 1.0;
    double learning_rate = 1e-4;
    int batch = 8;
    uint64_t seed = 7;
    int image_size = 64;
    int deconv_width = 48;
    int px_width = 3;
    bool end_to_end = true;  // false trains the distance loss only
    bool xavier_init = true; // false uses Normal(0, 0.001) filters
    int val_interval = 500;
};

// Multi-loss schedule value at step tau of N.
double loss_multi(double ld, double ls, int tau, const TrainConfig& cfg);

// ---------------------------------------------------------------------------
// optimization

struct AdamState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

AdamState make_adam_state(const std::vector<const Tensor*>& params);
void adam_step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads,
               AdamState& state, double lr);

// Paper initialization: filters ~ Normal(0, 0.001), biases 0.
void init_params_normal(NetParams& p, Pcg32& rng, double stddev = 0.001);
// Xavier-uniform initialization, biases 0.
void init_params_xavier(NetParams& p, Pcg32& rng);

// ---------------------------------------------------------------------------
// training

struct TraceRow {
    int step = 0;
    double coeff_d = 0.0;
    double coeff_s = 0.0;
    double loss_d = 0.0;
    double loss_s = 0.0;
    double loss_m = 0.0;
    double val_dice = -1.0;  // < 0 when not evaluated this step
};

struct TrainResult {
    Model model;
    std::vector<TraceRow> trace;
};

TrainResult train(const TrainConfig& cfg, const std::vector<LabeledImage>& data,
                  const std::vector<LabeledImage>* validation);

// ---------------------------------------------------------------------------
// verification

enum class GradCheckMode { Full, DistanceOnly };

// Maximum relative error between analytic parameter gradients and central
// finite differences (h = 1e-5) on a tiny network with an 8x8 input.
double grad_check(GradCheckMode mode, uint64_t seed);

}  // namespace bseg

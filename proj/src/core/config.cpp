#include "core/config.hpp"

#include <array>
#include <charconv>
#include <fstream>

#include "core/errors.hpp"

namespace bseg {

namespace {

struct KeySpec {
    const char* key;
    const char* def;
    const char* doc;
};

// The registry: every accepted key with its default.
constexpr std::array kRegistry = {
    KeySpec{"lambda", "1", "distance-map decay parameter (> 0)"},
    KeySpec{"gamma", "1", "classification loss weight in the multi-loss"},
    KeySpec{"lr", "1e-4", "Adam learning rate"},
    KeySpec{"steps", "3000", "total training steps N (updates run at 0..N)"},
    KeySpec{"batch", "8", "mini-batch size"},
    KeySpec{"size", "64", "working image size (square, divisible by 8)"},
    KeySpec{"seed", "7", "64-bit seed for all stochastic choices"},
    KeySpec{"init", "xavier", "filter initialization: xavier | normal"},
    KeySpec{"mode", "end_to_end", "training mode: end_to_end | distance_only"},
    KeySpec{"deconv_width", "48", "input width of the first upsampling layer (multiple of 12)"},
    KeySpec{"px_width", "3", "hidden width of the classification stack"},
    KeySpec{"val_interval", "500", "steps between validation Dice evaluations"},
    KeySpec{"jobs", "1", "worker threads for per-image evaluation"},
    KeySpec{"n", "50", "number of synthetic samples to generate"},
    KeySpec{"jitter", "4", "synthetic center jitter, pixels"},
    KeySpec{"axes_min", "10", "synthetic semi-axis minimum, pixels (>= 4)"},
    KeySpec{"axes_max", "20", "synthetic semi-axis maximum, pixels"},
    KeySpec{"rot_range", "3.141592653589793", "synthetic rotation range, radians"},
    KeySpec{"perturb", "0.04", "per-harmonic boundary perturbation amplitude"},
    KeySpec{"grad_strength", "30", "synthetic interior gradient, intensity units"},
    KeySpec{"speckle", "0.25", "multiplicative speckle strength"},
    KeySpec{"bg_texture", "20", "background texture strength, intensity units"},
    KeySpec{"train_manifest", "", "manifest of training image/mask pairs"},
    KeySpec{"val_manifest", "", "manifest of validation pairs (optional)"},
    KeySpec{"test_manifest", "", "manifest of held-out test pairs"},
    KeySpec{"model", "", "path of a trained model (compare-paths input)"},
    KeySpec{"bnet_model", "",
            "distance-only model for the post-processing path (optional; "
            "compare-paths falls back to the end-to-end model)"},
};

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

RunConfig::RunConfig() {
    for (const KeySpec& k : kRegistry) values_[k.key] = k.def;
}

void RunConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError(path + ": cannot open config file");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw UsageError(path + ":" + std::to_string(lineno) + ": expected key = value");
        set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
}

void RunConfig::set(const std::string& key, const std::string& value) {
    if (!values_.count(key)) throw UsageError("unknown config key: " + key);
    if (key == "init" && value != "xavier" && value != "normal")
        throw UsageError("init must be xavier or normal");
    if (key == "mode" && value != "end_to_end" && value != "distance_only")
        throw UsageError("mode must be end_to_end or distance_only");
    values_[key] = value;
}

std::string RunConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw UsageError("unknown config key: " + key);
    return it->second;
}

double RunConfig::get_double(const std::string& key) const {
    const std::string v = get(key);
    try {
        size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw UsageError("config key " + key + ": not a number: " + v);
    }
}

int RunConfig::get_int(const std::string& key) const {
    const double d = get_double(key);
    const int i = static_cast<int>(d);
    if (static_cast<double>(i) != d)
        throw UsageError("config key " + key + ": not an integer: " + get(key));
    return i;
}

uint64_t RunConfig::get_u64(const std::string& key) const {
    const std::string v = get(key);
    uint64_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        throw UsageError("config key " + key + ": not an unsigned integer: " + v);
    return out;
}

TrainConfig RunConfig::train_config() const {
    TrainConfig cfg;
    cfg.steps = get_int("steps");
    cfg.gamma = get_double("gamma");
    cfg.lambda = get_double("lambda");
    cfg.learning_rate = get_double("lr");
    cfg.batch = get_int("batch");
    cfg.seed = get_u64("seed");
    cfg.image_size = get_int("size");
    cfg.deconv_width = get_int("deconv_width");
    cfg.px_width = get_int("px_width");
    cfg.end_to_end = get("mode") == "end_to_end";
    cfg.xavier_init = get("init") == "xavier";
    cfg.val_interval = get_int("val_interval");
    if (cfg.steps < 1) throw UsageError("steps must be >= 1");
    if (cfg.batch < 1) throw UsageError("batch must be >= 1");
    if (!(cfg.lambda > 0)) throw UsageError("lambda must be > 0");
    if (!(cfg.gamma > 0)) throw UsageError("gamma must be > 0");
    if (cfg.image_size < 8 || cfg.image_size % 8)
        throw UsageError("size must be a positive multiple of 8");
    if (cfg.val_interval < 1) throw UsageError("val_interval must be >= 1");
    return cfg;
}

ShapeParams RunConfig::shape_params() const {
    ShapeParams p;
    p.image_size = get_int("size");
    p.center_jitter = get_double("jitter");
    p.axes_min = get_double("axes_min");
    p.axes_max = get_double("axes_max");
    p.rotation_range = get_double("rot_range");
    p.perturb_amp = get_double("perturb");
    p.gradient_strength = get_double("grad_strength");
    p.speckle_sigma = get_double("speckle");
    p.background_texture = get_double("bg_texture");
    p.seed = get_u64("seed");
    if (p.axes_min < 4.0) throw UsageError("axes_min must be >= 4");
    if (p.axes_max < p.axes_min) throw UsageError("axes_max must be >= axes_min");
    if (p.axes_max * (1.0 + 3.0 * p.perturb_amp) * 2.0 >= p.image_size)
        throw UsageError("axes_max too large for the image size");
    return p;
}

std::string RunConfig::registry_help() {
    std::string out;
    for (const KeySpec& k : kRegistry) {
        out += "  ";
        out += k.key;
        out += " = ";
        out += k.def[0] ? k.def : "(unset)";
        out += "  # ";
        out += k.doc;
        out += "\n";
    }
    return out;
}

}  // namespace bseg

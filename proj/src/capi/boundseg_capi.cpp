#include "boundseg.h"

#include <cstring>
#include <string>

#include "core/config.hpp"
#include "core/contour_reconstruct.hpp"
#include "core/distance_map.hpp"
#include "core/errors.hpp"
#include "core/nets.hpp"
#include "core/pipeline.hpp"
#include "core/raster.hpp"

using namespace bseg;

// Opaque handle definitions: each wraps the corresponding core value type.
struct bseg_image {
    GrayImage v;
};
struct bseg_mask {
    BinaryMask v;
};
struct bseg_dmap {
    DistanceMap v;
};
struct bseg_model {
    Model v;
};
struct bseg_config {
    RunConfig v;
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
bseg_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return BSEG_OK;
    } catch (const UsageError& e) {
        g_last_error = e.what();
        return BSEG_ERR_USAGE;
    } catch (const NumericError& e) {
        g_last_error = e.what();
        return BSEG_ERR_NUMERIC;
    } catch (const DataError& e) {
        g_last_error = e.what();
        return BSEG_ERR_DATA;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return BSEG_ERR_DATA;
    }
}

bseg_status require(bool ok, const char* msg) {
    if (ok) return BSEG_OK;
    g_last_error = msg;
    return BSEG_ERR_USAGE;
}

}  // namespace

extern "C" {

const char* bseg_version(void) { return "1.0.0"; }

const char* bseg_last_error(void) { return g_last_error.c_str(); }

/* ------------------------------------------------------------------ */

bseg_config* bseg_config_create(void) { return new bseg_config{}; }

void bseg_config_free(bseg_config* cfg) { delete cfg; }

bseg_status bseg_config_load(bseg_config* cfg, const char* path) {
    if (auto s = require(cfg && path, "config_load: null argument")) return s;
    return guarded([&] { cfg->v.load_file(path); });
}

bseg_status bseg_config_set(bseg_config* cfg, const char* key, const char* value) {
    if (auto s = require(cfg && key && value, "config_set: null argument")) return s;
    return guarded([&] { cfg->v.set(key, value); });
}

bseg_status bseg_config_get(const bseg_config* cfg, const char* key, char* buf, size_t cap) {
    if (auto s = require(cfg && key && buf && cap > 0, "config_get: null argument")) return s;
    return guarded([&] {
        const std::string v = cfg->v.get(key);
        std::strncpy(buf, v.c_str(), cap - 1);
        buf[cap - 1] = '\0';
    });
}

const char* bseg_config_registry(void) {
    static const std::string help = RunConfig::registry_help();
    return help.c_str();
}

/* ------------------------------------------------------------------ */

bseg_status bseg_image_load(const char* path, bseg_image** out) {
    if (auto s = require(path && out, "image_load: null argument")) return s;
    return guarded([&] { *out = new bseg_image{load_pgm(path)}; });
}

bseg_status bseg_image_save(const bseg_image* img, const char* path) {
    if (auto s = require(img && path, "image_save: null argument")) return s;
    return guarded([&] { save_pgm(img->v, path); });
}

int bseg_image_width(const bseg_image* img) { return img ? img->v.width : 0; }
int bseg_image_height(const bseg_image* img) { return img ? img->v.height : 0; }
void bseg_image_free(bseg_image* img) { delete img; }

bseg_status bseg_mask_load(const char* path, bseg_mask** out) {
    if (auto s = require(path && out, "mask_load: null argument")) return s;
    return guarded([&] { *out = new bseg_mask{load_mask_pgm(path)}; });
}

bseg_status bseg_mask_save(const bseg_mask* mask, const char* path) {
    if (auto s = require(mask && path, "mask_save: null argument")) return s;
    return guarded([&] { save_mask_pgm(mask->v, path); });
}

int bseg_mask_width(const bseg_mask* mask) { return mask ? mask->v.width : 0; }
int bseg_mask_height(const bseg_mask* mask) { return mask ? mask->v.height : 0; }
void bseg_mask_free(bseg_mask* mask) { delete mask; }

/* ------------------------------------------------------------------ */

bseg_status bseg_dmap_load(const char* path, bseg_dmap** out) {
    if (auto s = require(path && out, "dmap_load: null argument")) return s;
    return guarded([&] { *out = new bseg_dmap{load_dmap(path)}; });
}

bseg_status bseg_dmap_save(const bseg_dmap* map, const char* path) {
    if (auto s = require(map && path, "dmap_save: null argument")) return s;
    return guarded([&] { save_dmap(map->v, path); });
}

bseg_status bseg_dmap_encode(const bseg_mask* mask, double lambda, bseg_dmap** out) {
    if (auto s = require(mask && out, "dmap_encode: null argument")) return s;
    return guarded([&] {
        const Contour c = boundary_of_mask(mask->v);
        *out = new bseg_dmap{encode_distance_map(c, mask->v.width, mask->v.height, lambda)};
    });
}

double bseg_dmap_lambda(const bseg_dmap* map) { return map ? map->v.lambda : 0.0; }

bseg_status bseg_dmap_set_lambda(bseg_dmap* map, double lambda) {
    if (auto s = require(map != nullptr, "dmap_set_lambda: null argument")) return s;
    return guarded([&] {
        if (!(lambda > 0)) throw DataError("lambda must be > 0");
        map->v.lambda = lambda;
    });
}

bseg_status bseg_dmap_heatmap(const bseg_dmap* map, const char* pgm_out) {
    if (auto s = require(map && pgm_out, "dmap_heatmap: null argument")) return s;
    return guarded([&] { save_heatmap_pgm(map->v, pgm_out); });
}

void bseg_dmap_free(bseg_dmap* map) { delete map; }

bseg_status bseg_reconstruct(const bseg_dmap* map, bseg_mask** out) {
    if (auto s = require(map && out, "reconstruct: null argument")) return s;
    return guarded([&] { *out = new bseg_mask{reconstruct_mask(map->v)}; });
}

/* ------------------------------------------------------------------ */

bseg_status bseg_model_load(const char* path, bseg_model** out) {
    if (auto s = require(path && out, "model_load: null argument")) return s;
    return guarded([&] { *out = new bseg_model{load_model(path)}; });
}

void bseg_model_free(bseg_model* model) { delete model; }

bseg_status bseg_predict(const bseg_model* model, const bseg_image* img, bseg_dmap** out_dmap,
                         bseg_mask** out_mask) {
    if (auto s = require(model && img && out_dmap, "predict: null argument")) return s;
    return guarded([&] {
        DistanceMap pred = boundary_net_forward(model->v, img->v);
        if (out_mask) *out_mask = new bseg_mask{argmax_mask(pixel_net_forward(model->v, pred))};
        *out_dmap = new bseg_dmap{std::move(pred)};
    });
}

/* ------------------------------------------------------------------ */

bseg_status bseg_cmd_synth_gen(const bseg_config* cfg, const char* out_dir) {
    if (auto s = require(cfg && out_dir, "synth_gen: null argument")) return s;
    return guarded([&] { cmd_synth_gen(cfg->v, out_dir); });
}

bseg_status bseg_cmd_augment(const char* manifest, const char* out_dir) {
    if (auto s = require(manifest && out_dir, "augment: null argument")) return s;
    return guarded([&] { cmd_augment(manifest, out_dir); });
}

bseg_status bseg_cmd_encode_dist(const char* manifest, double lambda, const char* out_dir) {
    if (auto s = require(manifest && out_dir, "encode_dist: null argument")) return s;
    return guarded([&] { cmd_encode_dist(manifest, lambda, out_dir); });
}

bseg_status bseg_cmd_train(const bseg_config* cfg, const char* model_out,
                           const char* trace_csv) {
    if (auto s = require(cfg && model_out, "train: null argument")) return s;
    return guarded([&] { cmd_train(cfg->v, model_out, trace_csv ? trace_csv : ""); });
}

bseg_status bseg_cmd_predict(const char* model_path, const char* image_path,
                             const char* dmap_out, const char* mask_out) {
    if (auto s = require(model_path && image_path && dmap_out, "predict: null argument"))
        return s;
    return guarded([&] { cmd_predict(model_path, image_path, dmap_out, mask_out ? mask_out : ""); });
}

bseg_status bseg_cmd_reconstruct(const char* dmap_path, const char* mask_out,
                                 double lambda_override) {
    if (auto s = require(dmap_path && mask_out, "reconstruct: null argument")) return s;
    return guarded([&] { cmd_reconstruct(dmap_path, mask_out, lambda_override); });
}

bseg_status bseg_cmd_eval(const char* pred_dir, const char* truth_dir, const char* csv_out,
                          int jobs) {
    if (auto s = require(pred_dir && truth_dir && csv_out, "eval: null argument")) return s;
    return guarded([&] { cmd_eval(pred_dir, truth_dir, csv_out, jobs); });
}

bseg_status bseg_cmd_compare(const char* csv_a, const char* csv_b, const char* csv_out) {
    if (auto s = require(csv_a && csv_b && csv_out, "compare: null argument")) return s;
    return guarded([&] { cmd_compare(csv_a, csv_b, csv_out); });
}

bseg_status bseg_cmd_ablate_lambda(const bseg_config* cfg, const char* csv_out) {
    if (auto s = require(cfg && csv_out, "ablate_lambda: null argument")) return s;
    return guarded([&] { cmd_ablate_lambda(cfg->v, csv_out); });
}

bseg_status bseg_cmd_compare_paths(const bseg_config* cfg, const char* csv_out,
                                   const char* timing_out) {
    if (auto s = require(cfg && csv_out, "compare_paths: null argument")) return s;
    return guarded([&] { cmd_compare_paths(cfg->v, csv_out, timing_out ? timing_out : ""); });
}

bseg_status bseg_cmd_heatmap(const char* dmap_path, const char* pgm_out) {
    if (auto s = require(dmap_path && pgm_out, "heatmap: null argument")) return s;
    return guarded([&] { cmd_heatmap(dmap_path, pgm_out); });
}

} /* extern "C" */

/* boundseg — boundary-distance regression segmentation, C API.
 *
 * All functions returning bseg_status report failures through the return
 * code; bseg_last_error() holds a one-line description for the calling
 * thread. Objects returned through out-parameters are owned by the caller
 * and released with the matching *_free function.
 */
#ifndef BOUNDSEG_H
#define BOUNDSEG_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bseg_status {
    BSEG_OK = 0,
    BSEG_ERR_USAGE = 2,   /* bad arguments or configuration */
    BSEG_ERR_DATA = 3,    /* missing or malformed input data */
    BSEG_ERR_NUMERIC = 4  /* numeric or algorithmic failure */
} bseg_status;

typedef struct bseg_image bseg_image;    /* grayscale raster */
typedef struct bseg_mask bseg_mask;      /* binary raster */
typedef struct bseg_dmap bseg_dmap;      /* normalized boundary distance map */
typedef struct bseg_model bseg_model;    /* trained network pair */
typedef struct bseg_config bseg_config;  /* key=value run configuration */

const char *bseg_version(void);
/* Last error message of the calling thread; empty string if none. */
const char *bseg_last_error(void);

/* ------------------------------------------------------------------ */
/* configuration */

bseg_config *bseg_config_create(void);
void bseg_config_free(bseg_config *cfg);
bseg_status bseg_config_load(bseg_config *cfg, const char *path);
bseg_status bseg_config_set(bseg_config *cfg, const char *key, const char *value);
/* Copies the value into buf (NUL-terminated, truncating at cap). */
bseg_status bseg_config_get(const bseg_config *cfg, const char *key, char *buf, size_t cap);
/* Newline-separated "key = default # doc" listing of every accepted key. */
const char *bseg_config_registry(void);

/* ------------------------------------------------------------------ */
/* rasters (PGM P2/P5, maxval 255; masks use values {0,255}) */

bseg_status bseg_image_load(const char *path, bseg_image **out);
bseg_status bseg_image_save(const bseg_image *img, const char *path);
int bseg_image_width(const bseg_image *img);
int bseg_image_height(const bseg_image *img);
void bseg_image_free(bseg_image *img);

bseg_status bseg_mask_load(const char *path, bseg_mask **out);
bseg_status bseg_mask_save(const bseg_mask *mask, const char *path);
int bseg_mask_width(const bseg_mask *mask);
int bseg_mask_height(const bseg_mask *mask);
void bseg_mask_free(bseg_mask *mask);

/* ------------------------------------------------------------------ */
/* distance maps (DMAP raster files) */

bseg_status bseg_dmap_load(const char *path, bseg_dmap **out);
bseg_status bseg_dmap_save(const bseg_dmap *map, const char *path);
bseg_status bseg_dmap_encode(const bseg_mask *mask, double lambda, bseg_dmap **out);
double bseg_dmap_lambda(const bseg_dmap *map);
bseg_status bseg_dmap_set_lambda(bseg_dmap *map, double lambda);
/* Writes round(255*d) as a P5 PGM heatmap. */
bseg_status bseg_dmap_heatmap(const bseg_dmap *map, const char *pgm_out);
void bseg_dmap_free(bseg_dmap *map);

/* Post-processing path: threshold, thinning, minimum spanning tree, max
 * path, closed-contour fill. */
bseg_status bseg_reconstruct(const bseg_dmap *map, bseg_mask **out);

/* ------------------------------------------------------------------ */
/* models */

bseg_status bseg_model_load(const char *path, bseg_model **out);
void bseg_model_free(bseg_model *model);
/* Predicted distance map, and optionally the classification mask
 * (out_mask may be NULL). Input dims must be divisible by 8. */
bseg_status bseg_predict(const bseg_model *model, const bseg_image *img, bseg_dmap **out_dmap,
                         bseg_mask **out_mask);

/* ------------------------------------------------------------------ */
/* pipeline commands (the CLI subcommands map 1:1 onto these) */

bseg_status bseg_cmd_synth_gen(const bseg_config *cfg, const char *out_dir);
bseg_status bseg_cmd_augment(const char *manifest, const char *out_dir);
bseg_status bseg_cmd_encode_dist(const char *manifest, double lambda, const char *out_dir);
/* trace_csv may be NULL to skip the trace. */
bseg_status bseg_cmd_train(const bseg_config *cfg, const char *model_out, const char *trace_csv);
/* mask_out may be NULL. */
bseg_status bseg_cmd_predict(const char *model_path, const char *image_path,
                             const char *dmap_out, const char *mask_out);
/* lambda_override <= 0 keeps the lambda embedded in the DMAP file. */
bseg_status bseg_cmd_reconstruct(const char *dmap_path, const char *mask_out,
                                 double lambda_override);
bseg_status bseg_cmd_eval(const char *pred_dir, const char *truth_dir, const char *csv_out,
                          int jobs);
bseg_status bseg_cmd_compare(const char *csv_a, const char *csv_b, const char *csv_out);
bseg_status bseg_cmd_ablate_lambda(const bseg_config *cfg, const char *csv_out);
/* timing_out may be NULL; timings also print to stdout. */
bseg_status bseg_cmd_compare_paths(const bseg_config *cfg, const char *csv_out,
                                   const char *timing_out);
bseg_status bseg_cmd_heatmap(const char *dmap_path, const char *pgm_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* BOUNDSEG_H */

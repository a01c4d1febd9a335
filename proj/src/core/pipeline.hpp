#pragma once

#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/raster.hpp"

namespace bseg {

// Manifest: one "image_path mask_path" pair per line; relative paths resolve
// against the manifest's own directory.
std::vector<LabeledImage> load_manifest(const std::string& path);

void cmd_synth_gen(const RunConfig& cfg, const std::string& out_dir);
void cmd_augment(const std::string& manifest, const std::string& out_dir);
void cmd_encode_dist(const std::string& manifest, double lambda, const std::string& out_dir);
void cmd_train(const RunConfig& cfg, const std::string& model_out, const std::string& trace_csv);
void cmd_predict(const std::string& model_path, const std::string& image_path,
                 const std::string& dmap_out, const std::string& mask_out);
void cmd_reconstruct(const std::string& dmap_path, const std::string& mask_out,
                     double lambda_override);  // <= 0 keeps the embedded lambda
void cmd_eval(const std::string& pred_dir, const std::string& truth_dir,
              const std::string& csv_out, int jobs);
void cmd_compare(const std::string& csv_a, const std::string& csv_b, const std::string& csv_out);
void cmd_ablate_lambda(const RunConfig& cfg, const std::string& csv_out);

// Writes per-image Dice of both paths to csv_out (deterministic) and wall
// times to timing_out (measured; not covered by determinism guarantees).
void cmd_compare_paths(const RunConfig& cfg, const std::string& csv_out,
                       const std::string& timing_out);
void cmd_heatmap(const std::string& dmap_path, const std::string& pgm_out);

}  // namespace bseg

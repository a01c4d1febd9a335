// boundseg CLI: drives the shared library through its C API.
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "boundseg.h"

namespace {

const char* status_name(bseg_status s) {
    switch (s) {
        case BSEG_OK:
            return "ok";
        case BSEG_ERR_USAGE:
            return "usage";
        case BSEG_ERR_DATA:
            return "data";
        case BSEG_ERR_NUMERIC:
            return "numeric";
    }
    return "unknown";
}

int finish(bseg_status s) {
    if (s == BSEG_OK) return 0;
    std::fprintf(stderr, "error: %s: %s\n", status_name(s), bseg_last_error());
    return static_cast<int>(s);
}

struct ConfigHandle {
    bseg_config* cfg = bseg_config_create();
    ~ConfigHandle() { bseg_config_free(cfg); }
    ConfigHandle(const ConfigHandle&) = delete;
    ConfigHandle() = default;
};

// load --config (if given) and apply CLI overrides
bseg_status apply_config(ConfigHandle& h, const std::string& config_path,
                         const std::vector<std::pair<std::string, std::string>>& overrides) {
    if (!config_path.empty()) {
        const bseg_status s = bseg_config_load(h.cfg, config_path.c_str());
        if (s != BSEG_OK) return s;
    }
    for (const auto& [key, value] : overrides) {
        const bseg_status s = bseg_config_set(h.cfg, key.c_str(), value.c_str());
        if (s != BSEG_OK) return s;
    }
    return BSEG_OK;
}

std::string config_footer() {
    return std::string("Config keys (key = default):\n") + bseg_config_registry();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Boundary-distance regression segmentation pipeline"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(bseg_version()));

    // --- synth-gen ---------------------------------------------------------
    auto* synth = app.add_subcommand("synth-gen", "Generate a synthetic labeled dataset");
    std::string sg_out, sg_config;
    int sg_n = -1, sg_size = -1;
    long long sg_seed = -1;
    synth->add_option("--out", sg_out, "Output directory")->required();
    synth->add_option("--n", sg_n, "Number of samples");
    synth->add_option("--seed", sg_seed, "Generator seed");
    synth->add_option("--size", sg_size, "Image size (multiple of 8)");
    synth->add_option("--config", sg_config, "Run configuration file");
    synth->footer(config_footer());

    // --- augment -----------------------------------------------------------
    auto* augment = app.add_subcommand("augment", "Registration-based data augmentation");
    std::string au_in, au_out;
    augment->add_option("--in", au_in, "Input manifest")->required();
    augment->add_option("--out", au_out, "Output directory")->required();

    // --- encode-dist -------------------------------------------------------
    auto* encode = app.add_subcommand("encode-dist", "Encode masks into distance maps");
    std::string en_in, en_out;
    double en_lambda = 1.0;
    encode->add_option("--in", en_in, "Input manifest")->required();
    encode->add_option("--lambda", en_lambda, "Decay parameter (> 0)");
    encode->add_option("--out", en_out, "Output directory")->required();

    // --- train -------------------------------------------------------------
    auto* train = app.add_subcommand("train", "Train the segmentation networks");
    std::string tr_config, tr_out, tr_trace;
    train->add_option("--config", tr_config, "Run configuration file")->required();
    train->add_option("--out", tr_out, "Model output path (.bnet)")->required();
    train->add_option("--trace", tr_trace, "Loss/Dice trace CSV output");
    train->footer(config_footer());

    // --- predict -----------------------------------------------------------
    auto* predict = app.add_subcommand("predict", "Predict a distance map (and mask)");
    std::string pr_model, pr_image, pr_out, pr_mask;
    predict->add_option("--model", pr_model, "Trained model path")->required();
    predict->add_option("--image", pr_image, "Input image (PGM)")->required();
    predict->add_option("--out", pr_out, "Predicted DMAP output")->required();
    predict->add_option("--mask-out", pr_mask, "Classification mask output (PGM)");

    // --- reconstruct -------------------------------------------------------
    auto* rec = app.add_subcommand("reconstruct", "Reconstruct a mask from a distance map");
    std::string rc_in, rc_out;
    double rc_lambda = 0.0;
    rec->add_option("--in", rc_in, "Input DMAP raster")->required();
    rec->add_option("--out", rc_out, "Mask output (PGM)")->required();
    rec->add_option("--lambda", rc_lambda, "Override the embedded lambda");

    // --- eval --------------------------------------------------------------
    auto* eval = app.add_subcommand("eval", "Evaluate predicted masks against ground truth");
    std::string ev_pred, ev_truth, ev_out;
    int ev_jobs = 1;
    eval->add_option("--pred", ev_pred, "Directory of predicted masks")->required();
    eval->add_option("--truth", ev_truth, "Directory of ground-truth masks")->required();
    eval->add_option("--out", ev_out, "Report CSV output")->required();
    eval->add_option("--jobs", ev_jobs, "Worker threads (default 1)");

    // --- compare -----------------------------------------------------------
    auto* compare = app.add_subcommand("compare", "Wilcoxon signed-rank between two reports");
    std::string cp_a, cp_b, cp_out;
    compare->add_option("--a", cp_a, "First metrics CSV")->required();
    compare->add_option("--b", cp_b, "Second metrics CSV")->required();
    compare->add_option("--out", cp_out, "Comparison CSV output")->required();

    // --- ablate-lambda -----------------------------------------------------
    auto* ablate = app.add_subcommand("ablate-lambda", "Sweep the distance-map decay parameter");
    std::string ab_config, ab_out;
    ablate->add_option("--config", ab_config, "Run configuration file")->required();
    ablate->add_option("--out", ab_out, "Sweep CSV output")->required();
    ablate->footer(config_footer());

    // --- compare-paths -----------------------------------------------------
    auto* paths = app.add_subcommand(
        "compare-paths", "End-to-end vs post-processing: accuracy and inference time");
    std::string pa_config, pa_out, pa_timing;
    paths->add_option("--config", pa_config, "Run configuration file")->required();
    paths->add_option("--out", pa_out, "Per-image Dice CSV output")->required();
    paths->add_option("--timing", pa_timing, "Timing report output (text)");
    paths->footer(config_footer());

    // --- heatmap -----------------------------------------------------------
    auto* heat = app.add_subcommand("heatmap", "Render a distance map as a PGM heatmap");
    std::string hm_in, hm_out;
    heat->add_option("--in", hm_in, "Input DMAP raster")->required();
    heat->add_option("--out", hm_out, "Heatmap PGM output")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        std::fprintf(stderr, "error: usage: %s\n", e.what());
        return 2;
    }

    if (synth->parsed()) {
        ConfigHandle h;
        std::vector<std::pair<std::string, std::string>> overrides;
        if (sg_n >= 0) overrides.push_back({"n", std::to_string(sg_n)});
        if (sg_seed >= 0) overrides.push_back({"seed", std::to_string(sg_seed)});
        if (sg_size >= 0) overrides.push_back({"size", std::to_string(sg_size)});
        bseg_status s = apply_config(h, sg_config, overrides);
        if (s == BSEG_OK) s = bseg_cmd_synth_gen(h.cfg, sg_out.c_str());
        return finish(s);
    }
    if (augment->parsed()) return finish(bseg_cmd_augment(au_in.c_str(), au_out.c_str()));
    if (encode->parsed())
        return finish(bseg_cmd_encode_dist(en_in.c_str(), en_lambda, en_out.c_str()));
    if (train->parsed()) {
        ConfigHandle h;
        bseg_status s = apply_config(h, tr_config, {});
        if (s == BSEG_OK)
            s = bseg_cmd_train(h.cfg, tr_out.c_str(), tr_trace.empty() ? nullptr : tr_trace.c_str());
        return finish(s);
    }
    if (predict->parsed())
        return finish(bseg_cmd_predict(pr_model.c_str(), pr_image.c_str(), pr_out.c_str(),
                                       pr_mask.empty() ? nullptr : pr_mask.c_str()));
    if (rec->parsed())
        return finish(bseg_cmd_reconstruct(rc_in.c_str(), rc_out.c_str(), rc_lambda));
    if (eval->parsed())
        return finish(bseg_cmd_eval(ev_pred.c_str(), ev_truth.c_str(), ev_out.c_str(), ev_jobs));
    if (compare->parsed())
        return finish(bseg_cmd_compare(cp_a.c_str(), cp_b.c_str(), cp_out.c_str()));
    if (ablate->parsed()) {
        ConfigHandle h;
        bseg_status s = apply_config(h, ab_config, {});
        if (s == BSEG_OK) s = bseg_cmd_ablate_lambda(h.cfg, ab_out.c_str());
        return finish(s);
    }
    if (paths->parsed()) {
        ConfigHandle h;
        bseg_status s = apply_config(h, pa_config, {});
        if (s == BSEG_OK)
            s = bseg_cmd_compare_paths(h.cfg, pa_out.c_str(),
                                       pa_timing.empty() ? nullptr : pa_timing.c_str());
        return finish(s);
    }
    if (heat->parsed()) return finish(bseg_cmd_heatmap(hm_in.c_str(), hm_out.c_str()));

    return 2;
}

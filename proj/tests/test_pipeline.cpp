#include <filesystem>
#include <fstream>

#include "core/config.hpp"
#include "core/distance_map.hpp"
#include "core/errors.hpp"
#include "core/pipeline.hpp"
#include "doctest.h"

using namespace bseg;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const char* name) {
    const fs::path dir = fs::temp_directory_path() / "boundseg_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("config rejects unknown keys and bad values") {
    RunConfig cfg;
    CHECK_THROWS_AS(cfg.set("no_such_key", "1"), UsageError);
    CHECK_THROWS_AS(cfg.set("mode", "sideways"), UsageError);
    CHECK_THROWS_AS(cfg.set("init", "zeros"), UsageError);
    cfg.set("lambda", "0.5");
    CHECK(cfg.get_double("lambda") == 0.5);
    cfg.set("steps", "oops");
    CHECK_THROWS_AS(cfg.train_config(), UsageError);
}

TEST_CASE("config file parsing with comments and defaults") {
    const fs::path dir = fresh_dir("config");
    const fs::path file = dir / "run.cfg";
    std::ofstream(file) << "# comment line\nlambda = 2.5\nsteps=10  # trailing comment\n\n";
    RunConfig cfg;
    cfg.load_file(file.string());
    CHECK(cfg.get_double("lambda") == 2.5);
    CHECK(cfg.get_int("steps") == 10);
    CHECK(cfg.get_double("gamma") == 1.0);  // default untouched
    CHECK(cfg.get_int("batch") == 8);
    CHECK(cfg.get_double("lr") == 1e-4);
    CHECK(cfg.get_int("size") == 64);

    std::ofstream(file) << "unknown_key = 3\n";
    RunConfig cfg2;
    CHECK_THROWS_AS(cfg2.load_file(file.string()), UsageError);
}

TEST_CASE("synth-gen writes a loadable corpus with manifest") {
    const fs::path dir = fresh_dir("synthgen");
    RunConfig cfg;
    cfg.set("n", "4");
    cfg.set("seed", "11");
    cmd_synth_gen(cfg, dir.string());
    CHECK(fs::exists(dir / "img_0000.pgm"));
    CHECK(fs::exists(dir / "msk_0003.pgm"));
    const std::vector<LabeledImage> items = load_manifest((dir / "manifest.txt").string());
    CHECK(items.size() == 4);
    CHECK(items[0].image.width == 64);

    // rerun into a second directory: bit-identical outputs
    const fs::path dir2 = fresh_dir("synthgen2");
    cmd_synth_gen(cfg, dir2.string());
    CHECK(slurp(dir / "img_0002.pgm") == slurp(dir2 / "img_0002.pgm"));
    CHECK(slurp(dir / "manifest.txt") == slurp(dir2 / "manifest.txt"));
}

TEST_CASE("augment command writes 2n(n-1)+n pairs") {
    const fs::path data = fresh_dir("augdata");
    RunConfig cfg;
    cfg.set("n", "3");
    cmd_synth_gen(cfg, data.string());
    const fs::path out = fresh_dir("augout");
    cmd_augment((data / "manifest.txt").string(), out.string());
    const std::vector<LabeledImage> items = load_manifest((out / "manifest.txt").string());
    CHECK(items.size() == 15);
    CHECK(fs::exists(out / "aug_orig_0.pgm"));
    CHECK(fs::exists(out / "aug_0_1_warp.pgm"));
    CHECK(fs::exists(out / "aug_0_1_flip_mask.pgm"));
    CHECK(fs::exists(out / "aug_2_1_flip.pgm"));
}

TEST_CASE("encode-dist + reconstruct round trip through files") {
    const fs::path data = fresh_dir("encdata");
    RunConfig cfg;
    cfg.set("n", "2");
    cmd_synth_gen(cfg, data.string());
    const fs::path enc = fresh_dir("encout");
    cmd_encode_dist((data / "manifest.txt").string(), 1.0, enc.string());
    CHECK(fs::exists(enc / "msk_0000.dmap"));

    const DistanceMap map = load_dmap((enc / "msk_0000.dmap").string());
    CHECK(map.lambda == 1.0);

    const fs::path rec = fresh_dir("recout");
    cmd_reconstruct((enc / "msk_0000.dmap").string(), (rec / "rebuilt.pgm").string(), 0.0);
    const BinaryMask rebuilt = load_mask_pgm((rec / "rebuilt.pgm").string());
    const BinaryMask truth = load_mask_pgm((data / "msk_0000.pgm").string());
    size_t inter = 0;
    for (size_t i = 0; i < rebuilt.size(); ++i)
        inter += (rebuilt.data[i] && truth.data[i]) ? 1 : 0;
    const double dice = 2.0 * static_cast<double>(inter) /
                        static_cast<double>(rebuilt.count() + truth.count());
    CHECK(dice >= 0.95);
}

TEST_CASE("heatmap command emits the quantized map") {
    const fs::path dir = fresh_dir("heatmap");
    DistanceMap map(4, 4, 1.0);
    map.data.assign(map.size(), 1.0);
    save_dmap(map, (dir / "ones.dmap").string());
    cmd_heatmap((dir / "ones.dmap").string(), (dir / "ones.pgm").string());
    const GrayImage img = load_pgm((dir / "ones.pgm").string());
    for (double v : img.data) CHECK(v == 255.0);
}

TEST_CASE("compare command consumes eval CSVs") {
    const fs::path dir = fresh_dir("cmp");
    // two tiny result CSVs over the same names
    std::ofstream(dir / "a.csv")
        << "name,dice,jaccard,precision,sensitivity,md,assd\n"
        << "x.pgm,0.9,0.8,0.9,0.9,1.0,1.0\n"
        << "y.pgm,0.8,0.7,0.8,0.8,2.0,2.0\n"
        << "summary,0.85±0.05,0.75±0.05,0.85±0.05,0.85±0.05,1.5±0.5,1.5±0.5\n";
    std::ofstream(dir / "b.csv")
        << "name,dice,jaccard,precision,sensitivity,md,assd\n"
        << "x.pgm,0.7,0.6,0.7,0.7,3.0,3.0\n"
        << "y.pgm,0.6,0.5,0.6,0.6,4.0,4.0\n";
    cmd_compare((dir / "a.csv").string(), (dir / "b.csv").string(), (dir / "out.csv").string());
    const std::string out = slurp(dir / "out.csv");
    CHECK(out.rfind("metric,W,p", 0) == 0);
    CHECK(out.find("dice,") != std::string::npos);
    CHECK(out.find("assd,") != std::string::npos);

    std::ofstream(dir / "c.csv") << "name,dice,jaccard,precision,sensitivity,md,assd\n"
                                 << "z.pgm,0.7,0.6,0.7,0.7,3.0,3.0\n";
    CHECK_THROWS_AS(
        cmd_compare((dir / "a.csv").string(), (dir / "c.csv").string(), (dir / "o.csv").string()),
        DataError);
}

TEST_CASE("manifest loader resolves relative paths and validates") {
    const fs::path dir = fresh_dir("manifest");
    RunConfig cfg;
    cfg.set("n", "1");
    cmd_synth_gen(cfg, dir.string());
    // manifest written by synth-gen uses relative names; loading from another
    // cwd must still work because paths resolve against the manifest dir
    const std::vector<LabeledImage> items = load_manifest((dir / "manifest.txt").string());
    CHECK(items.size() == 1);

    std::ofstream(dir / "bad.txt") << "only_one_field\n";
    CHECK_THROWS_AS(load_manifest((dir / "bad.txt").string()), DataError);
}

#include "doctest.h"

#include <fstream>
#include <map>

#include "cellgen/demo.hpp"
#include "cellgen/errors.hpp"
#include "cellgen/png_io.hpp"
#include "cellgen/pipeline.hpp"

using namespace cellgen;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("cellgen_pipe_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
    return out;
}

GenConfig small_config() {
    GenConfig cfg;
    cfg.num_images = 4;
    cfg.num_blobs = 40;
    cfg.rows = 96;
    cfg.cols = 96;
    cfg.tile_size = 128;
    cfg.seed = 2024;
    return cfg;
}

demo::DemoOptions small_demo() {
    demo::DemoOptions o;
    o.rows = o.cols = 128;
    o.nuclei = 14;
    return o;
}

}  // namespace

TEST_CASE("config validation and JSON overlay") {
    GenConfig cfg;
    CHECK_NOTHROW(validate_config(cfg));
    for (auto mutate : std::vector<std::function<void(GenConfig&)>>{
             [](GenConfig& c) { c.num_images = 0; }, [](GenConfig& c) { c.num_blobs = 0; },
             [](GenConfig& c) { c.num_points = 7; }, [](GenConfig& c) { c.rows = 0; },
             [](GenConfig& c) { c.tile_size = 0; }}) {
        GenConfig bad;
        mutate(bad);
        CHECK_THROWS_AS(validate_config(bad), InputError);
    }

    const GenConfig over = config_from_json(json{{"num_images", 7}, {"seed", 99}, {"prior", "p.json"}});
    CHECK(over.num_images == 7);
    CHECK(over.seed == 99);
    CHECK(over.prior == "p.json");
    CHECK(over.num_blobs == GenConfig{}.num_blobs);
    CHECK_THROWS_AS(config_from_json(json{{"num_imagez", 3}}), InputError);
    CHECK_THROWS_AS(config_from_json(json{{"num_images", "many"}}), InputError);

    GenConfig full = small_config();
    full.real_images = {"a.png"};
    const GenConfig back = config_from_json(to_json(full));
    CHECK(to_json(back) == to_json(full));
}

TEST_CASE("pipeline output is deterministic and independent of jobs") {
    const auto pairs = demo::make_demo_dataset(5, 2, small_demo());
    TempDir a("det_a"), b("det_b"), c("det_c");
    GenConfig cfg = small_config();
    const DatasetManifest ma = run_pipeline(cfg, pairs, a.path);
    const DatasetManifest mb = run_pipeline(cfg, pairs, b.path);
    cfg.jobs = 3;
    const DatasetManifest mc = run_pipeline(cfg, pairs, c.path);
    CHECK(ma == mb);
    CHECK(ma == mc);
    const auto ta = tree(a.path);
    CHECK(ta == tree(b.path));
    CHECK(ta == tree(c.path));

    CHECK(ma.entries.size() == 4);
    CHECK(ma.real_images == 2);
    CHECK(ma.generated_blobs == 40);
    for (const char* sub : {"masks", "content", "tiles", "priors", "logs", "fit", "blobs/real", "blobs/generated"})
        CHECK(fs::is_directory(a.path / sub));
    CHECK(fs::exists(a.path / "config.json"));

    // Each entry's mask matches its placement log and its content image.
    for (const ManifestEntry& e : ma.entries) {
        const InstanceMask mask = read_mask(a.path / e.generated_mask_path);
        CHECK(count_instances(mask) == e.instances);
        const PlacementLog log = parse_placement_log(slurp(a.path / e.placement_log_path));
        CHECK(log.records.size() == e.instances);
        const PngData content = read_png(a.path / e.content_image_path);
        for (std::size_t i = 0; i < mask.size(); ++i) CHECK((content.samples[i] == 255) == (mask[i] != 0));
    }
    // Fresh noise per image.
    CHECK(ma.entries[0].prior_params != ma.entries[1].prior_params);
}

TEST_CASE("different seeds give different datasets") {
    const auto pairs = demo::make_demo_dataset(5, 2, small_demo());
    TempDir a("seed_a"), b("seed_b");
    GenConfig cfg = small_config();
    run_pipeline(cfg, pairs, a.path);
    cfg.seed = 2025;
    run_pipeline(cfg, pairs, b.path);
    CHECK(slurp(a.path / "masks/mask_00000.png") != slurp(b.path / "masks/mask_00000.png"));
}

TEST_CASE("low-data regime scale: two images, about fifty blobs, N = 100") {
    demo::DemoOptions o = small_demo();
    o.nuclei = 26;
    const auto pairs = demo::make_demo_dataset(9, 2, o);
    TempDir out("lowdata");
    GenConfig cfg = small_config();
    cfg.num_images = 100;
    cfg.num_blobs = 100;
    cfg.rows = cfg.cols = 64;
    cfg.jobs = 4;
    const DatasetManifest m = run_pipeline(cfg, pairs, out.path);
    CHECK(m.entries.size() == 100);
    CHECK(m.real_blobs >= 40);
    CHECK(read_manifest(out.path / "manifest.json") == m);
}

TEST_CASE("a single generated blob yields at most one instance") {
    const auto pairs = demo::make_demo_dataset(1, 1, small_demo());
    TempDir out("one");
    GenConfig cfg = small_config();
    cfg.num_images = 1;
    cfg.num_blobs = 1;
    const DatasetManifest m = run_pipeline(cfg, pairs, out.path);
    REQUIRE(m.entries.size() == 1);
    CHECK(m.entries[0].instances <= 1);
}

TEST_CASE("pipeline input errors") {
    TempDir out("errors");
    GenConfig cfg = small_config();
    CHECK_THROWS_AS(run_pipeline(cfg, std::vector<AnnotatedPair>{}, out.path), InputError);

    AnnotatedPair lonely{{128, 128, 1, std::vector<std::uint8_t>(128 * 128, 0)}, InstanceMask(128, 128, 0)};
    for (int r = 10; r < 20; ++r)
        for (int c = 10; c < 20; ++c) lonely.mask(r, c) = 1;
    try {
        run_pipeline(cfg, std::vector<AnnotatedPair>{lonely}, out.path);
        FAIL("expected an error for a single real blob");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("at least 2") != std::string::npos);
    }

    const auto pairs = demo::make_demo_dataset(1, 1, small_demo());
    cfg.prior = "noise.txt";
    CHECK_THROWS_AS(run_pipeline(cfg, pairs, out.path), InputError);
    cfg = small_config();
    cfg.tile_size = 1000;
    CHECK_THROWS_AS(run_pipeline(cfg, pairs, out.path), InputError);
}

TEST_CASE("expert and parameter-file priors") {
    const auto pairs = demo::make_demo_dataset(3, 1, small_demo());
    TempDir out("expert");
    Grid<std::uint8_t> map(80, 60, 0);
    for (int r = 0; r < 80; ++r)
        for (int c = 30; c < 60; ++c) map(r, c) = 255;
    write_gray8(out.path / "expert.png", map);
    GenConfig cfg = small_config();
    cfg.prior = (out.path / "expert.png").string();
    const DatasetManifest m = run_pipeline(cfg, pairs, out.path / "run");
    for (const ManifestEntry& e : m.entries) {
        const InstanceMask mask = read_mask(out.path / "run" / e.generated_mask_path);
        CHECK(mask.rows() == 80);
        CHECK(mask.cols() == 60);
        for (const auto& rec : parse_placement_log(slurp(out.path / "run" / e.placement_log_path)).records)
            CHECK(rec.x >= 30);
    }

    write_text_file(out.path / "perlin.json", to_json(PerlinParams{2.0, 1, 0.5, 0.1, 5}).dump());
    cfg.prior = (out.path / "perlin.json").string();
    cfg.fresh_prior_seed = false;
    const DatasetManifest p = run_pipeline(cfg, pairs, out.path / "run2");
    CHECK(p.entries[0].prior_params == to_json(PerlinParams{2.0, 1, 0.5, 0.1, 5}));
    CHECK(p.entries[0].prior_params == p.entries[1].prior_params);
}

TEST_CASE("stats on identical inputs give identical columns") {
    const auto pairs = demo::make_demo_dataset(5, 2, small_demo());
    TempDir out("stats");
    const DatasetManifest m = run_pipeline(small_config(), pairs, out.path);
    std::vector<InstanceMask> generated;
    for (const ManifestEntry& e : m.entries) generated.push_back(read_mask(out.path / e.generated_mask_path));
    const StatsReport r = run_stats(generated, out.path / "manifest.json");
    CHECK(r.real.median_area == r.generated.median_area);
    CHECK(r.real.iqr_area == r.generated.iqr_area);
    CHECK(r.real.median_aspect_ratio == r.generated.median_aspect_ratio);
    CHECK(r.real.iqr_aspect_ratio == r.generated.iqr_aspect_ratio);
    CHECK(r.real.count == r.generated.count);
    CHECK(r.greedy_adherence.size() == m.entries.size());
    CHECK(r.random_adherence.size() == m.entries.size());

    std::vector<Blob> blobs;
    for (const InstanceMask& g : generated)
        for (Blob& b : extract_blobs(g, 1)) blobs.push_back(std::move(b));
    const BlobStats direct = blob_stats(blobs);
    CHECK(r.generated.median_area == direct.median_area);
    CHECK(r.generated.iqr_aspect_ratio == direct.iqr_aspect_ratio);

    const json j = r.to_json();
    CHECK(j.contains("real"));
    CHECK(j.at("prior_adherence").contains("greedy_mean"));
    CHECK(r.table().find("median area") != std::string::npos);
}

TEST_CASE("sign test p-values") {
    std::vector<double> a(20, 1.0), b(20, 0.0);
    for (int i = 15; i < 20; ++i) std::swap(a[i], b[i]);
    // P(X >= 15), X ~ Binomial(20, 1/2) = 21700 / 2^20.
    CHECK(sign_test_p_value(a, b) == doctest::Approx(21700.0 / 1048576.0).epsilon(1e-9));
    // P(X >= 5) = 1 - (1 + 20 + 190 + 1140 + 4845) / 2^20.
    CHECK(sign_test_p_value(b, a) == doctest::Approx(1.0 - 6196.0 / 1048576.0).epsilon(1e-9));
    CHECK(sign_test_p_value(std::vector<double>{1, 1}, std::vector<double>{1, 1}) == 1.0);
}

TEST_CASE("placement comparison harness") {
    const std::vector<Blob> pool(60, demo::disk_blob(4));
    const PriorMap prior = perlin2d(96, 96, {3.0, 2, 0.5, 0.0, 1});
    const PlacementComparison c = compare_placement(prior, pool, make_spacing({1, 2}), 3, 4);
    CHECK(c.greedy_counts.size() == 4);
    CHECK(c.random_adherence.size() == 4);
    const json j = c.to_json();
    CHECK(j.contains("sign_test_p"));
    const PlacementComparison again = compare_placement(prior, pool, make_spacing({1, 2}), 3, 4);
    CHECK(again.greedy_adherence == c.greedy_adherence);
}

#include "cellgen/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <optional>
#include <set>
#include <thread>

#include "cellgen/errors.hpp"
#include "cellgen/png_io.hpp"
#include "cellgen/rng.hpp"

namespace cellgen {

void validate_config(const GenConfig& cfg) {
    if (cfg.num_images < 1) throw InputError("N (number of generated images) must be at least 1");
    if (cfg.num_blobs < 1) throw InputError("L (number of generated blobs) must be at least 1");
    if (cfg.num_points < 8) throw InputError("E (contour points) must be at least 8");
    if (cfg.rows < 1 || cfg.cols < 1) throw InputError("image dimensions must be positive");
    if (cfg.tile_size < 1) throw InputError("tile size must be positive");
    if (cfg.min_blob_area < 1) throw InputError("minimum blob area must be positive");
    if (cfg.blur_sigma < 0) throw InputError("blur sigma must be nonnegative");
}

GenConfig config_from_json(const json& j, GenConfig base) {
    static const std::set<std::string> known = {
        "num_images", "num_blobs", "num_points",    "rows",         "cols",     "seed",
        "min_blob_area", "blur_sigma", "tile_size", "prior",        "spacing",  "fresh_prior_seed",
        "jobs",       "real_images", "real_masks"};
    if (!j.is_object()) throw InputError("config must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (!known.contains(key)) throw InputError("unknown config key '" + key + "'");
    try {
        base.num_images = j.value("num_images", base.num_images);
        base.num_blobs = j.value("num_blobs", base.num_blobs);
        base.num_points = j.value("num_points", base.num_points);
        base.rows = j.value("rows", base.rows);
        base.cols = j.value("cols", base.cols);
        base.seed = j.value("seed", base.seed);
        base.min_blob_area = j.value("min_blob_area", base.min_blob_area);
        base.blur_sigma = j.value("blur_sigma", base.blur_sigma);
        base.tile_size = j.value("tile_size", base.tile_size);
        base.prior = j.value("prior", base.prior);
        base.spacing = j.value("spacing", base.spacing);
        base.fresh_prior_seed = j.value("fresh_prior_seed", base.fresh_prior_seed);
        base.jobs = j.value("jobs", base.jobs);
        base.real_images = j.value("real_images", base.real_images);
        base.real_masks = j.value("real_masks", base.real_masks);
    } catch (const json::exception& e) {
        throw InputError(std::string("bad config value: ") + e.what());
    }
    return base;
}

json to_json(const GenConfig& c) {
    // `jobs` is left out on purpose: it cannot change the output.
    return {{"num_images", c.num_images}, {"num_blobs", c.num_blobs},     {"num_points", c.num_points},
            {"rows", c.rows},             {"cols", c.cols},               {"seed", c.seed},
            {"min_blob_area", c.min_blob_area}, {"blur_sigma", c.blur_sigma}, {"tile_size", c.tile_size},
            {"prior", c.prior},           {"spacing", c.spacing},         {"fresh_prior_seed", c.fresh_prior_seed},
            {"real_images", c.real_images}, {"real_masks", c.real_masks}};
}

PriorMap read_prior_png(const fs::path& path) {
    const PngData png = read_png(path);
    Grid<std::uint16_t> levels(png.rows, png.cols, 0);
    for (std::size_t i = 0; i < levels.size(); ++i) levels[i] = png.samples[i * png.channels];
    return prior_from_levels(levels, png.bit_depth == 16 ? 65535 : 255);
}

void write_prior_png(const fs::path& path, const PriorMap& prior) {
    Grid<std::uint16_t> levels(prior.rows(), prior.cols(), 0);
    for (std::size_t i = 0; i < levels.size(); ++i)
        levels[i] = static_cast<std::uint16_t>(std::lround(prior.values[i] * 65535.0));
    write_gray16(path, levels);
}

namespace {

std::string numbered(const char* stem, std::size_t i, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%05zu.%s", stem, i, ext);
    return buf;
}

bool has_extension(const std::string& path, const char* ext) {
    std::string e = fs::path(path).extension().string();
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char ch) { return std::tolower(ch); });
    return e == ext;
}

template <typename Fn>
void parallel_for(std::size_t count, unsigned jobs, Fn fn) {
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    if (jobs == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_lock;
    std::vector<std::thread> workers;
    for (unsigned w = 0; w < jobs; ++w)
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_lock);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    for (auto& t : workers) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace

DatasetManifest run_pipeline(const GenConfig& cfg, std::span<const AnnotatedPair> real_pairs, const fs::path& out,
                             const ProgressFn& progress) {
    validate_config(cfg);
    if (real_pairs.empty()) throw InputError("the pipeline needs at least one real annotated pair");
    auto say = [&](const std::string& msg) {
        if (progress) progress(msg);
    };

    std::vector<InstanceMask> real_masks;
    std::vector<Blob> pool;
    std::vector<BlobPoolEntry> real_entries;
    for (std::size_t j = 0; j < real_pairs.size(); ++j) {
        real_masks.push_back(real_pairs[j].mask);
        for (LabeledBlob& lb : extract_labeled_blobs(real_pairs[j].mask, cfg.min_blob_area)) {
            pool.push_back(lb.blob);
            real_entries.push_back({std::move(lb.blob), {{"source", {{"image", j}, {"label", lb.label}}}}});
        }
    }
    if (pool.size() < 2)
        throw InputError("found " + std::to_string(pool.size()) +
                         " usable real blob(s); blob interpolation samples random pairs and needs at least 2");
    say("extracted " + std::to_string(pool.size()) + " real blobs from " + std::to_string(real_pairs.size()) +
        " images");

    BlobGenOptions gen;
    gen.num_points = cfg.num_points;
    gen.min_area = cfg.min_blob_area;
    gen.jobs = cfg.jobs;
    const std::vector<GeneratedBlob> generated = interpolate_blobs(pool, cfg.num_blobs, cfg.seed, gen);
    std::vector<Blob> gen_pool;
    std::vector<BlobPoolEntry> gen_entries;
    for (const GeneratedBlob& g : generated) {
        gen_pool.push_back(g.blob);
        gen_entries.push_back({g.blob, {{"pair", {g.first, g.second}}, {"alpha", g.alpha}}});
    }
    say("generated " + std::to_string(gen_pool.size()) + " blobs");

    fs::create_directories(out);
    for (const char* sub : {"masks", "content", "tiles", "priors", "logs", "fit"}) fs::create_directories(out / sub);
    write_blob_pool(out / "blobs" / "real", real_entries);
    write_blob_pool(out / "blobs" / "generated", gen_entries);

    std::optional<PriorMap> expert;
    PerlinParams params;
    int rows = cfg.rows, cols = cfg.cols;
    json prior_json;
    if (cfg.prior == "fitted") {
        const auto grid = default_candidate_grid(derive_seed(cfg.seed, "prior-fit"));
        params = fit_prior(real_masks, grid, {cfg.blur_sigma});
        prior_json = to_json(params);
        say("fitted prior " + prior_json.dump());
    } else if (has_extension(cfg.prior, ".png")) {
        expert = read_prior_png(cfg.prior);
        rows = expert->rows();
        cols = expert->cols();
        prior_json = {{"expert_file", fs::path(cfg.prior).filename().string()}};
    } else if (has_extension(cfg.prior, ".json")) {
        params = perlin_params_from_json(read_json_file(cfg.prior));
        prior_json = to_json(params);
    } else {
        throw InputError("prior must be 'fitted', a .png map or a .json Perlin parameter file, got '" + cfg.prior + "'");
    }
    write_text_file(out / "fit" / "prior_params.json", prior_json.dump(2) + "\n");

    SpacingDist spacing;
    if (cfg.spacing == "fitted") {
        spacing = fit_spacing(real_masks);
    } else if (has_extension(cfg.spacing, ".json")) {
        spacing = spacing_from_json(read_json_file(cfg.spacing));
    } else {
        throw InputError("spacing must be 'fitted' or a .json file, got '" + cfg.spacing + "'");
    }
    write_text_file(out / "fit" / "spacing.json", to_json(spacing).dump(2) + "\n");

    std::vector<int> tile_counts;
    std::vector<std::string> tile_paths;
    for (const AnnotatedPair& pair : real_pairs) {
        const auto tiles = tile_image(pair.image, cfg.tile_size);
        const auto counts = count_blobs_per_tile(pair.mask, cfg.tile_size);
        for (std::size_t t = 0; t < tiles.size(); ++t) {
            const std::string rel = "tiles/" + numbered("tile", tile_paths.size(), "png");
            write_image(out / rel, tiles[t].image);
            tile_paths.push_back(rel);
            tile_counts.push_back(counts[t]);
        }
    }
    if (tile_paths.empty())
        throw InputError("no real image is at least " + std::to_string(cfg.tile_size) +
                         " px on each side; lower --tile-size");
    if (expert) write_prior_png(out / "priors" / "expert.png", *expert);

    DatasetManifest manifest;
    manifest.real_images = real_pairs.size();
    manifest.generated = cfg.num_images;
    manifest.real_blobs = pool.size();
    manifest.generated_blobs = gen_pool.size();
    manifest.spacing_path = "fit/spacing.json";
    manifest.entries.resize(cfg.num_images);

    std::atomic<std::size_t> done{0};
    std::mutex say_lock;
    parallel_for(cfg.num_images, cfg.jobs, [&](std::size_t n) {
        ManifestEntry e;
        std::optional<PriorMap> realised;
        if (!expert) {
            PerlinParams p = params;
            if (cfg.fresh_prior_seed) p.seed = derive_seed(cfg.seed, "prior", n);
            realised = perlin2d(rows, cols, p);
            e.prior_params = to_json(p);
            e.prior_path = "priors/" + numbered("prior", n, "png");
            write_prior_png(out / e.prior_path, *realised);
        } else {
            e.prior_params = prior_json;
            e.prior_path = "priors/expert.png";
        }
        const PriorMap& prior = expert ? *expert : *realised;

        e.seed = derive_seed(cfg.seed, "placement", n);
        Rng rng(e.seed);
        const PlacementResult placed = greedy_placement(prior, gen_pool, spacing, rng);
        e.instances = placed.log.records.size();

        e.generated_mask_path = "masks/" + numbered("mask", n, "png");
        e.content_image_path = "content/" + numbered("content", n, "png");
        e.placement_log_path = "logs/" + numbered("placement", n, "jsonl");
        e.blob_provenance_path = "blobs/generated/index.json";
        write_mask(out / e.generated_mask_path, placed.mask);
        write_gray8(out / e.content_image_path, flatten(placed.mask));
        write_text_file(out / e.placement_log_path, placement_log_jsonl(placed.log));
        e.reference_tile_path = tile_paths[select_reference(tile_counts, e.instances)];
        manifest.entries[n] = std::move(e);

        const std::size_t finished = ++done;
        if (progress && (finished % 50 == 0 || finished == cfg.num_images)) {
            std::lock_guard lock(say_lock);
            say("placed " + std::to_string(finished) + "/" + std::to_string(cfg.num_images) + " masks");
        }
    });

    write_text_file(out / "config.json", to_json(cfg).dump(2) + "\n");
    write_manifest(out / "manifest.json", manifest);
    return manifest;
}

StatsReport compare_blob_sets(std::span<const Blob> real, std::span<const Blob> generated) {
    return {blob_stats(real), blob_stats(generated), {}, {}};
}

std::size_t baseline_attempts(std::size_t pool_size) { return pool_size; }

StatsReport run_stats(std::span<const InstanceMask> real_masks, const fs::path& manifest_path, double blur_sigma,
                      int min_blob_area) {
    if (real_masks.empty()) throw InputError("statistics need at least one real mask");
    const DatasetManifest m = read_manifest(manifest_path);
    if (m.entries.empty()) throw InputError("manifest has no entries");
    const fs::path base = manifest_path.parent_path();

    std::vector<Blob> real, generated;
    for (const InstanceMask& mask : real_masks)
        for (Blob& b : extract_blobs(mask, min_blob_area)) real.push_back(std::move(b));

    std::optional<SpacingDist> spacing;
    if (!m.spacing_path.empty()) spacing = spacing_from_json(read_json_file(base / m.spacing_path));

    std::vector<double> greedy, random;
    std::map<std::string, std::vector<Blob>> pools;
    for (const ManifestEntry& e : m.entries) {
        const InstanceMask mask = read_mask(base / e.generated_mask_path);
        for (Blob& b : extract_blobs(mask, 1)) generated.push_back(std::move(b));
        if (e.prior_path.empty()) continue;
        const PriorMap prior = read_prior_png(base / e.prior_path);
        greedy.push_back(prior_adherence(mask, prior, blur_sigma));
        if (!spacing) continue;
        auto it = pools.find(e.blob_provenance_path);
        if (it == pools.end()) {
            std::vector<Blob> pool;
            for (auto& entry : read_blob_pool((base / e.blob_provenance_path).parent_path()))
                pool.push_back(std::move(entry.blob));
            it = pools.emplace(e.blob_provenance_path, std::move(pool)).first;
        }
        Rng rng = Rng::stream(e.seed, "baseline");
        const PlacementResult rnd =
            random_weighted_placement(prior, it->second, *spacing, rng, baseline_attempts(it->second.size()));
        random.push_back(prior_adherence(rnd.mask, prior, blur_sigma));
    }
    if (real.empty()) throw InputError("real masks contain no usable blobs");
    if (generated.empty()) throw InputError("generated masks contain no blobs");
    StatsReport report = compare_blob_sets(real, generated);
    report.greedy_adherence = std::move(greedy);
    report.random_adherence = std::move(random);
    return report;
}

namespace {

double mean_or_zero(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

json StatsReport::to_json() const {
    return {{"real", cellgen::to_json(real)},
            {"generated", cellgen::to_json(generated)},
            {"prior_adherence",
             {{"greedy", greedy_adherence},
              {"random_weighted", random_adherence},
              {"greedy_mean", mean_or_zero(greedy_adherence)},
              {"random_weighted_mean", mean_or_zero(random_adherence)}}}};
}

std::string StatsReport::table() const {
    char buf[160];
    std::string out;
    std::snprintf(buf, sizeof buf, "%-22s %12s %12s\n", "statistic", "real", "generated");
    out += buf;
    auto row = [&](const char* name, double a, double b) {
        std::snprintf(buf, sizeof buf, "%-22s %12.3f %12.3f\n", name, a, b);
        out += buf;
    };
    row("blobs", static_cast<double>(real.count), static_cast<double>(generated.count));
    row("median area (px)", real.median_area, generated.median_area);
    row("IQR area (px)", real.iqr_area, generated.iqr_area);
    row("median aspect ratio", real.median_aspect_ratio, generated.median_aspect_ratio);
    row("IQR aspect ratio", real.iqr_aspect_ratio, generated.iqr_aspect_ratio);
    if (!greedy_adherence.empty()) {
        std::snprintf(buf, sizeof buf, "%-22s %12s %12s\n", "prior adherence", "greedy", "random");
        out += buf;
        row("mean", mean_or_zero(greedy_adherence), mean_or_zero(random_adherence));
    }
    return out;
}

PlacementComparison compare_placement(const PriorMap& prior, std::span<const Blob> pool, const SpacingDist& spacing,
                                      std::uint64_t seed, std::size_t runs, double blur_sigma) {
    PlacementComparison out;
    for (std::size_t r = 0; r < runs; ++r) {
        Rng g = Rng::stream(seed, "compare-greedy", r);
        const PlacementResult greedy = greedy_placement(prior, pool, spacing, g);
        Rng q = Rng::stream(seed, "compare-random", r);
        const PlacementResult random = random_weighted_placement(prior, pool, spacing, q, baseline_attempts(pool.size()));
        out.greedy_counts.push_back(greedy.log.records.size());
        out.random_counts.push_back(random.log.records.size());
        out.greedy_adherence.push_back(prior_adherence(greedy.mask, prior, blur_sigma));
        out.random_adherence.push_back(prior_adherence(random.mask, prior, blur_sigma));
    }
    return out;
}

json PlacementComparison::to_json() const {
    return {{"greedy_counts", greedy_counts},
            {"random_counts", random_counts},
            {"greedy_adherence", greedy_adherence},
            {"random_adherence", random_adherence},
            {"greedy_adherence_mean", mean_or_zero(greedy_adherence)},
            {"random_adherence_mean", mean_or_zero(random_adherence)},
            {"sign_test_p", sign_test_p_value(greedy_adherence, random_adherence)}};
}

double sign_test_p_value(std::span<const double> first, std::span<const double> second) {
    std::size_t wins = 0, n = 0;
    for (std::size_t i = 0; i < std::min(first.size(), second.size()); ++i) {
        if (first[i] == second[i]) continue;
        ++n;
        wins += first[i] > second[i];
    }
    if (n == 0) return 1.0;
    // P(X >= wins) for X ~ Binomial(n, 1/2), summed in log space.
    double p = 0;
    for (std::size_t k = wins; k <= n; ++k) {
        const double log_choose = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
        p += std::exp(log_choose - static_cast<double>(n) * std::log(2.0));
    }
    return std::min(1.0, p);
}

}  // namespace cellgen

// cellgen: command-line front end for the mask generation pipeline.

#include <cstdio>
#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "cellgen/demo.hpp"
#include "cellgen/errors.hpp"
#include "cellgen/pipeline.hpp"
#include "cellgen/png_io.hpp"

using namespace cellgen;

namespace {

// CELLGEN_LOG: 0 or "quiet" silences progress, 2 or "debug" adds detail.
int log_level() {
    const char* v = std::getenv("CELLGEN_LOG");
    if (!v) return 1;
    const std::string s = v;
    if (s == "0" || s == "quiet" || s == "error") return 0;
    if (s == "2" || s == "debug") return 2;
    return 1;
}

void info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "cellgen: " << msg << "\n";
}

void debug(const std::string& msg) {
    if (log_level() >= 2) std::cerr << "cellgen: " << msg << "\n";
}

std::vector<InstanceMask> load_masks(const std::vector<std::string>& paths) {
    if (paths.empty()) throw InputError("no --real-masks given");
    std::vector<InstanceMask> out;
    for (const auto& p : paths) out.push_back(read_mask(p));
    return out;
}

std::vector<AnnotatedPair> load_pairs(const std::vector<std::string>& images, const std::vector<std::string>& masks) {
    if (images.size() != masks.size())
        throw InputError("got " + std::to_string(images.size()) + " real images but " + std::to_string(masks.size()) +
                         " masks; they are paired by position");
    std::vector<AnnotatedPair> out;
    for (std::size_t i = 0; i < images.size(); ++i) out.push_back(load_annotated_pair(images[i], masks[i]));
    return out;
}

std::vector<Blob> load_pool(const std::string& dir) {
    std::vector<Blob> pool;
    for (BlobPoolEntry& e : read_blob_pool(dir)) pool.push_back(std::move(e.blob));
    if (pool.empty()) throw InputError("blob pool '" + dir + "' is empty");
    return pool;
}

// A .png prior is used as is; a .json file holds Perlin parameters.
PriorMap load_prior(const std::string& path, int rows, int cols) {
    const std::string ext = fs::path(path).extension().string();
    if (ext == ".png" || ext == ".PNG") return read_prior_png(path);
    if (ext == ".json") return perlin2d(rows, cols, perlin_params_from_json(read_json_file(path)));
    throw InputError("--prior must be a .png map or a .json parameter file, got '" + path + "'");
}

void emit_json(const std::string& out, const json& j) {
    if (out.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        write_text_file(out, j.dump(2) + "\n");
        info("wrote " + out);
    }
}

int error_exit(const std::string& kind, const std::string& message, int code) {
    std::cerr << json{{"error", kind}, {"message", message}}.dump() << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Synthetic instance-mask generation from a few annotated images"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    std::string out;
    unsigned jobs = 1;
    std::vector<std::string> real_images, real_masks;
    std::string prior_path, spacing_path, blobs_dir, config_path, manifest_path;
    std::size_t n_images = 1, n_blobs = 1000, runs = 20, miss_limit = 0, count = 2;
    int e_points = 64, tile_size = 256, rows = 256, cols = 256, min_area = kDefaultMinBlobArea;
    bool prior_support = false;

    auto add_seed = [&](CLI::App* c) { return c->add_option("--seed", seed, "master seed"); };
    auto add_out = [&](CLI::App* c, const char* what) { return c->add_option("--out", out, what); };
    auto add_dims = [&](CLI::App* c) {
        c->add_option("--rows", rows, "output height in pixels")->check(CLI::PositiveNumber);
        c->add_option("--cols", cols, "output width in pixels")->check(CLI::PositiveNumber);
    };

    auto* demo_cmd = app.add_subcommand("demo-data", "write a synthetic annotated dataset");
    add_out(demo_cmd, "output directory")->required();
    add_seed(demo_cmd);
    demo_cmd->add_option("--count", count, "number of image/mask pairs")->check(CLI::PositiveNumber);

    auto* extract_cmd = app.add_subcommand("extract-blobs", "extract real blobs from labeled masks");
    extract_cmd->add_option("--real-masks", real_masks, "instance mask PNGs")->required();
    extract_cmd->add_option("--min-area", min_area, "smallest blob kept, in pixels");
    add_out(extract_cmd, "blob pool directory")->required();

    auto* gen_cmd = app.add_subcommand("gen-blobs", "interpolate new blobs from a real pool");
    gen_cmd->add_option("--blobs", blobs_dir, "real blob pool directory")->required();
    gen_cmd->add_option("-l", n_blobs, "blobs to generate")->check(CLI::PositiveNumber);
    gen_cmd->add_option("-e", e_points, "contour points")->check(CLI::Range(8, 1 << 16));
    gen_cmd->add_option("--min-area", min_area, "smallest blob kept, in pixels");
    gen_cmd->add_option("--jobs", jobs, "worker threads");
    add_seed(gen_cmd);
    add_out(gen_cmd, "generated pool directory")->required();

    auto* fit_prior_cmd = app.add_subcommand("fit-prior", "fit Perlin prior parameters to real masks");
    fit_prior_cmd->add_option("--real-masks", real_masks, "instance mask PNGs")->required();
    add_seed(fit_prior_cmd);
    add_out(fit_prior_cmd, "parameter JSON file (stdout if omitted)");

    auto* fit_spacing_cmd = app.add_subcommand("fit-spacing", "fit the blob spacing distribution");
    fit_spacing_cmd->add_option("--real-masks", real_masks, "instance mask PNGs")->required();
    add_out(fit_spacing_cmd, "spacing JSON file (stdout if omitted)");

    auto* place_cmd = app.add_subcommand("place", "place a blob pool on a prior");
    place_cmd->add_option("--prior", prior_path, "prior PNG or Perlin parameter JSON")->required();
    place_cmd->add_option("--spacing", spacing_path, "spacing JSON")->required();
    place_cmd->add_option("--blobs", blobs_dir, "blob pool directory")->required();
    place_cmd->add_option("-n", n_images, "masks to place")->check(CLI::PositiveNumber);
    place_cmd->add_option("--miss-limit", miss_limit, "consecutive misses that end a run (0: run to exhaustion)");
    place_cmd->add_flag("--prior-support", prior_support, "footprints must also lie where the prior is positive");
    add_dims(place_cmd);
    add_seed(place_cmd);
    add_out(place_cmd, "output directory")->required();

    auto* pipe_cmd = app.add_subcommand("pipeline", "run the full generation pipeline");
    pipe_cmd->add_option("--config", config_path, "JSON config; flags override its keys");
    auto* o_images = pipe_cmd->add_option("--real-images", real_images, "real image PNGs");
    auto* o_masks = pipe_cmd->add_option("--real-masks", real_masks, "real instance mask PNGs");
    auto* o_n = pipe_cmd->add_option("-n", n_images, "generated images (N)");
    auto* o_l = pipe_cmd->add_option("-l", n_blobs, "generated blobs (L)");
    auto* o_e = pipe_cmd->add_option("-e", e_points, "contour points (E)");
    auto* o_prior = pipe_cmd->add_option("--prior", prior_path, "'fitted', prior PNG or Perlin parameter JSON");
    auto* o_spacing = pipe_cmd->add_option("--spacing", spacing_path, "'fitted' or spacing JSON");
    auto* o_tile = pipe_cmd->add_option("--tile-size", tile_size, "reference tile side in pixels");
    auto* o_rows = pipe_cmd->add_option("--rows", rows, "generated image height");
    auto* o_cols = pipe_cmd->add_option("--cols", cols, "generated image width");
    auto* o_seed = add_seed(pipe_cmd);
    auto* o_jobs = pipe_cmd->add_option("--jobs", jobs, "worker threads");
    add_out(pipe_cmd, "output directory")->required();

    auto* stats_cmd = app.add_subcommand("stats", "compare real and generated blob statistics");
    stats_cmd->add_option("--real-masks", real_masks, "real instance mask PNGs")->required();
    stats_cmd->add_option("--manifest", manifest_path, "generated dataset manifest")->required();
    add_out(stats_cmd, "report JSON file (table only if omitted)");

    auto* cmp_cmd = app.add_subcommand("compare-placement", "greedy versus random weighted placement");
    cmp_cmd->add_option("--prior", prior_path, "prior PNG or Perlin parameter JSON")->required();
    cmp_cmd->add_option("--spacing", spacing_path, "spacing JSON")->required();
    cmp_cmd->add_option("--blobs", blobs_dir, "blob pool directory")->required();
    cmp_cmd->add_option("--runs", runs, "paired runs")->check(CLI::PositiveNumber);
    add_dims(cmp_cmd);
    add_seed(cmp_cmd);
    add_out(cmp_cmd, "report JSON file (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return error_exit("usage", e.what(), 2);
    }

    try {
        if (*demo_cmd) {
            fs::create_directories(out);
            const auto pairs = demo::make_demo_dataset(seed, count);
            for (std::size_t i = 0; i < pairs.size(); ++i) {
                const std::string stem = "demo_" + std::to_string(i);
                write_image(fs::path(out) / (stem + "_image.png"), pairs[i].image);
                write_mask(fs::path(out) / (stem + "_mask.png"), pairs[i].mask);
            }
            info("wrote " + std::to_string(pairs.size()) + " image/mask pairs to " + out);
        } else if (*extract_cmd) {
            const auto masks = load_masks(real_masks);
            std::vector<BlobPoolEntry> entries;
            for (std::size_t j = 0; j < masks.size(); ++j)
                for (LabeledBlob& lb : extract_labeled_blobs(masks[j], min_area))
                    entries.push_back({std::move(lb.blob), {{"source", {{"image", real_masks[j]}, {"label", lb.label}}}}});
            write_blob_pool(out, entries);
            info("extracted " + std::to_string(entries.size()) + " blobs to " + out);
        } else if (*gen_cmd) {
            const auto pool = load_pool(blobs_dir);
            BlobGenOptions opts;
            opts.num_points = e_points;
            opts.min_area = min_area;
            opts.jobs = jobs;
            std::vector<BlobPoolEntry> entries;
            for (GeneratedBlob& g : interpolate_blobs(pool, n_blobs, seed, opts))
                entries.push_back({std::move(g.blob), {{"pair", {g.first, g.second}}, {"alpha", g.alpha}}});
            write_blob_pool(out, entries);
            info("generated " + std::to_string(entries.size()) + " blobs from " + std::to_string(pool.size()));
        } else if (*fit_prior_cmd) {
            const auto masks = load_masks(real_masks);
            const PerlinParams p = fit_prior(masks, default_candidate_grid(derive_seed(seed, "prior-fit")));
            emit_json(out, to_json(p));
        } else if (*fit_spacing_cmd) {
            emit_json(out, to_json(fit_spacing(load_masks(real_masks))));
        } else if (*place_cmd) {
            const PriorMap prior = load_prior(prior_path, rows, cols);
            const SpacingDist spacing = spacing_from_json(read_json_file(spacing_path));
            const auto pool = load_pool(blobs_dir);
            fs::create_directories(out);
            for (std::size_t n = 0; n < n_images; ++n) {
                Rng rng = Rng::stream(seed, "placement", n);
                const PlacementResult res = greedy_placement(prior, pool, spacing, rng, {miss_limit, prior_support});
                char stem[32];
                std::snprintf(stem, sizeof stem, "%05zu", n);
                write_mask(fs::path(out) / ("mask_" + std::string(stem) + ".png"), res.mask);
                write_text_file(fs::path(out) / ("placement_" + std::string(stem) + ".jsonl"),
                                placement_log_jsonl(res.log));
                debug("mask " + std::string(stem) + ": " + std::to_string(res.log.records.size()) + " blobs");
            }
            info("placed " + std::to_string(n_images) + " masks in " + out);
        } else if (*pipe_cmd) {
            GenConfig cfg;
            if (!config_path.empty()) cfg = config_from_json(read_json_file(config_path));
            if (*o_images) cfg.real_images = real_images;
            if (*o_masks) cfg.real_masks = real_masks;
            if (*o_n) cfg.num_images = n_images;
            if (*o_l) cfg.num_blobs = n_blobs;
            if (*o_e) cfg.num_points = e_points;
            if (*o_prior) cfg.prior = prior_path;
            if (*o_spacing) cfg.spacing = spacing_path;
            if (*o_tile) cfg.tile_size = tile_size;
            if (*o_rows) cfg.rows = rows;
            if (*o_cols) cfg.cols = cols;
            if (*o_seed) cfg.seed = seed;
            if (*o_jobs) cfg.jobs = jobs;
            validate_config(cfg);
            const auto pairs = load_pairs(cfg.real_images, cfg.real_masks);
            const DatasetManifest m = run_pipeline(cfg, pairs, out, info);
            info("wrote " + std::to_string(m.entries.size()) + " generated images to " + out);
        } else if (*stats_cmd) {
            const StatsReport r = run_stats(load_masks(real_masks), manifest_path);
            std::cout << r.table();
            if (!out.empty()) emit_json(out, r.to_json());
        } else if (*cmp_cmd) {
            const PriorMap prior = load_prior(prior_path, rows, cols);
            const SpacingDist spacing = spacing_from_json(read_json_file(spacing_path));
            emit_json(out, compare_placement(prior, load_pool(blobs_dir), spacing, seed, runs).to_json());
        }
    } catch (const InputError& e) {
        return error_exit(e.kind(), e.what(), 2);
    } catch (const IoError& e) {
        return error_exit(e.kind(), e.what(), 3);
    } catch (const Error& e) {
        return error_exit(e.kind(), e.what(), 4);
    } catch (const json::exception& e) {
        return error_exit("invalid_input", e.what(), 2);
    } catch (const std::exception& e) {
        return error_exit("internal", e.what(), 1);
    }
    return 0;
}

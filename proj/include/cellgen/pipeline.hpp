#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cellgen/dataset_io.hpp"

namespace cellgen {

/// Everything the end-to-end generator needs besides the real data.
/// `prior` is "fitted", a greyscale PNG (expert map) or a JSON file of Perlin
/// parameters; `spacing` is "fitted" or a JSON spacing file.
struct GenConfig {
    std::size_t num_images = 500;  ///< N
    std::size_t num_blobs = 1000;  ///< L
    int num_points = 64;           ///< E
    int rows = 256;
    int cols = 256;
    std::uint64_t seed = 0;
    int min_blob_area = kDefaultMinBlobArea;
    double blur_sigma = kDefaultBlurSigma;
    int tile_size = 256;
    std::string prior = "fitted";
    std::string spacing = "fitted";
    bool fresh_prior_seed = true;  ///< new noise realisation per generated image
    unsigned jobs = 1;
    std::vector<std::string> real_images;
    std::vector<std::string> real_masks;
};

/// Throws InputError when the configuration violates its invariants.
void validate_config(const GenConfig& cfg);

/// Overlay the keys present in `j` onto `base`. Unknown keys are rejected.
GenConfig config_from_json(const json& j, GenConfig base = {});
json to_json(const GenConfig& cfg);

/// Prior map from a greyscale PNG; 8- and 16-bit levels scale to [0, 1].
PriorMap read_prior_png(const fs::path& path);
/// Prior map as a 16-bit greyscale PNG.
void write_prior_png(const fs::path& path, const PriorMap& prior);

/// Progress sink; receives one line per event.
using ProgressFn = std::function<void(const std::string&)>;

/// Runs extraction, blob interpolation, prior and spacing estimation,
/// placement, flattening and reference-tile selection, writing the dataset
/// under `out`. Output depends only on the config (not on `jobs`).
DatasetManifest run_pipeline(const GenConfig& cfg, std::span<const AnnotatedPair> real_pairs,
                             const fs::path& out, const ProgressFn& progress = {});

struct StatsReport {
    BlobStats real;
    BlobStats generated;
    std::vector<double> greedy_adherence;  ///< per generated mask
    std::vector<double> random_adherence;  ///< random weighted baseline, same prior and pool

    json to_json() const;
    std::string table() const;
};

/// Side-by-side statistics of two blob sets.
StatsReport compare_blob_sets(std::span<const Blob> real, std::span<const Blob> generated);

/// Statistics for a generated dataset against the real masks. The random
/// baseline is placed with the same prior, pool and spacing per entry.
StatsReport run_stats(std::span<const InstanceMask> real_masks, const fs::path& manifest_path,
                      double blur_sigma = kDefaultBlurSigma, int min_blob_area = kDefaultMinBlobArea);

/// Attempt budget given to the random weighted baseline for a pool.
std::size_t baseline_attempts(std::size_t pool_size);

/// Head-to-head comparison of greedy and random weighted placement.
struct PlacementComparison {
    std::vector<std::size_t> greedy_counts, random_counts;
    std::vector<double> greedy_adherence, random_adherence;

    json to_json() const;
};

PlacementComparison compare_placement(const PriorMap& prior, std::span<const Blob> pool, const SpacingDist& spacing,
                                      std::uint64_t seed, std::size_t runs, double blur_sigma = kDefaultBlurSigma);

/// One-sided sign test p-value for "first > second" over paired samples;
/// ties are dropped.
double sign_test_p_value(std::span<const double> first, std::span<const double> second);

}  // namespace cellgen

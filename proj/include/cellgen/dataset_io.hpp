#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "cellgen/blobs.hpp"
#include "cellgen/grid.hpp"
#include "cellgen/placement.hpp"
#include "cellgen/priors.hpp"

namespace cellgen {

namespace fs = std::filesystem;
using nlohmann::json;

/// 8-bit image, 1 (grey) or 3 (RGB) interleaved channels.
struct Image {
    int rows = 0;
    int cols = 0;
    int channels = 1;
    std::vector<std::uint8_t> data;

    bool operator==(const Image&) const = default;
};

/// Reads grey or colour PNGs into 8-bit samples. Alpha is dropped and 16-bit
/// samples keep their high byte.
Image read_image(const fs::path& path);
void write_image(const fs::path& path, const Image& img);

/// Instance masks are single-channel 8- or 16-bit PNGs holding label values.
InstanceMask read_mask(const fs::path& path);
void write_mask(const fs::path& path, const InstanceMask& mask);

struct AnnotatedPair {
    Image image;
    InstanceMask mask;
};

AnnotatedPair load_annotated_pair(const fs::path& image_path, const fs::path& mask_path);

/// Number of distinct nonzero labels.
std::size_t count_instances(const InstanceMask& mask);

/// Foreground (any nonzero label) to 255, background to 0.
Grid<std::uint8_t> flatten(const InstanceMask& mask);

Image to_image(const Grid<std::uint8_t>& gray);

struct Tile {
    Image image;
    PixelPos origin;
};

/// Non-overlapping square tiles in row-major order; partial border tiles are
/// discarded.
std::vector<Tile> tile_image(const Image& image, int tile_size);

/// Tile row/column for a centroid coordinate. Tile t spans pixel centers
/// [t*size - 0.5, (t+1)*size - 0.5]; a centroid on a shared edge goes to the
/// lower index.
int tile_coordinate(double centroid, int tile_size);

/// Per-tile instance counts in tile_image order. An instance counts for the
/// tile containing its centroid.
std::vector<int> count_blobs_per_tile(const InstanceMask& mask, int tile_size);

/// Index of the count closest to `instances`; ties go to the lowest index.
std::size_t select_reference(std::span<const int> tile_counts, std::size_t instances);

struct BlobStats {
    double median_area = 0;
    double iqr_area = 0;
    double median_aspect_ratio = 0;
    double iqr_aspect_ratio = 0;
    std::size_t count = 0;
};

/// Major over minor axis of the second-moment ellipse, treating each pixel
/// as a uniform unit square. Always >= 1.
double aspect_ratio(const Blob& blob);

/// Linear-interpolation quantile of an unsorted sample (q in [0, 1]).
double quantile(std::vector<double> values, double q);

BlobStats blob_stats(std::span<const Blob> blobs);

json to_json(const BlobStats& s);
json to_json(const PerlinParams& p);
PerlinParams perlin_params_from_json(const json& j);
json to_json(const SpacingDist& s);
SpacingDist spacing_from_json(const json& j);

/// One JSON object per line.
std::string placement_log_jsonl(const PlacementLog& log);
PlacementLog parse_placement_log(const std::string& jsonl);

/// Blob pool on disk: `blob_NNNNN.png` footprints plus `index.json`.
struct BlobPoolEntry {
    Blob blob;
    json provenance;  ///< {"source": ...} for real blobs, {"pair": [i, j], "alpha": a} for generated
};

void write_blob_pool(const fs::path& dir, std::span<const BlobPoolEntry> entries);
std::vector<BlobPoolEntry> read_blob_pool(const fs::path& dir);

inline constexpr int kManifestSchemaVersion = 1;

struct ManifestEntry {
    std::string generated_mask_path;
    std::string content_image_path;
    std::string reference_tile_path;
    std::string prior_path;
    std::string placement_log_path;
    std::string blob_provenance_path;
    std::uint64_t seed = 0;
    json prior_params;
    std::size_t instances = 0;

    bool operator==(const ManifestEntry&) const = default;
};

/// Paths are relative to the manifest's directory.
struct DatasetManifest {
    int schema_version = kManifestSchemaVersion;
    std::size_t real_images = 0;     ///< J
    std::size_t generated = 0;       ///< N
    std::size_t real_blobs = 0;      ///< K
    std::size_t generated_blobs = 0; ///< L
    std::string spacing_path;        ///< spacing distribution used for placement
    std::vector<ManifestEntry> entries;

    bool operator==(const DatasetManifest&) const = default;
};

json to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const json& j);

/// Writes `path` after checking that N matches the entries and every
/// referenced file exists relative to the manifest directory.
void write_manifest(const fs::path& path, const DatasetManifest& m);
DatasetManifest read_manifest(const fs::path& path);

json read_json_file(const fs::path& path);
void write_text_file(const fs::path& path, const std::string& text);

}  // namespace cellgen

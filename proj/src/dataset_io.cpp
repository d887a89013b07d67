#include "cellgen/dataset_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "cellgen/errors.hpp"
#include "cellgen/png_io.hpp"

namespace cellgen {

Image read_image(const fs::path& path) {
    const PngData png = read_png(path);
    Image img{png.rows, png.cols, png.channels >= 3 ? 3 : 1, {}};
    img.data.reserve(static_cast<std::size_t>(img.rows) * img.cols * img.channels);
    const int shift = png.bit_depth == 16 ? 8 : 0;
    for (std::size_t px = 0; px < static_cast<std::size_t>(png.rows) * png.cols; ++px)
        for (int ch = 0; ch < img.channels; ++ch)
            img.data.push_back(static_cast<std::uint8_t>(png.samples[px * png.channels + ch] >> shift));
    return img;
}

void write_image(const fs::path& path, const Image& img) {
    write_png(path, {img.rows, img.cols, img.channels, 8,
                     std::vector<std::uint16_t>(img.data.begin(), img.data.end())});
}

InstanceMask read_mask(const fs::path& path) {
    const PngData png = read_png(path);
    if (png.channels != 1)
        throw InputError("mask " + path.string() + " must be a single-channel greyscale PNG of integer labels, found " +
                         std::to_string(png.channels) + " channels");
    InstanceMask mask(png.rows, png.cols, 0);
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = png.samples[i];
    return mask;
}

void write_mask(const fs::path& path, const InstanceMask& mask) {
    Grid<std::uint16_t> g(mask.rows(), mask.cols(), 0);
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i] > 0xffff) throw InputError("label " + std::to_string(mask[i]) + " does not fit a 16-bit mask");
        g[i] = static_cast<std::uint16_t>(mask[i]);
    }
    write_gray16(path, g);
}

AnnotatedPair load_annotated_pair(const fs::path& image_path, const fs::path& mask_path) {
    AnnotatedPair pair{read_image(image_path), read_mask(mask_path)};
    if (pair.image.rows != pair.mask.rows() || pair.image.cols != pair.mask.cols()) {
        std::ostringstream msg;
        msg << "dimension mismatch: image " << image_path.string() << " is " << pair.image.rows << "x"
            << pair.image.cols << " but mask " << mask_path.string() << " is " << pair.mask.rows() << "x"
            << pair.mask.cols();
        throw InputError(msg.str());
    }
    return pair;
}

std::size_t count_instances(const InstanceMask& mask) {
    std::set<Label> labels;
    for (Label l : mask.values())
        if (l) labels.insert(l);
    return labels.size();
}

Grid<std::uint8_t> flatten(const InstanceMask& mask) {
    Grid<std::uint8_t> out(mask.rows(), mask.cols(), 0);
    for (std::size_t i = 0; i < mask.size(); ++i) out[i] = mask[i] ? 255 : 0;
    return out;
}

Image to_image(const Grid<std::uint8_t>& gray) {
    return {gray.rows(), gray.cols(), 1, std::vector<std::uint8_t>(gray.values().begin(), gray.values().end())};
}

std::vector<Tile> tile_image(const Image& image, int tile_size) {
    if (tile_size < 1) throw InputError("tile size must be positive");
    std::vector<Tile> tiles;
    for (int tr = 0; (tr + 1) * tile_size <= image.rows; ++tr)
        for (int tc = 0; (tc + 1) * tile_size <= image.cols; ++tc) {
            Tile t{{tile_size, tile_size, image.channels, {}}, {tr * tile_size, tc * tile_size}};
            t.image.data.reserve(static_cast<std::size_t>(tile_size) * tile_size * image.channels);
            for (int r = 0; r < tile_size; ++r) {
                const auto row = static_cast<std::size_t>(t.origin.row + r) * image.cols + t.origin.col;
                const auto* begin = image.data.data() + row * image.channels;
                t.image.data.insert(t.image.data.end(), begin, begin + tile_size * image.channels);
            }
            tiles.push_back(std::move(t));
        }
    return tiles;
}

int tile_coordinate(double centroid, int tile_size) {
    return static_cast<int>(std::ceil((centroid + 0.5) / tile_size)) - 1;
}

std::vector<int> count_blobs_per_tile(const InstanceMask& mask, int tile_size) {
    if (tile_size < 1) throw InputError("tile size must be positive");
    const int tiles_r = mask.rows() / tile_size, tiles_c = mask.cols() / tile_size;
    std::vector<int> counts(static_cast<std::size_t>(tiles_r) * tiles_c, 0);
    struct Acc {
        double sr = 0, sc = 0;
        long n = 0;
    };
    std::map<Label, Acc> acc;
    for (int r = 0; r < mask.rows(); ++r)
        for (int c = 0; c < mask.cols(); ++c)
            if (const Label l = mask(r, c)) {
                Acc& a = acc[l];
                a.sr += r;
                a.sc += c;
                ++a.n;
            }
    for (const auto& [l, a] : acc) {
        const int tr = std::max(0, tile_coordinate(a.sr / a.n, tile_size));
        const int tc = std::max(0, tile_coordinate(a.sc / a.n, tile_size));
        if (tr < tiles_r && tc < tiles_c) ++counts[static_cast<std::size_t>(tr) * tiles_c + tc];
    }
    return counts;
}

std::size_t select_reference(std::span<const int> tile_counts, std::size_t instances) {
    if (tile_counts.empty()) throw InputError("reference selection needs at least one tile");
    std::size_t best = 0;
    long best_gap = -1;
    for (std::size_t i = 0; i < tile_counts.size(); ++i) {
        const long gap = std::labs(static_cast<long>(tile_counts[i]) - static_cast<long>(instances));
        if (best_gap < 0 || gap < best_gap) {
            best = i;
            best_gap = gap;
        }
    }
    return best;
}

double aspect_ratio(const Blob& blob) {
    if (blob.area <= 1) return 1.0;
    double sr = 0, sc = 0;
    for (int r = 0; r < blob.rows(); ++r)
        for (int c = 0; c < blob.cols(); ++c)
            if (blob.footprint(r, c)) {
                sr += r;
                sc += c;
            }
    const double n = blob.area, mr = sr / n, mc = sc / n;
    double vrr = 0, vcc = 0, vrc = 0;
    for (int r = 0; r < blob.rows(); ++r)
        for (int c = 0; c < blob.cols(); ++c)
            if (blob.footprint(r, c)) {
                vrr += (r - mr) * (r - mr);
                vcc += (c - mc) * (c - mc);
                vrc += (r - mr) * (c - mc);
            }
    // Each pixel contributes the variance of a uniform unit square.
    vrr = vrr / n + 1.0 / 12;
    vcc = vcc / n + 1.0 / 12;
    vrc /= n;
    const double mid = 0.5 * (vrr + vcc);
    const double disc = std::sqrt(0.25 * (vrr - vcc) * (vrr - vcc) + vrc * vrc);
    const double major = mid + disc, minor = mid - disc;
    return std::max(1.0, std::sqrt(major / minor));
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw InputError("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

BlobStats blob_stats(std::span<const Blob> blobs) {
    if (blobs.empty()) throw InputError("blob statistics need at least one blob");
    std::vector<double> areas, ratios;
    for (const Blob& b : blobs) {
        areas.push_back(b.area);
        ratios.push_back(aspect_ratio(b));
    }
    BlobStats s;
    s.count = blobs.size();
    s.median_area = quantile(areas, 0.5);
    s.iqr_area = quantile(areas, 0.75) - quantile(areas, 0.25);
    s.median_aspect_ratio = quantile(ratios, 0.5);
    s.iqr_aspect_ratio = quantile(ratios, 0.75) - quantile(ratios, 0.25);
    return s;
}

json to_json(const BlobStats& s) {
    return {{"count", s.count},
            {"median_area", s.median_area},
            {"iqr_area", s.iqr_area},
            {"median_aspect_ratio", s.median_aspect_ratio},
            {"iqr_aspect_ratio", s.iqr_aspect_ratio}};
}

json to_json(const PerlinParams& p) {
    return {{"base_frequency", p.base_frequency},
            {"octaves", p.octaves},
            {"persistence", p.persistence},
            {"threshold_shift", p.threshold_shift},
            {"seed", p.seed}};
}

PerlinParams perlin_params_from_json(const json& j) {
    PerlinParams p;
    p.base_frequency = j.value("base_frequency", p.base_frequency);
    p.octaves = j.value("octaves", p.octaves);
    p.persistence = j.value("persistence", p.persistence);
    p.threshold_shift = j.value("threshold_shift", p.threshold_shift);
    p.seed = j.value("seed", p.seed);
    if (p.octaves < 1 || !(p.base_frequency > 0) || !(p.persistence > 0 && p.persistence <= 1))
        throw InputError("invalid Perlin parameters: " + j.dump());
    return p;
}

json to_json(const SpacingDist& s) { return {{"samples", s.samples}}; }

SpacingDist spacing_from_json(const json& j) {
    if (!j.contains("samples") || !j["samples"].is_array()) throw InputError("spacing JSON needs a 'samples' array");
    return make_spacing(j["samples"].get<std::vector<double>>());
}

std::string placement_log_jsonl(const PlacementLog& log) {
    std::string out;
    for (const PlacementRecord& r : log.records) {
        const json j = {{"label", r.label}, {"y", r.y},       {"x", r.x},
                        {"z", r.z},         {"blob_id", r.blob_id}, {"scan_position", r.scan_position}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

PlacementLog parse_placement_log(const std::string& jsonl) {
    PlacementLog log;
    std::istringstream in(jsonl);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        log.records.push_back({j.at("y").get<int>(), j.at("x").get<int>(), j.at("z").get<double>(),
                               j.at("blob_id").get<std::size_t>(), j.at("scan_position").get<std::size_t>(),
                               j.at("label").get<Label>()});
    }
    return log;
}

namespace {

std::string blob_file_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "blob_%05zu.png", i);
    return buf;
}

}  // namespace

void write_blob_pool(const fs::path& dir, std::span<const BlobPoolEntry> entries) {
    fs::create_directories(dir);
    json index = json::array();
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const Blob& b = entries[i].blob;
        Grid<std::uint8_t> img(b.rows(), b.cols(), 0);
        for (std::size_t k = 0; k < img.size(); ++k) img[k] = b.footprint[k] ? 255 : 0;
        const std::string name = blob_file_name(i);
        write_gray8(dir / name, img);
        index.push_back({{"file", name},
                         {"offset", {b.offset.row, b.offset.col}},
                         {"area", b.area},
                         {"provenance", entries[i].provenance}});
    }
    write_text_file(dir / "index.json", json{{"blobs", index}}.dump(2) + "\n");
}

std::vector<BlobPoolEntry> read_blob_pool(const fs::path& dir) {
    const json index = read_json_file(dir / "index.json");
    std::vector<BlobPoolEntry> out;
    for (const json& e : index.at("blobs")) {
        const PngData png = read_png(dir / e.at("file").get<std::string>());
        if (png.channels != 1) throw InputError("blob footprint must be single-channel");
        BinaryGrid fp(png.rows, png.cols, 0);
        for (std::size_t k = 0; k < fp.size(); ++k) fp[k] = png.samples[k] ? 1 : 0;
        Blob b = make_blob(std::move(fp), {e.at("offset").at(0).get<int>(), e.at("offset").at(1).get<int>()});
        if (b.area != e.at("area").get<int>())
            throw InputError("blob " + e.at("file").get<std::string>() + " area disagrees with index.json");
        out.push_back({std::move(b), e.value("provenance", json::object())});
    }
    return out;
}

json to_json(const DatasetManifest& m) {
    json entries = json::array();
    for (const ManifestEntry& e : m.entries)
        entries.push_back({{"generated_mask_path", e.generated_mask_path},
                           {"content_image_path", e.content_image_path},
                           {"reference_tile_path", e.reference_tile_path},
                           {"prior_path", e.prior_path},
                           {"placement_log_path", e.placement_log_path},
                           {"blob_provenance_path", e.blob_provenance_path},
                           {"seed", e.seed},
                           {"prior_params", e.prior_params},
                           {"instances", e.instances}});
    return {{"schema_version", m.schema_version},
            {"counts",
             {{"J", m.real_images}, {"N", m.generated}, {"K", m.real_blobs}, {"L", m.generated_blobs}}},
            {"spacing_path", m.spacing_path},
            {"entries", entries}};
}

DatasetManifest manifest_from_json(const json& j) {
    DatasetManifest m;
    m.schema_version = j.at("schema_version").get<int>();
    if (m.schema_version != kManifestSchemaVersion)
        throw InputError("unsupported manifest schema_version " + std::to_string(m.schema_version));
    const json& c = j.at("counts");
    m.real_images = c.at("J").get<std::size_t>();
    m.generated = c.at("N").get<std::size_t>();
    m.real_blobs = c.at("K").get<std::size_t>();
    m.generated_blobs = c.at("L").get<std::size_t>();
    m.spacing_path = j.value("spacing_path", std::string{});
    for (const json& e : j.at("entries")) {
        ManifestEntry me;
        me.generated_mask_path = e.at("generated_mask_path").get<std::string>();
        me.content_image_path = e.at("content_image_path").get<std::string>();
        me.reference_tile_path = e.at("reference_tile_path").get<std::string>();
        me.prior_path = e.value("prior_path", std::string{});
        me.placement_log_path = e.value("placement_log_path", std::string{});
        me.blob_provenance_path = e.at("blob_provenance_path").get<std::string>();
        me.seed = e.at("seed").get<std::uint64_t>();
        me.prior_params = e.value("prior_params", json::object());
        me.instances = e.value("instances", std::size_t{0});
        m.entries.push_back(std::move(me));
    }
    return m;
}

void write_manifest(const fs::path& path, const DatasetManifest& m) {
    if (m.generated != m.entries.size())
        throw InputError("manifest N = " + std::to_string(m.generated) + " but it has " +
                         std::to_string(m.entries.size()) + " entries");
    const fs::path base = path.parent_path();
    if (!m.spacing_path.empty() && !fs::exists(base / m.spacing_path))
        throw IoError("manifest references missing file " + (base / m.spacing_path).string());
    for (const ManifestEntry& e : m.entries)
        for (const std::string* p : {&e.generated_mask_path, &e.content_image_path, &e.reference_tile_path,
                                     &e.blob_provenance_path, &e.prior_path, &e.placement_log_path})
            if (!p->empty() && !fs::exists(base / *p))
                throw IoError("manifest references missing file " + (base / *p).string());
    write_text_file(path, to_json(m).dump(2) + "\n");
}

DatasetManifest read_manifest(const fs::path& path) { return manifest_from_json(read_json_file(path)); }

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InputError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

void write_text_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot create " + path.string());
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace cellgen

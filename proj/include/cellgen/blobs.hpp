#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "cellgen/grid.hpp"
#include "cellgen/raster.hpp"

namespace cellgen {

inline constexpr int kDefaultMinBlobArea = 16;

/// A single instance footprint, tightly cropped to its bounding box.
/// `offset` is the (row, col) of the bounding-box origin in the source frame.
struct Blob {
    BinaryGrid footprint;
    PixelPos offset;
    int area = 0;

    int rows() const { return footprint.rows(); }
    int cols() const { return footprint.cols(); }

    /// Mean position of the set pixels in the source frame (x = col, y = row).
    Vec2 centroid() const;

    bool operator==(const Blob&) const = default;
};

/// Build a Blob from a tight crop, counting the set pixels.
Blob make_blob(BinaryGrid footprint, PixelPos offset);

/// Checks the Blob invariants: nonempty, area matches, tight crop, and a
/// single 4-connected component.
bool is_valid_blob(const Blob& blob);

/// Intersection over union of two blobs placed at their offsets.
double blob_iou(const Blob& a, const Blob& b);

struct LabeledBlob {
    Label label = 0;
    Blob blob;
};

/// One blob per label, ascending label order. Each label is reduced to its
/// largest 4-connected component; labels whose component is smaller than
/// `min_area` are dropped.
std::vector<LabeledBlob> extract_labeled_blobs(const InstanceMask& mask,
                                               int min_area = kDefaultMinBlobArea);
std::vector<Blob> extract_blobs(const InstanceMask& mask, int min_area = kDefaultMinBlobArea);

/// Closed contour of E points in the blob's source frame (x = column,
/// y = row, pixel centers at integer coordinates).
struct Contour {
    std::vector<Vec2> points;

    std::size_t size() const { return points.size(); }
    bool operator==(const Contour&) const = default;
};

/// Outer boundary of the first (raster order) component of `fg`, traced with
/// Moore-neighbour tracing. Vertices are pixel centers, in tracing order.
std::vector<Vec2> trace_boundary(const BinaryGrid& fg);

/// E points at uniform arc length along the outer boundary of the footprint,
/// counter-clockwise, starting at the boundary vertex of minimum angle
/// around the pixel centroid. Throws RejectionError for boundaries that
/// enclose no area.
Contour get_contour_points(const Blob& blob, int num_points);

/// x' = R(rotation) x + translation.
struct RigidTransform {
    double rotation = 0;  ///< radians, in (-pi, pi]
    Vec2 translation;

    Vec2 apply(Vec2 p) const;
};

double normalize_angle(double radians);

struct IcpOptions {
    int max_iters = 50;
    double tol = 1e-6;        ///< relative cost improvement threshold
    int seed_rotations = 8;   ///< evenly spaced initial rotations tried
};

struct Registration {
    Contour aligned;          ///< p1 transformed and re-indexed to pair with p2
    RigidTransform transform;
    double cost = 0;          ///< sum of squared index-paired distances to p2
    double initial_cost = 0;  ///< same measure before registration
};

/// Sum of squared distances between index-paired points.
double paired_cost(std::span<const Vec2> a, std::span<const Vec2> b);

/// Re-index `moving` by the cyclic shift and orientation that minimise the
/// index-paired cost against `fixed`. Returns the re-indexed points.
std::vector<Vec2> best_cyclic_pairing(std::span<const Vec2> moving, std::span<const Vec2> fixed);

/// Rigid ICP of p1 onto p2, then cyclic index pairing.
Registration register_contours(const Contour& p1, const Contour& p2, const IcpOptions& opts = {});

/// alpha * p1 + (1 - alpha) * p2, point by point.
Contour interpolate(const Contour& p1, const Contour& p2, double alpha);

/// Even-odd scanline fill plus boundary stroke, 3x3 closing and largest
/// component. Throws RejectionError when the result is below `min_area`.
Blob rasterize_and_close(const Contour& contour, int min_area = kDefaultMinBlobArea);

struct GeneratedBlob {
    Blob blob;
    std::size_t first = 0;   ///< pool index of the registered (moving) blob
    std::size_t second = 0;  ///< pool index of the target blob
    double alpha = 0;
};

struct BlobGenOptions {
    int num_points = 64;
    int min_area = kDefaultMinBlobArea;
    IcpOptions icp;
    std::size_t retry_factor = 10;  ///< total attempt budget = retry_factor * L
    unsigned jobs = 1;
};

/// Synthesise `count` blobs from random pairs of `pool`. Blob l uses its own
/// random stream derived from `seed`, so results do not depend on `jobs`.
/// Throws BudgetError when the attempt budget is exhausted.
std::vector<GeneratedBlob> interpolate_blobs(std::span<const Blob> pool, std::size_t count,
                                             std::uint64_t seed, const BlobGenOptions& opts = {});

}  // namespace cellgen

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cellgen/blobs.hpp"
#include "cellgen/grid.hpp"
#include "cellgen/priors.hpp"
#include "cellgen/rng.hpp"

namespace cellgen {

/// Locations still open for placement. Bits only ever go from 1 to 0 during
/// a placement run.
struct AvailabilityMask {
    BinaryGrid bits;

    static AvailabilityMask all_available(int rows, int cols) { return {BinaryGrid(rows, cols, 1)}; }
};

/// Top-left corner of `blob` when its bounding-box center sits at (y, x).
PixelPos anchor_origin(const Blob& blob, int y, int x);

/// True iff the blob, centered at (y, x), lies inside the grid and covers only
/// available pixels.
bool can_host(const AvailabilityMask& avail, const Blob& blob, int y, int x);

/// True iff the blob, centered at (y, x), covers only pixels with positive
/// prior. Assumes the footprint is inside the grid.
bool on_prior_support(const PriorMap& prior, const Blob& blob, int y, int x);

/// Clears the blob footprint at (y, x) and the disk of radius z around (y, x).
void update_available(AvailabilityMask& avail, const Blob& blob, int y, int x, double z);

struct PlacementRecord {
    int y = 0;
    int x = 0;
    double z = 0;
    std::size_t blob_id = 0;        ///< index into the input pool
    std::size_t scan_position = 0;  ///< position in the shuffled scan order
    Label label = 0;                ///< label written into the mask
};

struct PlacementLog {
    std::vector<PlacementRecord> records;
};

struct PlacementResult {
    InstanceMask mask;
    PlacementLog log;
};

struct PlacementOptions {
    /// Consecutive misses (sampled points where no pool blob fits) that end
    /// the run. 1 ends at the first miss; 0 never ends on misses. A missed
    /// point is marked unavailable before sampling again.
    std::size_t miss_limit = 0;
    /// Also require every footprint pixel to have positive prior, i.e. test
    /// the fit against A·P instead of A alone.
    bool require_prior_support = false;
};

/// Greedy placement: repeatedly sample a point from the normalised product of
/// availability and prior, sample a spacing offset, and stamp the first pool
/// blob (in a once-shuffled order) that fits there. Stops when the pool is
/// empty or no available mass remains (see PlacementOptions for misses).
PlacementResult greedy_placement(const PriorMap& prior, std::span<const Blob> pool, const SpacingDist& spacing,
                                 Rng& rng, const PlacementOptions& opts = {});

/// Baseline: points are drawn from the prior alone; proposals landing on
/// unavailable pixels or where no blob fits are rejected. Runs for exactly
/// `attempts` proposals or until the pool is empty.
PlacementResult random_weighted_placement(const PriorMap& prior, std::span<const Blob> pool,
                                          const SpacingDist& spacing, Rng& rng, std::size_t attempts);

/// Pearson correlation of two equally sized samples; 0 when either has zero
/// variance.
double pearson(std::span<const double> a, std::span<const double> b);

/// Correlation between the blurred binary foreground of `mask` and `prior`.
double prior_adherence(const InstanceMask& mask, const PriorMap& prior, double blur_sigma = kDefaultBlurSigma);

}  // namespace cellgen

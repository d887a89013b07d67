#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "cellgen/grid.hpp"
#include "cellgen/rng.hpp"

namespace cellgen {

inline constexpr double kDefaultBlurSigma = 8.0;

/// Per-pixel placement density, values in [0, 1].
struct PriorMap {
    RealGrid values;

    int rows() const { return values.rows(); }
    int cols() const { return values.cols(); }
    double total() const;
};

/// Throws InputError unless every value is finite and in [0, 1].
void validate_prior(const PriorMap& prior);

/// Wrap an arbitrary grid as a prior after validation.
PriorMap make_prior(RealGrid values);

/// Expert-supplied prior from integer grey levels; values are divided by
/// `max_level` (255 or 65535 for 8/16-bit images).
PriorMap prior_from_levels(const Grid<std::uint16_t>& levels, int max_level);

struct PerlinParams {
    double base_frequency = 4.0;  ///< lattice cycles per image side
    int octaves = 3;
    double persistence = 0.5;     ///< amplitude ratio between octaves
    double threshold_shift = 0.0; ///< added to the mapped value before clamping
    std::uint64_t seed = 0;

    bool operator==(const PerlinParams&) const = default;
};

/// Improved gradient noise over a 256-periodic lattice whose permutation
/// table is shuffled from `seed`. Zero at every integer lattice point.
class GradientNoise {
public:
    explicit GradientNoise(std::uint64_t seed);
    double operator()(double x, double y) const;

private:
    std::array<std::uint8_t, 512> perm_{};
};

/// Contrast of the affine map from summed noise to density:
/// value = clamp(0.5 + kPerlinContrast * n + threshold_shift, 0, 1), where n
/// is the octave sum normalised by the total amplitude.
inline constexpr double kPerlinContrast = 1.5;

PriorMap perlin2d(int rows, int cols, const PerlinParams& params);

struct PriorFitOptions {
    double blur_sigma = kDefaultBlurSigma;
    int histogram_bins = 32;
};

/// Coarse density view of a mask: Gaussian-blurred binary foreground.
RealGrid blurred_foreground(const InstanceMask& mask, double sigma);

/// Histogram intersection of two value distributions over [0, 1].
double histogram_intersection(std::span<const double> a, std::span<const double> b, int bins);

/// Dissimilarity of one candidate against precomputed blurred masks:
/// sum over masks of |mean difference| + (1 - histogram intersection).
double prior_fit_score(std::span<const RealGrid> blurred, const PerlinParams& candidate, int bins);

/// Candidate minimising prior_fit_score; ties go to fewer octaves, then
/// lower base frequency, then earlier grid position.
PerlinParams fit_prior(std::span<const InstanceMask> real_masks, std::span<const PerlinParams> candidates,
                       const PriorFitOptions& opts = {});

/// The grid searched when no explicit candidates are given.
std::vector<PerlinParams> default_candidate_grid(std::uint64_t seed);

/// Empirical spacing distribution (sorted nonnegative samples, in pixels).
struct SpacingDist {
    std::vector<double> samples;

    /// Inverse CDF with linear interpolation between order statistics.
    double quantile(double u) const;
};

/// Sorts and validates the samples. Throws InputError if empty or negative.
SpacingDist make_spacing(std::vector<double> samples);

/// Boundary-to-boundary gap from every instance to its nearest neighbour in
/// the same mask, pooled over masks. Adjacent instances give 0.
SpacingDist fit_spacing(std::span<const InstanceMask> real_masks);

double sample_spacing(const SpacingDist& dist, Rng& rng);

}  // namespace cellgen

#pragma once

#include <optional>
#include <vector>

#include "cellgen/grid.hpp"

namespace cellgen {

/// 4-connected component labelling of the nonzero pixels of `fg`.
/// Labels are 1-based in raster-scan order of first pixel; sizes[k] is the
/// pixel count of label k+1.
struct Components {
    Grid<int> labels;
    std::vector<int> sizes;
};

Components label_components(const BinaryGrid& fg);

/// Keep only the largest 4-connected component (ties: first in raster order).
BinaryGrid largest_component(const BinaryGrid& fg);

BinaryGrid dilate3x3(const BinaryGrid& fg);
BinaryGrid erode3x3(const BinaryGrid& fg);

/// Dilation followed by erosion with a 3x3 square. Pixels outside the grid
/// are treated as background during dilation and as foreground during
/// erosion, so the operation is extensive.
BinaryGrid close3x3(const BinaryGrid& fg);

/// Tight crop of the nonzero pixels. Returns nullopt when no pixel is set.
struct Crop {
    BinaryGrid footprint;
    PixelPos origin;
};
std::optional<Crop> crop_to_content(const BinaryGrid& fg);

/// Separable Gaussian blur, kernel radius ceil(3 sigma), edge-replicating
/// borders. sigma <= 0 returns the input.
RealGrid gaussian_blur(const RealGrid& in, double sigma);

/// Binary foreground (label != 0) as 0/1 reals.
RealGrid foreground_fraction(const InstanceMask& mask);

}  // namespace cellgen

#pragma once

#include <cstdint>
#include <vector>

#include "cellgen/blobs.hpp"
#include "cellgen/dataset_io.hpp"

namespace cellgen::demo {

/// Filled disk of pixel centers within `radius` of the center.
Blob disk_blob(double radius);

/// Filled ellipse with semi-axes (a, b) rotated by `angle` radians.
Blob ellipse_blob(double a, double b, double angle);

/// Star-shaped blob r(t) = radius * (1 + sum_k amp[k] cos((k + 2) t + phase[k])).
Blob star_blob(double radius, const std::vector<double>& amplitudes, const std::vector<double>& phases);

/// Random star-shaped blob with mild, asymmetric lobes.
Blob random_star_blob(Rng& rng, double radius);

struct DemoOptions {
    int rows = 256;
    int cols = 256;
    int nuclei = 45;
    double mean_area = 150;        ///< target pixel area of a nucleus
    double min_aspect = 1.1;
    double max_aspect = 1.8;
    double min_gap = 2;            ///< pixels between nuclei
};

/// Synthetic annotated image: elliptical nuclei clustered under a smooth
/// density, rendered as bright textured blobs on a dark background.
AnnotatedPair make_demo_pair(std::uint64_t seed, const DemoOptions& opts = {});

std::vector<AnnotatedPair> make_demo_dataset(std::uint64_t seed, std::size_t count, const DemoOptions& opts = {});

}  // namespace cellgen::demo

#include "doctest.h"

#include <cmath>
#include <random>

#include "cellgen/morphology.hpp"
#include "support.hpp"

using namespace cellgen;

namespace {

BinaryGrid random_grid(int rows, int cols, double density, unsigned seed) {
    std::mt19937 gen(seed);
    std::bernoulli_distribution bit(density);
    BinaryGrid g(rows, cols, 0);
    for (auto& v : g.values()) v = bit(gen) ? 1 : 0;
    return g;
}

}  // namespace

TEST_CASE("component labelling matches union-find sizes") {
    for (unsigned seed = 0; seed < 20; ++seed) {
        const BinaryGrid g = random_grid(23, 31, 0.45, seed);
        const Components comp = label_components(g);
        std::vector<int> sizes = comp.sizes;
        std::sort(sizes.rbegin(), sizes.rend());
        CHECK(sizes == oracle::component_sizes(g));
        for (int r = 0; r < g.rows(); ++r)
            for (int c = 0; c < g.cols(); ++c) CHECK((comp.labels(r, c) != 0) == (g(r, c) != 0));
    }
}

TEST_CASE("diagonal neighbours are separate components") {
    BinaryGrid g(3, 3, 0);
    g(0, 0) = g(1, 1) = g(2, 2) = 1;
    CHECK(label_components(g).sizes.size() == 3);
}

TEST_CASE("largest component keeps the biggest piece") {
    BinaryGrid g(10, 10, 0);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) g(r, c) = 1;
    for (int r = 6; r < 10; ++r)
        for (int c = 6; c < 10; ++c) g(r, c) = 1;
    const BinaryGrid big = largest_component(g);
    int n = 0;
    for (auto v : big.values()) n += v;
    CHECK(n == 16);
    CHECK(big(9, 9) == 1);
    CHECK(big(0, 0) == 0);
}

TEST_CASE("closing is extensive and fills one-pixel holes") {
    for (unsigned seed = 0; seed < 10; ++seed) {
        const BinaryGrid g = random_grid(17, 19, 0.6, seed);
        const BinaryGrid closed = close3x3(g);
        for (std::size_t i = 0; i < g.size(); ++i)
            if (g[i]) CHECK(closed[i] == 1);
    }
    BinaryGrid ring(5, 5, 1);
    ring(2, 2) = 0;
    CHECK(close3x3(ring)(2, 2) == 1);
}

TEST_CASE("dilate then erode of a full square is identity") {
    BinaryGrid g(9, 9, 0);
    for (int r = 2; r < 7; ++r)
        for (int c = 2; c < 7; ++c) g(r, c) = 1;
    CHECK(erode3x3(dilate3x3(g)) == g);
}

TEST_CASE("crop to content") {
    BinaryGrid g(8, 8, 0);
    CHECK_FALSE(crop_to_content(g).has_value());
    g(2, 3) = g(5, 4) = 1;
    const auto crop = crop_to_content(g);
    REQUIRE(crop.has_value());
    CHECK(crop->origin == PixelPos{2, 3});
    CHECK(crop->footprint.rows() == 4);
    CHECK(crop->footprint.cols() == 2);
}

TEST_CASE("gaussian blur preserves constants and mass in the interior") {
    RealGrid flat(20, 20, 0.3);
    const RealGrid b = gaussian_blur(flat, 2.0);
    for (double v : b.values()) CHECK(v == doctest::Approx(0.3).epsilon(1e-12));

    RealGrid spike(41, 41, 0.0);
    spike(20, 20) = 1.0;
    const RealGrid s = gaussian_blur(spike, 2.0);
    double total = 0;
    for (double v : s.values()) total += v;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    const double ratio = s(20, 22) / s(20, 20);
    CHECK(ratio == doctest::Approx(std::exp(-4.0 / 8.0)).epsilon(1e-3));
}

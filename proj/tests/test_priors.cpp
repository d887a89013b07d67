#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>

#include "cellgen/errors.hpp"
#include "cellgen/priors.hpp"

using namespace cellgen;

namespace {

double mean_of(std::span<const double> v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Score recomputed from scratch: coverage difference plus one minus the
// overlap of 32-bin normalised histograms on [0, 1].
double oracle_score(const RealGrid& blurred, const RealGrid& map) {
    auto hist = [](std::span<const double> v) {
        std::vector<double> h(32, 0.0);
        for (double x : v) h[std::min(31, static_cast<int>(x * 32))] += 1.0 / static_cast<double>(v.size());
        return h;
    };
    const auto a = hist(blurred.values()), b = hist(map.values());
    double overlap = 0;
    for (int k = 0; k < 32; ++k) overlap += std::min(a[k], b[k]);
    return std::abs(mean_of(blurred.values()) - mean_of(map.values())) + (1 - overlap);
}

InstanceMask checkerboard(int n) {
    InstanceMask m(n, n, 0);
    Label next = 1;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            if ((r + c) % 2 == 0) m(r, c) = next++;
    return m;
}

double brute_gap(const InstanceMask& m, Label a) {
    double best = std::numeric_limits<double>::infinity();
    for (int r1 = 0; r1 < m.rows(); ++r1)
        for (int c1 = 0; c1 < m.cols(); ++c1) {
            if (m(r1, c1) != a) continue;
            for (int r2 = 0; r2 < m.rows(); ++r2)
                for (int c2 = 0; c2 < m.cols(); ++c2) {
                    const Label b = m(r2, c2);
                    if (b == 0 || b == a) continue;
                    best = std::min(best, std::hypot(r1 - r2, c1 - c2));
                }
        }
    return std::max(0.0, best - 1);
}

}  // namespace

TEST_CASE("gradient noise vanishes at lattice points") {
    for (std::uint64_t seed : {0ull, 7ull, 123456789ull}) {
        const GradientNoise noise(seed);
        for (int i = -3; i < 300; i += 7)
            for (int j = -5; j < 300; j += 11) CHECK(noise(i, j) == 0.0);
        bool nonzero = false;
        for (int k = 0; k < 20; ++k) nonzero = nonzero || noise(k + 0.37, 2 * k + 0.61) != 0.0;
        CHECK(nonzero);
    }
}

TEST_CASE("single octave map sits at the affine offset on lattice pixels") {
    const PerlinParams p{4.0, 1, 0.5, 0.1, 9};
    const PriorMap m = perlin2d(64, 64, p);
    for (int r = 0; r < 64; r += 16)
        for (int c = 0; c < 64; c += 16) CHECK(m.values(r, c) == doctest::Approx(0.6));
}

TEST_CASE("perlin maps stay in range and are deterministic") {
    for (int oct : {1, 2, 4})
        for (double shift : {-0.6, 0.0, 0.6}) {
            const PerlinParams p{3.0, oct, 0.5, shift, 42};
            const PriorMap m = perlin2d(50, 70, p);
            for (double v : m.values.values()) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
        }
    const PerlinParams p{4.0, 3, 0.5, 0.0, 42};
    CHECK(perlin2d(64, 64, p).values == perlin2d(64, 64, p).values);
    PerlinParams q = p;
    q.seed = 43;
    CHECK_FALSE(perlin2d(64, 64, p).values == perlin2d(64, 64, q).values);
}

TEST_CASE("prior validation") {
    CHECK_THROWS_AS(make_prior(RealGrid(4, 4, 1.5)), InputError);
    CHECK_THROWS_AS(make_prior(RealGrid(4, 4, -0.1)), InputError);
    CHECK_THROWS_AS(make_prior(RealGrid(4, 4, std::numeric_limits<double>::quiet_NaN())), InputError);
    CHECK(make_prior(RealGrid(4, 4, 0.25)).total() == doctest::Approx(4.0));
    Grid<std::uint16_t> levels(2, 2, 0);
    levels(0, 1) = 255;
    levels(1, 0) = 51;
    const PriorMap p = prior_from_levels(levels, 255);
    CHECK(p.values(0, 1) == 1.0);
    CHECK(p.values(1, 0) == doctest::Approx(0.2));
}

TEST_CASE("fit_prior on uniform half-coverage masks") {
    const std::vector<InstanceMask> masks{checkerboard(96)};
    const auto grid = default_candidate_grid(5);
    const PerlinParams chosen = fit_prior(masks, grid);

    const RealGrid blurred = blurred_foreground(masks[0], kDefaultBlurSigma);
    std::size_t best = 0;
    double best_score = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double s = oracle_score(blurred, perlin2d(96, 96, grid[i]).values);
        if (s < best_score - 1e-12) {
            best_score = s;
            best = i;
        }
    }
    CHECK(chosen == grid[best]);
    CHECK(std::abs(mean_of(perlin2d(96, 96, chosen).values.values()) - 0.5) <= 0.1);
}

TEST_CASE("fit_prior score matches the oracle") {
    const std::vector<InstanceMask> masks{checkerboard(64)};
    const std::vector<RealGrid> blurred{blurred_foreground(masks[0], kDefaultBlurSigma)};
    for (const PerlinParams& p : default_candidate_grid(3))
        CHECK(prior_fit_score(blurred, p, 32) ==
              doctest::Approx(oracle_score(blurred[0], perlin2d(64, 64, p).values)).epsilon(1e-9));
}

TEST_CASE("fit_prior singleton grid and tie-break") {
    const std::vector<InstanceMask> masks{checkerboard(32)};
    const std::vector<PerlinParams> one{{8.0, 2, 0.5, 0.3, 1}};
    CHECK(fit_prior(masks, one) == one[0]);

    // A large shift saturates every map to 1, so all scores tie.
    const std::vector<PerlinParams> tied{
        {8.0, 3, 0.5, 2.0, 1}, {2.0, 3, 0.5, 2.0, 1}, {4.0, 1, 0.5, 2.0, 1}, {2.0, 1, 0.5, 2.0, 2}, {2.0, 1, 0.5, 2.0, 1}};
    CHECK(fit_prior(masks, tied) == tied[3]);

    const std::vector<PerlinParams> seeds{{4.0, 2, 0.5, 0.0, 10}, {4.0, 2, 0.5, 0.0, 11}};
    const PerlinParams w = fit_prior(masks, seeds);
    CHECK(w == fit_prior(masks, seeds));
    CHECK((w == seeds[0] || w == seeds[1]));
}

TEST_CASE("fit_prior input errors") {
    const std::vector<InstanceMask> none;
    CHECK_THROWS_AS(fit_prior(none, default_candidate_grid(0)), InputError);
    const std::vector<InstanceMask> empty{InstanceMask(16, 16, 0)};
    CHECK_THROWS_AS(fit_prior(empty, default_candidate_grid(0)), InputError);
    const std::vector<PerlinParams> no_candidates;
    CHECK_THROWS_AS(fit_prior(std::vector<InstanceMask>{checkerboard(8)}, no_candidates), InputError);
}

TEST_CASE("fit_spacing examples") {
    InstanceMask two(1, 11, 0);
    two(0, 0) = 1;
    two(0, 10) = 2;
    CHECK(fit_spacing(std::vector<InstanceMask>{two}).samples == std::vector<double>{9, 9});

    InstanceMask touching(4, 6, 0);
    for (int r = 0; r < 4; ++r) {
        touching(r, 1) = touching(r, 2) = 1;
        touching(r, 3) = touching(r, 4) = 2;
    }
    CHECK(fit_spacing(std::vector<InstanceMask>{touching}).samples.front() == 0);

    InstanceMask line(1, 13, 0);
    line(0, 0) = 1;
    line(0, 6) = 2;
    line(0, 12) = 3;
    for (double s : fit_spacing(std::vector<InstanceMask>{line}).samples) CHECK(s == 5);

    CHECK_THROWS_AS(fit_spacing(std::vector<InstanceMask>{InstanceMask(5, 5, 0)}), InputError);
    InstanceMask single(5, 5, 0);
    single(2, 2) = 4;
    CHECK_THROWS_AS(fit_spacing(std::vector<InstanceMask>{single}), InputError);
}

TEST_CASE("fit_spacing matches a brute-force pixel-pair oracle") {
    std::mt19937 gen(21);
    for (int trial = 0; trial < 8; ++trial) {
        InstanceMask m(30, 30, 0);
        std::uniform_int_distribution<int> pos(0, 26), size(1, 4);
        const int count = 2 + trial % 4;
        for (Label l = 1; l <= static_cast<Label>(count); ++l) {
            const int r0 = pos(gen), c0 = pos(gen), h = size(gen), w = size(gen);
            for (int r = r0; r < std::min(30, r0 + h); ++r)
                for (int c = c0; c < std::min(30, c0 + w); ++c) m(r, c) = l;
        }
        std::vector<double> expected;
        std::vector<bool> present(count + 1, false);
        for (Label v : m.values()) present[v] = true;
        int alive = 0;
        for (int l = 1; l <= count; ++l) alive += present[l];
        if (alive < 2) continue;
        for (int l = 1; l <= count; ++l)
            if (present[l]) expected.push_back(brute_gap(m, l));
        std::sort(expected.begin(), expected.end());
        const auto got = fit_spacing(std::vector<InstanceMask>{m}).samples;
        REQUIRE(got.size() == expected.size());
        for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(expected[i]).epsilon(1e-12));
    }
}

TEST_CASE("spacing sampling") {
    Rng rng(1);
    const SpacingDist five = make_spacing({5});
    for (int i = 0; i < 100; ++i) CHECK(sample_spacing(five, rng) == 5);
    CHECK(make_spacing({0, 10}).quantile(0.5) == 5);
    CHECK(make_spacing({10, 0, 4}).samples == std::vector<double>{0, 4, 10});
    CHECK_THROWS_AS(make_spacing({}), InputError);
    CHECK_THROWS_AS(make_spacing({1, -2}), InputError);

    const SpacingDist s = make_spacing({1, 2, 2, 3, 7, 11, 12});
    // Integral of the piecewise-linear inverse CDF: trapezoids between order
    // statistics.
    double expected = 0;
    for (std::size_t i = 0; i + 1 < s.samples.size(); ++i) expected += (s.samples[i] + s.samples[i + 1]) / 2;
    expected /= static_cast<double>(s.samples.size() - 1);
    double sum = 0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        const double z = sample_spacing(s, rng);
        CHECK(z >= 1);
        CHECK(z <= 12);
        sum += z;
    }
    CHECK(sum / draws == doctest::Approx(expected).epsilon(0.02));

    std::mt19937 gen(5);
    std::gamma_distribution<double> gap(2.0, 4.0);
    std::vector<double> many(200);
    for (double& v : many) v = gap(gen);
    const SpacingDist big = make_spacing(many);
    double sample_mean = 0;
    for (double v : many) sample_mean += v / static_cast<double>(many.size());
    double big_sum = 0;
    for (int i = 0; i < draws; ++i) big_sum += sample_spacing(big, rng);
    CHECK(big_sum / draws == doctest::Approx(sample_mean).epsilon(0.02));
}

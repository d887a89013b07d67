#include "cellgen/demo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cellgen/morphology.hpp"
#include "cellgen/priors.hpp"
#include "cellgen/rng.hpp"

namespace cellgen::demo {

namespace {

template <typename Inside>
Blob rasterize_predicate(double reach, Inside inside) {
    const int n = static_cast<int>(std::ceil(reach)) + 1;
    BinaryGrid g(2 * n + 1, 2 * n + 1, 0);
    for (int r = 0; r < g.rows(); ++r)
        for (int c = 0; c < g.cols(); ++c) g(r, c) = inside(c - n, r - n) ? 1 : 0;
    auto crop = crop_to_content(largest_component(g));
    return make_blob(std::move(crop->footprint), crop->origin);
}

}  // namespace

Blob disk_blob(double radius) {
    return rasterize_predicate(radius, [&](double x, double y) { return x * x + y * y <= radius * radius; });
}

Blob ellipse_blob(double a, double b, double angle) {
    const double cs = std::cos(angle), sn = std::sin(angle);
    return rasterize_predicate(std::max(a, b), [&](double x, double y) {
        const double u = cs * x + sn * y, v = -sn * x + cs * y;
        return (u * u) / (a * a) + (v * v) / (b * b) <= 1.0;
    });
}

Blob star_blob(double radius, const std::vector<double>& amplitudes, const std::vector<double>& phases) {
    double reach = 1;
    for (double a : amplitudes) reach += std::abs(a);
    return rasterize_predicate(radius * reach, [&](double x, double y) {
        const double t = std::atan2(y, x);
        double r = 1;
        for (std::size_t k = 0; k < amplitudes.size(); ++k)
            r += amplitudes[k] * std::cos(static_cast<double>(k + 2) * t + phases[k]);
        return std::sqrt(x * x + y * y) <= radius * r;
    });
}

Blob random_star_blob(Rng& rng, double radius) {
    std::vector<double> amps, phases;
    for (int k = 0; k < 3; ++k) {
        amps.push_back(0.04 + 0.12 * rng.uniform());
        phases.push_back(2 * std::numbers::pi * rng.uniform());
    }
    return star_blob(radius, amps, phases);
}

AnnotatedPair make_demo_pair(std::uint64_t seed, const DemoOptions& opts) {
    Rng rng = Rng::stream(seed, "demo-layout");
    const PriorMap density = perlin2d(opts.rows, opts.cols, {3.0, 2, 0.5, 0.1, derive_seed(seed, "demo-density")});

    InstanceMask mask(opts.rows, opts.cols, 0);
    BinaryGrid blocked(opts.rows, opts.cols, 0);
    Label next = 1;
    for (int attempt = 0; attempt < 200 * opts.nuclei && static_cast<int>(next) <= opts.nuclei; ++attempt) {
        const int y = static_cast<int>(rng.below(opts.rows));
        const int x = static_cast<int>(rng.below(opts.cols));
        const double aspect = opts.min_aspect + (opts.max_aspect - opts.min_aspect) * rng.uniform();
        const double area = opts.mean_area * (0.8 + 0.4 * rng.uniform());
        const double angle = std::numbers::pi * rng.uniform();
        if (rng.uniform() > density.values(y, x)) continue;
        const double ab = area / std::numbers::pi;
        const Blob b = ellipse_blob(std::sqrt(ab * aspect), std::sqrt(ab / aspect), angle);
        const int top = y - b.rows() / 2, left = x - b.cols() / 2;
        if (top < 0 || left < 0 || top + b.rows() > opts.rows || left + b.cols() > opts.cols) continue;
        bool clear = true;
        for (int r = 0; r < b.rows() && clear; ++r)
            for (int c = 0; c < b.cols() && clear; ++c)
                if (b.footprint(r, c) && blocked(top + r, left + c)) clear = false;
        if (!clear) continue;
        const int g = static_cast<int>(std::ceil(opts.min_gap));
        for (int r = 0; r < b.rows(); ++r)
            for (int c = 0; c < b.cols(); ++c) {
                if (!b.footprint(r, c)) continue;
                mask(top + r, left + c) = next;
                for (int dr = -g; dr <= g; ++dr)
                    for (int dc = -g; dc <= g; ++dc)
                        if (blocked.contains(top + r + dr, left + c + dc)) blocked(top + r + dr, left + c + dc) = 1;
            }
        ++next;
    }

    Image img{opts.rows, opts.cols, 1, std::vector<std::uint8_t>(mask.size())};
    const GradientNoise texture(derive_seed(seed, "demo-texture"));
    for (int r = 0; r < opts.rows; ++r)
        for (int c = 0; c < opts.cols; ++c) {
            const double t = texture(c / 6.0, r / 6.0);
            const double base = mask(r, c) ? 170 + 60 * t : 35 + 15 * t;
            const double noise = 10 * (rng.uniform() - 0.5);
            img.data[mask.index(r, c)] = static_cast<std::uint8_t>(std::clamp(base + noise, 0.0, 255.0));
        }
    return {std::move(img), std::move(mask)};
}

std::vector<AnnotatedPair> make_demo_dataset(std::uint64_t seed, std::size_t count, const DemoOptions& opts) {
    std::vector<AnnotatedPair> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(make_demo_pair(derive_seed(seed, "demo-image", i), opts));
    return out;
}

}  // namespace cellgen::demo

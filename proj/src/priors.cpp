#include "cellgen/priors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <tuple>

#include "cellgen/errors.hpp"
#include "cellgen/morphology.hpp"

namespace cellgen {

double PriorMap::total() const {
    double acc = 0;
    for (double v : values.values()) acc += v;
    return acc;
}

void validate_prior(const PriorMap& prior) {
    if (prior.values.empty()) throw InputError("prior map is empty");
    for (double v : prior.values.values())
        if (!std::isfinite(v) || v < 0.0 || v > 1.0)
            throw InputError("prior value " + std::to_string(v) + " outside [0, 1]");
}

PriorMap make_prior(RealGrid values) {
    PriorMap p{std::move(values)};
    validate_prior(p);
    return p;
}

PriorMap prior_from_levels(const Grid<std::uint16_t>& levels, int max_level) {
    if (max_level <= 0) throw InputError("prior grey-level range must be positive");
    RealGrid v(levels.rows(), levels.cols(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = std::min(1.0, static_cast<double>(levels[i]) / max_level);
    return make_prior(std::move(v));
}

GradientNoise::GradientNoise(std::uint64_t seed) {
    std::array<std::uint8_t, 256> p{};
    std::iota(p.begin(), p.end(), 0);
    Rng rng(seed);
    for (std::size_t i = p.size() - 1; i > 0; --i) std::swap(p[i], p[rng.below(i + 1)]);
    for (std::size_t i = 0; i < perm_.size(); ++i) perm_[i] = p[i & 255];
}

namespace {

double fade(double t) { return t * t * t * (t * (t * 6 - 15) + 10); }
double lerp(double t, double a, double b) { return a + t * (b - a); }

// Gradient of the improved-noise construction restricted to the z = 0 plane.
double grad(int hash, double x, double y) {
    const int h = hash & 15;
    const double u = h < 8 ? x : y;
    const double v = h < 4 ? y : (h == 12 || h == 14 ? x : 0.0);
    return ((h & 1) == 0 ? u : -u) + ((h & 2) == 0 ? v : -v);
}

}  // namespace

double GradientNoise::operator()(double x, double y) const {
    const double fx = std::floor(x), fy = std::floor(y);
    const int xi = static_cast<int>(static_cast<long long>(fx) & 255);
    const int yi = static_cast<int>(static_cast<long long>(fy) & 255);
    x -= fx;
    y -= fy;
    const double u = fade(x), v = fade(y);
    const int a = perm_[xi] + yi, b = perm_[xi + 1] + yi;
    // z = 0 plane: the z lattice index is 0, so the hash picks perm_[... + 0].
    const int aa = perm_[perm_[a]], ab = perm_[perm_[a + 1]];
    const int ba = perm_[perm_[b]], bb = perm_[perm_[b + 1]];
    return lerp(v, lerp(u, grad(aa, x, y), grad(ba, x - 1, y)),
                lerp(u, grad(ab, x, y - 1), grad(bb, x - 1, y - 1)));
}

PriorMap perlin2d(int rows, int cols, const PerlinParams& params) {
    if (rows < 1 || cols < 1) throw InputError("prior dimensions must be positive");
    if (params.octaves < 1 || !(params.base_frequency > 0))
        throw InputError("perlin parameters need octaves >= 1 and base_frequency > 0");
    const GradientNoise noise(params.seed);
    double amp_total = 0;
    for (int o = 0; o < params.octaves; ++o) amp_total += std::pow(params.persistence, o);

    RealGrid v(rows, cols, 0.0);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            double acc = 0, amp = 1, freq = params.base_frequency;
            for (int o = 0; o < params.octaves; ++o) {
                acc += amp * noise(c * freq / cols, r * freq / rows);
                amp *= params.persistence;
                freq *= 2;
            }
            const double n = acc / amp_total;
            v(r, c) = std::clamp(0.5 + kPerlinContrast * n + params.threshold_shift, 0.0, 1.0);
        }
    }
    return PriorMap{std::move(v)};
}

RealGrid blurred_foreground(const InstanceMask& mask, double sigma) {
    return gaussian_blur(foreground_fraction(mask), sigma);
}

double histogram_intersection(std::span<const double> a, std::span<const double> b, int bins) {
    auto hist = [bins](std::span<const double> v) {
        std::vector<double> h(bins, 0.0);
        for (double x : v) {
            const int k = std::clamp(static_cast<int>(x * bins), 0, bins - 1);
            h[k] += 1.0;
        }
        for (double& x : h) x /= static_cast<double>(v.size());
        return h;
    };
    const auto ha = hist(a), hb = hist(b);
    double acc = 0;
    for (int k = 0; k < bins; ++k) acc += std::min(ha[k], hb[k]);
    return acc;
}

namespace {

double mean(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

double prior_fit_score(std::span<const RealGrid> blurred, const PerlinParams& candidate, int bins) {
    double score = 0;
    std::map<std::pair<int, int>, PriorMap> cache;
    for (const RealGrid& target : blurred) {
        const auto key = std::make_pair(target.rows(), target.cols());
        auto it = cache.find(key);
        if (it == cache.end()) it = cache.emplace(key, perlin2d(key.first, key.second, candidate)).first;
        const auto values = it->second.values.values();
        score += std::abs(mean(values) - mean(target.values()));
        score += 1.0 - histogram_intersection(values, target.values(), bins);
    }
    return score;
}

PerlinParams fit_prior(std::span<const InstanceMask> real_masks, std::span<const PerlinParams> candidates,
                       const PriorFitOptions& opts) {
    if (real_masks.empty()) throw InputError("prior fitting needs at least one real mask");
    if (candidates.empty()) throw InputError("prior fitting needs a nonempty candidate grid");
    std::vector<RealGrid> blurred;
    bool any_foreground = false;
    for (const InstanceMask& m : real_masks) {
        if (m.empty()) continue;
        for (Label l : m.values()) any_foreground |= l != 0;
        blurred.push_back(blurred_foreground(m, opts.blur_sigma));
    }
    if (!any_foreground) throw InputError("prior fitting needs masks with foreground pixels");

    using Key = std::tuple<double, int, double, std::size_t>;
    Key best{std::numeric_limits<double>::infinity(), 0, 0.0, 0};
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const PerlinParams& c = candidates[i];
        const Key key{prior_fit_score(blurred, c, opts.histogram_bins), c.octaves, c.base_frequency, i};
        if (key < best) best = key;
    }
    return candidates[std::get<3>(best)];
}

std::vector<PerlinParams> default_candidate_grid(std::uint64_t seed) {
    std::vector<PerlinParams> grid;
    for (int octaves : {1, 2, 3})
        for (double freq : {2.0, 4.0, 8.0})
            for (double shift : {-0.4, -0.2, 0.0, 0.2, 0.4})
                grid.push_back({freq, octaves, 0.5, shift, seed});
    return grid;
}

double SpacingDist::quantile(double u) const {
    const std::size_t n = samples.size();
    if (n == 1) return samples.front();
    const double pos = std::clamp(u, 0.0, 1.0) * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    if (lo + 1 >= n) return samples.back();
    const double t = pos - static_cast<double>(lo);
    return samples[lo] + t * (samples[lo + 1] - samples[lo]);
}

SpacingDist make_spacing(std::vector<double> samples) {
    if (samples.empty()) throw InputError("spacing distribution needs at least one sample");
    for (double s : samples)
        if (!std::isfinite(s) || s < 0) throw InputError("spacing samples must be finite and nonnegative");
    std::sort(samples.begin(), samples.end());
    return SpacingDist{std::move(samples)};
}

namespace {

struct Instance {
    int r0, r1, c0, c1;
    std::vector<PixelPos> boundary;
};

double box_gap(const Instance& a, const Instance& b) {
    const int dr = std::max({0, b.r0 - a.r1, a.r0 - b.r1});
    const int dc = std::max({0, b.c0 - a.c1, a.c0 - b.c1});
    return std::sqrt(static_cast<double>(dr) * dr + static_cast<double>(dc) * dc);
}

}  // namespace

SpacingDist fit_spacing(std::span<const InstanceMask> real_masks) {
    std::vector<double> samples;
    bool usable = false;
    for (const InstanceMask& mask : real_masks) {
        std::map<Label, Instance> inst;
        for (int r = 0; r < mask.rows(); ++r)
            for (int c = 0; c < mask.cols(); ++c) {
                const Label l = mask(r, c);
                if (!l) continue;
                auto [it, fresh] = inst.try_emplace(l, Instance{r, r, c, c, {}});
                Instance& in = it->second;
                if (!fresh) {
                    in.r0 = std::min(in.r0, r);
                    in.r1 = std::max(in.r1, r);
                    in.c0 = std::min(in.c0, c);
                    in.c1 = std::max(in.c1, c);
                }
                const bool edge = !mask.contains(r - 1, c) || mask(r - 1, c) != l ||
                                  !mask.contains(r + 1, c) || mask(r + 1, c) != l ||
                                  !mask.contains(r, c - 1) || mask(r, c - 1) != l ||
                                  !mask.contains(r, c + 1) || mask(r, c + 1) != l;
                if (edge) in.boundary.push_back({r, c});
            }
        if (inst.size() < 2) continue;
        usable = true;

        std::vector<const Instance*> all;
        for (const auto& [l, in] : inst) all.push_back(&in);
        for (const Instance* a : all) {
            std::vector<std::pair<double, const Instance*>> order;
            for (const Instance* b : all)
                if (b != a) order.emplace_back(box_gap(*a, *b), b);
            std::sort(order.begin(), order.end(),
                      [](const auto& x, const auto& y) { return x.first < y.first; });
            double best_sq = std::numeric_limits<double>::infinity();
            for (const auto& [bound, b] : order) {
                if (bound * bound >= best_sq) break;
                for (PixelPos p : a->boundary)
                    for (PixelPos q : b->boundary) {
                        const double dr = p.row - q.row, dc = p.col - q.col;
                        best_sq = std::min(best_sq, dr * dr + dc * dc);
                    }
            }
            const double best = std::sqrt(best_sq);
            samples.push_back(std::max(0.0, best - 1.0));
        }
    }
    if (!usable) throw InputError("spacing fitting needs at least one mask with two or more instances");
    return make_spacing(std::move(samples));
}

double sample_spacing(const SpacingDist& dist, Rng& rng) { return dist.quantile(rng.uniform()); }

}  // namespace cellgen

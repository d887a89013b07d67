#include "cellgen/placement.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cellgen/errors.hpp"

namespace cellgen {

PixelPos anchor_origin(const Blob& blob, int y, int x) { return {y - blob.rows() / 2, x - blob.cols() / 2}; }

bool can_host(const AvailabilityMask& avail, const Blob& blob, int y, int x) {
    const PixelPos o = anchor_origin(blob, y, x);
    const BinaryGrid& a = avail.bits;
    if (o.row < 0 || o.col < 0 || o.row + blob.rows() > a.rows() || o.col + blob.cols() > a.cols()) return false;
    for (int r = 0; r < blob.rows(); ++r)
        for (int c = 0; c < blob.cols(); ++c)
            if (blob.footprint(r, c) && !a(o.row + r, o.col + c)) return false;
    return true;
}

bool on_prior_support(const PriorMap& prior, const Blob& blob, int y, int x) {
    const PixelPos o = anchor_origin(blob, y, x);
    for (int r = 0; r < blob.rows(); ++r)
        for (int c = 0; c < blob.cols(); ++c)
            if (blob.footprint(r, c) && !(prior.values(o.row + r, o.col + c) > 0)) return false;
    return true;
}

void update_available(AvailabilityMask& avail, const Blob& blob, int y, int x, double z) {
    BinaryGrid& a = avail.bits;
    const PixelPos o = anchor_origin(blob, y, x);
    for (int r = 0; r < blob.rows(); ++r)
        for (int c = 0; c < blob.cols(); ++c)
            if (blob.footprint(r, c) && a.contains(o.row + r, o.col + c)) a(o.row + r, o.col + c) = 0;
    const double z2 = z * z;
    const int reach = static_cast<int>(std::floor(std::max(0.0, z)));
    for (int r = std::max(0, y - reach); r <= std::min(a.rows() - 1, y + reach); ++r)
        for (int c = std::max(0, x - reach); c <= std::min(a.cols() - 1, x + reach); ++c) {
            const double dr = r - y, dc = c - x;
            if (dr * dr + dc * dc <= z2) a(r, c) = 0;
        }
}

namespace {

void stamp(InstanceMask& mask, const Blob& blob, int y, int x, Label label) {
    const PixelPos o = anchor_origin(blob, y, x);
    for (int r = 0; r < blob.rows(); ++r)
        for (int c = 0; c < blob.cols(); ++c)
            if (blob.footprint(r, c)) mask(o.row + r, o.col + c) = label;
}

std::vector<std::size_t> shuffled_order(std::size_t n, Rng& rng) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    return order;
}

constexpr double kMinMass = 1e-12;

struct Slot {
    std::size_t blob_id;
    std::size_t scan_position;
};

// Categorical sampler over A * P. Row sums are recomputed from scratch for
// every touched row, so the totals carry no accumulated rounding drift.
class MassSampler {
public:
    MassSampler(const PriorMap& prior, const AvailabilityMask& avail)
        : prior_(prior), avail_(avail), row_sums_(prior.rows(), 0.0) {
        refresh(0, prior.rows() - 1);
    }

    double total() const { return total_; }

    void refresh(int r0, int r1) {
        r0 = std::max(r0, 0);
        r1 = std::min(r1, prior_.rows() - 1);
        for (int r = r0; r <= r1; ++r) {
            double acc = 0;
            for (int c = 0; c < prior_.cols(); ++c)
                if (avail_.bits(r, c)) acc += prior_.values(r, c);
            row_sums_[r] = acc;
        }
        total_ = 0;
        for (double v : row_sums_) total_ += v;
    }

    // Only pixels with positive mass can be returned.
    PixelPos draw(Rng& rng) const {
        const double target = rng.uniform() * total_;
        double acc = 0;
        int row = -1;
        for (int r = 0; r < prior_.rows(); ++r) {
            if (row_sums_[r] <= 0) continue;
            row = r;
            if (acc + row_sums_[r] > target) break;
            acc += row_sums_[r];
        }
        int col = -1;
        for (int c = 0; c < prior_.cols(); ++c) {
            const double w = avail_.bits(row, c) ? prior_.values(row, c) : 0.0;
            if (w <= 0) continue;
            col = c;
            acc += w;
            if (acc > target) break;
        }
        return {row, col};
    }

private:
    const PriorMap& prior_;
    const AvailabilityMask& avail_;
    std::vector<double> row_sums_;
    double total_ = 0;
};

}  // namespace

PlacementResult greedy_placement(const PriorMap& prior, std::span<const Blob> pool, const SpacingDist& spacing,
                                 Rng& rng, const PlacementOptions& opts) {
    const int rows = prior.rows(), cols = prior.cols();
    PlacementResult out{InstanceMask(rows, cols, 0), {}};
    AvailabilityMask avail = AvailabilityMask::all_available(rows, cols);

    const std::vector<std::size_t> order = shuffled_order(pool.size(), rng);
    std::vector<Slot> remaining;
    for (std::size_t k = 0; k < order.size(); ++k) remaining.push_back({order[k], k});

    MassSampler sampler(prior, avail);
    std::size_t misses = 0;
    while (!remaining.empty() && sampler.total() >= kMinMass) {
        const PixelPos at = sampler.draw(rng);
        const int y = at.row, x = at.col;
        const double z = sample_spacing(spacing, rng);

        auto fit = std::find_if(remaining.begin(), remaining.end(), [&](const Slot& s) {
            const Blob& b = pool[s.blob_id];
            return can_host(avail, b, y, x) && (!opts.require_prior_support || on_prior_support(prior, b, y, x));
        });
        if (fit == remaining.end()) {
            if (opts.miss_limit > 0 && ++misses >= opts.miss_limit) break;
            // Nothing fits here now, and nothing will later: both the pool and
            // the availability only shrink.
            avail.bits(y, x) = 0;
            sampler.refresh(y, y);
            continue;
        }

        misses = 0;
        const Blob& blob = pool[fit->blob_id];
        const Label label = static_cast<Label>(out.log.records.size() + 1);
        stamp(out.mask, blob, y, x, label);
        update_available(avail, blob, y, x, z);
        const PixelPos o = anchor_origin(blob, y, x);
        const int reach = static_cast<int>(std::ceil(std::max(0.0, z)));
        sampler.refresh(std::min(o.row, y - reach), std::max(o.row + blob.rows() - 1, y + reach));
        out.log.records.push_back({y, x, z, fit->blob_id, fit->scan_position, label});
        remaining.erase(fit);
    }
    return out;
}

PlacementResult random_weighted_placement(const PriorMap& prior, std::span<const Blob> pool,
                                          const SpacingDist& spacing, Rng& rng, std::size_t attempts) {
    const int rows = prior.rows(), cols = prior.cols();
    PlacementResult out{InstanceMask(rows, cols, 0), {}};
    AvailabilityMask avail = AvailabilityMask::all_available(rows, cols);

    const std::vector<std::size_t> order = shuffled_order(pool.size(), rng);
    std::vector<Slot> remaining;
    for (std::size_t k = 0; k < order.size(); ++k) remaining.push_back({order[k], k});

    std::vector<double> cdf(prior.values.size());
    double total = 0;
    for (std::size_t i = 0; i < cdf.size(); ++i) {
        total += prior.values[i];
        cdf[i] = total;
    }
    if (total < kMinMass) return out;

    for (std::size_t a = 0; a < attempts && !remaining.empty(); ++a) {
        const double target = rng.uniform() * total;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
        const std::size_t idx = it == cdf.end() ? cdf.size() - 1 : static_cast<std::size_t>(it - cdf.begin());
        const int y = static_cast<int>(idx / cols), x = static_cast<int>(idx % cols);
        const double z = sample_spacing(spacing, rng);
        if (!avail.bits[idx]) continue;

        auto fit = std::find_if(remaining.begin(), remaining.end(),
                                [&](const Slot& s) { return can_host(avail, pool[s.blob_id], y, x); });
        if (fit == remaining.end()) continue;

        const Blob& blob = pool[fit->blob_id];
        const Label label = static_cast<Label>(out.log.records.size() + 1);
        stamp(out.mask, blob, y, x, label);
        update_available(avail, blob, y, x, z);
        out.log.records.push_back({y, x, z, fit->blob_id, fit->scan_position, label});
        remaining.erase(fit);
    }
    return out;
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InputError("correlation inputs differ in size");
    const double n = static_cast<double>(a.size());
    if (a.empty()) return 0.0;
    const auto constant = [](std::span<const double> v) {
        return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
    };
    if (constant(a) || constant(b)) return 0.0;
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 0 || sbb <= 0) return 0.0;
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double prior_adherence(const InstanceMask& mask, const PriorMap& prior, double blur_sigma) {
    if (mask.rows() != prior.rows() || mask.cols() != prior.cols())
        throw InputError("mask and prior dimensions differ");
    const RealGrid density = blurred_foreground(mask, blur_sigma);
    return pearson(density.values(), prior.values.values());
}

}  // namespace cellgen

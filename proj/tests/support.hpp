#pragma once

// Independent oracles and fixtures shared by the test suites. Nothing here
// calls the code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "cellgen/blobs.hpp"
#include "cellgen/grid.hpp"

namespace oracle {

using cellgen::BinaryGrid;
using cellgen::Blob;

/// 4-connected component sizes via union-find over a raster scan.
inline std::vector<int> component_sizes(const BinaryGrid& g) {
    std::vector<int> parent(g.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (int r = 0; r < g.rows(); ++r)
        for (int c = 0; c < g.cols(); ++c) {
            if (!g(r, c)) continue;
            const int i = static_cast<int>(g.index(r, c));
            if (r > 0 && g(r - 1, c)) parent[find(i)] = find(static_cast<int>(g.index(r - 1, c)));
            if (c > 0 && g(r, c - 1)) parent[find(i)] = find(static_cast<int>(g.index(r, c - 1)));
        }
    std::map<int, int> sizes;
    for (int i = 0; i < static_cast<int>(g.size()); ++i)
        if (g[i]) ++sizes[find(i)];
    std::vector<int> out;
    for (auto [root, n] : sizes) out.push_back(n);
    std::sort(out.rbegin(), out.rend());
    return out;
}

/// Length of the 0.5 iso-contour of the binary image on the pixel-center
/// lattice (marching squares with edge-midpoint crossings).
inline double marching_perimeter(const BinaryGrid& g) {
    auto at = [&](int r, int c) { return g.contains(r, c) && g(r, c) ? 1 : 0; };
    double total = 0;
    for (int r = -1; r < g.rows(); ++r)
        for (int c = -1; c < g.cols(); ++c) {
            const int a = at(r, c), b = at(r, c + 1), d = at(r + 1, c), e = at(r + 1, c + 1);
            const int k = a + b + d + e;
            if (k == 1 || k == 3) total += std::sqrt(0.5);
            else if (k == 2) total += (a == e) ? std::sqrt(2.0) : 1.0;
        }
    return total;
}

/// Crossing-number point-in-polygon test.
inline bool inside_polygon(const std::vector<cellgen::Vec2>& poly, double x, double y) {
    bool in = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const auto& a = poly[i];
        const auto& b = poly[j];
        if ((a.y > y) != (b.y > y) && x < (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x) in = !in;
    }
    return in;
}

/// IoU of two blobs after translating both so their centroids coincide
/// (to the nearest pixel).
inline double centered_iou(const Blob& a, const Blob& b) {
    const auto ca = a.centroid(), cb = b.centroid();
    Blob moved = b;
    moved.offset.col += static_cast<int>(std::lround(ca.x - cb.x));
    moved.offset.row += static_cast<int>(std::lround(ca.y - cb.y));
    return cellgen::blob_iou(a, moved);
}

/// Linear-interpolation quantile computed from a sorted copy.
inline double sorted_quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1) * q;
    const double lo = std::floor(h), hi = std::ceil(h);
    return v[static_cast<std::size_t>(lo)] + (h - lo) * (v[static_cast<std::size_t>(hi)] - v[static_cast<std::size_t>(lo)]);
}

}  // namespace oracle

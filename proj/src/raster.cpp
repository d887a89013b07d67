#include "cellgen/raster.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace cellgen {

double signed_area(std::span<const Vec2> poly) {
    const std::size_t n = poly.size();
    double acc = 0;
    for (std::size_t i = 0; i < n; ++i) acc += cross(poly[i], poly[(i + 1) % n]);
    return 0.5 * acc;
}

double perimeter(std::span<const Vec2> poly) {
    const std::size_t n = poly.size();
    double acc = 0;
    for (std::size_t i = 0; i < n; ++i) acc += std::sqrt(norm2(poly[(i + 1) % n] - poly[i]));
    return acc;
}

void fill_polygon_even_odd(std::span<const Vec2> poly, BinaryGrid& out) {
    const std::size_t n = poly.size();
    if (n < 3) return;
    std::vector<double> xs;
    for (int r = 0; r < out.rows(); ++r) {
        const double y = r;
        xs.clear();
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 a = poly[i], b = poly[(i + 1) % n];
            if (a.y == b.y) continue;
            const double ymin = std::min(a.y, b.y), ymax = std::max(a.y, b.y);
            if (y < ymin || y >= ymax) continue;
            xs.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
        }
        std::sort(xs.begin(), xs.end());
        for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
            const int c0 = std::max(0, static_cast<int>(std::ceil(xs[k])));
            const int c1 = std::min(out.cols() - 1, static_cast<int>(std::floor(xs[k + 1])));
            for (int c = c0; c <= c1; ++c) out(r, c) = 1;
        }
    }
}

void stroke_closed_polyline(std::span<const Vec2> poly, BinaryGrid& out) {
    const std::size_t n = poly.size();
    auto mark = [&](Vec2 p) {
        const int r = static_cast<int>(std::lround(p.y));
        const int c = static_cast<int>(std::lround(p.x));
        if (out.contains(r, c)) out(r, c) = 1;
    };
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = poly[i], b = poly[(i + 1) % n];
        const double len = std::sqrt(norm2(b - a));
        const int steps = std::max(1, static_cast<int>(std::ceil(len / 0.25)));
        for (int s = 0; s <= steps; ++s) mark(a + (b - a) * (static_cast<double>(s) / steps));
    }
}

}  // namespace cellgen

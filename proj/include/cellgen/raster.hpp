#pragma once

#include <span>

#include "cellgen/grid.hpp"

namespace cellgen {

/// 2D point in image coordinates: x is the column axis, y is the row axis,
/// pixel (r, c) has its center at (x = c, y = r).
struct Vec2 {
    double x = 0;
    double y = 0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    bool operator==(const Vec2&) const = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm2(Vec2 a) { return dot(a, a); }

/// Signed shoelace area of a closed polygon (positive for the orientation we
/// call counter-clockwise: increasing angle atan2(y, x)).
double signed_area(std::span<const Vec2> poly);

/// Perimeter of the closed polygon.
double perimeter(std::span<const Vec2> poly);

/// Scanline fill with the even-odd rule, sampling at pixel centers. A pixel
/// is set when its center lies strictly inside under the half-open crossing
/// convention (edges counted for y in [ymin, ymax)).
void fill_polygon_even_odd(std::span<const Vec2> poly, BinaryGrid& out);

/// Marks every pixel whose center is the nearest pixel to some point of the
/// closed polyline (edges sampled at sub-pixel steps).
void stroke_closed_polyline(std::span<const Vec2> poly, BinaryGrid& out);

}  // namespace cellgen

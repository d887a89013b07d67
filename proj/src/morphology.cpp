#include "cellgen/morphology.hpp"

#include <algorithm>
#include <cmath>

namespace cellgen {

Components label_components(const BinaryGrid& fg) {
    Components out{Grid<int>(fg.rows(), fg.cols(), 0), {}};
    std::vector<PixelPos> stack;
    for (int r = 0; r < fg.rows(); ++r) {
        for (int c = 0; c < fg.cols(); ++c) {
            if (!fg(r, c) || out.labels(r, c)) continue;
            const int id = static_cast<int>(out.sizes.size()) + 1;
            int count = 0;
            stack.push_back({r, c});
            out.labels(r, c) = id;
            while (!stack.empty()) {
                const PixelPos p = stack.back();
                stack.pop_back();
                ++count;
                constexpr int dr[4] = {-1, 1, 0, 0};
                constexpr int dc[4] = {0, 0, -1, 1};
                for (int k = 0; k < 4; ++k) {
                    const int nr = p.row + dr[k], nc = p.col + dc[k];
                    if (fg.contains(nr, nc) && fg(nr, nc) && !out.labels(nr, nc)) {
                        out.labels(nr, nc) = id;
                        stack.push_back({nr, nc});
                    }
                }
            }
            out.sizes.push_back(count);
        }
    }
    return out;
}

BinaryGrid largest_component(const BinaryGrid& fg) {
    const Components cc = label_components(fg);
    BinaryGrid out(fg.rows(), fg.cols(), 0);
    if (cc.sizes.empty()) return out;
    const auto best = std::max_element(cc.sizes.begin(), cc.sizes.end()) - cc.sizes.begin();
    const int keep = static_cast<int>(best) + 1;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = cc.labels[i] == keep ? 1 : 0;
    return out;
}

namespace {

BinaryGrid morph3x3(const BinaryGrid& fg, bool dilate) {
    BinaryGrid out(fg.rows(), fg.cols(), 0);
    for (int r = 0; r < fg.rows(); ++r) {
        for (int c = 0; c < fg.cols(); ++c) {
            bool acc = !dilate;
            for (int dr = -1; dr <= 1; ++dr) {
                for (int dc = -1; dc <= 1; ++dc) {
                    const int nr = r + dr, nc = c + dc;
                    const bool v = fg.contains(nr, nc) ? fg(nr, nc) != 0 : !dilate;
                    acc = dilate ? (acc || v) : (acc && v);
                }
            }
            out(r, c) = acc ? 1 : 0;
        }
    }
    return out;
}

}  // namespace

BinaryGrid dilate3x3(const BinaryGrid& fg) { return morph3x3(fg, true); }
BinaryGrid erode3x3(const BinaryGrid& fg) { return morph3x3(fg, false); }

BinaryGrid close3x3(const BinaryGrid& fg) { return erode3x3(dilate3x3(fg)); }

std::optional<Crop> crop_to_content(const BinaryGrid& fg) {
    int r0 = fg.rows(), r1 = -1, c0 = fg.cols(), c1 = -1;
    for (int r = 0; r < fg.rows(); ++r) {
        for (int c = 0; c < fg.cols(); ++c) {
            if (!fg(r, c)) continue;
            r0 = std::min(r0, r);
            r1 = std::max(r1, r);
            c0 = std::min(c0, c);
            c1 = std::max(c1, c);
        }
    }
    if (r1 < 0) return std::nullopt;
    Crop crop{BinaryGrid(r1 - r0 + 1, c1 - c0 + 1, 0), {r0, c0}};
    for (int r = r0; r <= r1; ++r)
        for (int c = c0; c <= c1; ++c) crop.footprint(r - r0, c - c0) = fg(r, c) ? 1 : 0;
    return crop;
}

RealGrid gaussian_blur(const RealGrid& in, double sigma) {
    if (sigma <= 0 || in.empty()) return in;
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    double norm = 0;
    for (int k = -radius; k <= radius; ++k) {
        kernel[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
        norm += kernel[k + radius];
    }
    for (double& k : kernel) k /= norm;

    const int rows = in.rows(), cols = in.cols();
    RealGrid tmp(rows, cols, 0.0), out(rows, cols, 0.0);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            double acc = 0;
            for (int k = -radius; k <= radius; ++k)
                acc += kernel[k + radius] * in(r, std::clamp(c + k, 0, cols - 1));
            tmp(r, c) = acc;
        }
    }
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            double acc = 0;
            for (int k = -radius; k <= radius; ++k)
                acc += kernel[k + radius] * tmp(std::clamp(r + k, 0, rows - 1), c);
            out(r, c) = acc;
        }
    }
    return out;
}

RealGrid foreground_fraction(const InstanceMask& mask) {
    RealGrid out(mask.rows(), mask.cols(), 0.0);
    for (std::size_t i = 0; i < mask.size(); ++i) out[i] = mask[i] != 0 ? 1.0 : 0.0;
    return out;
}

}  // namespace cellgen

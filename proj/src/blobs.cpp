#include "cellgen/blobs.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <thread>

#include "cellgen/errors.hpp"
#include "cellgen/morphology.hpp"
#include "cellgen/rng.hpp"

namespace cellgen {

Vec2 Blob::centroid() const {
    double sx = 0, sy = 0;
    int n = 0;
    for (int r = 0; r < rows(); ++r)
        for (int c = 0; c < cols(); ++c)
            if (footprint(r, c)) {
                sx += c;
                sy += r;
                ++n;
            }
    if (n == 0) return {static_cast<double>(offset.col), static_cast<double>(offset.row)};
    return {offset.col + sx / n, offset.row + sy / n};
}

Blob make_blob(BinaryGrid footprint, PixelPos offset) {
    Blob b{std::move(footprint), offset, 0};
    for (std::size_t i = 0; i < b.footprint.size(); ++i) b.area += b.footprint[i] ? 1 : 0;
    return b;
}

bool is_valid_blob(const Blob& blob) {
    const BinaryGrid& f = blob.footprint;
    if (f.empty() || blob.area < 1) return false;
    int count = 0;
    for (std::size_t i = 0; i < f.size(); ++i) count += f[i] ? 1 : 0;
    if (count != blob.area) return false;
    auto row_set = [&](int r) {
        for (int c = 0; c < f.cols(); ++c)
            if (f(r, c)) return true;
        return false;
    };
    auto col_set = [&](int c) {
        for (int r = 0; r < f.rows(); ++r)
            if (f(r, c)) return true;
        return false;
    };
    if (!row_set(0) || !row_set(f.rows() - 1) || !col_set(0) || !col_set(f.cols() - 1)) return false;
    return label_components(f).sizes.size() == 1;
}

double blob_iou(const Blob& a, const Blob& b) {
    const int r0 = std::min(a.offset.row, b.offset.row);
    const int c0 = std::min(a.offset.col, b.offset.col);
    const int r1 = std::max(a.offset.row + a.rows(), b.offset.row + b.rows());
    const int c1 = std::max(a.offset.col + a.cols(), b.offset.col + b.cols());
    auto at = [](const Blob& bl, int r, int c) {
        const int lr = r - bl.offset.row, lc = c - bl.offset.col;
        return bl.footprint.contains(lr, lc) && bl.footprint(lr, lc);
    };
    long inter = 0, uni = 0;
    for (int r = r0; r < r1; ++r)
        for (int c = c0; c < c1; ++c) {
            const bool x = at(a, r, c), y = at(b, r, c);
            inter += x && y;
            uni += x || y;
        }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / uni;
}

std::vector<LabeledBlob> extract_labeled_blobs(const InstanceMask& mask, int min_area) {
    struct Box {
        int r0, r1, c0, c1;
    };
    std::map<Label, Box> boxes;
    for (int r = 0; r < mask.rows(); ++r)
        for (int c = 0; c < mask.cols(); ++c) {
            const Label l = mask(r, c);
            if (l == 0) continue;
            auto [it, fresh] = boxes.try_emplace(l, Box{r, r, c, c});
            if (!fresh) {
                Box& b = it->second;
                b.r0 = std::min(b.r0, r);
                b.r1 = std::max(b.r1, r);
                b.c0 = std::min(b.c0, c);
                b.c1 = std::max(b.c1, c);
            }
        }

    std::vector<LabeledBlob> out;
    for (const auto& [label, box] : boxes) {
        BinaryGrid local(box.r1 - box.r0 + 1, box.c1 - box.c0 + 1, 0);
        for (int r = box.r0; r <= box.r1; ++r)
            for (int c = box.c0; c <= box.c1; ++c) local(r - box.r0, c - box.c0) = mask(r, c) == label;
        auto crop = crop_to_content(largest_component(local));
        if (!crop) continue;
        Blob blob = make_blob(std::move(crop->footprint),
                              {box.r0 + crop->origin.row, box.c0 + crop->origin.col});
        if (blob.area < min_area) continue;
        out.push_back({label, std::move(blob)});
    }
    return out;
}

std::vector<Blob> extract_blobs(const InstanceMask& mask, int min_area) {
    std::vector<Blob> out;
    for (auto& lb : extract_labeled_blobs(mask, min_area)) out.push_back(std::move(lb.blob));
    return out;
}

std::vector<Vec2> trace_boundary(const BinaryGrid& fg) {
    // Clockwise on screen (y down), starting west.
    constexpr int dr[8] = {0, -1, -1, -1, 0, 1, 1, 1};
    constexpr int dc[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
    auto set = [&](int r, int c) { return fg.contains(r, c) && fg(r, c) != 0; };
    auto dir_of = [&](int drow, int dcol) {
        for (int k = 0; k < 8; ++k)
            if (dr[k] == drow && dc[k] == dcol) return k;
        return 0;
    };

    std::optional<PixelPos> start;
    for (int r = 0; r < fg.rows() && !start; ++r)
        for (int c = 0; c < fg.cols(); ++c)
            if (fg(r, c)) {
                start = PixelPos{r, c};
                break;
            }
    if (!start) return {};

    std::vector<Vec2> pts{{static_cast<double>(start->col), static_cast<double>(start->row)}};
    PixelPos cur = *start;
    int back = 0;  // west of the first raster pixel is background
    std::optional<PixelPos> second;
    const std::size_t cap = 4 * fg.size() + 16;
    for (std::size_t step = 0; step < cap; ++step) {
        std::optional<PixelPos> next;
        int prev_dir = back;
        for (int k = 1; k <= 8; ++k) {
            const int d = (back + k) % 8;
            if (set(cur.row + dr[d], cur.col + dc[d])) {
                next = PixelPos{cur.row + dr[d], cur.col + dc[d]};
                break;
            }
            prev_dir = d;
        }
        if (!next) break;  // isolated pixel
        if (!second) {
            second = next;
        } else if (cur == *start && *next == *second) {
            break;
        }
        const int br = cur.row + dr[prev_dir], bc = cur.col + dc[prev_dir];
        back = dir_of(br - next->row, bc - next->col);
        cur = *next;
        pts.push_back({static_cast<double>(cur.col), static_cast<double>(cur.row)});
    }
    if (pts.size() > 1 && pts.back() == pts.front()) pts.pop_back();
    return pts;
}

Contour get_contour_points(const Blob& blob, int num_points) {
    if (num_points < 8) throw InputError("contour needs at least 8 points, got " + std::to_string(num_points));
    std::vector<Vec2> poly = trace_boundary(blob.footprint);
    const Vec2 origin{static_cast<double>(blob.offset.col), static_cast<double>(blob.offset.row)};
    for (Vec2& p : poly) p = p + origin;
    const double area = signed_area(poly);
    if (poly.size() < 3 || std::abs(area) < 1e-9)
        throw RejectionError("blob boundary encloses no area");
    if (area < 0) std::reverse(poly.begin(), poly.end());

    const Vec2 c = blob.centroid();
    std::size_t start = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const double a = std::atan2(poly[i].y - c.y, poly[i].x - c.x);
        if (a < best) {
            best = a;
            start = i;
        }
    }
    std::rotate(poly.begin(), poly.begin() + static_cast<std::ptrdiff_t>(start), poly.end());

    const std::size_t n = poly.size();
    std::vector<double> cum(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        cum[i + 1] = cum[i] + std::sqrt(norm2(poly[(i + 1) % n] - poly[i]));
    const double total = cum[n];

    Contour out;
    out.points.reserve(num_points);
    std::size_t seg = 0;
    for (int k = 0; k < num_points; ++k) {
        const double s = total * k / num_points;
        while (seg + 1 < n && cum[seg + 1] <= s) ++seg;
        const double len = cum[seg + 1] - cum[seg];
        const double t = len > 0 ? (s - cum[seg]) / len : 0.0;
        const Vec2 a = poly[seg], b = poly[(seg + 1) % n];
        out.points.push_back(a + (b - a) * t);
    }
    return out;
}

double normalize_angle(double radians) {
    constexpr double two_pi = 2 * std::numbers::pi;
    double a = std::fmod(radians, two_pi);
    if (a <= -std::numbers::pi) a += two_pi;
    if (a > std::numbers::pi) a -= two_pi;
    return a;
}

Vec2 RigidTransform::apply(Vec2 p) const {
    const double cs = std::cos(rotation), sn = std::sin(rotation);
    return {cs * p.x - sn * p.y + translation.x, sn * p.x + cs * p.y + translation.y};
}

double paired_cost(std::span<const Vec2> a, std::span<const Vec2> b) {
    double acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += norm2(a[i] - b[i]);
    return acc;
}

std::vector<Vec2> best_cyclic_pairing(std::span<const Vec2> moving, std::span<const Vec2> fixed) {
    const std::size_t n = moving.size();
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_shift = 0;
    bool best_rev = false;
    for (int rev = 0; rev < 2; ++rev)
        for (std::size_t s = 0; s < n; ++s) {
            double acc = 0;
            for (std::size_t i = 0; i < n && acc < best; ++i) {
                const std::size_t j = rev ? (s + n - i) % n : (s + i) % n;
                acc += norm2(moving[j] - fixed[i]);
            }
            if (acc < best) {
                best = acc;
                best_shift = s;
                best_rev = rev != 0;
            }
        }
    std::vector<Vec2> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = moving[best_rev ? (best_shift + n - i) % n : (best_shift + i) % n];
    return out;
}

namespace {

Vec2 mean_of(std::span<const Vec2> pts) {
    Vec2 m;
    for (Vec2 p : pts) m = m + p;
    return m * (1.0 / static_cast<double>(pts.size()));
}

// Least-squares rigid transform mapping src[i] onto dst[i].
RigidTransform solve_rigid(std::span<const Vec2> src, std::span<const Vec2> dst) {
    const Vec2 a = mean_of(src), b = mean_of(dst);
    double sc = 0, ss = 0;
    for (std::size_t i = 0; i < src.size(); ++i) {
        const Vec2 p = src[i] - a, q = dst[i] - b;
        sc += dot(p, q);
        ss += cross(p, q);
    }
    RigidTransform t;
    t.rotation = normalize_angle(std::atan2(ss, sc));
    t.translation = b - RigidTransform{t.rotation, {}}.apply(a);
    return t;
}

std::vector<Vec2> transformed(std::span<const Vec2> pts, const RigidTransform& t) {
    std::vector<Vec2> out(pts.size());
    std::transform(pts.begin(), pts.end(), out.begin(), [&](Vec2 p) { return t.apply(p); });
    return out;
}

struct IcpResult {
    RigidTransform transform;
    double cost;
};

IcpResult run_icp(std::span<const Vec2> src, std::span<const Vec2> dst, RigidTransform t,
                  const IcpOptions& opts) {
    std::vector<Vec2> matched(src.size());
    double prev = std::numeric_limits<double>::infinity();
    IcpResult best{t, prev};
    for (int it = 0; it < opts.max_iters; ++it) {
        double cost = 0;
        for (std::size_t i = 0; i < src.size(); ++i) {
            const Vec2 p = t.apply(src[i]);
            double bd = std::numeric_limits<double>::infinity();
            for (const Vec2& q : dst) {
                const double d = norm2(p - q);
                if (d < bd) {
                    bd = d;
                    matched[i] = q;
                }
            }
            cost += bd;
        }
        if (cost < best.cost) best = {t, cost};
        if (cost == 0 || (prev - cost) <= opts.tol * prev) break;
        prev = cost;
        t = solve_rigid(src, matched);
    }
    return best;
}

// Exhaustive search over cyclic shifts and both orientations, each with its
// closed-form rigid fit. Returns the lowest paired cost found.
Registration best_cyclic_rigid(std::span<const Vec2> src, std::span<const Vec2> dst) {
    const std::size_t n = src.size();
    Registration best;
    best.cost = std::numeric_limits<double>::infinity();
    std::vector<Vec2> order(n);
    for (int rev = 0; rev < 2; ++rev)
        for (std::size_t s = 0; s < n; ++s) {
            for (std::size_t i = 0; i < n; ++i) order[i] = src[rev ? (s + n - i) % n : (s + i) % n];
            const RigidTransform t = solve_rigid(order, dst);
            std::vector<Vec2> moved = transformed(order, t);
            const double cost = paired_cost(moved, dst);
            if (cost < best.cost) {
                best.cost = cost;
                best.transform = t;
                best.aligned.points = std::move(moved);
            }
        }
    return best;
}

}  // namespace

Registration register_contours(const Contour& p1, const Contour& p2, const IcpOptions& opts) {
    if (p1.size() != p2.size() || p1.size() == 0)
        throw InputError("registration needs two contours with the same nonzero point count");
    const Vec2 c1 = mean_of(p1.points), c2 = mean_of(p2.points);

    IcpResult best{{}, std::numeric_limits<double>::infinity()};
    const int seeds = std::max(1, opts.seed_rotations);
    for (int k = 0; k < seeds; ++k) {
        RigidTransform init;
        init.rotation = normalize_angle(2 * std::numbers::pi * k / seeds);
        init.translation = c2 - RigidTransform{init.rotation, {}}.apply(c1);
        const IcpResult r = run_icp(p1.points, p2.points, init, opts);
        if (r.cost < best.cost) best = r;
    }

    Registration out;
    out.initial_cost = paired_cost(best_cyclic_pairing(p1.points, p2.points), p2.points);
    out.transform = best.transform;
    out.aligned.points = best_cyclic_pairing(transformed(p1.points, best.transform), p2.points);
    out.cost = paired_cost(out.aligned.points, p2.points);

    // Point-to-point ICP on uniformly resampled contours can settle one index
    // step away from the optimum. Keep its pose only when no cyclic pairing
    // with its own rigid fit does better.
    Registration joint = best_cyclic_rigid(p1.points, p2.points);
    if (joint.cost < out.cost * (1 - opts.tol)) {
        out.transform = joint.transform;
        out.aligned = std::move(joint.aligned);
        out.cost = joint.cost;
    }
    return out;
}

Contour interpolate(const Contour& p1, const Contour& p2, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw InputError("interpolation weight must lie in [0, 1], got " + std::to_string(alpha));
    if (p1.size() != p2.size()) throw InputError("interpolated contours must have the same point count");
    Contour out;
    out.points.resize(p1.size());
    for (std::size_t i = 0; i < p1.size(); ++i)
        out.points[i] = p1.points[i] * alpha + p2.points[i] * (1.0 - alpha);
    return out;
}

Blob rasterize_and_close(const Contour& contour, int min_area) {
    if (contour.size() < 8) throw InputError("rasterization needs at least 8 contour points");
    double minx = contour.points[0].x, maxx = minx, miny = contour.points[0].y, maxy = miny;
    for (Vec2 p : contour.points) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw RejectionError("non-finite contour point");
        minx = std::min(minx, p.x);
        maxx = std::max(maxx, p.x);
        miny = std::min(miny, p.y);
        maxy = std::max(maxy, p.y);
    }
    const int x0 = static_cast<int>(std::floor(minx)) - 2;
    const int y0 = static_cast<int>(std::floor(miny)) - 2;
    const int cols = static_cast<int>(std::ceil(maxx)) - x0 + 3;
    const int rows = static_cast<int>(std::ceil(maxy)) - y0 + 3;

    std::vector<Vec2> local(contour.points.size());
    for (std::size_t i = 0; i < local.size(); ++i)
        local[i] = contour.points[i] - Vec2{static_cast<double>(x0), static_cast<double>(y0)};

    BinaryGrid canvas(rows, cols, 0);
    fill_polygon_even_odd(local, canvas);
    stroke_closed_polyline(local, canvas);
    auto crop = crop_to_content(largest_component(close3x3(canvas)));
    if (!crop) throw RejectionError("rasterized contour is empty");
    Blob blob = make_blob(std::move(crop->footprint), {y0 + crop->origin.row, x0 + crop->origin.col});
    if (blob.area < min_area)
        throw RejectionError("rasterized blob area " + std::to_string(blob.area) + " below minimum " +
                             std::to_string(min_area));
    return blob;
}

std::vector<GeneratedBlob> interpolate_blobs(std::span<const Blob> pool, std::size_t count,
                                             std::uint64_t seed, const BlobGenOptions& opts) {
    const std::size_t k = pool.size();
    if (k < 2) throw InputError("blob interpolation needs at least 2 real blobs, got " + std::to_string(k));

    std::vector<std::optional<Contour>> contours(k);
    for (std::size_t i = 0; i < k; ++i) {
        try {
            contours[i] = get_contour_points(pool[i], opts.num_points);
        } catch (const RejectionError&) {
        }
    }

    const std::size_t budget = opts.retry_factor * count;
    std::vector<std::optional<GeneratedBlob>> results(count);
    std::vector<std::size_t> attempts(count, 0);

    auto generate = [&](std::size_t l) {
        Rng rng = Rng::stream(seed, "blobgen", l);
        while (attempts[l] < budget) {
            ++attempts[l];
            const std::size_t i = rng.below(k);
            std::size_t j = rng.below(k - 1);
            if (j >= i) ++j;
            const double alpha = rng.uniform();
            if (!contours[i] || !contours[j]) continue;
            try {
                const Registration reg = register_contours(*contours[i], *contours[j], opts.icp);
                Blob b = rasterize_and_close(interpolate(reg.aligned, *contours[j], alpha), opts.min_area);
                results[l] = GeneratedBlob{std::move(b), i, j, alpha};
                return;
            } catch (const RejectionError&) {
            }
        }
    };

    const unsigned jobs = std::max(1u, std::min<unsigned>(opts.jobs, static_cast<unsigned>(count)));
    if (jobs <= 1) {
        for (std::size_t l = 0; l < count; ++l) generate(l);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        for (unsigned w = 0; w < jobs; ++w)
            workers.emplace_back([&] {
                for (std::size_t l = next++; l < count; l = next++) generate(l);
            });
        for (auto& t : workers) t.join();
    }

    std::vector<GeneratedBlob> out;
    out.reserve(count);
    std::size_t used = 0;
    for (std::size_t l = 0; l < count; ++l) {
        used += attempts[l];
        if (!results[l] || used > budget)
            throw BudgetError("retry budget of " + std::to_string(budget) + " attempts exhausted after " +
                                  std::to_string(out.size()) + " of " + std::to_string(count) + " blobs",
                              out.size());
        out.push_back(std::move(*results[l]));
    }
    return out;
}

}  // namespace cellgen

#include "role_engine/sdf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace role_engine {

namespace {

constexpr double kFar = 1e20;

// 1D squared distance transform of a sampled function (Felzenszwalb & Huttenlocher).
void distance_transform_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
                           std::vector<double>& z) {
    const int n = static_cast<int>(f.size());
    int k = 0;
    v[0] = 0;
    z[0] = -std::numeric_limits<double>::infinity();
    z[1] = std::numeric_limits<double>::infinity();
    auto intersect = [&](int q, int p) {
        return ((f[q] + static_cast<double>(q) * q) - (f[p] + static_cast<double>(p) * p)) / (2.0 * (q - p));
    };
    for (int q = 1; q < n; ++q) {
        double s = intersect(q, v[k]);
        while (s <= z[k]) {
            --k;
            s = intersect(q, v[k]);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = std::numeric_limits<double>::infinity();
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q)
            ++k;
        const double diff = q - v[k];
        d[q] = diff * diff + f[v[k]];
    }
}

// Squared distance (in cells) from every cell of a w x h raster to the nearest seed.
std::vector<double> squared_edt(const std::vector<std::uint8_t>& seeds, int w, int h) {
    std::vector<double> grid(static_cast<size_t>(w) * h);
    for (size_t i = 0; i < grid.size(); ++i)
        grid[i] = seeds[i] ? 0.0 : kFar;
    const int n = std::max(w, h);
    std::vector<double> f(n), d(n), z(n + 1);
    std::vector<int> v(n);
    f.resize(h);
    d.resize(h);
    for (int c = 0; c < w; ++c) {
        for (int r = 0; r < h; ++r)
            f[r] = grid[static_cast<size_t>(r) * w + c];
        distance_transform_1d(f, d, v, z);
        for (int r = 0; r < h; ++r)
            grid[static_cast<size_t>(r) * w + c] = d[r];
    }
    f.resize(w);
    d.resize(w);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c)
            f[c] = grid[static_cast<size_t>(r) * w + c];
        distance_transform_1d(f, d, v, z);
        for (int c = 0; c < w; ++c)
            grid[static_cast<size_t>(r) * w + c] = d[c];
    }
    return grid;
}

} // namespace

SignedDistanceField::SignedDistanceField(int width, int height, double resolution, std::vector<double> values)
    : width_(width), height_(height), resolution_(resolution), values_(std::move(values)) {
    if (values_.size() != static_cast<size_t>(width_) * height_)
        throw InputError("signed distance field size mismatch");
}

double SignedDistanceField::value(Vec2 p, Vec2* gradient) const {
    // Continuous cell coordinates with cell centers on integers.
    const double u = p.x() / resolution_ - 0.5;
    const double v = p.y() / resolution_ - 0.5;
    const int c0 = width_ > 1 ? std::clamp(static_cast<int>(std::floor(u)), 0, width_ - 2) : 0;
    const int r0 = height_ > 1 ? std::clamp(static_cast<int>(std::floor(v)), 0, height_ - 2) : 0;
    const int c1 = width_ > 1 ? c0 + 1 : c0;
    const int r1 = height_ > 1 ? r0 + 1 : r0;
    const double fx = width_ > 1 ? u - c0 : 0.0;
    const double fy = height_ > 1 ? v - r0 : 0.0;

    const double v00 = at(c0, r0);
    const double v10 = at(c1, r0);
    const double v01 = at(c0, r1);
    const double v11 = at(c1, r1);

    const double top = v00 + (v10 - v00) * fx;
    const double bottom = v01 + (v11 - v01) * fx;
    if (gradient) {
        const double du = (v10 - v00) * (1.0 - fy) + (v11 - v01) * fy;
        const double dv = bottom - top;
        *gradient = Vec2(du, dv) / resolution_;
    }
    return top + (bottom - top) * fy;
}

SignedDistanceField compute_sdf(const OccupancyGrid& grid) {
    if (grid.empty())
        throw InputError("cannot compute a signed distance field of an empty grid");
    // Pad by one cell on every side; the frame is the occupied world boundary.
    const int w = grid.width() + 2;
    const int h = grid.height() + 2;
    std::vector<std::uint8_t> occupied(static_cast<size_t>(w) * h, 1);
    std::vector<std::uint8_t> free(static_cast<size_t>(w) * h, 0);
    bool any_free = false;
    for (int r = 0; r < grid.height(); ++r)
        for (int c = 0; c < grid.width(); ++c) {
            const size_t i = static_cast<size_t>(r + 1) * w + (c + 1);
            const bool occ = grid.occupied(c, r);
            occupied[i] = occ ? 1 : 0;
            free[i] = occ ? 0 : 1;
            any_free = any_free || !occ;
        }
    const std::vector<double> to_occupied = squared_edt(occupied, w, h);
    const std::vector<double> to_free = any_free ? squared_edt(free, w, h) : std::vector<double>{};

    const double res = grid.resolution();
    const double depth_cap = std::hypot(grid.width(), grid.height()) * res;
    std::vector<double> values(static_cast<size_t>(grid.width()) * grid.height());
    for (int r = 0; r < grid.height(); ++r)
        for (int c = 0; c < grid.width(); ++c) {
            const size_t i = static_cast<size_t>(r + 1) * w + (c + 1);
            double value = 0.0;
            if (!grid.occupied(c, r))
                value = std::sqrt(to_occupied[i]) * res;
            else if (any_free)
                value = -(std::sqrt(to_free[i]) - 1.0) * res;
            else
                value = -depth_cap;
            values[grid.index(c, r)] = value;
        }
    return {grid.width(), grid.height(), res, std::move(values)};
}

} // namespace role_engine

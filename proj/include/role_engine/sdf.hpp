#pragma once

#include <vector>

#include "role_engine/grid.hpp"

namespace role_engine {

/// Signed Euclidean distance per cell center, in meters.
///
/// Free cells hold the distance to the nearest occupied cell center (cells outside
/// the grid count as occupied). Occupied cells hold -(distance to the nearest free
/// cell center - resolution), so obstacle cells touching free space read 0 and the
/// field is Lipschitz across the boundary.
class SignedDistanceField {
public:
    SignedDistanceField() = default;
    SignedDistanceField(int width, int height, double resolution, std::vector<double> values);

    int width() const { return width_; }
    int height() const { return height_; }
    double resolution() const { return resolution_; }
    double at(int col, int row) const { return values_[static_cast<size_t>(row) * width_ + col]; }
    const std::vector<double>& values() const { return values_; }

    /// Bilinear interpolation between cell centers, linearly extrapolated past the
    /// outer centers. `gradient` receives the exact derivative of the interpolant.
    double value(Vec2 p, Vec2* gradient = nullptr) const;

private:
    int width_ = 0;
    int height_ = 0;
    double resolution_ = 1.0;
    std::vector<double> values_;
};

SignedDistanceField compute_sdf(const OccupancyGrid& grid);

/// Time-indexed distance query used by obstacle factors. The static field ignores
/// the time index; conflict fields use it to align other agents' predicted states.
class DistanceField {
public:
    virtual ~DistanceField() = default;
    virtual double distance(size_t time_index, Vec2 p, Vec2* gradient) const = 0;
};

class StaticDistanceField final : public DistanceField {
public:
    explicit StaticDistanceField(const SignedDistanceField& sdf) : sdf_(&sdf) {}
    double distance(size_t, Vec2 p, Vec2* gradient) const override { return sdf_->value(p, gradient); }

private:
    const SignedDistanceField* sdf_;
};

} // namespace role_engine

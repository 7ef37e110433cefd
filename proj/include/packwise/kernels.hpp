#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "packwise/demand.hpp"

namespace packwise {

/// Row-major set of equal-length points.
class PointSet {
public:
    PointSet() = default;
    PointSet(std::size_t dim, std::vector<double> data);
    explicit PointSet(const std::vector<std::vector<double>>& rows);

    std::size_t size() const noexcept { return dim_ ? data_.size() / dim_ : 0; }
    std::size_t dim() const noexcept { return dim_; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
    std::span<double> row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }
    const std::vector<double>& data() const noexcept { return data_; }
    std::vector<std::vector<double>> rows() const;

private:
    std::size_t dim_ = 0;
    std::vector<double> data_;
};

double squared_distance(std::span<const double> a, std::span<const double> b);
double euclidean_distance(std::span<const double> a, std::span<const double> b);

/// Nearest centroid for every point, ties to the lowest centroid index.
/// Writes labels and the squared distance to the chosen centroid.
void assign_nearest(const PointSet& points, const PointSet& centroids, std::span<std::size_t> labels,
                    std::span<double> sq_dist, Exec exec = Exec::parallel);

/// Dense n x n Euclidean distance matrix, row-major, zero diagonal.
std::vector<double> pairwise_distances(const PointSet& points, Exec exec = Exec::parallel);

}  // namespace packwise

#include "packwise/kernels.hpp"

#include <cmath>
#include <limits>

#include "packwise/error.hpp"

namespace packwise {

PointSet::PointSet(std::size_t dim, std::vector<double> data) : dim_(dim), data_(std::move(data)) {
    if (dim_ == 0 && !data_.empty()) throw InvalidArgument("point set with zero dimension");
    if (dim_ && data_.size() % dim_ != 0) throw InvalidArgument("point data is not a whole number of rows");
}

PointSet::PointSet(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return;
    dim_ = rows[0].size();
    if (dim_ == 0) throw InvalidArgument("point set with zero dimension");
    data_.reserve(rows.size() * dim_);
    for (const auto& r : rows) {
        if (r.size() != dim_) throw InvalidArgument("points differ in length");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

std::vector<std::vector<double>> PointSet::rows() const {
    std::vector<std::vector<double>> out;
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) out.emplace_back(row(i).begin(), row(i).end());
    return out;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    return std::sqrt(squared_distance(a, b));
}

namespace {

inline void nearest_one(const PointSet& points, const PointSet& centroids, std::size_t i, std::size_t& label,
                        double& best) {
    best = std::numeric_limits<double>::infinity();
    label = 0;
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        const double d = squared_distance(points.row(i), centroids.row(c));
        if (d < best) {
            best = d;
            label = c;
        }
    }
}

}  // namespace

void assign_nearest(const PointSet& points, const PointSet& centroids, std::span<std::size_t> labels,
                    std::span<double> sq_dist, Exec exec) {
    if (centroids.size() == 0) throw InvalidArgument("assignment needs at least one centroid");
    if (points.dim() != centroids.dim()) throw InvalidArgument("points and centroids differ in dimension");
    const auto n = static_cast<std::ptrdiff_t>(points.size());
    if (exec == Exec::serial) {
        for (std::ptrdiff_t i = 0; i < n; ++i) nearest_one(points, centroids, i, labels[i], sq_dist[i]);
        return;
    }
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) nearest_one(points, centroids, i, labels[i], sq_dist[i]);
}

std::vector<double> pairwise_distances(const PointSet& points, Exec exec) {
    const std::size_t n = points.size();
    std::vector<double> dist(n * n, 0.0);
    const auto rows = static_cast<std::ptrdiff_t>(n);
    if (exec == Exec::serial) {
        for (std::ptrdiff_t i = 0; i < rows; ++i)
            for (std::size_t j = i + 1; j < n; ++j) dist[i * n + j] = dist[j * n + i] = euclidean_distance(points.row(i), points.row(j));
        return dist;
    }
    // each (i, j) pair is written by exactly one iteration
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t i = 0; i < rows; ++i)
        for (std::size_t j = i + 1; j < n; ++j) dist[i * n + j] = dist[j * n + i] = euclidean_distance(points.row(i), points.row(j));
    return dist;
}

}  // namespace packwise

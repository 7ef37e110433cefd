#pragma once

#include <span>
#include <string>
#include <vector>

#include "packwise/workload.hpp"

namespace packwise {

/// Resource demand of every service for one period.
///
/// `per_dim` is S x d row-major: per_dim(s, k) = D_s * N_s[k]. `values[s]` is
/// the scalar magnitude used as the clustering and matching pattern and is
/// always the sum of row s of per_dim, accumulated in dimension order.
class DemandVector {
public:
    DemandVector() = default;
    DemandVector(std::size_t services, std::size_t dimensions);
    /// Builds from a per-dimension matrix; values are derived from it.
    DemandVector(std::size_t services, std::size_t dimensions, std::vector<double> per_dim);

    std::size_t services() const noexcept { return values_.size(); }
    std::size_t dimensions() const noexcept { return dims_; }

    std::span<const double> values() const noexcept { return values_; }
    double value(std::size_t s) const { return values_[s]; }
    std::span<const double> per_dim(std::size_t s) const { return {per_dim_.data() + s * dims_, dims_}; }
    double at(std::size_t s, std::size_t k) const { return per_dim_[s * dims_ + k]; }
    const std::vector<double>& per_dim_flat() const noexcept { return per_dim_; }

    double total() const noexcept;
    bool is_zero() const noexcept;

    bool operator==(const DemandVector&) const = default;

private:
    std::size_t dims_ = 0;
    std::vector<double> values_;
    std::vector<double> per_dim_;
};

DemandVector demand_for_period(std::span<const std::int64_t> counts, const ServiceCatalog& catalog);

enum class Exec { serial, parallel };

/// One DemandVector per period, in period order.
std::vector<DemandVector> demand_series(const WorkloadTrace& trace, const ServiceCatalog& catalog,
                                        Exec exec = Exec::parallel);

/// Entrywise mean and entrywise max over a nonempty set of same-shape vectors.
DemandVector mean_demand(std::span<const DemandVector> members);
DemandVector max_demand(std::span<const DemandVector> members);

/// The scalar patterns of a series, in order.
std::vector<std::vector<double>> patterns_of(std::span<const DemandVector> series);

/// CSV of patterns, one row of S values at six significant digits.
std::string format_demand_csv(std::span<const DemandVector> series);

}  // namespace packwise
